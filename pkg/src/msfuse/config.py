"""Flat `key = value` pipeline configuration.

Every tunable has a documented default; unknown keys are fatal (fail-fast
against typos). The canonical text form lists every key in a fixed order,
so parse -> print -> parse is a fixed point.
"""

from .aggregate import GuidedFilterParams
from .cost import CostParams
from .disparity import DisparityParams
from .fusion import FusionParams
from .reconstruct import CameraRig
from .wls import WlsParams


class ConfigError(ValueError):
    """Unknown key, bad syntax or an untypeable value."""


def _parse_bool(text):
    if text in ("true", "1", "yes", "on"):
        return True
    if text in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


# key -> (type, default); rig.cx / rig.cy < 0 mean "image center"
_SCHEMA = {
    "wls.eta": (float, 1.0),
    "wls.alpha": (float, 1.2),
    "wls.eps_w": (float, 1e-4),
    "wls.solver_tol": (float, 1e-8),
    "wls.max_iter": (int, 10000),
    "cost.d_min": (int, 0),
    "cost.d_max": (int, 16),
    "cost.w_ad": (float, 0.3),
    "cost.w_grad": (float, 0.3),
    "cost.w_cen": (float, 0.4),
    "cost.tau_ad": (float, 0.12),
    "cost.tau_grad": (float, 0.08),
    "cost.census_radius": (int, 2),
    "gf.radius": (int, 4),
    "gf.xi": (float, 1e-4),
    "fusion.zeta": (float, 0.3),
    "disp.lr_threshold": (float, 1.0),
    "disp.subpixel": (bool, True),
    "disp.fill_invalid": (bool, True),
    "rig.focal_px": (float, 525.0),
    "rig.baseline_m": (float, 0.1),
    "rig.cx": (float, -1.0),
    "rig.cy": (float, -1.0),
}


class PipelineConfig:
    """All pipeline tunables, keyed by flat names (e.g. 'wls.eta')."""

    def __init__(self, overrides=None):
        self.values = {key: default for key, (_, default) in _SCHEMA.items()}
        for key, value in (overrides or {}).items():
            self.set(key, value)

    def set(self, key, value):
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        typ, _ = _SCHEMA[key]
        if isinstance(value, str):
            try:
                value = _parse_bool(value) if typ is bool else typ(value)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        self.values[key] = typ(value)

    def __getitem__(self, key):
        return self.values[key]

    def __eq__(self, other):
        return isinstance(other, PipelineConfig) and self.values == other.values

    @classmethod
    def parse(cls, text):
        """Parse `key = value` lines; '#' starts a comment."""
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            cfg.set(key, value)
        return cfg

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.parse(f.read())

    def canonical(self):
        """Canonical text form: every key, schema order, round-trippable."""
        lines = []
        for key, (typ, _) in _SCHEMA.items():
            value = self.values[key]
            if typ is bool:
                text = "true" if value else "false"
            else:
                text = repr(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    # typed parameter bundles for the pipeline modules

    def wls_params(self):
        return WlsParams(
            eta=self["wls.eta"],
            alpha=self["wls.alpha"],
            eps_w=self["wls.eps_w"],
            solver_tol=self["wls.solver_tol"],
            max_iter=self["wls.max_iter"],
        )

    def cost_params(self):
        return CostParams(
            d_min=self["cost.d_min"],
            d_max=self["cost.d_max"],
            w_ad=self["cost.w_ad"],
            w_grad=self["cost.w_grad"],
            w_cen=self["cost.w_cen"],
            tau_ad=self["cost.tau_ad"],
            tau_grad=self["cost.tau_grad"],
            census_radius=self["cost.census_radius"],
        )

    def guided_filter_params(self):
        return GuidedFilterParams(radius=self["gf.radius"], xi=self["gf.xi"])

    def fusion_params(self):
        return FusionParams(zeta=self["fusion.zeta"])

    def disparity_params(self):
        return DisparityParams(
            lr_threshold=self["disp.lr_threshold"],
            subpixel=self["disp.subpixel"],
            fill_invalid=self["disp.fill_invalid"],
        )

    def camera_rig(self, image_shape):
        """CameraRig for a given image; negative cx/cy mean image center."""
        height, width = image_shape
        cx = self["rig.cx"] if self["rig.cx"] >= 0 else (width - 1) / 2.0
        cy = self["rig.cy"] if self["rig.cy"] >= 0 else (height - 1) / 2.0
        if cx > 10 * width or cy > 10 * height:
            raise ConfigError("principal point implausibly far outside the image")
        return CameraRig(
            focal_px=self["rig.focal_px"],
            baseline_m=self["rig.baseline_m"],
            cx=cx,
            cy=cy,
        )
