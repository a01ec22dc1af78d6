"""Guided-filter cost aggregation.

Each disparity slice of the cost volume is smoothed with the kernel
induced by the guide image,

    L(i,j) = 1/|lam|^2 * sum_{l: i,j in lam_l} [1 + (W_i - d_l)(W_j - d_l)
                                                    / (phi_l^2 + xi)]

normalized by N_i = sum_j L(i,j). The production path is the standard
two-pass box-filter algorithm (per-window linear fit, then averaging of
the coefficients), which coincides with the explicit kernel sum at
pixels whose every covering window lies fully inside the image;
``kernel_weight`` keeps the explicit form around as the test oracle.
"""

from dataclasses import dataclass

import numpy as np

from .core import CostVolume, validate_image


@dataclass(frozen=True)
class GuidedFilterParams:
    radius: int = 4
    xi: float = 1e-4

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.xi <= 0:
            raise ValueError("xi must be > 0")


def _box_sum(img, radius):
    """Windowed sum over the window clipped to image bounds, via an
    integral image (O(1) per pixel)."""
    height, width = img.shape
    integral = np.zeros((height + 1, width + 1))
    np.cumsum(img, axis=0, out=integral[1:, 1:])
    np.cumsum(integral[1:, 1:], axis=1, out=integral[1:, 1:])

    y = np.arange(height)
    x = np.arange(width)
    y0 = np.maximum(y - radius, 0)
    y1 = np.minimum(y + radius, height - 1) + 1
    x0 = np.maximum(x - radius, 0)
    x1 = np.minimum(x + radius, width - 1) + 1
    return (
        integral[np.ix_(y1, x1)]
        - integral[np.ix_(y0, x1)]
        - integral[np.ix_(y1, x0)]
        + integral[np.ix_(y0, x0)]
    )


def window_counts(shape, radius):
    """Pixel count of the border-clipped window at every position."""
    return _box_sum(np.ones(shape), radius)


def box_mean(img, radius):
    """Mean over the (2r+1)^2 window, shrinking at the borders."""
    img = validate_image(img)
    return _box_sum(img, radius) / window_counts(img.shape, radius)


def kernel_weight(guide, i, j, params):
    """Explicit guided-filter kernel L(i,j); the slow oracle form.

    i and j are (row, col) pairs. Sums over every window center l whose
    clipped window contains both pixels; window statistics use the actual
    (clipped) pixels, the 1/|lam|^2 prefactor uses the full window size.
    """
    guide = validate_image(guide)
    height, width = guide.shape
    r = params.radius
    full = (2 * r + 1) ** 2
    iy, ix = i
    jy, jx = j

    total = 0.0
    for ly in range(max(iy - r, jy - r, 0), min(iy + r, jy + r, height - 1) + 1):
        for lx in range(max(ix - r, jx - r, 0), min(ix + r, jx + r, width - 1) + 1):
            win = guide[
                max(ly - r, 0) : min(ly + r, height - 1) + 1,
                max(lx - r, 0) : min(lx + r, width - 1) + 1,
            ]
            mean = win.mean()
            var = win.var()
            total += 1.0 + (guide[iy, ix] - mean) * (guide[jy, jx] - mean) / (
                var + params.xi
            )
    return total / full**2


def kernel_row_sum(guide, i, params):
    """Normalizer N_i = sum_j L(i,j) (exactly 1 for interior pixels)."""
    guide = validate_image(guide)
    height, width = guide.shape
    r = params.radius
    iy, ix = i
    total = 0.0
    for jy in range(max(iy - 2 * r, 0), min(iy + 2 * r, height - 1) + 1):
        for jx in range(max(ix - 2 * r, 0), min(ix + 2 * r, width - 1) + 1):
            total += kernel_weight(guide, i, (jy, jx), params)
    return total


def guided_filter(guide, input, params):
    """Fast guided filter: per-window linear fit a_l*W + b_l, coefficients
    averaged over the windows covering each pixel."""
    guide = validate_image(guide)
    p = validate_image(input)
    if guide.shape != p.shape:
        raise ValueError(f"shapes differ: {guide.shape} vs {p.shape}")
    r = params.radius

    counts = window_counts(guide.shape, r)
    mean_w = _box_sum(guide, r) / counts
    mean_p = _box_sum(p, r) / counts
    mean_wp = _box_sum(guide * p, r) / counts
    mean_ww = _box_sum(guide * guide, r) / counts

    cov_wp = mean_wp - mean_w * mean_p
    var_w = mean_ww - mean_w * mean_w

    a = cov_wp / (var_w + params.xi)
    b = mean_p - a * mean_w

    mean_a = _box_sum(a, r) / counts
    mean_b = _box_sum(b, r) / counts
    return mean_a * guide + mean_b


def aggregate_cost(guide, volume, params):
    """Guided-filter every disparity slice with the same guide; tiny
    negative undershoots are clamped to 0."""
    guide = validate_image(guide)
    if guide.shape != (volume.height, volume.width):
        raise ValueError(
            f"guide shape {guide.shape} does not match volume "
            f"({volume.height}, {volume.width})"
        )
    out = np.empty_like(volume.data)
    for k in range(volume.n_disparities):
        out[:, :, k] = guided_filter(guide, volume.data[:, :, k], params)
    np.maximum(out, 0.0, out=out)
    return CostVolume(d_min=volume.d_min, d_max=volume.d_max, data=out)
