"""End-to-end orchestration of the multi-scale matching pipeline.

Per view: 4-level WLS decomposition, per-scale fused matching cost and
guided-filter aggregation, cross-scale fusion, then winner-take-all on
the finest fused volume. The right-view disparity for the consistency
check reuses the same code path on horizontally mirrored images.

The four per-scale branches are pure and may run on a thread pool
(MSFUSE_THREADS, 0 = auto); results are gathered by scale index, so the
output is identical to the sequential schedule.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import aggregate, cost, disparity, fusion, wls
from .core import INVALID_DISPARITY


def thread_count():
    """Branch parallelism from MSFUSE_THREADS (0 or unset = auto)."""
    raw = os.environ.get("MSFUSE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"MSFUSE_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("MSFUSE_THREADS must be >= 0")
    if n == 0:
        return min(4, os.cpu_count() or 1)
    return n


@dataclass
class ScaleOutputs:
    """Per-scale intermediates kept for dumping/inspection."""

    pyramid_left: list
    pyramid_right: list
    aggregated: list  # 4 CostVolumes


def fused_volume(left, right, wls_params, cost_params, gf_params, fusion_params,
                 threads=None, collect=False):
    """Fused finest-scale cost volume for the left view.

    Returns (volume, ScaleOutputs | None).
    """
    pyr_l = wls.decompose(left, wls_params)
    pyr_r = wls.decompose(right, wls_params)

    def branch(s):
        raw = cost.match_cost(pyr_l[s], pyr_r[s], cost_params)
        return aggregate.aggregate_cost(pyr_l[s], raw, gf_params)

    n = threads if threads is not None else thread_count()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            aggregated = list(pool.map(branch, range(4)))
    else:
        aggregated = [branch(s) for s in range(4)]

    fused = fusion.fuse_scales(aggregated, fusion_params)[0]
    extras = ScaleOutputs(pyr_l, pyr_r, aggregated) if collect else None
    return fused, extras


def left_disparity(left, right, wls_params, cost_params, gf_params,
                   fusion_params, disp_params, threads=None, collect=False):
    """Disparity of the left view before any consistency filtering."""
    volume, extras = fused_volume(
        left, right, wls_params, cost_params, gf_params, fusion_params,
        threads=threads, collect=collect,
    )
    d = disparity.wta(volume)
    if disp_params.subpixel:
        d = disparity.subpixel_refine(volume, d)
    return d, extras


def run(left, right, config, threads=None, collect=False):
    """Full pipeline: left disparity, mirrored right disparity, left-right
    consistency and invalid fill.

    Returns (disparity_map, validity_mask, ScaleOutputs | None).
    """
    wls_params = config.wls_params()
    cost_params = config.cost_params()
    gf_params = config.guided_filter_params()
    fusion_params = config.fusion_params()
    disp_params = config.disparity_params()

    d_left, extras = left_disparity(
        left, right, wls_params, cost_params, gf_params, fusion_params,
        disp_params, threads=threads, collect=collect,
    )

    # Right-view disparity by mirroring: running the left pipeline on the
    # flipped pair is equivalent to swapping the camera roles.
    d_right_flipped, _ = left_disparity(
        np.fliplr(right), np.fliplr(left), wls_params, cost_params, gf_params,
        fusion_params, disp_params, threads=threads,
    )
    d_right = np.fliplr(d_right_flipped)

    d = disparity.lr_consistency(d_left, d_right, disp_params.lr_threshold)
    valid = d != INVALID_DISPARITY
    if disp_params.fill_invalid:
        d = disparity.fill_invalid(d)
    return d, valid, extras
