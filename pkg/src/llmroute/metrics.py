"""Front-quality indicators: inverted generational distance and spread.

Both objectives are min-max normalized by the reference front's ranges
before any distance is taken; cost (currency) and accuracy (fraction) are
not commensurable, and a degenerate reference range zeroes that coordinate.
Absolute values are therefore comparable only within this package.
"""

from __future__ import annotations

import numpy as np

from .core import ObjectivePoint
from .errors import ValidationError


def _to_array(points) -> np.ndarray:
    if hasattr(points, "as_array"):
        return points.as_array()
    if hasattr(points, "objective_array"):
        return points.objective_array()
    out = np.array(
        [[p.cost, p.accuracy] if isinstance(p, ObjectivePoint) else list(p) for p in points],
        dtype=np.float64,
    )
    return out.reshape(len(points), 2) if len(points) else out.reshape(0, 2)


def _normalize(obtained: np.ndarray, reference: np.ndarray):
    lo = reference.min(axis=0)
    span = reference.max(axis=0) - lo
    scale = np.where(span > 0, span, 1.0)
    obt = (obtained - lo) / scale
    ref = (reference - lo) / scale
    dead = span <= 0
    if dead.any():
        obt[:, dead] = 0.0
        ref[:, dead] = 0.0
    return obt, ref


def igd(obtained, reference) -> float:
    """Mean (root-sum-square form) distance from each reference point to its
    nearest obtained point; 0 means the reference front is fully covered."""
    obt = _to_array(obtained)
    ref = _to_array(reference)
    if obt.shape[0] == 0 or ref.shape[0] == 0:
        raise ValidationError("igd requires non-empty obtained and reference sets")
    obt_n, ref_n = _normalize(obt, ref)
    d2 = ((ref_n[:, None, :] - obt_n[None, :, :]) ** 2).sum(axis=2)
    nearest_sq = d2.min(axis=1)
    return float(np.sqrt(nearest_sq.sum()) / ref.shape[0])


def delta_spread(obtained, reference) -> float:
    """Spacing non-uniformity plus penalties for missing the reference extremes."""
    obt = _to_array(obtained)
    ref = _to_array(reference)
    if obt.shape[0] < 2:
        raise ValidationError("delta_spread requires at least two obtained points")
    if ref.shape[0] == 0:
        raise ValidationError("delta_spread requires a non-empty reference front")
    obt_n, ref_n = _normalize(obt, ref)

    order = np.lexsort((obt_n[:, 1], obt_n[:, 0]))
    pts = obt_n[order]
    gaps = np.sqrt(((pts[1:] - pts[:-1]) ** 2).sum(axis=1))
    mean_gap = float(gaps.mean())

    ref_low = ref_n[int(np.argmin(ref_n[:, 0]))]
    ref_high = ref_n[int(np.argmax(ref_n[:, 0]))]
    d_f = float(np.sqrt(((pts - ref_low) ** 2).sum(axis=1)).min())
    d_l = float(np.sqrt(((pts - ref_high) ** 2).sum(axis=1)).min())

    numerator = d_f + d_l + float(np.abs(gaps - mean_gap).sum())
    denominator = d_f + d_l + (obt.shape[0] - 1) * mean_gap
    if denominator == 0.0:
        return 0.0  # all obtained points coincide with both reference extremes
    return float(numerator / denominator)
