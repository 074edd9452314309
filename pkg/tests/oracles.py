"""Independent brute-force oracles used by the geometry and acceptance tests.

These deliberately avoid the closed-form routes in spatialqa.geometry:
box-to-box distance is found by dense point sampling over both boxes with
multi-resolution refinement, and quadrant angles come from an exhaustive
sweep over unit directions rather than atan2.
"""

from __future__ import annotations

import numpy as np

_SWEEP = np.arange(0, 36000) * (np.pi / 18000.0)  # 0.01 degree resolution
_SWEEP_DIRS = np.stack([np.cos(_SWEEP), np.sin(_SWEEP)], axis=1)


def _lattice(lo: np.ndarray, hi: np.ndarray, n: int) -> np.ndarray:
    axes = [np.linspace(lo[i], hi[i], n) for i in range(3)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)


def brute_force_box_distance(a_lo, a_hi, b_lo, b_hi, rounds: int = 14) -> float:
    """Min distance between two boxes by sampling dense point lattices on both
    and zooming in around the best pair. ||p - q|| is jointly convex over the
    product of boxes, so shrinking the windows around the incumbent converges.
    """
    a_lo = np.asarray(a_lo, dtype=float)
    a_hi = np.asarray(a_hi, dtype=float)
    b_lo = np.asarray(b_lo, dtype=float)
    b_hi = np.asarray(b_hi, dtype=float)
    wa_lo, wa_hi = a_lo.copy(), a_hi.copy()
    wb_lo, wb_hi = b_lo.copy(), b_hi.copy()
    best = np.inf
    n = 7
    for _ in range(rounds):
        pa = _lattice(wa_lo, wa_hi, n)
        pb = _lattice(wb_lo, wb_hi, n)
        d2 = ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2)
        k = int(np.argmin(d2))
        i, j = divmod(k, pb.shape[0])
        best = min(best, float(np.sqrt(d2[i, j])))
        cell_a = (wa_hi - wa_lo) / (n - 1)
        cell_b = (wb_hi - wb_lo) / (n - 1)
        wa_lo = np.maximum(a_lo, pa[i] - cell_a)
        wa_hi = np.minimum(a_hi, pa[i] + cell_a)
        wb_lo = np.maximum(b_lo, pb[j] - cell_b)
        wb_hi = np.minimum(b_hi, pb[j] + cell_b)
    return best


def sweep_angle_deg(vec: np.ndarray) -> float:
    """Direction angle of a 2-vector in degrees, found by exhaustively
    scanning 36000 unit directions for the best match."""
    unit = np.asarray(vec, dtype=float)
    unit = unit / np.linalg.norm(unit)
    k = int(np.argmax(_SWEEP_DIRS @ unit))
    return k * 0.01


def sweep_quadrant(vec_a, vec_b) -> tuple[str | None, float]:
    """(label, axis_distance_deg) for the querying direction vec_b relative to
    facing vec_a, via the angle sweep. Label is None exactly on an axis."""
    phi = (sweep_angle_deg(vec_b) - sweep_angle_deg(vec_a)) % 360.0
    if phi > 180.0:
        phi -= 360.0
    theta = abs(phi)
    axis_distance = min(theta, 180.0 - theta, abs(theta - 90.0))
    if 0.0 < phi < 90.0:
        label = "front-left"
    elif 90.0 < phi < 180.0:
        label = "back-left"
    elif -90.0 < phi < 0.0:
        label = "front-right"
    elif -180.0 < phi < -90.0:
        label = "back-right"
    else:
        label = None
    return label, axis_distance


def loop_numerical_reward(pred: float, gold: float, thresholds) -> float:
    """Reference graduated relative accuracy: a literal loop over thresholds."""
    if gold == 0.0:
        return 1.0 if pred == 0.0 else 0.0
    count = 0
    for tau in thresholds:
        if abs(pred - gold) / abs(gold) < tau:
            count += 1
    return count / len(thresholds)
