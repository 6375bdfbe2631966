"""Power-law growth fits value ~ C (1 + t)^alpha."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_POINTS = 8


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class GrowthFit:
    alpha: float
    C: float
    window: tuple[float, float]
    residual: float
    points: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "C": self.C,
            "window": list(self.window),
            "residual": self.residual,
            "points": self.points,
        }


def fit_growth(t, values, window: tuple[float, float] | None = None) -> GrowthFit:
    """Least-squares fit of log(value) = log C + alpha log(1 + t) over ``window``.

    ``residual`` is the RMS misfit in log space.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise FitError("t and values differ in length")
    if window is None:
        if t.size == 0:
            raise FitError("empty series")
        lo, hi = float(np.min(t)), float(np.max(t))
    else:
        lo, hi = float(window[0]), float(window[1])
    sel = (t >= lo) & (t <= hi)
    t, v = t[sel], v[sel]
    if t.size < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} points in window [{lo}, {hi}], got {t.size}")
    if np.any(v <= 0) or np.any(t <= -1):
        raise FitError("values must be positive and t > -1")
    x = np.log1p(t)
    y = np.log(v)
    A = np.column_stack([np.ones_like(x), x])
    (logC, alpha), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - logC - alpha * x) ** 2)))
    return GrowthFit(float(alpha), float(np.exp(logC)), (lo, hi), resid, int(t.size))
