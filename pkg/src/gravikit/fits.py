"""Least-squares fits in transformed coordinates (power laws, log laws)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PoorFit


@dataclass
class FitResult:
    slope: float
    intercept: float
    stderr: float
    r_squared: float
    window: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def linear_fit(x, y) -> FitResult:
    """Ordinary least squares y = slope * x + intercept with the slope's standard error."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.size < 2:
        raise PoorFit("need at least two samples")
    M = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    resid = y - M @ coef
    dof = max(x.size - 2, 1)
    s2 = float(resid @ resid) / dof
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = float(np.sqrt(s2 / sxx)) if sxx > 0 else float("inf")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(coef[0]), float(coef[1]), stderr, r2, x.tolist())


def decay_fit(abscissa, values, model: str = "power", min_r_squared: float | None = None) -> FitResult:
    """Fit a decay law to samples.

    power:            log|v| = slope * log(x) + intercept
    log:              v = slope * log(x) + intercept
    linear_plus_exp:  log|v| = slope * x + intercept (slope < 0 means exponential decay)
    """
    x = np.asarray(abscissa, float)
    v = np.asarray(values, float)
    if x.size < 4:
        raise PoorFit("decay fit needs at least 4 samples")
    if model in ("power", "log") and np.max(x) < 10 * np.min(x) * (1 - 1e-12):
        raise PoorFit("power and log fits need samples spanning a decade")
    if model == "power":
        if np.any(v == 0):
            raise PoorFit("zero sample in a power-law fit")
        res = linear_fit(np.log(x), np.log(np.abs(v)))
    elif model == "log":
        res = linear_fit(np.log(x), v)
    elif model == "linear_plus_exp":
        if np.any(v == 0):
            raise PoorFit("zero sample in an exponential fit")
        res = linear_fit(x, np.log(np.abs(v)))
    else:
        raise ValueError(f"unknown decay model {model!r}")
    res.window = x.tolist()
    if min_r_squared is not None and res.r_squared < min_r_squared:
        raise PoorFit(f"fit quality r^2 = {res.r_squared:.4f} below {min_r_squared}")
    return res
