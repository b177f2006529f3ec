"""epsilon sweeps of the glued-triple orthonormality error and of F(0)."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ..connection import GaugeChart
from ..errors import ConfigError, InsufficientSweepPoints
from ..fits import FitResult, linear_fit
from ..gh_triple import gram, model_data, model_volume
from ..gluing import GluingParams, assembled_triple
from .algebra import f0_from_triple
from .weights import WeightParams, default_R2, global_weights

MIN_SWEEP_POINTS = 5


def worker_count() -> int:
    value = os.environ.get("GRAVIKIT_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ConfigError(f"GRAVIKIT_THREADS must be an integer, got {value!r}") from None
    return min(8, os.cpu_count() or 1)


def annulus_samples(n=1000):
    """Deterministic Halton points (u_r, cos theta, phi) in the unit annulus
    coordinates: u_r in (0, 1) maps to r = R0 (R1/R0)^u_r."""
    h = qmc.Halton(d=3, scramble=False).random(n + 1)[1:]
    u = 1e-3 + (1 - 2e-3) * h[:, 0]
    ct = 2 * h[:, 1] - 1
    phi = 2 * math.pi * h[:, 2]
    return u, ct, phi


def annulus_points(data, s, params: GluingParams, n=1000):
    """Points of the gluing annulus about s, split by hemisphere chart."""
    s = data.singularity(s)
    u, ct, phi = annulus_samples(n)
    r = params.R0 * (params.R1 / params.R0) ** u
    n_ax = data.lattice.transverse_axis
    e1 = np.eye(3)[int(np.argmin(np.abs(n_ax)))]
    e1 = e1 - (e1 @ n_ax) * n_ax
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n_ax, e1)
    st = np.sqrt(1 - ct**2)
    dirs = (st * np.cos(phi))[:, None] * e1 + (st * np.sin(phi))[:, None] * e2 + ct[:, None] * n_ax
    pts = s.center + r[:, None] * dirs
    out = []
    R = data.model_radius(s)
    for hemi, mask in (("north", ct >= 0), ("south", ct < 0)):
        chart = GaugeChart(s.center, hemi, n_ax, "singular", s, R)
        out.append((chart, pts[mask]))
    return out


@dataclass
class SweepRecord:
    epsilon: float
    max_gram_error: float = math.nan
    f0_sup: float = math.nan
    per_singularity: dict = field(default_factory=dict)


def _gram_error_at(data, epsilon, n, singularities):
    params = GluingParams(epsilon)
    de = data.with_epsilon(epsilon)
    per = {}
    for s in singularities:
        worst = 0.0
        m = model_data(de, s)
        for chart, pts in annulus_points(de, s, params, n):
            T = assembled_triple(de, params, chart, pts)
            Q = gram(T, model_volume(m, epsilon, pts))
            worst = max(worst, float(np.max(np.abs(Q - np.eye(3)))))
        per[s.name] = worst
    return SweepRecord(epsilon, max_gram_error=max(per.values()), per_singularity=per)


def _f0_sup_at(data, epsilon, n, singularities, delta, weights):
    params = GluingParams(epsilon)
    de = data.with_epsilon(epsilon)
    R2 = default_R2(de) if weights.R2 is None else weights.R2
    if R2 * 1.0 < params.R1:
        raise ConfigError(f"model-annulus weight radius R2 = {R2:.3g} must exceed R1 = {params.R1:.3g}")
    per = {}
    for s in singularities:
        worst = 0.0
        for chart, pts in annulus_points(de, s, params, n):
            T = assembled_triple(de, params, chart, pts)
            om, rho, _ = global_weights(de, params, pts, weights)
            u = f0_from_triple(T, om)
            val = np.max(np.abs(u), axis=(-1, -2)) * np.exp(-delta * rho)
            worst = max(worst, float(np.max(val)))
        per[s.name] = worst
    return SweepRecord(epsilon, f0_sup=max(per.values()), per_singularity=per)


def _check(epsilons):
    eps = np.asarray(sorted(float(e) for e in epsilons))
    if eps.size < MIN_SWEEP_POINTS:
        raise InsufficientSweepPoints(f"need at least {MIN_SWEEP_POINTS} epsilon values, got {eps.size}")
    if np.any(eps <= 0):
        raise ConfigError("epsilon values must be positive")
    return eps


def _run(fn, eps, workers):
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        return [fn(e) for e in eps]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, eps))


def _fit(eps, values, records):
    fit = linear_fit(np.log(eps), np.log(values))
    fit.window = [float(e) for e in eps]
    fit.extra["records"] = records
    running = []
    for k in range(len(eps)):
        if k < 1:
            running.append(math.nan)
        else:
            running.append(linear_fit(np.log(eps[: k + 1]), np.log(values[: k + 1])).slope)
    fit.extra["running_slope"] = running
    return fit


def gram_error_sweep(data, epsilons, n_samples=1000, singularities=None, workers=None) -> FitResult:
    """log-log slope of max over annulus samples of |gram(assembled, Vol^model) - Id|_max."""
    eps = _check(epsilons)
    sings = data.singularities if singularities is None else [data.singularity(s) for s in singularities]
    data.alphas  # fill the cache before threads start
    records = _run(lambda e: _gram_error_at(data, e, n_samples, sings), eps, workers)
    return _fit(eps, np.array([r.max_gram_error for r in records]), records)


def f0_sweep(data, epsilons, n_samples=1000, singularities=None, delta=0.0,
             weights: WeightParams = WeightParams(), workers=None) -> FitResult:
    """log-log slope of sup over annuli of |F(0)| e^(-delta rho)."""
    eps = _check(epsilons)
    sings = data.singularities if singularities is None else [data.singularity(s) for s in singularities]
    data.alphas
    records = _run(lambda e: _f0_sup_at(data, e, n_samples, sings, delta, weights), eps, workers)
    return _fit(eps, np.array([r.f0_sup for r in records]), records)
