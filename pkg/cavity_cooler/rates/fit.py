"""
Rate extraction from a recorded trajectory.

``mean`` fits ⟨n⟩(t) = n_st + (n₀ − n_st)e^{−Wt} and derives A₊ = n_st·W,
A₋ = A₊ + W. ``populations`` fits all p_n(t) against the exact solution of
the rate equation with A± ≥ 0. ``auto`` uses the mean fit when the window
covers at least half of the decay and the population fit otherwise.

On a truncated ladder ⟨n⟩(t) relaxes even when the point heats, so the
bounded population fit decides the sign first: heating trajectories are
reported from it with negative w in every mode.
"""

import logging
import math

import numpy as np
from scipy.linalg import expm
from scipy.optimize import curve_fit, least_squares

from cavity_cooler.errors import FitError, FitWindowError
from cavity_cooler.rates.base_rates import METHOD_FIT, RateResult
from cavity_cooler.rates.rate_equation import rate_generator

logger = logging.getLogger(__name__)

FIT_MODES = ("mean", "populations", "auto")
FLAT_TOL = 1e-9
MIN_SAMPLES = 5
MIN_DECAY_FRACTION = 0.5


def _exp_relaxation(t, w, n_st, n0):
    return n_st + (n0 - n_st) * np.exp(-w * t)


def _initial_guess(t, y):
    k = (len(y) - 1) // 2
    span = t[-1] - t[0]
    d1 = y[k] - y[0]
    d2 = y[2 * k] - y[k]
    if d1 != 0:
        r = d2 / d1
        if 0 < r and r != 1 and t[k] > 0:
            w = -math.log(r) / t[k]
            return w, y[0] + d1 / (1 - r), y[0]
    return 1.0 / span, y[-1], y[0]


def _fit_mean(t, y, n_trap):
    top = n_trap - 1
    w0, n_st0, n00 = _initial_guess(t, y)
    p0 = (max(w0, 1e-12), min(max(n_st0, 0.0), top), n00)
    try:
        popt, _ = curve_fit(
            _exp_relaxation,
            t,
            y,
            p0=p0,
            bounds=([0.0, 0.0, -np.inf], [np.inf, top, np.inf]),
            max_nfev=20000,
        )
    except (RuntimeError, ValueError) as e:
        raise FitError(f"exponential fit of <n>(t) did not converge: {e}") from e
    if not np.all(np.isfinite(popt)):
        raise FitError("exponential fit of <n>(t) returned non-finite parameters")
    w, n_st, _ = popt
    if n_st >= top * (1.0 - 1e-6):
        raise FitError(f"<n>(t) relaxes to the top of the truncated ladder (n_st = {n_st:.4g})")
    if w > 0 and 1.0 - math.exp(-w * (t[-1] - t[0])) < MIN_DECAY_FRACTION:
        raise FitWindowError(
            f"window covers {1.0 - math.exp(-w * (t[-1] - t[0])):.1%} of the decay, need {MIN_DECAY_FRACTION:.0%}"
        )
    residual = float(np.sqrt(np.mean((_exp_relaxation(t, *popt) - y) ** 2)))
    a_plus = w * n_st
    return RateResult.from_rates(a_plus, a_plus + w, METHOD_FIT, fit_residual=residual)


def _evolve(x, p0, dts, uniform):
    g = rate_generator(x[0], x[1], p0.size)
    out = np.empty((dts.size + 1, p0.size))
    out[0] = p0
    step = expm(g * dts[0]) if uniform else None
    for i, dt in enumerate(dts):
        out[i + 1] = (step if uniform else expm(g * dt)) @ out[i]
    return out


def _linear_seed(t, populations):
    n_trap = populations.shape[1]
    rates = np.gradient(populations, t, axis=0)
    heat = populations @ rate_generator(1.0, 0.0, n_trap).T
    cool = populations @ rate_generator(0.0, 1.0, n_trap).T
    design = np.column_stack([heat.ravel(), cool.ravel()])
    x, *_ = np.linalg.lstsq(design, rates.ravel(), rcond=None)
    return np.maximum(x, 1e-15)


def _fit_populations(t, populations):
    dts = np.diff(t)
    uniform = np.allclose(dts, dts[0], rtol=1e-9, atol=0)
    p0 = populations[0]
    seed = _linear_seed(t, populations)

    def residuals(x):
        return (_evolve(x, p0, dts, uniform) - populations).ravel()

    fit = least_squares(
        residuals,
        seed,
        bounds=(0.0, np.inf),
        x_scale=np.maximum(seed, 1e-12),
        xtol=1e-12,
        ftol=1e-12,
        max_nfev=500,
    )
    if fit.status <= 0:
        raise FitError(f"population fit did not converge: {fit.message}")
    residual = float(np.sqrt(np.mean(fit.fun**2)))
    return RateResult.from_rates(fit.x[0], fit.x[1], METHOD_FIT, fit_residual=residual)


def fit_rates(traj, mode="mean", t_min=0.0) -> RateResult:
    if mode not in FIT_MODES:
        raise ValueError(f"unknown fit mode {mode!r}, available: {FIT_MODES}")
    window = traj.window(t_min)
    if window.times.size < MIN_SAMPLES:
        raise FitError(f"only {window.times.size} samples after t = {t_min:.4g}")
    t = window.times - window.times[0]

    if np.ptp(window.populations, axis=0).max() <= FLAT_TOL:
        return RateResult(a_plus=0.0, a_minus=0.0, w=0.0, n_st=math.nan, method=METHOD_FIT, fit_residual=0.0)

    if mode == "populations":
        return _fit_populations(t, window.populations).check()

    try:
        reference = _fit_populations(t, window.populations)
    except FitError as e:
        if mode == "auto":
            raise
        logger.info(f"no population fit to confirm the sign: {e}")
        reference = None
    if reference is not None and not reference.cooling:
        logger.info(f"heating trajectory, w = {reference.w:.4g} from the population fit")
        return reference.check()

    try:
        result = _fit_mean(t, window.mean_n, window.n_trap)
    except FitError as e:
        if mode == "mean":
            raise
        logger.info(f"falling back to the population fit: {e}")
        result = reference
    return result.check()
