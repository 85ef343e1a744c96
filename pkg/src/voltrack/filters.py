"""One-step state machines for the volatility estimators.

Three recursions share the one-step-prediction discipline (the residual
at step i compares the observation X_i with the estimate built from
observations strictly before i):

* the pure order-k tracking filter: level plus k pseudo-derivatives,
  each corrected by its scheduled gain times the innovation;
* its extension with damping coefficients a_1..a_{k+1} that relax the
  state toward a long-run level K (the k=0 and k=1 instances are the
  one- and two-derivative level filters used in the benchmarks);
* the classical GARCH(p, q) recursion fitted by least squares.

States are immutable values; stepping returns a fresh state, so runs
over different parameter sets can proceed in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .gains import MAX_ORDER, GainSchedule, gain_schedule

__all__ = [
    "FilterState",
    "ExtendedParams",
    "GarchParams",
    "TrackResult",
    "init_state",
    "step_adaptive",
    "step_garch",
    "run",
]

# Sum(g) + Sum(a) may sit exactly on 1: the level filter with a_1 = 0 maps
# onto a GARCH(1,1) whose coefficients add up to one.  Strict stationarity
# is enforced where parameters are fitted, not here.
_GARCH_SUM_SLACK = 1e-12


@dataclass(frozen=True)
class FilterState:
    """Current level estimate plus k pseudo-derivative estimates."""

    v_hat: float
    derivatives: tuple[float, ...] = ()
    step_index: int = 0

    def __post_init__(self):
        if not math.isfinite(self.v_hat):
            raise ValueError("v_hat must be finite")
        if not all(math.isfinite(d) for d in self.derivatives):
            raise ValueError("derivative estimates must be finite")


@dataclass(frozen=True)
class ExtendedParams:
    """Parameters of the order-k filter with relaxation toward a level K.

    a_coeffs has length k+1: a_coeffs[0] damps the highest
    pseudo-derivative, the trailing entry couples the level estimate to
    k_level (for k=0 the single entry plays both roles).  All-zero
    a_coeffs with k_level=0 give the pure tracking filter.  The
    coefficients must keep x^(k+1) + a_1 x^k + ... + a_{k+1} free of
    roots in the open right half-plane.
    """

    k: int
    theta: float
    a_coeffs: tuple[float, ...]
    k_level: float = 0.0

    def __post_init__(self):
        if self.k < 0 or self.k > MAX_ORDER:
            raise ValueError(f"smoothness order k must be in 0..{MAX_ORDER}")
        if not (math.isfinite(self.theta) and self.theta > 0.0):
            raise ValueError(f"theta must be positive and finite, got {self.theta}")
        if len(self.a_coeffs) != self.k + 1:
            raise ValueError(
                f"a_coeffs must have length k+1={self.k + 1}, got {len(self.a_coeffs)}"
            )
        if not all(math.isfinite(a) and a >= 0.0 for a in self.a_coeffs):
            raise ValueError("a_coeffs must be finite and non-negative")
        if not math.isfinite(self.k_level):
            raise ValueError("k_level must be finite")
        if any(a > 0.0 for a in self.a_coeffs):
            roots = np.roots([1.0, *self.a_coeffs])
            scale = max(1.0, float(np.max(np.abs(roots))))
            if np.any(roots.real > 1e-9 * scale):
                raise ValueError(
                    "a_coeffs must give a relaxation polynomial with no roots "
                    "in the right half-plane"
                )


@dataclass(frozen=True)
class GarchParams:
    """GARCH(p, q) recursion coefficients."""

    p: int
    q: int
    k_const: float
    g_coeffs: tuple[float, ...]
    a_coeffs: tuple[float, ...]

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be at least 1")
        if len(self.g_coeffs) != self.p:
            raise ValueError(f"g_coeffs must have length p={self.p}")
        if len(self.a_coeffs) != self.q:
            raise ValueError(f"a_coeffs must have length q={self.q}")
        if not (math.isfinite(self.k_const) and self.k_const >= 0.0):
            raise ValueError("k_const must be finite and non-negative")
        coeffs = self.g_coeffs + self.a_coeffs
        if not all(math.isfinite(c) and c >= 0.0 for c in coeffs):
            raise ValueError("g_coeffs and a_coeffs must be finite and non-negative")
        if sum(coeffs) > 1.0 + _GARCH_SUM_SLACK:
            raise ValueError("sum of g_coeffs and a_coeffs must not exceed 1")


@dataclass(frozen=True)
class TrackResult:
    """Estimate path, one-step residuals and their mean square."""

    estimates: np.ndarray
    residuals: np.ndarray
    s_n: float


def init_state(k: int, warmup: Sequence[float]) -> FilterState:
    """Start at the mean of the warmup values with zero derivatives.

    The caller chooses how long a prefix to average; run() supplies
    min(20, ceil(n/20)) leading observations.
    """
    if k < 0 or k > MAX_ORDER:
        raise ValueError(f"smoothness order k must be in 0..{MAX_ORDER}")
    w = np.asarray(warmup, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("warmup must be a non-empty sequence")
    if not np.all(np.isfinite(w)):
        raise DataError("warmup contains non-finite observations")
    return FilterState(v_hat=float(np.mean(w)), derivatives=(0.0,) * k, step_index=0)


def step_adaptive(
    state: FilterState,
    x: float,
    schedule: GainSchedule,
    ext: ExtendedParams,
) -> tuple[FilterState, float]:
    """Advance the order-k filter by one observation.

    Returns the new state and the innovation residual x - v_hat formed
    before the update.  Operating-range checks on a_coeffs and k_level
    relative to n are left to run() so degenerate algebraic identities
    stay expressible at the single-step level.
    """
    k = ext.k
    if schedule.k != k or len(state.derivatives) != k:
        raise ValueError("smoothness order mismatch between state, schedule and params")
    if not math.isfinite(x):
        raise DataError(f"non-finite observation {x!r}")
    n = schedule.n
    g = schedule.step_gains
    a = ext.a_coeffs
    v = state.v_hat
    res = x - v
    if k == 0:
        # Coefficient form of (1 - a_1/n) v + (a_1/n) K + g_0 (x - v);
        # arranged so the GARCH(1,1) twin with K=0, g_1 = 1 - g_0, a_1 = g_0
        # runs the same float arithmetic.
        new_v = (1.0 - a[0] / n - g[0]) * v + (a[0] / n) * ext.k_level + g[0] * x
        return FilterState(new_v, (), state.step_index + 1), res
    z = (v,) + state.derivatives
    new = [0.0] * (k + 1)
    new[0] = z[0] + z[1] / n + g[0] * res
    for j in range(1, k):
        new[j] = z[j] + z[j + 1] / n + g[j] * res
    t = z[k] * (1.0 - a[0] / n)
    for ell in range(2, k + 2):
        t = t - (a[ell - 1] / n) * z[k + 1 - ell]
    t = t + (a[k] / n) * ext.k_level
    t = t + g[k] * res
    new[k] = t
    new_state = FilterState(new[0], tuple(new[1:]), state.step_index + 1)
    return new_state, res


def step_garch(
    history: tuple[Sequence[float], Sequence[float]],
    x: float,
    params: GarchParams,
) -> tuple[float, float]:
    """Advance the GARCH(p, q) recursion by one observation.

    history is a pair (estimates, observations), most recent last, with
    at least p prior estimates and q-1 prior observations.  The new
    estimate is K + sum_j g_j v[i-j] + a_1 x + sum_{m>=2} a_m X[i+1-m],
    floored at zero; the residual compares x with the latest estimate.
    """
    est_hist, obs_hist = history
    p, q = params.p, params.q
    if len(est_hist) < p:
        raise ValueError(f"need at least p={p} prior estimates, got {len(est_hist)}")
    if len(obs_hist) < q - 1:
        raise ValueError(
            f"need at least q-1={q - 1} prior observations, got {len(obs_hist)}"
        )
    if not math.isfinite(x):
        raise DataError(f"non-finite observation {x!r}")
    acc = params.k_const
    for j in range(1, p + 1):
        acc = acc + params.g_coeffs[j - 1] * est_hist[-j]
    acc = acc + params.a_coeffs[0] * x
    for m in range(2, q + 1):
        acc = acc + params.a_coeffs[m - 1] * obs_hist[-(m - 1)]
    if acc < 0.0:
        acc = 0.0
    return acc, x - est_hist[-1]


def _warmup_count(n: int) -> int:
    return min(20, -(-n // 20))


def run(xs: Sequence[float], params: ExtendedParams | GarchParams) -> TrackResult:
    """Fold the matching step over a full observation series.

    estimates[i] is the one-step prediction of xs[i]; residuals[i] is
    xs[i] - estimates[i]; s_n is the mean squared residual.
    """
    x_arr = np.asarray(xs, dtype=float)
    if x_arr.ndim != 1 or x_arr.size < 2:
        raise ValueError("need a one-dimensional series of at least 2 observations")
    bad = np.flatnonzero(~np.isfinite(x_arr))
    if bad.size:
        raise DataError(f"non-finite observation at index {int(bad[0])}")
    if isinstance(params, GarchParams):
        return _run_garch(x_arr, params)
    if isinstance(params, ExtendedParams):
        return _run_adaptive(x_arr, params)
    raise ValueError(f"unsupported parameter type {type(params).__name__}")


def _run_adaptive(x_arr: np.ndarray, params: ExtendedParams) -> TrackResult:
    n = int(x_arr.size)
    k = params.k
    if max(params.a_coeffs) >= n / 10:
        raise ValueError("a_coeffs must stay well below n (max coefficient < n/10)")
    if abs(params.k_level) >= n:
        raise ValueError("k_level magnitude must stay below n")
    sched = gain_schedule(k, params.theta, n)
    state = init_state(k, x_arr[: _warmup_count(n)])
    xs = x_arr.tolist()
    g = [float(t) for t in sched.step_gains]
    a = params.a_coeffs
    estimates = np.empty(n)
    residuals = np.empty(n)
    if k == 0:
        coef_v = 1.0 - a[0] / n - g[0]
        coef_k = a[0] / n
        level = params.k_level
        g0 = g[0]
        v = state.v_hat
        for i in range(n):
            x = xs[i]
            estimates[i] = v
            residuals[i] = x - v
            v = coef_v * v + coef_k * level + g0 * x
    else:
        z = [state.v_hat] + [0.0] * k
        damp = 1.0 - a[0] / n
        a_over_n = [c / n for c in a]
        level_term = a_over_n[k] * params.k_level
        for i in range(n):
            x = xs[i]
            estimates[i] = z[0]
            res = x - z[0]
            residuals[i] = res
            new = [0.0] * (k + 1)
            new[0] = z[0] + z[1] / n + g[0] * res
            for j in range(1, k):
                new[j] = z[j] + z[j + 1] / n + g[j] * res
            t = z[k] * damp
            for ell in range(2, k + 2):
                t = t - a_over_n[ell - 1] * z[k + 1 - ell]
            t = t + level_term
            t = t + g[k] * res
            new[k] = t
            z = new
    s_n = float(np.mean(np.square(residuals)))
    return TrackResult(estimates=estimates, residuals=residuals, s_n=s_n)


def _run_garch(x_arr: np.ndarray, params: GarchParams) -> TrackResult:
    n = int(x_arr.size)
    xs = x_arr.tolist()
    # The first observation seeds the recursion; missing pre-sample
    # estimates and observations are padded with it.
    v0 = xs[0]
    est_hist = [v0] * params.p
    obs_hist = [v0] * (params.q - 1)
    estimates = np.empty(n)
    residuals = np.empty(n)
    for i in range(n):
        x = xs[i]
        estimates[i] = est_hist[-1]
        new_v, res = step_garch((est_hist, obs_hist), x, params)
        residuals[i] = res
        est_hist.append(new_v)
        if params.q > 1:
            obs_hist.append(x)
    s_n = float(np.mean(np.square(residuals)))
    return TrackResult(estimates=estimates, residuals=residuals, s_n=s_n)
