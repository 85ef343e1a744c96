"""Ground-truth price simulation with time-varying drift and volatility.

Prices follow dS = mu(t) S dt + sqrt(v(t)) S dB with deterministic mu
and v, so each interval log-return is exactly Gaussian with mean
int(mu - v/2) dt and variance int(v) dt.  Sampling draws those Gaussians
directly; the only numerical approximation is the quadrature of the two
integrals (composite Simpson, 16 panels per interval), which is exact
for constant and linear specs and accurate far beyond the statistical
noise for sinusoids.

The random generator is numpy's default PCG64 seeded explicitly, so
paths are reproducible bit for bit per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DataError, ScenarioError
from .ioutil import float_repr

__all__ = [
    "FuncSpec",
    "Scenario",
    "PathResult",
    "NoiseDecomposition",
    "generate_path",
    "compute_heteroscedasticity",
    "decomposition_diagnostics",
    "parse_scenario_config",
    "format_scenario_config",
    "path_csv_text",
]

_KINDS = ("constant", "linear", "sinusoid", "regime_switch", "sum")
_PARAM_COUNTS = {"constant": 1, "linear": 2, "sinusoid": 4}
_QUAD_PANELS = 16
_QUAD_BLOCK = 32768  # intervals per quadrature block, so huge paths stay cheap on memory


@dataclass(frozen=True)
class FuncSpec:
    """Descriptor for a deterministic function of time on [0, T].

    Kinds: constant(c); linear(c0, c1); sinusoid(base, amplitude,
    frequency, phase) meaning base + amplitude*sin(2*pi*frequency*t +
    phase); regime_switch(levels, breakpoints) holding levels[i] between
    consecutive breakpoints; sum of non-sum terms.
    """

    kind: str
    params: tuple[float, ...] = ()
    levels: tuple[float, ...] = ()
    breakpoints: tuple[float, ...] = ()
    terms: tuple["FuncSpec", ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown spec kind {self.kind!r}")
        if self.kind in _PARAM_COUNTS:
            want = _PARAM_COUNTS[self.kind]
            if len(self.params) != want:
                raise ValueError(f"{self.kind} spec needs {want} params")
            if not all(math.isfinite(p) for p in self.params):
                raise ValueError("spec params must be finite")
        elif self.kind == "regime_switch":
            if len(self.levels) < 1 or len(self.levels) != len(self.breakpoints) + 1:
                raise ValueError("regime_switch needs len(levels) == len(breakpoints)+1")
            if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
                raise ValueError("breakpoints must be strictly increasing")
        elif self.kind == "sum":
            if len(self.terms) < 1:
                raise ValueError("sum spec needs at least one term")
            if any(t.kind == "sum" for t in self.terms):
                raise ValueError("sum specs do not nest")

    def values(self, t: np.ndarray) -> np.ndarray:
        """Evaluate the function at times t (any array shape)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.params[0])
        if self.kind == "linear":
            return self.params[0] + self.params[1] * t
        if self.kind == "sinusoid":
            base, amp, freq, phase = self.params
            return base + amp * np.sin(2.0 * math.pi * freq * t + phase)
        if self.kind == "regime_switch":
            idx = np.searchsorted(np.asarray(self.breakpoints), t, side="right")
            return np.asarray(self.levels)[idx]
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term.values(t)
        return out

    @property
    def smoothness_order(self) -> float:
        """Largest k this function supports; inf for smooth kinds, 0 at jumps."""
        if self.kind == "regime_switch":
            return 0.0
        if self.kind == "sum":
            return min(t.smoothness_order for t in self.terms)
        return math.inf

    @property
    def lipschitz_violating(self) -> bool:
        """True when the function jumps (regime switches)."""
        if self.kind == "regime_switch":
            return True
        if self.kind == "sum":
            return any(t.lipschitz_violating for t in self.terms)
        return False


@dataclass(frozen=True)
class Scenario:
    """Drift and volatility descriptors plus horizon and initial price.

    The volatility spec must be strictly positive and the drift strictly
    positive and bounded; both are checked on a dense grid over [0, T].
    """

    mu_spec: FuncSpec
    v_spec: FuncSpec
    horizon_t: float = 1.0
    s0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.horizon_t) and self.horizon_t > 0.0):
            raise ScenarioError("horizon_t must be positive and finite")
        if not (math.isfinite(self.s0) and self.s0 > 0.0):
            raise ScenarioError("s0 must be positive and finite")
        grid = np.linspace(0.0, self.horizon_t, 2049)
        v = self.v_spec.values(grid)
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ScenarioError("volatility spec must be strictly positive on [0, T]")
        mu = self.mu_spec.values(grid)
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0.0):
            raise ScenarioError("drift spec must be strictly positive on [0, T]")

    @property
    def smoothness_order(self) -> float:
        return self.v_spec.smoothness_order

    @property
    def lipschitz_violating(self) -> bool:
        return self.v_spec.lipschitz_violating


@dataclass(frozen=True)
class PathResult:
    """One simulated path with its observation series and ground truth."""

    prices: np.ndarray
    xs: np.ndarray
    v_bar: np.ndarray
    mu_bar: np.ndarray
    delta: float
    seed: int


@dataclass(frozen=True)
class NoiseDecomposition:
    """Per-interval split X = v_bar + theta + eta.

    theta is the deterministic O(delta) shift, eta the zero-mean noise,
    sigma_sq its per-interval variance.
    """

    eta: np.ndarray
    theta: np.ndarray
    sigma_sq: np.ndarray


def _interval_means(
    spec: FuncSpec, horizon: float, n: int, require_positive: bool = False
) -> np.ndarray:
    """Per-interval averages (1/delta) int f dt by composite Simpson."""
    delta = horizon / n
    h = delta / _QUAD_PANELS
    offsets = np.arange(_QUAD_PANELS + 1) * h
    out = np.empty(n)
    for start in range(0, n, _QUAD_BLOCK):
        stop = min(n, start + _QUAD_BLOCK)
        t0 = np.arange(start, stop, dtype=float) * delta
        nodes = t0[:, None] + offsets[None, :]
        y = spec.values(nodes)
        if require_positive and np.any(y <= 0.0):
            bad = int(start + np.argwhere(y <= 0.0)[0][0])
            raise ScenarioError(f"volatility non-positive inside interval {bad}")
        out[start:stop] = integrate.simpson(y, dx=h, axis=1) / delta
    return out


def generate_path(scenario: Scenario, n: int, seed: int) -> PathResult:
    """Sample a price path of n intervals from the scenario.

    Log-return i is drawn as Normal(delta*(mu_bar[i] - v_bar[i]/2),
    delta*v_bar[i]); the observation series is then recomputed from the
    realized prices so it reconstructs exactly.
    """
    if n < 2:
        raise ValueError(f"sample size n must be at least 2, got {n}")
    delta = scenario.horizon_t / n
    v_bar = _interval_means(scenario.v_spec, scenario.horizon_t, n, require_positive=True)
    mu_bar = _interval_means(scenario.mu_spec, scenario.horizon_t, n)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    log_returns = delta * (mu_bar - 0.5 * v_bar) + np.sqrt(delta * v_bar) * z
    log_prices = math.log(scenario.s0) + np.cumsum(log_returns)
    prices = np.concatenate(([scenario.s0], np.exp(log_prices)))
    xs = compute_heteroscedasticity(prices, delta)
    for arr in (prices, xs, v_bar, mu_bar):
        arr.setflags(write=False)
    return PathResult(
        prices=prices, xs=xs, v_bar=v_bar, mu_bar=mu_bar, delta=delta, seed=int(seed)
    )


def compute_heteroscedasticity(prices, delta: float) -> np.ndarray:
    """Squared log-returns scaled by 1/delta: X_i = ln^2(S_i/S_{i-1})/delta."""
    if not (math.isfinite(delta) and delta > 0.0):
        raise ValueError(f"delta must be positive and finite, got {delta}")
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("need at least two prices")
    bad = np.flatnonzero(~(np.isfinite(p) & (p > 0.0)))
    if bad.size:
        raise DataError(f"non-positive price at index {int(bad[0])}")
    r = np.log(p[1:] / p[:-1])
    return r * r / delta


def decomposition_diagnostics(scenario: Scenario, path: PathResult) -> NoiseDecomposition:
    """Split the observations into signal, deterministic shift and noise.

    theta_i = 0.25*delta*(2*mu_bar - v_bar)^2 comes from expanding the
    squared log-return; eta_i = X_i - v_bar - theta_i has mean zero and
    variance sigma_sq_i = delta*v_bar*(2*mu_bar - v_bar)^2 + 2*v_bar^2.
    """
    n = path.v_bar.size
    # cheap spot check that the path really matches the scenario
    m = min(n, 64)
    v_check = _interval_means(scenario.v_spec, scenario.horizon_t, n)[:m]
    if not np.allclose(v_check, path.v_bar[:m], rtol=1e-10, atol=0.0):
        raise ValueError("path was not generated from this scenario")
    swing = 2.0 * path.mu_bar - path.v_bar
    theta = 0.25 * path.delta * swing**2
    eta = path.xs - path.v_bar - theta
    sigma_sq = path.delta * path.v_bar * swing**2 + 2.0 * path.v_bar**2
    return NoiseDecomposition(eta=eta, theta=theta, sigma_sq=sigma_sq)


# --- flat key-value scenario configs -----------------------------------------

def _format_spec(prefix: str, spec: FuncSpec, lines: list[str]) -> None:
    lines.append(f"{prefix}.kind = {spec.kind}")
    if spec.kind in _PARAM_COUNTS:
        lines.append(f"{prefix}.params = " + ", ".join(float_repr(p) for p in spec.params))
    elif spec.kind == "regime_switch":
        lines.append(f"{prefix}.levels = " + ", ".join(float_repr(p) for p in spec.levels))
        lines.append(
            f"{prefix}.breakpoints = " + ", ".join(float_repr(p) for p in spec.breakpoints)
        )
    else:
        lines.append(f"{prefix}.terms = {len(spec.terms)}")
        for i, term in enumerate(spec.terms, start=1):
            _format_spec(f"{prefix}.term{i}", term, lines)


def format_scenario_config(scenario: Scenario) -> str:
    """Serialize a scenario to the flat key-value config format."""
    lines = [
        f"T = {float_repr(scenario.horizon_t)}",
        f"s0 = {float_repr(scenario.s0)}",
    ]
    _format_spec("mu", scenario.mu_spec, lines)
    _format_spec("v", scenario.v_spec, lines)
    return "\n".join(lines) + "\n"


def _floats(text: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(piece) for piece in text.split(","))
    except ValueError as exc:
        raise DataError(f"bad number list for {key}: {text!r}") from exc


def _parse_spec(prefix: str, kv: dict[str, str], used: set[str]) -> FuncSpec:
    kind_key = f"{prefix}.kind"
    if kind_key not in kv:
        raise DataError(f"missing config key {kind_key}")
    used.add(kind_key)
    kind = kv[kind_key]
    if kind in _PARAM_COUNTS:
        key = f"{prefix}.params"
        if key not in kv:
            raise DataError(f"missing config key {key}")
        used.add(key)
        return FuncSpec(kind=kind, params=_floats(kv[key], key))
    if kind == "regime_switch":
        lv_key, bp_key = f"{prefix}.levels", f"{prefix}.breakpoints"
        if lv_key not in kv or bp_key not in kv:
            raise DataError(f"regime_switch needs {lv_key} and {bp_key}")
        used.update((lv_key, bp_key))
        return FuncSpec(
            kind=kind,
            levels=_floats(kv[lv_key], lv_key),
            breakpoints=_floats(kv[bp_key], bp_key),
        )
    if kind == "sum":
        count_key = f"{prefix}.terms"
        if count_key not in kv:
            raise DataError(f"missing config key {count_key}")
        used.add(count_key)
        try:
            count = int(kv[count_key])
        except ValueError as exc:
            raise DataError(f"bad term count for {count_key}: {kv[count_key]!r}") from exc
        terms = tuple(
            _parse_spec(f"{prefix}.term{i}", kv, used) for i in range(1, count + 1)
        )
        return FuncSpec(kind=kind, terms=terms)
    raise DataError(f"unknown spec kind {kind!r} for {prefix}")


def parse_scenario_config(text: str) -> Scenario:
    """Parse the flat key-value config format into a Scenario.

    Lines look like "key = value"; blank lines and #-comments are
    ignored.  Keys: T, s0, mu.* and v.* spec descriptors (see FuncSpec).
    """
    kv: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config line {line_no}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in kv:
            raise DataError(f"config line {line_no}: duplicate key {key}")
        kv[key] = value
    used: set[str] = set()
    fields: dict[str, float] = {}
    for key, default in (("T", 1.0), ("s0", 1.0)):
        if key in kv:
            used.add(key)
            try:
                fields[key] = float(kv[key])
            except ValueError as exc:
                raise DataError(f"bad value for {key}: {kv[key]!r}") from exc
        else:
            fields[key] = default
    try:
        mu_spec = _parse_spec("mu", kv, used)
        v_spec = _parse_spec("v", kv, used)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    unknown = sorted(set(kv) - used)
    if unknown:
        raise DataError(f"unknown config keys: {', '.join(unknown)}")
    return Scenario(mu_spec=mu_spec, v_spec=v_spec, horizon_t=fields["T"], s0=fields["s0"])


def path_csv_text(path: PathResult) -> str:
    """Render a path as CSV with columns t, price, x, v_bar.

    Row 0 holds the initial price; x and v_bar describe the interval
    ending at t, so they are empty on the first row.  Floats use their
    shortest round-tripping representation.
    """
    lines = ["t,price,x,v_bar"]
    lines.append(f"0.0,{float_repr(path.prices[0])},,")
    n = path.xs.size
    for i in range(n):
        t = (i + 1) * path.delta
        lines.append(
            f"{float_repr(t)},{float_repr(path.prices[i + 1])},"
            f"{float_repr(path.xs[i])},{float_repr(path.v_bar[i])}"
        )
    return "\n".join(lines) + "\n"
