"""Out-of-sample evaluation of selling policies.

Two independent routes to the same number:

* ``semianalytic_value`` integrates the closed-form derivative of the
  policy's out-of-sample value,

      V'(x) = (E[P 1{P > q(x)}] - F(q(x)) c(x)) / (1 - beta F(q(x))),

  where q(x) is the policy's minimum acceptable price and F the true price
  law's cdf.  V(x1) = integral of V' from 0 to x1, with quadrature panels
  split at every x where q(x) crosses a policy atom or a kink of the true
  law.  The true law must be atomless.

* ``mc_value`` runs the discounted simulation: draw a price each stage,
  apply the policy, accumulate beta^(t-1) (p (x - y) - C(y)) over T stages,
  and average over R independent paths.  The reported truncation bound is
  B beta^T / (1 - beta) with per-stage bound B = mean * x1 + C(x1).

On top sit the study drivers: expected out-of-sample performance over the
sampling distribution of the N policy-building samples (common random
numbers across methods), the two-sample difference map, the discount-factor
sweep, the policy-switch value, and the storage-dominance condition that
guarantees MPC weakly beats SDP out of sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .dist import Distribution, Empirical, PointMass
from .quadrature import integrate_adaptive, panel_integrate
from .rosp import (
    CostModel,
    PolicySpec,
    SampleSet,
    excess_functional,
    min_acceptable_price,
    sell_down,
)
from .streams import RandomStream

__all__ = [
    "EvalReport",
    "OuterStudy",
    "StudyResult",
    "DominanceReport",
    "value_derivative",
    "semianalytic_value",
    "semianalytic_profile",
    "simulate_value",
    "mc_value",
    "truncation_bound",
    "switch_value",
    "check_storage_dominance",
    "expected_performance",
    "difference_map",
    "discount_sweep",
]

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class EvalReport:
    """One policy evaluation: the value plus how it was obtained."""

    value: float
    std_error: float
    realizations: int
    truncation_bound: float
    seed: int
    method: dict

    def __post_init__(self):
        if self.std_error < 0 or self.truncation_bound < 0:
            raise ValueError("std_error and truncation_bound must be nonnegative")


def _require_atomless(dist: Distribution) -> None:
    if not dist.atomless:
        raise ValueError(
            f"semi-analytic evaluation needs an atomless price law, got {dist.label()}"
        )


def value_derivative(spec: PolicySpec, true_dist: Distribution, x: float) -> float:
    """Closed-form derivative of the out-of-sample value at inventory x."""
    q = min_acceptable_price(spec, x)
    fq = float(true_dist.cdf(q))
    gq = float(true_dist.partial_expectation_above(q))
    return (gq - fq * float(spec.cost.marginal(x))) / (1.0 - spec.beta * fq)


def _threshold_kinks(spec: PolicySpec, true_dist: Distribution) -> list[float]:
    """Price levels where the value-derivative integrand loses smoothness."""
    kinks = {0.0}
    kinks.update(true_dist.kinks())
    atoms = spec.threshold_atoms()
    if atoms is not None:
        kinks.update(float(a) for a in atoms)
    else:
        kinks.update(spec.dist.kinks())
    return sorted(kinks)


def _breakpoints(spec: PolicySpec, true_dist: Distribution, x1: float) -> list[float]:
    """Inventory levels where the threshold crosses an integrand kink."""
    c0 = spec.cost.marginal_at_zero
    c1 = float(spec.cost.marginal(x1))
    out = []
    for q in _threshold_kinks(spec, true_dist):
        t = float(excess_functional(spec, q))
        if c0 < t < c1:
            out.append(float(spec.cost.marginal_inv(t)))
    return sorted(out)


def semianalytic_value(
    spec: PolicySpec,
    true_dist: Distribution,
    x1: float,
    tol: float = DEFAULT_TOL,
) -> EvalReport:
    """Exact (quadrature-grade) out-of-sample value at initial inventory x1."""
    _require_atomless(true_dist)
    if x1 < 0:
        raise ValueError("x1 must be nonnegative")
    if x1 == 0.0:
        value = 0.0
    else:
        f = lambda x: value_derivative(spec, true_dist, x)
        value = integrate_adaptive(f, 0.0, x1, tol=tol, breakpoints=_breakpoints(spec, true_dist, x1))
    return EvalReport(
        value=float(value),
        std_error=0.0,
        realizations=0,
        truncation_bound=0.0,
        seed=0,
        method={"mode": "semianalytic", "tol": tol},
    )


def semianalytic_profile(
    spec: PolicySpec,
    true_dist: Distribution,
    xs: Sequence[float],
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Out-of-sample value at each inventory level in ascending ``xs``."""
    _require_atomless(true_dist)
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) < 0) or np.any(xs < 0):
        raise ValueError("xs must be ascending and nonnegative")
    top = float(xs[-1]) if xs.size else 0.0
    breaks = _breakpoints(spec, true_dist, top) if top > 0 else []
    f = lambda x: value_derivative(spec, true_dist, x)
    out = np.empty(xs.size)
    acc, lo = 0.0, 0.0
    seg_tol = tol / max(1, xs.size)
    for i, hi in enumerate(xs):
        if hi > lo:
            acc += integrate_adaptive(f, lo, float(hi), tol=seg_tol, breakpoints=breaks)
            lo = float(hi)
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# Monte Carlo route
# ---------------------------------------------------------------------------


def truncation_bound(true_dist: Distribution, cost: CostModel, x1: float, beta: float, horizon: int) -> float:
    """beta^T / (1 - beta) times the per-stage reward bound mean * x1 + C(x1)."""
    per_stage = true_dist.mean() * x1 + float(cost.cost(x1))
    return beta**horizon / (1.0 - beta) * per_stage


def simulate_value(
    spec: PolicySpec,
    true_dist: Distribution,
    x1: float,
    horizon: int,
    stream: RandomStream,
) -> float:
    """One discounted reward path of length ``horizon`` from inventory x1."""
    if horizon < 1 or x1 < 0:
        raise ValueError("need horizon >= 1 and x1 >= 0")
    x = float(x1)
    total = 0.0
    disc = 1.0
    for _ in range(horizon):
        if x == 0.0:
            break
        p = float(true_dist.sample(stream))
        y = float(sell_down(spec, x, p))
        total += disc * (p * (x - y) - float(spec.cost.cost(y)))
        x = y
        disc *= spec.beta
    return total


def _simulate_paths(
    spec: PolicySpec,
    true_dist: Distribution,
    x1: float,
    horizon: int,
    paths: int,
    stream: RandomStream,
) -> np.ndarray:
    """Vectorized path values; one stage draws one price per live path."""
    x = np.full(paths, float(x1))
    total = np.zeros(paths)
    disc = 1.0
    for _ in range(horizon):
        if not np.any(x > 0.0):
            break
        p = np.asarray(true_dist.sample(stream, size=paths), dtype=float)
        g = excess_functional(spec, p)
        c0 = spec.cost.marginal_at_zero
        y = spec.cost.marginal_inv(np.clip(g, c0, spec.cost.marginal(x)))
        total += disc * (p * (x - y) - spec.cost.cost(y))
        x = y
        disc *= spec.beta
    return total


def mc_value(
    spec: PolicySpec,
    true_dist: Distribution,
    x1: float,
    horizon: int,
    paths: int,
    seed: Union[int, RandomStream],
    return_paths: bool = False,
):
    """Discounted Monte Carlo estimate over ``paths`` independent paths."""
    if paths < 2:
        raise ValueError("need at least two paths for a standard error")
    stream = seed if isinstance(seed, RandomStream) else RandomStream(int(seed), 9001)
    vals = _simulate_paths(spec, true_dist, x1, horizon, paths, stream)
    report = EvalReport(
        value=float(np.mean(vals)),
        std_error=float(np.std(vals, ddof=1) / math.sqrt(paths)),
        realizations=paths,
        truncation_bound=truncation_bound(true_dist, spec.cost, x1, spec.beta, horizon),
        seed=stream.seed,
        method={"mode": "mc", "horizon": horizon, "paths": paths},
    )
    return (report, vals) if return_paths else report


# ---------------------------------------------------------------------------
# Batched semi-analytic evaluation over many sample sets
# ---------------------------------------------------------------------------


class _ThresholdBatch:
    """Threshold machinery for a batch of discrete-atom policies.

    Row r holds sorted atoms A[r] defining the excess functional
    g(p) = beta * mean((A[r] - p)+) - (1 - beta) p, piecewise linear and
    strictly decreasing.  Thresholds solve g(p) = c(x) segment-exactly.
    Requires an affine marginal cost c(x) = c0 + kappa x.
    """

    def __init__(self, atoms: np.ndarray, beta: float, cost: CostModel):
        if cost.linear_coeffs is None:
            raise ValueError("batched evaluation needs a cost with affine marginal")
        self.c0, self.kappa = cost.linear_coeffs
        self.beta = beta
        a = np.sort(np.asarray(atoms, dtype=float), axis=1)
        self.atoms = a
        self.rows, self.n = a.shape
        rev = np.cumsum(a[:, ::-1], axis=1)[:, ::-1]
        self.suffix = np.concatenate([rev[:, 1:], np.zeros((self.rows, 1))], axis=1)
        idx = np.arange(self.n)
        self.g_at = beta / self.n * (self.suffix - (self.n - 1 - idx) * a) - (1.0 - beta) * a
        self.mean = a.mean(axis=1)

    def g_of(self, q: float) -> np.ndarray:
        above = self.atoms > q
        count = above.sum(axis=1)
        total = np.where(above, self.atoms, 0.0).sum(axis=1)
        return self.beta / self.n * (total - count * q) - (1.0 - self.beta) * q

    def threshold(self, x: np.ndarray) -> np.ndarray:
        t = self.c0 + self.kappa * x
        k = (self.g_at >= t[:, None]).sum(axis=1) - 1
        out = np.empty_like(t)
        below = k < 0
        above = k >= self.n - 1
        mid = ~below & ~above
        out[below] = self.beta * self.mean[below] - t[below]
        out[above] = -t[above] / (1.0 - self.beta)
        if np.any(mid):
            km = k[mid]
            rows = np.nonzero(mid)[0]
            slope = self.beta * (self.n - 1 - km) / self.n + (1.0 - self.beta)
            out[mid] = (self.beta / self.n * self.suffix[rows, km] - t[mid]) / slope
        return out

    def panel_edges(self, x1: float, true_dist: Distribution) -> np.ndarray:
        def to_x(gvals: np.ndarray) -> np.ndarray:
            return np.clip((gvals - self.c0) / self.kappa, 0.0, x1)

        edges = [np.zeros(self.rows), np.full(self.rows, x1)]
        edges.extend(to_x(self.g_at[:, j]) for j in range(self.n))
        for q in sorted(set(true_dist.kinks()) | {0.0}):
            edges.append(to_x(self.g_of(float(q))))
        return np.sort(np.stack(edges, axis=1), axis=1)


def _batch_values(
    atoms: np.ndarray,
    beta: float,
    cost: CostModel,
    true_dist: Distribution,
    x1: float,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Semi-analytic values for one policy family, one row per atom set."""
    _require_atomless(true_dist)
    if x1 == 0.0:
        return np.zeros(atoms.shape[0])
    batch = _ThresholdBatch(atoms, beta, cost)

    def integrand(x: np.ndarray) -> np.ndarray:
        q = batch.threshold(x)
        fq = np.asarray(true_dist.cdf(q), dtype=float)
        gq = np.asarray(true_dist.partial_expectation_above(q), dtype=float)
        return (gq - fq * (batch.c0 + batch.kappa * x)) / (1.0 - beta * fq)

    return panel_integrate(integrand, batch.panel_edges(x1, true_dist), tol)


def _method_atoms(method: str, draws: np.ndarray) -> np.ndarray:
    if method == "sdp":
        return draws
    if method == "mpc":
        return draws.mean(axis=1, keepdims=True)
    raise ValueError(f"unsupported study method {method!r}")


# ---------------------------------------------------------------------------
# Policy-switch value
# ---------------------------------------------------------------------------


class _CachedValue:
    """V(z) for one policy, exact up to tol, with prefix sums cached at panel edges."""

    def __init__(self, spec: PolicySpec, true_dist: Distribution, x_max: float, tol: float):
        self.spec = spec
        self.true_dist = true_dist
        self.tol = tol
        self.f = lambda x: value_derivative(spec, true_dist, x)
        edges = [0.0] + _breakpoints(spec, true_dist, x_max) + [x_max]
        self.edges = np.asarray(sorted(set(edges)))
        self.prefix = np.zeros(self.edges.size)
        for i in range(1, self.edges.size):
            self.prefix[i] = self.prefix[i - 1] + integrate_adaptive(
                self.f, self.edges[i - 1], self.edges[i], tol=tol / max(1, self.edges.size)
            )

    def __call__(self, z: float) -> float:
        if z <= 0.0:
            return 0.0
        i = int(np.searchsorted(self.edges, z, side="right") - 1)
        i = min(max(i, 0), self.edges.size - 2)
        return self.prefix[i] + integrate_adaptive(self.f, self.edges[i], z, tol=self.tol)


def switch_value(
    first: PolicySpec,
    thereafter: PolicySpec,
    true_dist: Distribution,
    x1: float,
    tol: float = 1e-9,
) -> float:
    """Value of one stage under ``first`` followed by ``thereafter`` forever.

    Computed as E[p (x1 - y_f(x1, p)) - C(y_f(x1, p)) + beta V_t(y_f(x1, p))]
    by quadrature over the true price law.
    """
    _require_atomless(true_dist)
    if x1 == 0.0:
        return 0.0
    v_cache = _CachedValue(thereafter, true_dist, x1, tol)

    def payoff(p: float) -> float:
        y = float(sell_down(first, x1, p))
        return (
            p * (x1 - y)
            - float(first.cost.cost(y))
            + first.beta * v_cache(y)
        ) * float(true_dist.pdf(p))

    breaks = set(_threshold_kinks(first, true_dist))
    breaks.add(float(min_acceptable_price(first, x1)))
    breaks.add(float(min_acceptable_price(first, 0.0)))
    hi = true_dist.support_high()
    return integrate_adaptive(payoff, 0.0, hi, tol=tol, breakpoints=[b for b in breaks if 0.0 < b < hi])


# ---------------------------------------------------------------------------
# Storage-dominance condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DominanceReport:
    """Grid scan of m(x) = c(x) - beta E[P 1{P > q_S(x)}] over [0, x1]."""

    holds: bool
    worst_margin: float
    arg_min: float
    margin_at_zero: float


def check_storage_dominance(
    samples: SampleSet,
    true_dist: Distribution,
    beta: float,
    cost: CostModel,
    x1: float,
    grid_points: int = 1001,
) -> DominanceReport:
    """Does marginal storage cost dominate the expected tail price gain?

    When it holds at every x in [0, x1], the forecast policy (MPC) performs at
    least as well out of sample as the sample-based SDP policy.
    """
    spec = PolicySpec("sdp", beta, cost, samples=samples)
    xs = list(np.linspace(0.0, x1, grid_points))
    c0 = cost.marginal_at_zero
    c1 = float(cost.marginal(x1))
    for a in samples.prices:
        t = float(excess_functional(spec, a))
        if c0 < t < c1:
            xs.append(float(cost.marginal_inv(t)))
    xs = np.asarray(sorted(xs))
    q = np.asarray(min_acceptable_price(spec, xs), dtype=float)
    margin = np.asarray(cost.marginal(xs), dtype=float) - beta * np.asarray(
        true_dist.partial_expectation_above(q), dtype=float
    )
    i = int(np.argmin(margin))
    return DominanceReport(
        holds=bool(margin[i] >= -1e-12),
        worst_margin=float(margin[i]),
        arg_min=float(xs[i]),
        margin_at_zero=float(margin[0]),
    )


# ---------------------------------------------------------------------------
# Outer studies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OuterStudy:
    """Expected out-of-sample performance study over random sample sets."""

    distribution: Distribution
    sample_sizes: tuple[int, ...]
    outer_realizations: int
    beta: float
    x1: float
    cost: CostModel
    seed: int
    inner_mode: str = "semianalytic"  # or "mc"
    mc_horizon: int = 1000
    mc_paths: int = 1000
    study_id: str = "study"
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if any(n < 1 for n in self.sample_sizes) or self.outer_realizations < 1:
            raise ValueError("sample sizes and outer realizations must be positive")
        if self.inner_mode not in ("semianalytic", "mc"):
            raise ValueError("inner_mode must be 'semianalytic' or 'mc'")


@dataclass(frozen=True)
class StudyResult:
    rows: tuple[dict, ...]
    values: dict = field(repr=False)  # (N, method) -> per-realization values


def _study_draws(study: OuterStudy, n: int) -> np.ndarray:
    stream = RandomStream(study.seed, 101, n)
    return np.asarray(
        study.distribution.sample(stream, size=(study.outer_realizations, n)), dtype=float
    )


def expected_performance(study: OuterStudy) -> StudyResult:
    """Mean and standard error of out-of-sample value per (N, method).

    Sample sets are shared between SDP and MPC (common random numbers), which
    sharpens the estimated difference between the methods.
    """
    rows = []
    values = {}
    for n in study.sample_sizes:
        draws = _study_draws(study, n)
        for method in ("sdp", "mpc"):
            if study.inner_mode == "semianalytic":
                vals = _batch_values(
                    _method_atoms(method, draws),
                    study.beta,
                    study.cost,
                    study.distribution,
                    study.x1,
                    study.tol,
                )
            else:
                vals = np.empty(study.outer_realizations)
                for i in range(study.outer_realizations):
                    spec = PolicySpec(
                        method, study.beta, study.cost, samples=SampleSet(tuple(draws[i]))
                    )
                    # paths shared across methods per realization (CRN)
                    vals[i] = mc_value(
                        spec,
                        study.distribution,
                        study.x1,
                        study.mc_horizon,
                        study.mc_paths,
                        RandomStream(study.seed, 103, n, i),
                    ).value
            values[(n, method)] = vals
            rows.append(
                {
                    "study_id": study.study_id,
                    "method": method,
                    "N": n,
                    "beta": study.beta,
                    "distribution": study.distribution.label(),
                    "value_mean": float(np.mean(vals)),
                    "value_stderr": float(np.std(vals, ddof=1) / math.sqrt(vals.size))
                    if vals.size > 1
                    else 0.0,
                    "realizations": int(vals.size),
                    "seed": study.seed,
                    "inner_mode": study.inner_mode,
                }
            )
    return StudyResult(rows=tuple(rows), values=values)


def difference_map(
    true_dist: Distribution,
    beta: float,
    cost: CostModel,
    x1: float,
    p1_grid: Sequence[float],
    p2_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """SDP minus MPC out-of-sample value over a grid of two-sample sets.

    Entry [i, j] uses samples {p1_grid[i], p2_grid[j]}.  Policies depend on
    the samples only through order statistics, so the map is symmetric when
    the grids coincide.
    """
    p1 = np.asarray(p1_grid, dtype=float)
    p2 = np.asarray(p2_grid, dtype=float)
    if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
        raise ValueError("grid bounds must be finite")
    pairs = np.stack(
        [np.repeat(p1, p2.size), np.tile(p2, p1.size)], axis=1
    )
    vs = _batch_values(pairs, beta, cost, true_dist, x1, tol)
    vm = _batch_values(pairs.mean(axis=1, keepdims=True), beta, cost, true_dist, x1, tol)
    return (vs - vm).reshape(p1.size, p2.size)


def discount_sweep(
    betas: Sequence[float],
    n: int,
    outer_realizations: int,
    seed: int,
    true_dist: Distribution,
    x1: float,
    cost: CostModel,
    tol: float = DEFAULT_TOL,
) -> StudyResult:
    """Expected performance of both methods across discount factors.

    The same sample sets are reused for every beta (common random numbers),
    so differences across the sweep are directly comparable.  The result's
    ``values`` also carries ``("envelope", "one_plus_max")``: per-realization
    1 + max(samples), whose mean bounds the positive part of the MPC value.
    """
    betas = tuple(float(b) for b in betas)
    if any(not (0.0 < b < 1.0) for b in betas) or list(betas) != sorted(betas):
        raise ValueError("betas must be strictly increasing in (0, 1)")
    stream = RandomStream(seed, 201, n)
    draws = np.asarray(true_dist.sample(stream, size=(outer_realizations, n)), dtype=float)
    rows = []
    values = {("envelope", "one_plus_max"): 1.0 + draws.max(axis=1)}
    for beta in betas:
        for method in ("sdp", "mpc"):
            vals = _batch_values(_method_atoms(method, draws), beta, cost, true_dist, x1, tol)
            values[(beta, method)] = vals
            rows.append(
                {
                    "study_id": "discount_sweep",
                    "method": method,
                    "N": n,
                    "beta": beta,
                    "distribution": true_dist.label(),
                    "value_mean": float(np.mean(vals)),
                    "value_stderr": float(np.std(vals, ddof=1) / math.sqrt(vals.size)),
                    "realizations": int(vals.size),
                    "seed": seed,
                    "inner_mode": "semianalytic",
                }
            )
    return StudyResult(rows=tuple(rows), values=values)
