"""Cost model and closed-form selling policies.

A merchant holding inventory x observes a price p, sells down to a new level
y in [0, x], pays storage C(y) on what remains, and discounts at beta.  With C
increasing, strictly convex, and differentiable (marginal c, inverse c_inv),
the optimal policy under a price law P is

    y(x, p) = c_inv( clamp( beta * E[(P - p)+] - (1 - beta) * p, c(0), c(x) ) ).

Three estimators of the price law give three policies: the oracle uses the
true law, SDP the empirical law on N samples, and MPC the point mass at the
sample mean (a deterministic forecast).  This module provides the cost
families, sample containers, and the policy functionals: the pre-projection
excess term, sell-down rule, unconstrained target inventory, and the minimum
acceptable price that makes selling from a given level worthwhile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .dist import Distribution, Empirical, PointMass
from .streams import RandomStream

__all__ = [
    "CostModel",
    "SampleSet",
    "PolicySpec",
    "excess_functional",
    "sell_down",
    "target_inventory",
    "min_acceptable_price",
    "audit_convexity",
]

ArrayLike = Union[float, np.ndarray]

PRICE_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class CostModel:
    """Storage cost C with marginal c and inverse marginal c_inv.

    ``linear_coeffs = (c0, kappa)`` is set when c(x) = c0 + kappa * x; the
    vectorized evaluators require it.  Custom models supply callables and
    should be screened with ``audit_convexity``.
    """

    cost: Callable[[ArrayLike], ArrayLike]
    marginal: Callable[[ArrayLike], ArrayLike]
    marginal_inv: Callable[[ArrayLike], ArrayLike]
    label: str
    linear_coeffs: Optional[tuple[float, float]] = None

    @classmethod
    def quadratic(cls, kappa: float = 1.0) -> "CostModel":
        """C(x) = kappa x^2 / 2, the default family (c(0) = 0)."""
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        return cls(
            cost=lambda x: 0.5 * kappa * np.square(x),
            marginal=lambda x: kappa * np.asarray(x, dtype=float),
            marginal_inv=lambda z: np.asarray(z, dtype=float) / kappa,
            label=f"quadratic(kappa={kappa:g})",
            linear_coeffs=(0.0, kappa),
        )

    @classmethod
    def affine(cls, c0: float, kappa: float = 1.0) -> "CostModel":
        """C(x) = c0 x + kappa x^2 / 2, giving a positive marginal at zero."""
        if kappa <= 0 or c0 < 0:
            raise ValueError("need kappa > 0 and c0 >= 0")
        return cls(
            cost=lambda x: c0 * np.asarray(x, dtype=float) + 0.5 * kappa * np.square(x),
            marginal=lambda x: c0 + kappa * np.asarray(x, dtype=float),
            marginal_inv=lambda z: (np.asarray(z, dtype=float) - c0) / kappa,
            label=f"affine(c0={c0:g},kappa={kappa:g})",
            linear_coeffs=(c0, kappa),
        )

    @property
    def marginal_at_zero(self) -> float:
        return float(self.marginal(0.0))


def audit_convexity(model: CostModel, grid: np.ndarray, tol: float = 1e-8) -> None:
    """Reject cost models that fail increase/strict-convexity checks on a grid."""
    grid = np.sort(np.asarray(grid, dtype=float))
    c = np.asarray(model.cost(grid), dtype=float)
    m = np.asarray(model.marginal(grid), dtype=float)
    if np.any(np.diff(c) <= -tol):
        raise ValueError(f"{model.label}: cost not increasing on audit grid")
    if np.any(np.diff(m) <= tol * np.diff(grid)):
        raise ValueError(f"{model.label}: marginal not strictly increasing on audit grid")
    roundtrip = np.asarray(model.marginal_inv(m), dtype=float)
    if np.max(np.abs(roundtrip - grid)) > 1e-10 * max(1.0, float(np.max(np.abs(grid)))):
        raise ValueError(f"{model.label}: marginal_inv does not invert marginal on audit grid")


@dataclass(frozen=True)
class SampleSet:
    """N observed prices, stored sorted, with their average."""

    prices: tuple[float, ...]
    mu: float = field(init=False)

    def __post_init__(self):
        prices = tuple(sorted(float(p) for p in self.prices))
        if len(prices) == 0:
            raise ValueError("need at least one price sample")
        if not all(math.isfinite(p) and p >= 0.0 for p in prices):
            raise ValueError("price samples must be finite and nonnegative")
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "mu", float(np.mean(prices)))

    @property
    def n(self) -> int:
        return len(self.prices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.prices, dtype=float)

    @classmethod
    def draw(cls, dist: Distribution, n: int, stream: RandomStream) -> "SampleSet":
        return cls(prices=tuple(np.atleast_1d(dist.sample(stream, size=n))))


@dataclass(frozen=True)
class PolicySpec:
    """Which selling policy to use and its parameters.

    method is one of "oracle" (needs ``dist``), "sdp" (needs ``samples``), or
    "mpc" (needs ``samples`` or an explicit ``forecast``).
    """

    method: str
    beta: float
    cost: CostModel
    dist: Optional[Distribution] = None
    samples: Optional[SampleSet] = None
    forecast: Optional[float] = None

    def __post_init__(self):
        if self.method not in ("oracle", "sdp", "mpc"):
            raise ValueError(f"unknown policy method {self.method!r}")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        if self.method == "oracle" and self.dist is None:
            raise ValueError("oracle policy needs a distribution")
        if self.method == "sdp" and self.samples is None:
            raise ValueError("sdp policy needs a sample set")
        if self.method == "mpc" and self.samples is None and self.forecast is None:
            raise ValueError("mpc policy needs samples or an explicit forecast")

    @property
    def mpc_forecast(self) -> float:
        if self.forecast is not None:
            return float(self.forecast)
        return self.samples.mu

    def price_law(self) -> Distribution:
        """The price law the policy believes in."""
        if self.method == "oracle":
            return self.dist
        if self.method == "sdp":
            return Empirical(atoms=self.samples.prices)
        return PointMass(value=self.mpc_forecast)

    def threshold_atoms(self) -> Optional[np.ndarray]:
        """Sorted atoms of the believed law when it is discrete, else None."""
        law = self.price_law()
        if isinstance(law, Empirical):
            return np.asarray(law.atoms, dtype=float)
        if isinstance(law, PointMass):
            return np.asarray([law.value], dtype=float)
        return None


def excess_functional(spec: PolicySpec, p: ArrayLike) -> ArrayLike:
    """beta * E[(P - p)+] under the believed law, minus (1 - beta) * p.

    The unclamped marginal value of holding one more unit; strictly
    decreasing in p.
    """
    law = spec.price_law()
    return spec.beta * law.expected_excess(p) - (1.0 - spec.beta) * np.asarray(p, dtype=float)


def target_inventory(spec: PolicySpec, p: ArrayLike) -> ArrayLike:
    """Unconstrained sell-down target: where marginal storage cost meets the excess."""
    g = excess_functional(spec, p)
    c0 = spec.cost.marginal_at_zero
    return spec.cost.marginal_inv(np.maximum(g, c0))


def sell_down(spec: PolicySpec, x: ArrayLike, p: ArrayLike) -> ArrayLike:
    """Post-sale inventory from level x at price p (0 <= result <= x)."""
    g = excess_functional(spec, p)
    c0 = spec.cost.marginal_at_zero
    cx = spec.cost.marginal(x)
    return spec.cost.marginal_inv(np.clip(g, c0, cx))


def _empirical_threshold(atoms: np.ndarray, beta: float, target: ArrayLike) -> ArrayLike:
    """Root of beta * mean((atoms - p)+) - (1 - beta) p = target, solved exactly.

    The map is piecewise linear with breakpoints at the sorted atoms, so the
    root comes from locating the active segment.  ``target`` may be an array.
    """
    t, scalar = np.asarray(target, dtype=float), np.ndim(target) == 0
    t = np.atleast_1d(t)
    a = np.sort(np.asarray(atoms, dtype=float))
    n = a.size
    # suffix[k] = sum of atoms strictly after index k
    suffix = np.concatenate([np.cumsum(a[::-1])[::-1][1:], [0.0]])
    g_at = beta / n * (suffix - (n - 1 - np.arange(n)) * a) - (1.0 - beta) * a
    # segment index: number of atom values with g(atom) >= target, minus one
    k = (g_at[None, :] >= t[:, None]).sum(axis=1) - 1
    below = k < 0                      # root left of the smallest atom, slope -1
    above = k >= n - 1                 # root right of the largest atom, slope -(1-beta)
    mid = ~below & ~above
    out = np.empty_like(t)
    out[below] = beta * a.mean() - t[below]
    out[above] = -t[above] / (1.0 - beta)
    if np.any(mid):
        km = k[mid]
        slope = beta * (n - 1 - km) / n + (1.0 - beta)
        out[mid] = (beta / n * suffix[km] - t[mid]) / slope
    return float(out[0]) if scalar else out


def _bisect_threshold(spec: PolicySpec, target: float) -> float:
    """Root of the strictly decreasing excess functional for continuous laws."""
    law = spec.price_law()
    lo = -target / (1.0 - spec.beta) - 1.0
    hi = max(law.support_high(), 1.0)
    g = lambda p: float(excess_functional(spec, p))
    while g(hi) > target:
        hi *= 2.0
        if hi > 1e18:
            raise RuntimeError("threshold bracket failed to close")
    while hi - lo > PRICE_ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if g(mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def min_acceptable_price(spec: PolicySpec, x: ArrayLike, with_boundary_flag: bool = False):
    """Largest price at which nothing is sold from inventory x.

    Solves excess_functional(spec, p) = c(x); the target inventory at that
    price equals x.  At x = 0 this degenerates to the price where the target
    inventory first reaches zero, signalled by the boundary flag when asked.
    """
    target = spec.cost.marginal(x)
    atoms = spec.threshold_atoms()
    if atoms is not None:
        price = _empirical_threshold(atoms, spec.beta, target)
    else:
        if np.ndim(x) == 0:
            price = _bisect_threshold(spec, float(target))
        else:
            price = np.asarray([_bisect_threshold(spec, float(t)) for t in np.atleast_1d(target)])
    if with_boundary_flag:
        return price, bool(np.all(np.asarray(x) == 0.0))
    return price
