"""Price and noise distributions.

Five families cover the lab's needs: triangular, exponential, lognormal,
empirical (equally weighted atoms), and point mass.  Each exposes exact
sampling through a shared uniform stream plus the closed-form functionals the
selling policies and the semi-analytic evaluator consume:

* ``cdf(q)``                      right-continuous F(q)
* ``mean()``                      E[X]
* ``expected_excess(q)``          E[(X - q)+]
* ``partial_expectation_above(q)`` E[X 1{X > q}]

All functionals accept scalars or numpy arrays and extend to negative ``q``
(``E[(X - q)+] = mean - q`` below the support).  Lognormal parameters are the
mean and variance of the underlying normal in log space, so
``LogNormal(-0.5, 1.0)`` is a mean-1 price law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtr, ndtri

from .streams import RandomStream

__all__ = [
    "Triangular",
    "Exponential",
    "LogNormal",
    "Empirical",
    "PointMass",
    "Distribution",
    "dist_from_config",
    "dist_to_config",
]

ArrayLike = Union[float, np.ndarray]


def _as_array(q: ArrayLike) -> tuple[np.ndarray, bool]:
    arr = np.asarray(q, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr: np.ndarray, scalar: bool) -> ArrayLike:
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class Triangular:
    """Triangular law on [a, b] with mode m (a <= m <= b, a < b)."""

    a: float
    m: float
    b: float

    kind = "triangular"
    atomless = True

    def __post_init__(self):
        if not (self.a <= self.m <= self.b and self.a < self.b):
            raise ValueError(f"invalid triangular parameters ({self.a}, {self.m}, {self.b})")
        if not all(math.isfinite(v) for v in (self.a, self.m, self.b)):
            raise ValueError("triangular parameters must be finite")

    def mean(self) -> float:
        return (self.a + self.m + self.b) / 3.0

    def variance(self) -> float:
        a, m, b = self.a, self.m, self.b
        return (a * a + m * m + b * b - a * m - a * b - m * b) / 18.0

    def support_high(self) -> float:
        return self.b

    def kinks(self) -> tuple[float, ...]:
        """Points where the density is non-smooth."""
        return (self.a, self.m, self.b)

    def pdf(self, q: ArrayLike) -> ArrayLike:
        a, m, b = self.a, self.m, self.b
        x, scalar = _as_array(q)
        lo = b - a
        out = np.zeros_like(x)
        if m > a:
            out = np.where((x >= a) & (x <= m), 2.0 * (x - a) / (lo * (m - a)), out)
        if b > m:
            out = np.where((x > m) & (x <= b), 2.0 * (b - x) / (lo * (b - m)), out)
        return _ret(out, scalar)

    def cdf(self, q: ArrayLike) -> ArrayLike:
        a, m, b = self.a, self.m, self.b
        x, scalar = _as_array(q)
        lo = b - a
        left = (x - a) ** 2 / (lo * (m - a)) if m > a else None
        right = 1.0 - (b - x) ** 2 / (lo * (b - m)) if b > m else None
        out = np.zeros_like(x)
        if left is not None:
            out = np.where((x > a) & (x <= m), left, out)
        if right is not None:
            out = np.where((x > m) & (x < b), right, out)
        if m > a:
            out = np.where(x == m, (m - a) / lo, out)
        else:
            # degenerate left edge: all mass to the right of a == m
            out = np.where(x == m, 0.0, out)
        out = np.where(x >= b, 1.0, out)
        out = np.where(x <= a, 0.0, np.clip(out, 0.0, 1.0))
        # x == b handled by the >= b branch; x == a by <= a
        return _ret(out, scalar)

    def expected_excess(self, q: ArrayLike) -> ArrayLike:
        a, m, b = self.a, self.m, self.b
        x, scalar = _as_array(q)
        mu = self.mean()
        lo = b - a
        out = np.where(x <= a, mu - x, 0.0)
        if m > a:
            mid = mu - x + (x - a) ** 3 / (3.0 * lo * (m - a))
            out = np.where((x > a) & (x <= m), mid, out)
        if b > m:
            upper = (b - x) ** 3 / (3.0 * lo * (b - m))
            out = np.where((x > m) & (x < b), upper, out)
        out = np.where(x >= b, 0.0, out)
        return _ret(np.maximum(out, 0.0), scalar)

    def partial_expectation_above(self, q: ArrayLike) -> ArrayLike:
        a, m, b = self.a, self.m, self.b
        x, scalar = _as_array(q)
        mu = self.mean()
        lo = b - a
        out = np.where(x <= a, mu, 0.0)
        if m > a:
            xa = np.clip(x - a, 0.0, None)
            mid = mu - (2.0 * xa**3 / 3.0 + a * xa**2) / (lo * (m - a))
            out = np.where((x > a) & (x <= m), mid, out)
        if b > m:
            bx = np.clip(b - x, 0.0, None)
            upper = (b * bx**2 - 2.0 * bx**3 / 3.0) / (lo * (b - m))
            out = np.where((x > m) & (x < b), upper, out)
        out = np.where(x >= b, 0.0, out)
        return _ret(out, scalar)

    def sample(self, stream: RandomStream, size=None) -> ArrayLike:
        u = stream.uniforms(size) if size is not None else stream.uniform()
        return self._inverse_cdf(u)

    def _inverse_cdf(self, u: ArrayLike) -> ArrayLike:
        a, m, b = self.a, self.m, self.b
        uu, scalar = _as_array(u)
        fc = (m - a) / (b - a)
        left = a + np.sqrt(np.clip(uu, 0.0, 1.0) * (b - a) * (m - a)) if m > a else np.full_like(uu, a)
        right = b - np.sqrt(np.clip(1.0 - uu, 0.0, 1.0) * (b - a) * (b - m)) if b > m else np.full_like(uu, b)
        return _ret(np.where(uu < fc, left, right), scalar)

    def label(self) -> str:
        return f"triangular({self.a:g},{self.m:g},{self.b:g})"


@dataclass(frozen=True)
class Exponential:
    """Exponential law with rate lam (mean 1/lam)."""

    rate: float

    kind = "exponential"
    atomless = True

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive and finite, got {self.rate}")

    def mean(self) -> float:
        return 1.0 / self.rate

    def variance(self) -> float:
        return 1.0 / self.rate**2

    def support_high(self) -> float:
        # quantile at 1 - 1e-15; tail mass beyond is negligible for root brackets
        return -math.log(1e-15) / self.rate

    def kinks(self) -> tuple[float, ...]:
        return (0.0,)

    def pdf(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        return _ret(np.where(x < 0.0, 0.0, self.rate * np.exp(-self.rate * np.clip(x, 0.0, None))), scalar)

    def cdf(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        return _ret(np.where(x <= 0.0, 0.0, -np.expm1(-self.rate * np.clip(x, 0.0, None))), scalar)

    def expected_excess(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        pos = np.exp(-self.rate * np.clip(x, 0.0, None)) / self.rate
        return _ret(np.where(x <= 0.0, self.mean() - x, pos), scalar)

    def partial_expectation_above(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        xp = np.clip(x, 0.0, None)
        pos = (xp + 1.0 / self.rate) * np.exp(-self.rate * xp)
        return _ret(np.where(x <= 0.0, self.mean(), pos), scalar)

    def sample(self, stream: RandomStream, size=None) -> ArrayLike:
        u = stream.uniforms(size) if size is not None else stream.uniform()
        return self._inverse_cdf(u)

    def _inverse_cdf(self, u: ArrayLike) -> ArrayLike:
        uu, scalar = _as_array(u)
        return _ret(-np.log1p(-uu) / self.rate, scalar)

    def label(self) -> str:
        return f"exponential({self.rate:g})"


@dataclass(frozen=True)
class LogNormal:
    """Lognormal law: log X ~ Normal(log_mean, log_var)."""

    log_mean: float
    log_var: float

    kind = "lognormal"
    atomless = True

    def __post_init__(self):
        if not (self.log_var > 0 and math.isfinite(self.log_var) and math.isfinite(self.log_mean)):
            raise ValueError("lognormal needs finite log_mean and positive log_var")

    @property
    def _sigma(self) -> float:
        return math.sqrt(self.log_var)

    def mean(self) -> float:
        return math.exp(self.log_mean + self.log_var / 2.0)

    def variance(self) -> float:
        return (math.exp(self.log_var) - 1.0) * math.exp(2.0 * self.log_mean + self.log_var)

    def support_high(self) -> float:
        return math.exp(self.log_mean + self._sigma * ndtri(1.0 - 1e-14))

    def kinks(self) -> tuple[float, ...]:
        return (0.0,)

    def pdf(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        safe = np.where(x > 0.0, x, 1.0)
        z = (np.log(safe) - self.log_mean) / self._sigma
        val = np.exp(-0.5 * z * z) / (safe * self._sigma * math.sqrt(2.0 * math.pi))
        return _ret(np.where(x > 0.0, val, 0.0), scalar)

    def cdf(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        safe = np.where(x > 0.0, x, 1.0)
        val = ndtr((np.log(safe) - self.log_mean) / self._sigma)
        return _ret(np.where(x > 0.0, val, 0.0), scalar)

    def expected_excess(self, q: ArrayLike) -> ArrayLike:
        # Black-Scholes style call value on the price law
        x, scalar = _as_array(q)
        mu, s = self.log_mean, self._sigma
        safe = np.where(x > 0.0, x, 1.0)
        d2 = (mu - np.log(safe)) / s
        val = self.mean() * ndtr(d2 + s) - safe * ndtr(d2)
        return _ret(np.where(x > 0.0, val, self.mean() - x), scalar)

    def partial_expectation_above(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        mu, s = self.log_mean, self._sigma
        safe = np.where(x > 0.0, x, 1.0)
        val = self.mean() * ndtr((mu - np.log(safe)) / s + s)
        return _ret(np.where(x > 0.0, val, self.mean()), scalar)

    def sample(self, stream: RandomStream, size=None) -> ArrayLike:
        u = stream.uniforms(size) if size is not None else stream.uniform()
        return self._inverse_cdf(u)

    def _inverse_cdf(self, u: ArrayLike) -> ArrayLike:
        uu, scalar = _as_array(u)
        uu = np.clip(uu, 2.0**-53, 1.0 - 2.0**-53)
        return _ret(np.exp(self.log_mean + self._sigma * ndtri(uu)), scalar)

    def label(self) -> str:
        return f"lognormal({self.log_mean:g},{self.log_var:g})"


@dataclass(frozen=True)
class Empirical:
    """Equally weighted atoms (the N-sample empirical law)."""

    atoms: tuple[float, ...]

    kind = "empirical"
    atomless = False

    def __post_init__(self):
        atoms = tuple(sorted(float(a) for a in self.atoms))
        if len(atoms) == 0:
            raise ValueError("empirical law needs at least one atom")
        if not all(math.isfinite(a) and a >= 0.0 for a in atoms):
            raise ValueError("atoms must be finite and nonnegative")
        object.__setattr__(self, "atoms", atoms)

    def _arr(self) -> np.ndarray:
        return np.asarray(self.atoms, dtype=float)

    def mean(self) -> float:
        return float(self._arr().mean())

    def variance(self) -> float:
        return float(self._arr().var())

    def support_high(self) -> float:
        return self.atoms[-1]

    def kinks(self) -> tuple[float, ...]:
        return self.atoms

    def cdf(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        a = self._arr()
        out = np.searchsorted(a, np.atleast_1d(x), side="right") / a.size
        return _ret(out.reshape(x.shape) if x.ndim else np.asarray(out[0]), scalar)

    def expected_excess(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        a = self._arr()
        out = np.maximum(a.reshape((-1,) + (1,) * x.ndim) - x, 0.0).mean(axis=0)
        return _ret(out, scalar)

    def partial_expectation_above(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        a = self._arr().reshape((-1,) + (1,) * x.ndim)
        out = np.where(a > x, a, 0.0).mean(axis=0)
        return _ret(out, scalar)

    def sample(self, stream: RandomStream, size=None) -> ArrayLike:
        a = self._arr()
        u = stream.uniforms(size) if size is not None else stream.uniform()
        idx = np.minimum((np.asarray(u) * a.size).astype(int), a.size - 1)
        out = a[idx]
        return float(out) if size is None else out

    def label(self) -> str:
        return f"empirical(n={len(self.atoms)})"


@dataclass(frozen=True)
class PointMass:
    """Degenerate law concentrated at one value."""

    value: float

    kind = "pointmass"
    atomless = False

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("point mass value must be finite")

    def mean(self) -> float:
        return self.value

    def variance(self) -> float:
        return 0.0

    def support_high(self) -> float:
        return self.value

    def kinks(self) -> tuple[float, ...]:
        return (self.value,)

    def cdf(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        return _ret(np.where(x >= self.value, 1.0, 0.0), scalar)

    def expected_excess(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        return _ret(np.maximum(self.value - x, 0.0), scalar)

    def partial_expectation_above(self, q: ArrayLike) -> ArrayLike:
        x, scalar = _as_array(q)
        return _ret(np.where(x < self.value, self.value, 0.0), scalar)

    def sample(self, stream: RandomStream, size=None) -> ArrayLike:
        # consume the stream so draw counts match other kinds
        if size is None:
            stream.uniform()
            return self.value
        stream.uniforms(size)
        return np.full(size, self.value)

    def label(self) -> str:
        return f"pointmass({self.value:g})"


Distribution = Union[Triangular, Exponential, LogNormal, Empirical, PointMass]

_KINDS = {
    "triangular": Triangular,
    "exponential": Exponential,
    "lognormal": LogNormal,
    "empirical": Empirical,
    "pointmass": PointMass,
}


def dist_from_config(cfg: dict) -> Distribution:
    """Build a distribution from a tagged record.

    Examples: ``{"kind": "triangular", "a": 0, "m": 1.5, "b": 1.5}``,
    ``{"kind": "exponential", "rate": 1}``,
    ``{"kind": "lognormal", "log_mean": -0.5, "log_var": 1}``,
    ``{"kind": "empirical", "atoms": [0.5, 1.5]}``,
    ``{"kind": "pointmass", "value": 1.0}``.
    """
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind not in _KINDS:
        raise ValueError(f"unknown distribution kind {kind!r}")
    if kind == "empirical":
        return Empirical(atoms=tuple(cfg.pop("atoms")))
    try:
        return _KINDS[kind](**cfg)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from exc


def dist_to_config(dist: Distribution) -> dict:
    if isinstance(dist, Triangular):
        return {"kind": "triangular", "a": dist.a, "m": dist.m, "b": dist.b}
    if isinstance(dist, Exponential):
        return {"kind": "exponential", "rate": dist.rate}
    if isinstance(dist, LogNormal):
        return {"kind": "lognormal", "log_mean": dist.log_mean, "log_var": dist.log_var}
    if isinstance(dist, Empirical):
        return {"kind": "empirical", "atoms": list(dist.atoms)}
    if isinstance(dist, PointMass):
        return {"kind": "pointmass", "value": dist.value}
    raise TypeError(f"not a distribution: {dist!r}")
