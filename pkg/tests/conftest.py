import numpy as np
import pytest

from soclab.dist import Empirical, Exponential, LogNormal, PointMass, Triangular


@pytest.fixture
def atomless_dists():
    return [
        Triangular(0.0, 1.5, 1.5),
        Triangular(0.5, 0.5, 2.0),
        Triangular(0.0, 0.0, 3.0),
        Triangular(0.2, 0.9, 2.5),
        Exponential(1.0),
        Exponential(2.5),
        LogNormal(-0.5, 1.0),
        LogNormal(0.1, 0.4),
    ]


@pytest.fixture
def all_dists(atomless_dists):
    return atomless_dists + [
        Empirical((0.5, 1.5)),
        Empirical((2.0,)),
        Empirical((0.3, 0.3, 1.1, 4.0)),
        PointMass(1.0),
        PointMass(2.0),
    ]


def dkw_sup(dist, draws: np.ndarray) -> float:
    """sup_x |F_hat(x) - F(x)| with tie-aware counts.

    Both step functions are right-continuous and constant between jump
    points, and every jump point of either function is (almost surely) a
    drawn value, so the supremum is attained at the drawn values: either at
    the jump or just before it.
    """
    draws = np.sort(draws)
    xs = np.unique(draws)
    n = draws.size
    at = np.searchsorted(draws, xs, side="right") / n
    f = np.atleast_1d(dist.cdf(xs))
    sup = float(np.max(np.abs(f - at)))
    if dist.atomless:
        below = np.searchsorted(draws, xs, side="left") / n
        sup = max(sup, float(np.max(np.abs(f - below))))
    return sup
