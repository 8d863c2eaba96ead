"""Closed-form policy layer: worked examples and order properties."""

import numpy as np
import pytest

from soclab.dist import Empirical, Exponential, LogNormal, PointMass, Triangular
from soclab.rosp import (
    CostModel,
    PolicySpec,
    SampleSet,
    audit_convexity,
    excess_functional,
    min_acceptable_price,
    sell_down,
    target_inventory,
)
from soclab.streams import RandomStream

COST = CostModel.quadratic(1.0)
SAMPLES = SampleSet((0.5, 1.5))
MPC = PolicySpec("mpc", 0.99, COST, samples=SAMPLES)
SDP = PolicySpec("sdp", 0.99, COST, samples=SAMPLES)


def test_sample_set_invariants():
    s = SampleSet((1.5, 0.5, 1.0))
    assert s.prices == (0.5, 1.0, 1.5)
    assert s.mu == pytest.approx(1.0, abs=1e-12)
    assert s.prices[-1] >= s.mu >= s.prices[0]
    with pytest.raises(ValueError):
        SampleSet(())
    with pytest.raises(ValueError):
        SampleSet((-0.1,))


def test_policy_spec_validation():
    with pytest.raises(ValueError):
        PolicySpec("sdp", 0.99, COST)  # no samples
    with pytest.raises(ValueError):
        PolicySpec("mpc", 1.0, COST, samples=SAMPLES)  # beta out of range
    with pytest.raises(ValueError):
        PolicySpec("nearest", 0.9, COST, samples=SAMPLES)


def test_excess_functional_examples():
    assert float(excess_functional(MPC, 1.0)) == pytest.approx(-0.01, abs=1e-12)
    assert float(excess_functional(SDP, 1.0)) == pytest.approx(0.2375, abs=1e-12)
    mu = 1.3
    orc = PolicySpec("oracle", 0.9, COST, dist=PointMass(mu))
    assert float(excess_functional(orc, mu)) == pytest.approx(-(1.0 - 0.9) * mu, abs=1e-12)


def test_sell_down_examples():
    assert float(sell_down(MPC, 1.0, 0.5)) == pytest.approx(0.49, abs=1e-12)
    assert float(sell_down(MPC, 1.0, 1.0)) == 0.0
    for spec in (MPC, SDP):
        assert float(sell_down(spec, 0.0, 0.7)) == 0.0


def test_target_inventory_examples():
    assert float(target_inventory(MPC, 0.0)) == pytest.approx(0.99, abs=1e-12)
    assert float(target_inventory(SDP, 1.0)) == pytest.approx(0.2375, abs=1e-12)
    # above every believed price with (1 - beta) p >= 0 the target clamps to zero
    assert float(target_inventory(SDP, 2.0)) == 0.0


def test_min_acceptable_price_examples():
    assert float(min_acceptable_price(MPC, 0.5)) == pytest.approx(0.49, abs=1e-12)
    # first branch still applies: 0.99 - 1.5 = -0.51 <= mu
    assert float(min_acceptable_price(MPC, 1.5)) == pytest.approx(-0.51, abs=1e-12)
    assert float(min_acceptable_price(SDP, 0.2375)) == pytest.approx(1.0, abs=1e-9)
    price, boundary = min_acceptable_price(SDP, 0.0, with_boundary_flag=True)
    assert boundary and price > 0.0


def test_thresholds_continuous_oracle_consistent():
    for dist in (Exponential(1.0), Triangular(0.0, 1.5, 1.5), LogNormal(-0.5, 1.0)):
        spec = PolicySpec("oracle", 0.95, COST, dist=dist)
        for x in (0.05, 0.4, 1.1):
            p = min_acceptable_price(spec, x)
            assert float(excess_functional(spec, p)) == pytest.approx(
                float(COST.marginal(x)), abs=1e-9
            )
            assert float(target_inventory(spec, p)) == pytest.approx(x, abs=1e-9)


def _random_case(rng):
    n = int(rng.integers(1, 9))
    prices = np.round(rng.exponential(1.0, n), 6)
    beta = float(rng.uniform(0.05, 0.995))
    kappa = float(rng.uniform(0.1, 5.0))
    cost = CostModel.quadratic(kappa)
    samples = SampleSet(tuple(prices))
    return (
        PolicySpec("sdp", beta, cost, samples=samples),
        PolicySpec("mpc", beta, cost, samples=samples),
        rng,
    )


def test_jensen_dominance_random():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        sdp, mpc, rng = _random_case(rng)
        p = float(rng.uniform(-1.0, 5.0))
        x = float(rng.uniform(1e-6, 3.0))
        assert float(target_inventory(sdp, p)) >= float(target_inventory(mpc, p)) - 1e-10
        assert float(min_acceptable_price(sdp, x)) >= float(min_acceptable_price(mpc, x)) - 1e-10


def test_threshold_cap_and_equality_below_samples():
    rng = np.random.default_rng(11)
    for _ in range(300):
        sdp, mpc, rng = _random_case(rng)
        x = float(rng.uniform(1e-6, 2.0))
        assert float(min_acceptable_price(sdp, x)) <= max(sdp.samples.prices) + 1e-12
        # below the smallest sample the two excess functionals coincide
        p = sdp.samples.prices[0] - float(rng.uniform(0.0, 1.0))
        assert float(sell_down(sdp, x, p)) == pytest.approx(
            float(sell_down(mpc, x, p)), abs=1e-10
        )


def test_round_trip_and_projection_structure():
    rng = np.random.default_rng(13)
    for _ in range(300):
        sdp, mpc, rng = _random_case(rng)
        for spec in (sdp, mpc):
            x = float(rng.uniform(0.01, 2.0))
            p_star = float(min_acceptable_price(spec, x))
            assert float(target_inventory(spec, p_star)) == pytest.approx(x, abs=1e-9)
            p = float(rng.uniform(-0.5, 4.0))
            assert float(sell_down(spec, x, p)) == pytest.approx(
                min(float(target_inventory(spec, p)), x), abs=1e-12
            )


def test_sell_down_monotonicity():
    rng = np.random.default_rng(17)
    for _ in range(200):
        sdp, _, rng = _random_case(rng)
        x = float(rng.uniform(0.01, 2.0))
        ps = np.sort(rng.uniform(-0.5, 4.0, 8))
        ys = [float(sell_down(sdp, x, p)) for p in ps]
        assert all(b <= a + 1e-12 for a, b in zip(ys, ys[1:]))  # nonincreasing in p
        p = float(rng.uniform(-0.5, 4.0))
        xs = np.sort(rng.uniform(0.0, 2.0, 8))
        ys = [float(sell_down(sdp, xv, p)) for xv in xs]
        assert all(a <= b + 1e-12 for a, b in zip(ys, ys[1:]))  # nondecreasing in x


def test_cost_models():
    affine = CostModel.affine(0.5, 2.0)
    grid = np.linspace(0.0, 3.0, 50)
    audit_convexity(CostModel.quadratic(1.0), grid)
    audit_convexity(affine, grid)
    assert affine.marginal_at_zero == 0.5
    assert float(affine.marginal_inv(affine.marginal(1.7))) == pytest.approx(1.7, abs=1e-12)
    concave = CostModel(
        cost=lambda x: np.sqrt(np.asarray(x, dtype=float)),
        marginal=lambda x: 0.5 / np.sqrt(np.maximum(x, 1e-9)),
        marginal_inv=lambda z: 0.25 / np.square(z),
        label="sqrt",
    )
    with pytest.raises(ValueError):
        audit_convexity(concave, np.linspace(0.1, 2.0, 20))


def test_sample_set_draw_reproducible():
    d = Exponential(1.0)
    a = SampleSet.draw(d, 5, RandomStream(3, 1))
    b = SampleSet.draw(d, 5, RandomStream(3, 1))
    assert a == b
