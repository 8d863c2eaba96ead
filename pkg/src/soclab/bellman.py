"""Finite-grid dynamic programming engine.

Instances are fully tabulated minimization problems: a finite state grid, a
finite noise law (atoms with probabilities), a cost table cost[x, y, k] for
moving from state x to state y under atom k, and a feasibility mask.  Value
tables live on (state, atom) pairs.  Four Bellman operators act on them:

* sdp   expectation of the continuation over the atom law
* mpc   continuation evaluated at a deterministic forecast atom
* dro   worst-case expectation over an ambiguity set of atom laws
* doo   best-case expectation over an ambiguity set

All four are sup-norm contractions with modulus beta, so value iteration with
the stopping rule step <= eps (1 - beta) / (2 beta) returns a table within
eps / 2 of the fixed point.  On top sit policy evaluation (exact linear
solve), the policy-switch operator, shape-preservation checks, and numeric
verification of the forecast/robust equivalence and the forecast bound, plus
builders for two benchmark families: commodity production with price noise in
the objective, and reservoir scheduling with inflow noise in the constraints.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .streams import RandomStream

__all__ = [
    "FiniteInstance",
    "ValueTable",
    "AmbiguitySet",
    "BoundReport",
    "apply_operator",
    "value_iteration",
    "evaluate_policy",
    "policy_step",
    "switch_operator",
    "switch_iterates",
    "check_shape_preservation",
    "robust_equivalence_gap",
    "forecast_bound_check",
    "build_example1",
    "build_example2",
    "example1_fixture",
    "example2_fixture",
    "random_instance",
    "random_policy",
    "instance_to_json",
    "instance_from_json",
]

OPERATOR_KINDS = ("sdp", "mpc", "dro", "doo")


@dataclass(frozen=True)
class FiniteInstance:
    """A tabulated stochastic control problem on a finite grid.

    ``shape_coord``/``shape_groups`` optionally mark a scalar coordinate of
    the state (price, storage, ...) used when seeding shape-preservation
    tests with jointly shaped tables; states in the same group share the
    other coordinates.
    """

    state_labels: tuple
    noise_values: np.ndarray          # (K,)
    noise_probs: np.ndarray           # (K,)
    cost: np.ndarray                  # (S, S, K), cost[x, y, k]
    feasible: np.ndarray              # (S, K, S) bool, feasible[x, k, y]
    beta: float
    forecast: Optional[float] = None
    shape_coord: Optional[np.ndarray] = None   # (S,)
    shape_groups: Optional[np.ndarray] = None  # (S,) int
    label: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "noise_values", np.asarray(self.noise_values, dtype=float))
        object.__setattr__(self, "noise_probs", np.asarray(self.noise_probs, dtype=float))
        object.__setattr__(self, "cost", np.asarray(self.cost, dtype=float))
        object.__setattr__(self, "feasible", np.asarray(self.feasible, dtype=bool))
        s, k = self.n_states, self.n_atoms
        if self.cost.shape != (s, s, k) or self.feasible.shape != (s, k, s):
            raise ValueError("cost/feasible shapes do not match the grids")
        if abs(float(self.noise_probs.sum()) - 1.0) > 1e-12 or np.any(self.noise_probs < 0):
            raise ValueError("atom probabilities must be nonnegative and sum to 1")
        if not np.all(self.feasible.any(axis=2)):
            raise ValueError("every (state, atom) pair needs a nonempty feasible set")
        if not np.all(np.isfinite(self.cost[self.feasible.transpose(0, 2, 1)])):
            raise ValueError("cost must be finite on feasible transitions")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")

    @property
    def n_states(self) -> int:
        return len(self.state_labels)

    @property
    def n_atoms(self) -> int:
        return self.noise_values.size

    def forecast_index(self) -> int:
        if self.forecast is None:
            raise ValueError("instance has no forecast configured")
        hits = np.nonzero(np.isclose(self.noise_values, self.forecast, rtol=0.0, atol=1e-12))[0]
        if hits.size == 0:
            raise ValueError(
                f"forecast {self.forecast} is not on the atom grid {self.noise_values.tolist()}"
            )
        return int(hits[0])

    def atom_mean(self) -> float:
        return float(self.noise_values @ self.noise_probs)


@dataclass(frozen=True)
class ValueTable:
    values: np.ndarray  # (S, K)
    greedy: np.ndarray  # (S, K) int, chosen next state

    def sup_distance(self, other: "ValueTable") -> float:
        return float(np.max(np.abs(self.values - other.values)))


@dataclass(frozen=True)
class AmbiguitySet:
    """Finitely many atom laws sharing the instance's support."""

    members: tuple

    def __post_init__(self):
        members = tuple(np.asarray(m, dtype=float) for m in self.members)
        if len(members) == 0:
            raise ValueError("ambiguity set needs at least one member")
        for m in members:
            if abs(float(m.sum()) - 1.0) > 1e-12 or np.any(m < 0):
                raise ValueError("each member must be a probability vector")
        object.__setattr__(self, "members", members)

    def stacked(self) -> np.ndarray:
        return np.stack(self.members, axis=0)

    def validate_for(self, inst: FiniteInstance, require_point_mass: bool = True) -> None:
        """Check the mean constraint (and the point-mass membership) of the
        forecast/robust equivalence."""
        fidx = inst.forecast_index()
        for m in self.members:
            if m.size != inst.n_atoms:
                raise ValueError("member support does not match the instance atoms")
            if abs(float(m @ inst.noise_values) - inst.forecast) > 1e-12:
                raise ValueError("every member must have mean equal to the forecast")
        if require_point_mass:
            point = np.zeros(inst.n_atoms)
            point[fidx] = 1.0
            if not any(np.array_equal(m, point) for m in self.members):
                raise ValueError("the point mass at the forecast must belong to the set")


def _continuation(
    kind: str, inst: FiniteInstance, values: np.ndarray, ambiguity: Optional[AmbiguitySet]
) -> np.ndarray:
    if kind == "sdp":
        return values @ inst.noise_probs
    if kind == "mpc":
        return values[:, inst.forecast_index()]
    if kind in ("dro", "doo"):
        if ambiguity is None:
            raise ValueError(f"{kind} operator needs an ambiguity set")
        per_member = values @ ambiguity.stacked().T  # (S, n_members)
        return per_member.max(axis=1) if kind == "dro" else per_member.min(axis=1)
    raise ValueError(f"unknown operator kind {kind!r}")


def apply_operator(
    kind: str,
    inst: FiniteInstance,
    table: ValueTable,
    ambiguity: Optional[AmbiguitySet] = None,
) -> ValueTable:
    """One Bellman application of the requested kind."""
    cont = _continuation(kind, inst, table.values, ambiguity)
    s, k = inst.n_states, inst.n_atoms
    values = np.empty((s, k))
    greedy = np.empty((s, k), dtype=int)
    for j in range(k):
        total = np.where(inst.feasible[:, j, :], inst.cost[:, :, j] + inst.beta * cont[None, :], np.inf)
        greedy[:, j] = np.argmin(total, axis=1)
        values[:, j] = total[np.arange(s), greedy[:, j]]
    return ValueTable(values=values, greedy=greedy)


def value_iteration(
    kind: str,
    inst: FiniteInstance,
    epsilon: float = 1e-9,
    ambiguity: Optional[AmbiguitySet] = None,
    max_iterations: int = 1_000_000,
) -> ValueTable:
    """Iterate from zero until certified within epsilon/2 of the fixed point."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    threshold = epsilon * (1.0 - inst.beta) / (2.0 * inst.beta)
    table = ValueTable(
        values=np.zeros((inst.n_states, inst.n_atoms)),
        greedy=np.zeros((inst.n_states, inst.n_atoms), dtype=int),
    )
    for _ in range(max_iterations):
        nxt = apply_operator(kind, inst, table, ambiguity)
        step = nxt.sup_distance(table)
        table = nxt
        if step <= threshold:
            return table
    raise RuntimeError("value iteration failed to converge within the iteration cap")


def _check_policy(inst: FiniteInstance, policy: np.ndarray) -> np.ndarray:
    policy = np.asarray(policy, dtype=int)
    if policy.shape != (inst.n_states, inst.n_atoms):
        raise ValueError("policy must map every (state, atom) pair to a next state")
    s_idx = np.repeat(np.arange(inst.n_states), inst.n_atoms)
    k_idx = np.tile(np.arange(inst.n_atoms), inst.n_states)
    if not np.all(inst.feasible[s_idx, k_idx, policy.ravel()]):
        raise ValueError("policy chooses infeasible transitions")
    return policy


def evaluate_policy(inst: FiniteInstance, policy: np.ndarray) -> np.ndarray:
    """Per-state value of following the policy forever (exact linear solve).

    Solves V(x) = sum_k p_k [cost(x, y(x, k), k) + beta V(y(x, k))].
    """
    policy = _check_policy(inst, policy)
    s = inst.n_states
    r = np.zeros(s)
    m = np.zeros((s, s))
    for j in range(inst.n_atoms):
        pj = inst.noise_probs[j]
        dest = policy[:, j]
        r += pj * inst.cost[np.arange(s), dest, j]
        np.add.at(m, (np.arange(s), dest), inst.beta * pj)
    return np.linalg.solve(np.eye(s) - m, r)


def policy_step(inst: FiniteInstance, policy: np.ndarray, continuation: np.ndarray) -> np.ndarray:
    """One stage under the policy followed by an arbitrary continuation value."""
    policy = _check_policy(inst, policy)
    s = inst.n_states
    out = np.zeros(s)
    for j in range(inst.n_atoms):
        dest = policy[:, j]
        out += inst.noise_probs[j] * (
            inst.cost[np.arange(s), dest, j] + inst.beta * continuation[dest]
        )
    return out


def switch_operator(inst: FiniteInstance, policy: np.ndarray, policy_then: np.ndarray) -> np.ndarray:
    """Value of one stage under ``policy`` and ``policy_then`` forever after."""
    return policy_step(inst, policy, evaluate_policy(inst, policy_then))


def switch_iterates(
    inst: FiniteInstance, policy: np.ndarray, policy_then: np.ndarray, stages: int
) -> np.ndarray:
    """Value of ``stages`` stages under ``policy`` then ``policy_then`` forever."""
    if stages < 1:
        raise ValueError("need at least one stage")
    v = evaluate_policy(inst, policy_then)
    for _ in range(stages):
        v = policy_step(inst, policy, v)
    return v


# ---------------------------------------------------------------------------
# Shape preservation
# ---------------------------------------------------------------------------


def _uniform_spacing(values: np.ndarray) -> float:
    diffs = np.diff(values)
    if diffs.size == 0:
        return 0.0
    h = float(diffs[0])
    if h <= 0 or np.max(np.abs(diffs - h)) > 1e-9 * max(1.0, abs(h)):
        raise ValueError("shape checks need noise atoms on a uniform ascending grid")
    return h


def _random_shaped_table(
    inst: FiniteInstance, direction: str, stream: RandomStream
) -> ValueTable:
    """A random table with the requested shape along the noise axis.

    Without a shape coordinate: per-state sequences built from monotone
    slope increments.  With one: per-group min (concave) or max (convex) of
    random affine functions of (coordinate, noise), so the table is jointly
    shaped in the marked state coordinate and the noise.
    """
    s, k = inst.n_states, inst.n_atoms
    xi = inst.noise_values
    if inst.shape_coord is None:
        slopes = np.sort(stream.uniforms((s, max(k - 1, 1))) * 4.0 - 2.0, axis=1)
        if direction == "concave":
            slopes = slopes[:, ::-1]
        start = stream.uniforms(s) * 2.0 - 1.0
        values = np.concatenate(
            [start[:, None], start[:, None] + np.cumsum(slopes[:, : k - 1], axis=1)], axis=1
        )[:, :k]
        return ValueTable(values=values, greedy=np.zeros((s, k), dtype=int))
    u = np.asarray(inst.shape_coord, dtype=float)
    groups = (
        np.asarray(inst.shape_groups, dtype=int)
        if inst.shape_groups is not None
        else np.zeros(s, dtype=int)
    )
    values = np.empty((s, k))
    n_planes = 6
    for g in np.unique(groups):
        sel = groups == g
        a = stream.uniforms(n_planes) * 4.0 - 2.0
        b = stream.uniforms(n_planes) * 4.0 - 2.0
        c = stream.uniforms(n_planes) * 2.0 - 1.0
        planes = a[:, None, None] * u[sel][None, :, None] + b[:, None, None] * xi[None, None, :] + c[:, None, None]
        values[sel] = planes.min(axis=0) if direction == "concave" else planes.max(axis=0)
    return ValueTable(values=values, greedy=np.zeros((s, k), dtype=int))


def check_shape_preservation(
    inst: FiniteInstance,
    kind: str,
    direction: str,
    trials: int,
    seed: int = 0,
    ambiguity: Optional[AmbiguitySet] = None,
    tol: float = 1e-10,
) -> bool:
    """Does one operator application keep random shaped tables shaped?

    Seeds ``trials`` random tables with the stated shape along the noise
    axis, applies the operator, and tests discrete second differences along
    the (uniform) atom grid at every state.
    """
    if direction not in ("concave", "convex"):
        raise ValueError("direction must be 'concave' or 'convex'")
    _uniform_spacing(inst.noise_values)
    stream = RandomStream(seed, 31)
    for _ in range(trials):
        table = _random_shaped_table(inst, direction, stream)
        out = apply_operator(kind, inst, table, ambiguity).values
        if out.shape[1] >= 3:
            d2 = out[:, :-2] - 2.0 * out[:, 1:-1] + out[:, 2:]
            scale = max(1.0, float(np.max(np.abs(out))))
            if direction == "concave" and np.any(d2 > tol * scale):
                return False
            if direction == "convex" and np.any(d2 < -tol * scale):
                return False
    return True


# ---------------------------------------------------------------------------
# Equivalence and bound verification
# ---------------------------------------------------------------------------


def robust_equivalence_gap(
    inst: FiniteInstance,
    ambiguity: AmbiguitySet,
    epsilon: float = 1e-9,
    optimistic: bool = False,
) -> float:
    """Sup-norm gap between the forecast (mpc) and the dro/doo fixed points.

    With every ambiguity member sharing the forecast as its mean, the point
    mass at the forecast in the set, and the operator shape preserving
    (concave for dro, convex for doo), the two fixed points coincide; the
    returned gap should then be at most 2 * epsilon.
    """
    ambiguity.validate_for(inst, require_point_mass=True)
    v_mpc = value_iteration("mpc", inst, epsilon)
    v_amb = value_iteration("doo" if optimistic else "dro", inst, epsilon, ambiguity)
    return float(np.max(np.abs(v_mpc.values - v_amb.values)))


@dataclass(frozen=True)
class BoundReport:
    """Forecast-solution value vs realized value of its greedy policy."""

    predicted: np.ndarray  # (S,) mpc fixed point at the forecast atom
    realized: np.ndarray   # (S,) policy value under the true atom law

    def max_violation(self, direction: str) -> float:
        """Worst margin of realized <= predicted ('upper') or >= ('lower')."""
        if direction == "upper":
            return float(np.max(self.realized - self.predicted))
        if direction == "lower":
            return float(np.max(self.predicted - self.realized))
        raise ValueError("direction must be 'upper' or 'lower'")


def forecast_bound_check(inst: FiniteInstance, epsilon: float = 1e-9) -> BoundReport:
    """Compare the forecast fixed point against its policy's realized value.

    Requires the forecast to equal the exact mean of the atom law.  On
    concavity-preserving instances realized <= predicted (the forecast value
    is an upper bound on realized cost); on convexity-preserving instances
    the inequality reverses.
    """
    if abs(inst.atom_mean() - float(inst.forecast)) > 1e-12:
        raise ValueError("the forecast must equal the exact mean of the atom law")
    v_mpc = value_iteration("mpc", inst, epsilon)
    realized = evaluate_policy(inst, v_mpc.greedy)
    predicted = v_mpc.values[:, inst.forecast_index()]
    return BoundReport(predicted=predicted, realized=realized)


# ---------------------------------------------------------------------------
# Instance builders
# ---------------------------------------------------------------------------


def _snap_index(grid: np.ndarray, value: float, half_cell: float) -> int:
    idx = int(np.argmin(np.abs(grid - value)))
    if abs(grid[idx] - value) > half_cell + 1e-12:
        raise ValueError(
            f"grid too coarse: {value} is {abs(grid[idx]-value):.3g} from the nearest "
            f"grid point, beyond half a cell ({half_cell:.3g})"
        )
    return idx


def build_example1(
    inventory_grid: Sequence[float],
    price_grid: Sequence[float],
    atom_values: Sequence[float],
    atom_probs: Sequence[float],
    alpha: float = 0.0,
    production: float = 0.25,
    storage_cost: float = 0.05,
    beta: float = 0.9,
    forecast: Optional[float] = None,
) -> FiniteInstance:
    """Commodity production sold at an autoregressive spot price.

    State is (inventory, previous price); the current price alpha * q + xi
    enters the objective only.  Selling more than production requires
    inventory; the marginal storage cost is charged on what remains.  Costs
    are linear (hence concave) in the price noise, so the forecast operator
    is concavity preserving when transitions land exactly on the price grid
    (guaranteed for alpha = 0 with atoms on the grid).
    """
    inv = np.asarray(inventory_grid, dtype=float)
    prices = np.asarray(price_grid, dtype=float)
    xi = np.asarray(atom_values, dtype=float)
    probs = np.asarray(atom_probs, dtype=float)
    if not (0.0 <= alpha < 1.0):
        raise ValueError("alpha must lie in [0, 1)")
    if forecast is None:
        forecast = float(xi @ probs)
    if not np.any(np.isclose(xi, forecast, atol=1e-12)):
        xi = np.append(xi, forecast)
        probs = np.append(probs, 0.0)
    order = np.argsort(xi)
    xi, probs = xi[order], probs[order]
    half_cell = 0.5 * float(np.min(np.diff(prices))) if prices.size > 1 else math.inf

    labels = [(float(x), float(q)) for x in inv for q in prices]
    nq = prices.size
    s = len(labels)
    k = xi.size
    cost = np.zeros((s, s, k))
    feasible = np.zeros((s, k, s), dtype=bool)
    for si, (x, q) in enumerate(labels):
        for j in range(k):
            p = alpha * q + float(xi[j])
            pj = _snap_index(prices, p, half_cell)
            sellable = x + production
            for yi, y in enumerate(inv):
                if y <= sellable + 1e-12:
                    ti = yi * nq + pj
                    feasible[si, j, ti] = True
                    cost[si, ti, j] = -p * (sellable - y) + storage_cost * y
    return FiniteInstance(
        state_labels=tuple(labels),
        noise_values=xi,
        noise_probs=probs,
        cost=cost,
        feasible=feasible,
        beta=beta,
        forecast=forecast,
        shape_coord=np.asarray([q for _, q in labels]),
        shape_groups=np.asarray([int(i // nq) for i in range(s)]),
        label=f"production(alpha={alpha:g})",
    )


def build_example2(
    storage_grid: Sequence[float],
    atom_values: Sequence[float],
    atom_probs: Sequence[float],
    demand: float = 0.5,
    beta: float = 0.9,
    forecast: Optional[float] = None,
) -> FiniteInstance:
    """Reservoir scheduling: meet demand from hydro release plus thermal.

    State is reservoir storage; inflow noise enters the transition
    y = x - h + xi (with spill when the release cannot absorb the inflow).
    Thermal generation max(d - h, 0) is the stage cost, jointly convex in
    (state, next state, noise), so the forecast operator is convexity
    preserving.  Atoms must sit on the storage lattice so transitions are
    exact.
    """
    grid = np.asarray(storage_grid, dtype=float)
    xi = np.asarray(atom_values, dtype=float)
    probs = np.asarray(atom_probs, dtype=float)
    if grid.size > 1:
        h = float(np.min(np.diff(grid)))
        off = np.abs(np.round(xi / h) * h - xi)
        if np.any(off > 1e-12):
            raise ValueError("inflow atoms must be multiples of the storage grid spacing")
    if forecast is None:
        forecast = float(xi @ probs)
    if not np.any(np.isclose(xi, forecast, atol=1e-12)):
        xi = np.append(xi, forecast)
        probs = np.append(probs, 0.0)
    order = np.argsort(xi)
    xi, probs = xi[order], probs[order]

    s = grid.size
    k = xi.size
    cost = np.zeros((s, s, k))
    feasible = np.zeros((s, k, s), dtype=bool)
    for si, x in enumerate(grid):
        for j, inflow in enumerate(xi):
            for yi, y in enumerate(grid):
                if y <= x + inflow + 1e-12:
                    release = min(x, x + inflow - y)  # remainder spills at capacity
                    feasible[si, j, yi] = True
                    cost[si, yi, j] = max(demand - release, 0.0)
    return FiniteInstance(
        state_labels=tuple(float(x) for x in grid),
        noise_values=xi,
        noise_probs=probs,
        cost=cost,
        feasible=feasible,
        beta=beta,
        forecast=forecast,
        shape_coord=grid.copy(),
        shape_groups=np.zeros(s, dtype=int),
        label="reservoir",
    )


def example1_fixture() -> tuple[FiniteInstance, AmbiguitySet]:
    """Default concave fixture with an exact-mean dyadic ambiguity set."""
    inst = build_example1(
        inventory_grid=np.linspace(0.0, 1.0, 5),
        price_grid=np.arange(0.25, 2.0, 0.25),
        atom_values=(0.5, 1.0, 1.5),
        atom_probs=(0.25, 0.5, 0.25),
        alpha=0.0,
        production=0.25,
        storage_cost=0.05,
        beta=0.9,
    )
    ambiguity = AmbiguitySet(
        members=(
            (0.25, 0.5, 0.25),   # the atom law itself
            (0.0, 1.0, 0.0),     # point mass at the forecast
            (0.375, 0.25, 0.375),  # mean-preserving spread
        )
    )
    return inst, ambiguity


def example2_fixture() -> tuple[FiniteInstance, AmbiguitySet]:
    """Default convex fixture with an exact-mean dyadic ambiguity set."""
    inst = build_example2(
        storage_grid=np.linspace(0.0, 1.0, 5),
        atom_values=(0.0, 0.25, 0.5),
        atom_probs=(0.25, 0.5, 0.25),
        demand=0.3,
        beta=0.9,
    )
    ambiguity = AmbiguitySet(
        members=(
            (0.25, 0.5, 0.25),
            (0.0, 1.0, 0.0),
            (0.5, 0.0, 0.5),
        )
    )
    return inst, ambiguity


# ---------------------------------------------------------------------------
# Random instances (verification harnesses)
# ---------------------------------------------------------------------------


def random_instance(seed: int, n_states: int = 4, n_atoms: int = 3) -> FiniteInstance:
    """A small random instance with nonempty feasible sets and finite costs."""
    stream = RandomStream(seed, 41)
    probs = 0.1 + stream.uniforms(n_atoms)
    probs = probs / probs.sum()
    cost = stream.uniforms((n_states, n_states, n_atoms)) * 2.0
    feasible = stream.uniforms((n_states, n_atoms, n_states)) < 0.6
    anchor = stream.integers(0, n_states, size=(n_states, n_atoms))
    for x in range(n_states):
        for j in range(n_atoms):
            feasible[x, j, anchor[x, j]] = True
    beta = 0.6 + 0.35 * stream.uniform()
    values = np.arange(n_atoms, dtype=float)
    return FiniteInstance(
        state_labels=tuple(range(n_states)),
        noise_values=values,
        noise_probs=probs,
        cost=cost,
        feasible=feasible,
        beta=beta,
        forecast=float(values[0]),
        label=f"random({seed})",
    )


def random_policy(inst: FiniteInstance, stream: RandomStream) -> np.ndarray:
    """A uniformly random feasible policy."""
    policy = np.empty((inst.n_states, inst.n_atoms), dtype=int)
    for x in range(inst.n_states):
        for j in range(inst.n_atoms):
            options = np.nonzero(inst.feasible[x, j])[0]
            policy[x, j] = options[int(stream.integers(0, options.size))]
    return policy


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def instance_to_json(inst: FiniteInstance) -> str:
    payload = {
        "label": inst.label,
        "state_labels": [list(s) if isinstance(s, tuple) else s for s in inst.state_labels],
        "noise_values": inst.noise_values.tolist(),
        "noise_probs": inst.noise_probs.tolist(),
        "cost": inst.cost.tolist(),
        "feasible": inst.feasible.astype(int).tolist(),
        "beta": inst.beta,
        "forecast": inst.forecast,
        "shape_coord": None if inst.shape_coord is None else inst.shape_coord.tolist(),
        "shape_groups": None if inst.shape_groups is None else inst.shape_groups.tolist(),
    }
    return json.dumps(payload, indent=1, sort_keys=True)


def instance_from_json(text: str) -> FiniteInstance:
    raw = json.loads(text)
    labels = tuple(tuple(s) if isinstance(s, list) else s for s in raw["state_labels"])
    return FiniteInstance(
        state_labels=labels,
        noise_values=np.asarray(raw["noise_values"], dtype=float),
        noise_probs=np.asarray(raw["noise_probs"], dtype=float),
        cost=np.asarray(raw["cost"], dtype=float),
        feasible=np.asarray(raw["feasible"], dtype=bool),
        beta=float(raw["beta"]),
        forecast=None if raw["forecast"] is None else float(raw["forecast"]),
        shape_coord=None if raw["shape_coord"] is None else np.asarray(raw["shape_coord"], dtype=float),
        shape_groups=None if raw["shape_groups"] is None else np.asarray(raw["shape_groups"], dtype=int),
        label=raw.get("label", "instance"),
    )
