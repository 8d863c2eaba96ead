"""Command-line interface.

Subcommands:

* ``figure``          preset comparison experiments (ids 1..6), CSV out
* ``eval``            one policy evaluation (semi-analytic or Monte Carlo)
* ``check-dominance`` storage-dominance condition scan, exit 0 iff it holds
* ``discount-sweep``  method comparison across discount factors
* ``bellman``         finite-instance verification subcommands

Every run writes the fully resolved configuration next to its output as
``<out>.config.json``; identical configurations produce byte-identical
outputs.  Exit codes: 0 success, 1 a checked contract failed, 2 usage or
configuration error.  A ``--config`` JSON file may supply any long option;
explicit flags win.  ``--workers`` caps concurrency and never affects
results (evaluation is vectorized in-process).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bellman
from .dist import Distribution, Exponential, dist_from_config, dist_to_config
from .evaluate import (
    OuterStudy,
    check_storage_dominance,
    difference_map,
    discount_sweep,
    expected_performance,
    mc_value,
    semianalytic_value,
)
from .rosp import CostModel, PolicySpec, SampleSet, min_acceptable_price
from .streams import RandomStream

PERFORMANCE_COLUMNS = (
    "study_id",
    "method",
    "N",
    "beta",
    "distribution",
    "value_mean",
    "value_stderr",
    "realizations",
    "seed",
    "inner_mode",
)

MAP_COLUMNS = ("study_id", "p1", "p2", "value_diff", "beta", "distribution", "seed", "inner_mode")

FIGURE_PRESETS = {
    1: {"dist": {"kind": "triangular", "a": 0.0, "m": 1.5, "b": 1.5}},
    2: {"dist": {"kind": "triangular", "a": 0.5, "m": 0.5, "b": 2.0}},
    3: {"dist": {"kind": "triangular", "a": 0.0, "m": 0.0, "b": 3.0}},
    4: {"dist": {"kind": "exponential", "rate": 1.0}},
    5: {"dist": {"kind": "lognormal", "log_mean": -0.5, "log_var": 1.0}},
    6: {"dist": {"kind": "lognormal", "log_mean": -0.5, "log_var": 1.0}},
}

DEFAULT_N_VALUES = (2, 3, 4, 5, 6, 8, 10, 15, 20, 30, 50)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _write_config(path: Path, config: dict) -> None:
    side = path.with_name(path.name + ".config.json")
    with open(side, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _resolve(args: argparse.Namespace, key: str, fallback):
    """Flag value if given, else config-file value, else the fallback."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    cfg = getattr(args, "_config", {})
    if key in cfg:
        return cfg[key]
    return fallback


def _load_config(args: argparse.Namespace) -> None:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ValueError("config file must hold a JSON object")
    args._config = cfg


def _dist_arg(raw) -> Distribution:
    if isinstance(raw, dict):
        return dist_from_config(raw)
    return dist_from_config(json.loads(raw))


def _cost_arg(args: argparse.Namespace) -> CostModel:
    kappa = float(_resolve(args, "kappa", 1.0))
    c0 = float(_resolve(args, "c0", 0.0))
    return CostModel.quadratic(kappa) if c0 == 0.0 else CostModel.affine(c0, kappa)


# ---------------------------------------------------------------------------
# figure
# ---------------------------------------------------------------------------


def cmd_figure(args: argparse.Namespace) -> int:
    _load_config(args)
    fig_id = args.id
    if fig_id not in FIGURE_PRESETS:
        print(f"unknown figure id {fig_id}", file=sys.stderr)
        return 2
    seed = int(_resolve(args, "seed", 20240))
    outer = int(_resolve(args, "outer", 100_000))
    beta = float(_resolve(args, "beta", 0.99))
    x1 = float(_resolve(args, "x1", 1.0))
    inner = _resolve(args, "inner", "analytic")
    out = Path(_resolve(args, "out", f"figure{fig_id}.csv"))
    dist = _dist_arg(FIGURE_PRESETS[fig_id]["dist"])
    cost = _cost_arg(args)
    config = {
        "command": "figure",
        "id": fig_id,
        "seed": seed,
        "outer": outer,
        "beta": beta,
        "x1": x1,
        "inner": inner,
        "distribution": dist_to_config(dist),
        "cost": cost.label,
        "workers": int(_resolve(args, "workers", 1)),
    }

    if fig_id == 6:
        grid = _parse_floats(_resolve(args, "map_grid", "")) or tuple(
            np.round(np.linspace(0.1, 5.0, int(_resolve(args, "map_points", 25))), 10)
        )
        config["map_grid"] = list(grid)
        diff = difference_map(dist, beta, cost, x1, grid, grid)
        rows = [
            {
                "study_id": f"figure{fig_id}",
                "p1": p1,
                "p2": p2,
                "value_diff": float(diff[i, j]),
                "beta": beta,
                "distribution": dist.label(),
                "seed": seed,
                "inner_mode": "semianalytic",
            }
            for i, p1 in enumerate(grid)
            for j, p2 in enumerate(grid)
        ]
        _write_csv(out, MAP_COLUMNS, rows)
        _write_config(out, config)
        print(f"wrote {out} ({len(rows)} rows)")
        return 0

    n_values = _parse_ints(str(_resolve(args, "n_values", ""))) or DEFAULT_N_VALUES
    config["n_values"] = list(n_values)
    study = OuterStudy(
        distribution=dist,
        sample_sizes=tuple(n_values),
        outer_realizations=outer,
        beta=beta,
        x1=x1,
        cost=cost,
        seed=seed,
        inner_mode="semianalytic" if inner == "analytic" else "mc",
        mc_horizon=int(_resolve(args, "horizon", 1000)),
        mc_paths=int(_resolve(args, "paths", 1000)),
        study_id=f"figure{fig_id}",
    )
    result = expected_performance(study)
    _write_csv(out, PERFORMANCE_COLUMNS, result.rows)
    _write_config(out, config)
    print(f"wrote {out} ({len(result.rows)} rows)")
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args: argparse.Namespace) -> int:
    _load_config(args)
    dist = _dist_arg(_resolve(args, "dist", None))
    beta = float(_resolve(args, "beta", 0.99))
    x1 = float(_resolve(args, "x1", 1.0))
    seed = int(_resolve(args, "seed", 20240))
    mode = _resolve(args, "mode", "analytic")
    method = _resolve(args, "method", "mpc")
    cost = _cost_arg(args)

    samples = None
    if _resolve(args, "samples", None):
        samples = SampleSet(_parse_floats(_resolve(args, "samples", "")))
    elif method in ("sdp", "mpc"):
        n = int(_resolve(args, "n", 2))
        draw = dist.sample(RandomStream(seed, 301), size=n)
        samples = SampleSet(tuple(np.atleast_1d(draw)))
    spec = PolicySpec(
        method,
        beta,
        cost,
        dist=dist if method == "oracle" else None,
        samples=samples,
    )
    if samples is not None:
        print(f"samples={list(samples.prices)} mu={samples.mu!r}")
        print(f"threshold(x1)={float(min_acceptable_price(spec, x1))!r}")

    if mode == "analytic":
        report = semianalytic_value(spec, dist, x1)
        n_used = samples.n if samples is not None else 0
    elif mode == "mc":
        report = mc_value(
            spec,
            dist,
            x1,
            int(_resolve(args, "horizon", 1000)),
            int(_resolve(args, "paths", 100_000)),
            RandomStream(seed, 302),
        )
        n_used = samples.n if samples is not None else 0
    else:
        print(f"unknown mode {mode!r}", file=sys.stderr)
        return 2

    row = {
        "study_id": "eval",
        "method": method,
        "N": n_used,
        "beta": beta,
        "distribution": dist.label(),
        "value_mean": report.value,
        "value_stderr": report.std_error,
        "realizations": report.realizations,
        "seed": seed,
        "inner_mode": "semianalytic" if mode == "analytic" else "mc",
    }
    out = _resolve(args, "out", None)
    if out:
        path = Path(out)
        _write_csv(path, PERFORMANCE_COLUMNS, [row])
        _write_config(
            path,
            {
                "command": "eval",
                "method": method,
                "beta": beta,
                "x1": x1,
                "seed": seed,
                "mode": mode,
                "distribution": dist_to_config(dist),
                "cost": cost.label,
                "samples": list(samples.prices) if samples else None,
            },
        )
    print(",".join(PERFORMANCE_COLUMNS))
    print(",".join(_fmt(row[c]) for c in PERFORMANCE_COLUMNS))
    return 0


# ---------------------------------------------------------------------------
# check-dominance
# ---------------------------------------------------------------------------


def cmd_check_dominance(args: argparse.Namespace) -> int:
    _load_config(args)
    dist = _dist_arg(_resolve(args, "dist", None))
    samples = SampleSet(_parse_floats(_resolve(args, "samples", "")))
    beta = float(_resolve(args, "beta", 0.99))
    x1 = float(_resolve(args, "x1", 1.0))
    cost = _cost_arg(args)
    report = check_storage_dominance(samples, dist, beta, cost, x1)
    payload = {
        "holds": report.holds,
        "worst_margin": report.worst_margin,
        "arg_min": report.arg_min,
        "margin_at_zero": report.margin_at_zero,
        "beta": beta,
        "x1": x1,
        "cost": cost.label,
        "distribution": dist.label(),
        "samples": list(samples.prices),
    }
    print(json.dumps(payload, sort_keys=True))
    out = _resolve(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return 0 if report.holds else 1


# ---------------------------------------------------------------------------
# discount-sweep
# ---------------------------------------------------------------------------


def cmd_discount_sweep(args: argparse.Namespace) -> int:
    _load_config(args)
    betas = _parse_floats(str(_resolve(args, "betas", "0.9,0.99,0.999")))
    n = int(_resolve(args, "n", 2))
    outer = int(_resolve(args, "outer", 10_000))
    seed = int(_resolve(args, "seed", 20240))
    dist_cfg = _resolve(args, "dist", None)
    dist = _dist_arg(dist_cfg) if dist_cfg else Exponential(1.0)
    cost = _cost_arg(args)
    x1 = float(_resolve(args, "x1", 1.0))
    result = discount_sweep(betas, n, outer, seed, dist, x1, cost)

    sdp_means = [r["value_mean"] for r in result.rows if r["method"] == "sdp"]
    gaps_ok = True
    for i in range(1, len(betas)):
        d = result.values[(betas[i], "sdp")] - result.values[(betas[i - 1], "sdp")]
        se = float(np.std(d, ddof=1) / np.sqrt(d.size))
        if not (float(np.mean(d)) < -3.0 * se):
            gaps_ok = False
    envelope = result.values[("envelope", "one_plus_max")]
    vm_last = result.values[(betas[-1], "mpc")]
    mpc_bounded = float(np.mean(vm_last)) >= -4.0 and float(np.mean(vm_last)) <= float(
        np.mean(envelope)
    )
    monotone = all(later < earlier for earlier, later in zip(sdp_means, sdp_means[1:]))

    out = Path(_resolve(args, "out", "discount_sweep.csv"))
    _write_csv(out, PERFORMANCE_COLUMNS, result.rows)
    _write_config(
        out,
        {
            "command": "discount-sweep",
            "betas": list(betas),
            "n": n,
            "outer": outer,
            "seed": seed,
            "x1": x1,
            "distribution": dist_to_config(dist),
            "cost": cost.label,
        },
    )
    print(f"sdp means: {sdp_means}")
    print(f"monotone_decreasing={monotone} gaps_over_3se={gaps_ok} mpc_bounded={mpc_bounded}")
    print(f"wrote {out}")
    return 0 if (monotone and gaps_ok and mpc_bounded) else 1


# ---------------------------------------------------------------------------
# bellman
# ---------------------------------------------------------------------------


def _bellman_fixture(args: argparse.Namespace):
    instance_path = _resolve(args, "instance", None)
    example = int(_resolve(args, "example", 1))
    if instance_path:
        with open(instance_path, "r", encoding="utf-8") as fh:
            inst = bellman.instance_from_json(fh.read())
        fixture = bellman.example1_fixture() if example == 1 else bellman.example2_fixture()
        return inst, fixture[1], example
    if example == 1:
        inst, amb = bellman.example1_fixture()
    elif example == 2:
        inst, amb = bellman.example2_fixture()
    else:
        raise ValueError(f"unknown example {example}")
    return inst, amb, example


def cmd_bellman(args: argparse.Namespace) -> int:
    _load_config(args)
    sub = args.verify
    epsilon = float(_resolve(args, "epsilon", 1e-9))
    if sub == "verify-equivalence":
        inst, amb, example = _bellman_fixture(args)
        optimistic = example == 2
        direction = "convex" if optimistic else "concave"
        shape_ok = bellman.check_shape_preservation(
            inst, "mpc", direction, int(_resolve(args, "trials", 100)), seed=int(_resolve(args, "seed", 0))
        )
        gap = bellman.robust_equivalence_gap(inst, amb, epsilon, optimistic=optimistic)
        ok = shape_ok and gap <= 2.0 * epsilon
        print(
            json.dumps(
                {
                    "example": example,
                    "operator": "doo" if optimistic else "dro",
                    "gap": gap,
                    "bound": 2.0 * epsilon,
                    "shape_ok": shape_ok,
                    "pass": ok,
                },
                sort_keys=True,
            )
        )
        return 0 if ok else 1
    if sub == "verify-forecast-bound":
        inst, _, example = _bellman_fixture(args)
        report = bellman.forecast_bound_check(inst, epsilon)
        direction = "upper" if example == 1 else "lower"
        viol = report.max_violation(direction)
        ok = viol <= 2.0 * epsilon
        print(
            json.dumps(
                {"example": example, "direction": direction, "max_violation": viol, "pass": ok},
                sort_keys=True,
            )
        )
        return 0 if ok else 1
    if sub == "verify-switch":
        count = int(_resolve(args, "instances", 20))
        seed = int(_resolve(args, "seed", 7))
        failures = 0
        premises = 0
        for i in range(count):
            inst = bellman.random_instance(seed + i)
            stream = RandomStream(seed, 51, i)
            y = bellman.random_policy(inst, stream)
            y_opt = bellman.value_iteration("sdp", inst, 1e-10).greedy
            for y_then in (y_opt, bellman.random_policy(inst, stream)):
                v_then = bellman.evaluate_policy(inst, y_then)
                v_switch = bellman.switch_operator(inst, y, y_then)
                if np.all(v_then <= v_switch + 1e-10):
                    premises += 1
                    v_y = bellman.evaluate_policy(inst, y)
                    if not np.all(v_then <= v_y + 1e-9):
                        failures += 1
        print(json.dumps({"instances": count, "premises_held": premises, "failures": failures}))
        return 0 if failures == 0 and premises > 0 else 1
    print(f"unknown bellman subcommand {sub!r}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soclab",
        description="Selling-policy lab: evaluation experiments and finite-DP verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file supplying any long option")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, help="concurrency cap (results never change)")
        p.add_argument("--kappa", type=float, help="quadratic cost coefficient")
        p.add_argument("--c0", type=float, help="marginal storage cost at zero inventory")
        p.add_argument("--beta", type=float)
        p.add_argument("--x1", type=float)
        p.add_argument("--out")

    p_fig = sub.add_parser("figure", help="run a preset comparison experiment")
    p_fig.add_argument("--id", type=int, required=True)
    p_fig.add_argument("--outer", type=int)
    p_fig.add_argument("--inner", choices=("analytic", "mc"))
    p_fig.add_argument("--n-values", dest="n_values")
    p_fig.add_argument("--map-points", dest="map_points", type=int)
    p_fig.add_argument("--map-grid", dest="map_grid")
    p_fig.add_argument("--horizon", type=int)
    p_fig.add_argument("--paths", type=int)
    add_common(p_fig)
    p_fig.set_defaults(func=cmd_figure)

    p_eval = sub.add_parser("eval", help="evaluate one policy")
    p_eval.add_argument("--method", choices=("oracle", "sdp", "mpc"))
    p_eval.add_argument("--dist", help='JSON, e.g. {"kind":"exponential","rate":1}')
    p_eval.add_argument("--samples", help="comma-separated explicit samples")
    p_eval.add_argument("--n", type=int, help="draw this many samples instead")
    p_eval.add_argument("--mode", choices=("analytic", "mc"))
    p_eval.add_argument("--horizon", type=int)
    p_eval.add_argument("--paths", type=int)
    add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_dom = sub.add_parser("check-dominance", help="scan the storage-dominance condition")
    p_dom.add_argument("--dist", required=True)
    p_dom.add_argument("--samples", required=True)
    add_common(p_dom)
    p_dom.set_defaults(func=cmd_check_dominance)

    p_sweep = sub.add_parser("discount-sweep", help="compare methods across discount factors")
    p_sweep.add_argument("--betas")
    p_sweep.add_argument("--n", type=int)
    p_sweep.add_argument("--outer", type=int)
    p_sweep.add_argument("--dist")
    add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_discount_sweep)

    p_bell = sub.add_parser("bellman", help="finite-instance verification")
    p_bell.add_argument(
        "verify",
        choices=("verify-equivalence", "verify-forecast-bound", "verify-switch"),
    )
    p_bell.add_argument("--example", type=int)
    p_bell.add_argument("--instance", help="JSON instance file")
    p_bell.add_argument("--epsilon", type=float)
    p_bell.add_argument("--trials", type=int)
    p_bell.add_argument("--instances", type=int)
    add_common(p_bell)
    p_bell.set_defaults(func=cmd_bellman)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
