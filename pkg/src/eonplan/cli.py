"""Command-line interface: run, compare, export-dataset, validate, export-lp."""

from __future__ import annotations

import argparse
import math
import sys

from .errors import ConfigError, DataError
from .ilp import SC1_WEIGHTS, build_instance, export_lp
from .planner import (
    APPROACHES,
    RunResult,
    compare,
    emit_reports,
    load_scenario,
    resolve_weights,
    run,
    _naive_matrix,
    _prepare,
)
from .spectrum import NetworkState
from .traffic import export_dataset, ingest_predictions, make_windows

CLI_APPROACHES = ("ilp-sc1", "ilp-sc2", "mmd", "mad")


def _overrides(args) -> dict:
    out: dict = {}
    if getattr(args, "approach", None):
        out["approach"] = args.approach
    if getattr(args, "u", None) is not None:
        out["u"] = args.u
    if getattr(args, "seed", None) is not None:
        out["demand_seed"] = args.seed
    if getattr(args, "weights", None) is not None:
        out["weights"] = tuple(args.weights)
    if getattr(args, "out", None):
        out["out_dir"] = args.out
    if getattr(args, "time_limit", None) is not None:
        out["time_limit_s"] = args.time_limit
    return out


def _print_result(res: RunResult) -> None:
    m = res.metrics
    print(
        f"{m.approach} u={m.u}: blocked={m.blocked} disruptions={m.disruptions} "
        f"under_gbps={m.under_gbps:.6g} over_gbps={m.over_gbps:.6g} "
        f"under_fs={m.under_fs:.6g} over_fs={m.over_fs:.6g} "
        f"utilization_fs={m.utilization_fs:.6g} f_max={m.f_max:.6g} "
        f"avg_epoch_ms={m.avg_epoch_ms:.3f}"
    )


def _cmd_run(args) -> int:
    cfg = load_scenario(args.scenario, _overrides(args))
    result = run(cfg)
    _print_result(result)
    if cfg.out_dir:
        paths = emit_reports([result], cfg.out_dir, include_timing=args.timing)
        print(f"wrote {paths['summary']} and {paths['epochs']}")
    return 0


def _cmd_compare(args) -> int:
    overrides = _overrides(args)
    overrides.pop("approach", None)
    overrides.pop("u", None)
    cfg = load_scenario(args.scenario, overrides)
    approaches = [a.strip() for a in args.approaches.split(",") if a.strip()]
    try:
        u_list = [int(u) for u in args.u_list.split(",") if u.strip()]
    except ValueError:
        raise ConfigError(f"--u-list must be comma-separated integers: {args.u_list}")
    results = compare(cfg, approaches, u_list)
    for res in results:
        _print_result(res)
    if cfg.out_dir:
        paths = emit_reports(results, cfg.out_dir, include_timing=args.timing)
        print(f"wrote {paths['summary']} and {paths['epochs']}")
    return 0


def _cmd_export_dataset(args) -> int:
    cfg = load_scenario(args.scenario, _overrides(args))
    _topo, demands, _candidates, iv, _test_start = _prepare(cfg)
    r = args.r if args.r is not None else (cfg.dataset_r or cfg.u + 4)
    out = args.dataset_out or (cfg.out_dir and f"{cfg.out_dir}/dataset")
    if not out:
        raise ConfigError("no output directory: pass --out or set out in the scenario")
    datasets = [make_windows(iv[conn], r, cfg.u) for conn in sorted(demands)]
    written = export_dataset(datasets, out, cfg.tau_minutes, cfg.scale)
    print(f"wrote {len(written)} files to {out}")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_scenario(args.scenario, _overrides(args))
    topo, demands, candidates, iv, _test_start = _prepare(cfg)
    if cfg.predictions_path:
        ingest_predictions(
            cfg.predictions_path,
            cfg.u,
            scale=cfg.scale,
            expected_conns=set(demands),
            num_epochs=math.ceil(cfg.t_test / cfg.u),
        )
    total = next(iter(iv.values())).num_intervals
    print(
        f"scenario ok: {len(demands)} connections, {topo.num_links} links, "
        f"{cfg.num_slots} slots, {total} intervals, "
        f"{math.ceil(cfg.t_test / cfg.u)} planning epochs"
    )
    return 0


def _cmd_export_lp(args) -> int:
    cfg = load_scenario(args.scenario, _overrides(args))
    topo, demands, candidates, iv, test_start = _prepare(cfg)
    num_epochs = math.ceil(cfg.t_test / cfg.u)
    if cfg.predictions_path:
        matrices = ingest_predictions(
            cfg.predictions_path,
            cfg.u,
            scale=cfg.scale,
            expected_conns=set(demands),
            num_epochs=num_epochs,
        )
        pred = matrices[0]
    else:
        pred = _naive_matrix(iv, 0, test_start - 1, cfg.u, cfg.scale)
    weights = resolve_weights(cfg) or SC1_WEIGHTS
    state = NetworkState(topo.num_links, cfg.num_slots)
    instance = build_instance(state, pred, candidates, weights, cfg.baud_gbaud)
    export_lp(instance, args.lp_out)
    print(
        f"wrote {args.lp_out}: {instance.num_variables} variables, "
        f"{instance.num_constraints} constraints"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eonplan",
        description="Multi-period elastic optical network planning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, approach: bool = True) -> None:
        p.add_argument("--scenario", required=True, help="scenario YAML file")
        if approach:
            p.add_argument(
                "--approach", choices=CLI_APPROACHES, help="override the approach"
            )
            p.add_argument("--u", type=int, help="override the planning horizon")
        p.add_argument("--seed", type=int, help="override the demand seed")
        p.add_argument(
            "--weights",
            type=float,
            nargs=5,
            metavar=("W1", "W2", "W3", "W4", "W5"),
            help="override the objective weight vector",
        )
        p.add_argument("--out", help="override the output directory")
        p.add_argument(
            "--time-limit", type=float, help="solver time limit in seconds"
        )

    p_run = sub.add_parser("run", help="simulate one approach on a scenario")
    common(p_run)
    p_run.add_argument(
        "--timing", action="store_true", help="include wall times in CSV output"
    )
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run several approaches and horizons")
    common(p_cmp, approach=False)
    p_cmp.add_argument(
        "--approaches",
        required=True,
        help=f"comma-separated subset of {','.join(CLI_APPROACHES)}",
    )
    p_cmp.add_argument(
        "--u-list", required=True, help="comma-separated planning horizons"
    )
    p_cmp.add_argument(
        "--timing", action="store_true", help="include wall times in CSV output"
    )
    p_cmp.set_defaults(func=_cmd_compare)

    p_ds = sub.add_parser(
        "export-dataset", help="export per-connection training windows"
    )
    common(p_ds)
    p_ds.add_argument("--r", type=int, help="input window length in intervals")
    p_ds.add_argument(
        "--dataset-out",
        dest="dataset_out",
        help="dataset directory (defaults to <out>/dataset)",
    )
    p_ds.set_defaults(func=_cmd_export_dataset)

    p_val = sub.add_parser("validate", help="check a scenario and its data files")
    common(p_val)
    p_val.set_defaults(func=_cmd_validate)

    p_lp = sub.add_parser(
        "export-lp", help="write the first epoch's integer program as an LP file"
    )
    common(p_lp)
    p_lp.add_argument(
        "--lp-out", required=True, dest="lp_out", help="output LP file path"
    )
    p_lp.set_defaults(func=_cmd_export_lp)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
