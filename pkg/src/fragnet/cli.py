"""Command-line interface: run, sweep, analyze, plot, and export-graph.

All commands resolve their configuration the same way: built-in defaults,
overridden by an optional JSON config file (unknown keys rejected),
overridden by command-line flags.  The fully resolved configuration is
echoed to stderr as one JSON line at the start of every command, so every
produced output can be traced back to its exact parameters.  Outputs are
byte-reproducible for identical resolved configurations; opt-in timing
(--timing) is the one exception and is off by default.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

from .analysis import (
    anova,
    cell_aggregates,
    fit_ols,
    render_anova,
    render_cell_aggregates,
    render_regression,
)
from .engine import SimConfig, run
from .graphio import network_record, snapshot_record, write_dot, write_edge_list
from .model import DiversityParams
from .svgplot import scatter_svg
from .sweep import (
    CSV_COLUMNS,
    ResultsFormatError,
    SweepSpec,
    load_results,
    persist_results,
    run_sweep,
)

PARALLEL_ENV_VAR = "FRAGNET_PARALLEL"

# Defaults of the JSON config document; flags override file values, file
# values override these.
CONFIG_DEFAULTS: Dict[str, object] = {
    "group_size": 50,
    "dims": 10,
    "intra_density": 0.20,
    "inter_density": 0.02,
    "center_separation": 3.0,
    "culture_noise_sd": 0.1,
    "mean_d": 0.5,
    "mean_rs": 0.5,
    "mean_rw": 0.5,
    "sigma_d": 0.0,
    "sigma_rs": 0.0,
    "sigma_rw": 0.0,
    "iterations": 500,
    "local_select_prob": 0.99,
    "new_edge_weight": 0.01,
    "prune_threshold": 0.01,
    "shuffle_agent_order": False,
    "seed": 0,
    "sigma_values": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
    "runs_per_cell": 100,
    "master_seed": 0,
    "parallel": 1,
}


class CliError(Exception):
    """A user-facing command error with its process exit code."""

    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _load_config_file(path: str) -> Dict[str, object]:
    file_path = Path(path)
    if not file_path.exists():
        raise CliError(f"config file not found: {path}", code=2)
    try:
        loaded = json.loads(file_path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"config file {path}: invalid JSON ({exc.msg})", code=2)
    if not isinstance(loaded, dict):
        raise CliError(f"config file {path}: expected a JSON object", code=2)
    unknown = set(loaded) - set(CONFIG_DEFAULTS)
    if unknown:
        raise CliError(
            f"config file {path}: unknown key(s) {sorted(unknown)}", code=2
        )
    return loaded


_FLAG_TO_KEY = {
    "group_size": "group_size",
    "iterations": "iterations",
    "sigma_d": "sigma_d",
    "sigma_rs": "sigma_rs",
    "sigma_rw": "sigma_rw",
    "mean_d": "mean_d",
    "mean_rs": "mean_rs",
    "mean_rw": "mean_rw",
    "seed": "seed",
    "sigma_values": "sigma_values",
    "runs_per_cell": "runs_per_cell",
    "master_seed": "master_seed",
    "parallel": "parallel",
}


def resolve_config(args: argparse.Namespace) -> Dict[str, object]:
    """Defaults <- config file <- flags; returns the effective config document.

    ``parallel`` falls back to the FRAGNET_PARALLEL environment variable
    when neither a flag nor a config file sets it.
    """
    resolved = dict(CONFIG_DEFAULTS)
    from_file: Dict[str, object] = {}
    if getattr(args, "config", None):
        from_file = _load_config_file(args.config)
        resolved.update(from_file)
    for flag, key in _FLAG_TO_KEY.items():
        value = getattr(args, flag, None)
        if value is not None:
            resolved[key] = value
    if getattr(args, "parallel", None) is None and "parallel" not in from_file:
        env_value = os.environ.get(PARALLEL_ENV_VAR)
        if env_value is not None:
            try:
                resolved["parallel"] = int(env_value)
            except ValueError:
                raise CliError(
                    f"environment variable {PARALLEL_ENV_VAR} must be an integer, "
                    f"got {env_value!r}"
                )
    return resolved


def build_sim_config(resolved: Dict[str, object]) -> SimConfig:
    try:
        diversity = DiversityParams(
            sigma_d=float(resolved["sigma_d"]),
            sigma_rs=float(resolved["sigma_rs"]),
            sigma_rw=float(resolved["sigma_rw"]),
            mean_d=float(resolved["mean_d"]),
            mean_rs=float(resolved["mean_rs"]),
            mean_rw=float(resolved["mean_rw"]),
        )
        return SimConfig(
            group_size=int(resolved["group_size"]),
            dims=int(resolved["dims"]),
            intra_density=float(resolved["intra_density"]),
            inter_density=float(resolved["inter_density"]),
            center_separation=float(resolved["center_separation"]),
            culture_noise_sd=float(resolved["culture_noise_sd"]),
            diversity=diversity,
            iterations=int(resolved["iterations"]),
            local_select_prob=float(resolved["local_select_prob"]),
            new_edge_weight=float(resolved["new_edge_weight"]),
            prune_threshold=float(resolved["prune_threshold"]),
            shuffle_agent_order=bool(resolved["shuffle_agent_order"]),
            seed=int(resolved["seed"]),
        )
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid configuration: {exc}", code=2)


def _echo_config(resolved: Dict[str, object], quiet: bool) -> None:
    if not quiet:
        print(json.dumps(resolved, sort_keys=True), file=sys.stderr)


def _write_output(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _ensure_writable(path: str) -> None:
    try:
        with open(path, "a"):
            pass
    except OSError as exc:
        raise CliError(f"cannot write output path {path}: {exc}", code=1)


# -- commands ----------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    resolved = resolve_config(args)
    _echo_config(resolved, args.quiet)
    config = build_sim_config(resolved)

    snapshots: List[dict] = []
    snapshot_every = args.snapshots or 0
    sink = (lambda state: snapshots.append(snapshot_record(state))) if snapshot_every else None

    final_state, result = run(
        config,
        record_timing=args.timing,
        snapshot_every=snapshot_every,
        snapshot_sink=sink,
    )

    record = {name: getattr(result, name) for name in CSV_COLUMNS}
    record["config"] = resolved
    if snapshot_every:
        record["snapshots"] = snapshots

    if args.export_final:
        Path(args.export_final).write_text(
            json.dumps(network_record(final_state), indent=2) + "\n"
        )

    if args.out and args.out.endswith(".jsonl"):
        text = json.dumps(record) + "\n"
    else:
        text = json.dumps(record, indent=2) + "\n"
    _write_output(text, args.out)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    resolved = resolve_config(args)
    _echo_config(resolved, args.quiet)
    base_config = build_sim_config(resolved)

    out_path = args.out or "results.csv"
    _ensure_writable(out_path)
    if args.jsonl:
        _ensure_writable(args.jsonl)

    try:
        spec = SweepSpec(
            sigma_values=tuple(resolved["sigma_values"]),
            runs_per_cell=int(resolved["runs_per_cell"]),
            base_config=dataclasses.replace(base_config, iterations=int(resolved["iterations"])),
            master_seed=int(resolved["master_seed"]),
            parallelism=int(resolved["parallel"]),
            record_timing=args.timing,
        )
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid sweep specification: {exc}", code=2)

    def progress(event: Dict[str, object]) -> None:
        if args.quiet:
            return
        done, total = event["completed"], event["total"]
        rate = event["runs_per_sec"]
        print(f"\r{done}/{total} runs, {rate:.1f} runs/s", end="", file=sys.stderr)
        if done == total:
            print(file=sys.stderr)

    table = run_sweep(spec, progress)
    persist_results(table, out_path, fmt="csv")
    if args.jsonl:
        persist_results(table, args.jsonl, fmt="jsonl")

    if not table.complete:
        print(
            f"warning: {len(table.failures)} run(s) failed; "
            f"see JSONL output for seeds",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    resolved = resolve_config(args)
    _echo_config(resolved, args.quiet)
    table = load_results(args.input)
    responses = ["cd", "spl"] if args.response == "both" else [args.response]
    fmt = args.format

    if fmt == "json":
        document = {}
        for response in responses:
            fit = fit_ols(table, response)
            var = anova(table, response)
            document[response] = {
                "regression": json.loads(render_regression(fit, "json")),
                "anova": json.loads(render_anova(var, "json")),
                "excluded_rows": fit.n_excluded,
            }
        text = json.dumps(document, indent=2) + "\n"
    else:
        sections = []
        for response in responses:
            fit = fit_ols(table, response)
            var = anova(table, response)
            sections.append(render_regression(fit, fmt))
            sections.append(render_anova(var, fmt))
            sections.append(f"excluded rows: {fit.n_excluded}\n")
        text = "\n".join(sections)

    _write_output(text, args.out)

    if args.aggregates:
        Path(args.aggregates).write_text(render_cell_aggregates(cell_aggregates(table)))
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    resolved = resolve_config(args)
    _echo_config(resolved, args.quiet)
    if not args.out:
        raise CliError("plot requires --out <svg path>", code=2)
    table = load_results(args.input)
    svg = scatter_svg(
        table.rows,
        color_by=args.color_by,
        trend=args.trend,
        title=args.title,
    )
    Path(args.out).write_text(svg)
    if not args.quiet:
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_export_graph(args: argparse.Namespace) -> int:
    resolved = resolve_config(args)
    _echo_config(resolved, args.quiet)
    path = Path(args.input)
    if not path.exists():
        raise CliError(f"input record not found: {args.input}", code=2)
    try:
        record = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"input record {args.input}: invalid JSON ({exc.msg})", code=2)

    if "snapshots" in record:
        snapshots = record["snapshots"]
        if not snapshots:
            raise CliError("run record has an empty snapshot list", code=2)
        index = args.snapshot if args.snapshot is not None else len(snapshots) - 1
        if not 0 <= index < len(snapshots):
            raise CliError(
                f"snapshot index {index} out of range (0..{len(snapshots) - 1})", code=2
            )
        network = snapshots[index]["network"]
    elif "network" in record:
        network = record["network"]
    elif "nodes" in record and "edges" in record:
        network = record
    else:
        raise CliError(
            "input contains no network: expected a network record, a snapshot, "
            "or a run record with snapshots (run with --export-final or --snapshots)",
            code=2,
        )

    stem = args.out
    edge_path = f"{stem}.edgelist"
    dot_path = f"{stem}.dot"
    write_edge_list(network, edge_path)
    write_dot(network, dot_path)
    if not args.quiet:
        print(f"wrote {edge_path} and {dot_path}", file=sys.stderr)
    return 0


# -- parser ------------------------------------------------------------------


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (flags override it)")
    parser.add_argument("--seed", type=int, help="simulation seed (64-bit unsigned)")
    parser.add_argument("--out", help="output path (default: standard output)")
    parser.add_argument(
        "--format", choices=("text", "csv", "json"), default="text",
        help="report format for analyze",
    )
    parser.add_argument(
        "--parallel", type=int,
        help=f"worker count for sweeps (default: ${PARALLEL_ENV_VAR} or 1)",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress stderr chatter")
    parser.add_argument(
        "--timing", action="store_true",
        help="record real wall-clock times in run records (breaks byte reproducibility)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fragnet",
        description="Adaptive culture-network simulator and analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one simulation run")
    _add_common_flags(p_run)
    p_run.add_argument("--iterations", type=int)
    p_run.add_argument("--group-size", dest="group_size", type=int)
    p_run.add_argument("--sigma-d", dest="sigma_d", type=float)
    p_run.add_argument("--sigma-rs", dest="sigma_rs", type=float)
    p_run.add_argument("--sigma-rw", dest="sigma_rw", type=float)
    p_run.add_argument("--mean-d", dest="mean_d", type=float)
    p_run.add_argument("--mean-rs", dest="mean_rs", type=float)
    p_run.add_argument("--mean-rw", dest="mean_rw", type=float)
    p_run.add_argument("--snapshots", type=int, metavar="K",
                       help="embed a state snapshot every K iterations")
    p_run.add_argument("--export-final", dest="export_final", metavar="PATH",
                       help="write the final network record as JSON")
    p_run.set_defaults(handler=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the full sigma-grid experiment")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--iterations", type=int)
    p_sweep.add_argument("--group-size", dest="group_size", type=int)
    p_sweep.add_argument(
        "--sigma-values", dest="sigma_values", metavar="V1,V2,...",
        type=lambda s: [float(v) for v in s.split(",")],
    )
    p_sweep.add_argument("--runs-per-cell", dest="runs_per_cell", type=int)
    p_sweep.add_argument("--master-seed", dest="master_seed", type=int)
    p_sweep.add_argument("--jsonl", metavar="PATH",
                         help="also persist results as JSONL")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_analyze = sub.add_parser("analyze", help="regression + ANOVA over a results CSV")
    _add_common_flags(p_analyze)
    p_analyze.add_argument("--in", dest="input", required=True, metavar="RESULTS")
    p_analyze.add_argument("--response", choices=("cd", "spl", "both"), default="both")
    p_analyze.add_argument("--aggregates", metavar="PATH",
                           help="also write the per-cell aggregate table as CSV")
    p_analyze.set_defaults(handler=cmd_analyze)

    p_plot = sub.add_parser("plot", help="SVG scatter of (cd, spl) from a results CSV")
    _add_common_flags(p_plot)
    p_plot.add_argument("--in", dest="input", required=True, metavar="RESULTS")
    p_plot.add_argument("--color-by", dest="color_by", default="sigma_d",
                        choices=("sigma_d", "sigma_rs", "sigma_rw"))
    p_plot.add_argument("--trend", choices=("cubic",), default=None,
                        help="overlay a least-squares cubic of spl on cd")
    p_plot.add_argument("--title", default=None)
    p_plot.set_defaults(handler=cmd_plot)

    p_export = sub.add_parser("export-graph",
                              help="edge-list + DOT export of a saved network")
    _add_common_flags(p_export)
    p_export.add_argument("--in", dest="input", required=True, metavar="RECORD")
    p_export.add_argument("--snapshot", type=int, default=None,
                          help="snapshot index inside a run record (default: last)")
    p_export.set_defaults(handler=cmd_export_graph)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ResultsFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
