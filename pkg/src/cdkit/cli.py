"""Command-line interface.

Subcommands: ``skeleton``, ``discover``, ``pairwise``, ``simulate``, ``eval``.
Exit codes: 0 success, 2 usage/config error, 3 data/parse error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .anm import AnmConfig, anm_decide
from .config import OrientationMethod, PipelineConfig, SkeletonMethod, apply_overrides, load_config
from .data import load_csv, write_csv
from .errors import CdkitError, DataError, DataIOError
from .graph import Format, parse, serialize
from .pipeline import evaluate, run_pipeline
from .runtime import THREADS_ENV
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger("cdkit.cli")


def _common(p: argparse.ArgumentParser, *, data=True, output=True) -> None:
    if data:
        p.add_argument("--input", help="input CSV (header row, numeric cells)")
        p.add_argument("--config", help="INI config file; flags override its values")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", help=f"worker threads or 'auto' (default: ${THREADS_ENV} or auto)")
        p.add_argument("--truth", help="ground-truth graph file; enables metrics")
    if output:
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=[f.value for f in Format], help="graph format (default: from extension, else dot)")


def _skeleton_flags(p: argparse.ArgumentParser, flag="--method") -> None:
    p.add_argument(flag, dest="skeleton_method", choices=[m.value for m in SkeletonMethod])
    p.add_argument("--test", dest="skeleton_test", choices=["pearson_fisher_z", "gaussian_mi_perm"])
    p.add_argument("--alpha", dest="skeleton_alpha", type=float)
    p.add_argument("--correction", dest="skeleton_correction", choices=["none", "bh", "bonferroni"])
    p.add_argument("--permutations", dest="skeleton_permutations", type=int)
    p.add_argument("--beta", dest="skeleton_beta", type=float)
    p.add_argument("--density", dest="skeleton_density", type=float)
    p.add_argument("--lambda", dest="skeleton_lam", type=float)
    p.add_argument("--rule", dest="skeleton_rule", choices=["and", "or"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdkit", description="Causal discovery from observational data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("skeleton", help="recover an undirected dependence graph")
    _common(p)
    _skeleton_flags(p)
    p.add_argument("--report", help="write the JSON run report here")

    p = sub.add_parser("discover", help="run the full skeleton + orientation pipeline")
    _common(p)
    _skeleton_flags(p, "--skeleton-method")
    p.add_argument("--orientation-method", choices=[m.value for m in OrientationMethod])
    p.add_argument("--orientation-alpha", type=float)
    p.add_argument("--max-cond-size", help="integer or 'none'")
    p.add_argument("--max-indegree", help="integer or 'none'")
    p.add_argument("--tabu-length", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--ridge", type=float)
    p.add_argument("--no-whitelist", action="store_true", help="do not restrict orientation to the skeleton")
    p.add_argument("--report", help="write the JSON run report here")

    p = sub.add_parser("pairwise", help="additive-noise-model decision for two columns")
    p.add_argument("--input", required=True)
    p.add_argument("--x", required=True, help="name of the candidate cause column")
    p.add_argument("--y", required=True, help="name of the candidate effect column")
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--ridge", type=float, default=1e-3)
    p.add_argument("--output")

    p = sub.add_parser("simulate", help="sample synthetic data with a ground-truth DAG")
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--degree", type=float, default=2.0)
    p.add_argument("--mechanism", choices=["linear_gaussian", "nonlinear_anm"], default="linear_gaussian")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="data CSV path")
    p.add_argument("--truth", required=True, help="truth graph path (edge CSV)")

    p = sub.add_parser("eval", help="compare a predicted graph with the truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--format", choices=[f.value for f in Format], help="format of both files (default: by extension)")
    p.add_argument("--output")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc


def _pipeline_config(args, *, orientation_none: bool) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig(input=args.input)
    ov = {
        "input": args.input,
        "seed": args.seed,
        "threads": args.threads,
        "truth": args.truth,
        "output_path": args.output,
    }
    if args.format:
        ov["output_format"] = args.format
    elif args.output:
        ov["output_format"] = Format.from_path(args.output).value
    for key in ("method", "test", "alpha", "correction", "permutations", "beta", "density", "lam", "rule"):
        ov[f"skeleton__{key}"] = getattr(args, f"skeleton_{key}")
    if orientation_none:
        ov["orientation__method"] = "none"
    else:
        ov.update(
            orientation__method=args.orientation_method,
            orientation__alpha=args.orientation_alpha,
            orientation__max_cond_size=args.max_cond_size,
            orientation__max_indegree=args.max_indegree,
            orientation__tabu_length=args.tabu_length,
            orientation__threshold=args.threshold,
            orientation__ridge=args.ridge,
        )
        if args.no_whitelist:
            ov["use_skeleton_as_whitelist"] = False
    return apply_overrides(cfg, **ov)


def _run(args) -> None:
    cfg = _pipeline_config(args, orientation_none=args.command == "skeleton")
    graph, report = run_pipeline(cfg)
    _emit(serialize(graph, cfg.output_format), cfg.output_path)
    if args.report:
        _emit(report.to_json() + "\n", args.report)
    for w in report.warnings:
        log.warning(w)
    if report.metrics is not None and cfg.output_path is not None:
        sys.stdout.write(json.dumps(report.metrics, sort_keys=True) + "\n")


def _pairwise(args) -> None:
    d = load_csv(args.input)
    for col in (args.x, args.y):
        if col not in d.names:
            raise DataError(f"no column named {col!r}")
    dec = anm_decide(d.column(args.x), d.column(args.y), cfg=AnmConfig(args.ridge, args.threshold))
    _emit(json.dumps({"x": args.x, "y": args.y, **dec.to_dict()}, sort_keys=True) + "\n", args.output)


def _simulate(args) -> None:
    spec = SyntheticSpec(args.p, args.degree, args.mechanism, args.n, args.noise, args.seed)
    d, truth = generate_synthetic(spec)
    write_csv(d, args.output)
    _emit(serialize(truth, Format.EDGE_CSV), args.truth)


def _eval(args) -> None:
    fmt_pred = Format(args.format) if args.format else Format.from_path(args.pred)
    fmt_truth = Format(args.format) if args.format else Format.from_path(args.truth)
    truth = parse(_read(args.truth), fmt_truth)
    pred = parse(_read(args.pred), fmt_pred)
    names = list(truth.names) + [n for n in pred.names if n not in truth.names]
    metrics = evaluate(parse(_read(args.pred), fmt_pred, names), parse(_read(args.truth), fmt_truth, names))
    _emit(json.dumps(metrics.to_dict(), sort_keys=True) + "\n", args.output)


_COMMANDS = {"skeleton": _run, "discover": _run, "pairwise": _pairwise, "simulate": _simulate, "eval": _eval}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        _COMMANDS[args.command](args)
    except CdkitError as exc:
        print(f"cdkit: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
