"""End-to-end orchestration: data -> skeleton -> orientation -> evaluation."""

from __future__ import annotations

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

import numpy as np

from .anm import AnmConfig, orient_skeleton_pairwise
from .config import OrientationMethod, PipelineConfig, SkeletonMethod
from .data import Dataset, load_csv, summary_stats
from .errors import CdkitError, DataIOError, NumericalError, StageError
from .graph import Format, GraphMetrics, MixedGraph, parse, skeleton_metrics
from .pc import FisherZOracle, PcConfig, pc
from .runtime import derive_seed, resolve_threads
from .score import SearchConfig, hill_climb
from .skeleton import deconvolved_graph, dependency_graph, graphical_lasso, iamb_graph, precision_graph
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class RunReport:
    config: dict
    timings: dict = field(default_factory=dict)
    total_seconds: float = 0.0
    graph: dict = field(default_factory=dict)
    metrics: dict | None = None
    stats: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        return cls(**json.loads(text))


def evaluate(pred: MixedGraph, truth: MixedGraph) -> GraphMetrics:
    return skeleton_metrics(pred, truth)


class _WarningCollector(logging.Handler):
    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record):
        self.messages.append(record.getMessage())


@contextmanager
def _stage(name: str, timings: dict):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except CdkitError as exc:
        raise StageError(name, exc) from exc
    except np.linalg.LinAlgError as exc:
        raise StageError(name, NumericalError(str(exc))) from exc
    finally:
        timings[name] = time.perf_counter() - start


def load_truth(path: str, names) -> MixedGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    return parse(text, Format.from_path(path), names)


def run_pipeline(
    cfg: PipelineConfig, data: Dataset | None = None, truth: MixedGraph | None = None
) -> tuple[MixedGraph, RunReport]:
    """Run the configured stages and return the final graph and a report.

    The skeleton stage's output bounds the orientation stage's adjacencies
    when ``use_skeleton_as_whitelist`` is set.  Every random draw comes from a
    stream derived from ``cfg.seed`` and a fixed stage label.
    """
    cfg.validate()
    threads = resolve_threads(cfg.threads)
    report = RunReport(config=cfg.to_dict())
    report.config["threads_resolved"] = threads
    collector = _WarningCollector()
    pkg_logger = logging.getLogger("cdkit")
    pkg_logger.addHandler(collector)
    t0 = time.perf_counter()
    try:
        with _stage("load", report.timings):
            if data is None:
                if cfg.input is not None:
                    data = load_csv(cfg.input)
                else:
                    s = cfg.synthetic
                    spec = SyntheticSpec(
                        s.p, s.expected_degree, s.mechanism, s.n, s.noise_sigma, derive_seed(cfg.seed, "synthetic")
                    )
                    data, syn_truth = generate_synthetic(spec)
                    truth = truth if truth is not None else syn_truth
            if truth is None and cfg.truth is not None:
                truth = load_truth(cfg.truth, data.names)

        skel = None
        sp = cfg.skeleton
        if sp.method is not SkeletonMethod.NONE:
            with _stage("skeleton", report.timings):
                if sp.method is SkeletonMethod.DEPENDENCY_GRAPH:
                    skel = dependency_graph(
                        data, sp.test, sp.alpha, sp.correction, sp.permutations,
                        derive_seed(cfg.seed, "skeleton"), threads,
                    )
                elif sp.method is SkeletonMethod.DECONVOLUTION:
                    skel = deconvolved_graph(data, sp.beta, sp.density)
                elif sp.method is SkeletonMethod.GLASSO:
                    res = graphical_lasso(summary_stats(data).correlation, sp.lam)
                    report.stats["glasso"] = {
                        "converged": res.converged, "iterations": res.n_iter, "kkt_residual": res.kkt_residual,
                    }
                    skel = precision_graph(data.names, res.precision)
                else:
                    skel = iamb_graph(data, sp.alpha, sp.rule, threads)
                report.stats["skeleton_edges"] = skel.edge_count

        graph = skel
        op = cfg.orientation
        whitelist = skel if cfg.use_skeleton_as_whitelist else None
        if op.method is not OrientationMethod.NONE:
            with _stage("orientation", report.timings):
                if op.method is OrientationMethod.PC:
                    oracle = FisherZOracle(data)
                    graph = pc(oracle, data.names, PcConfig(op.alpha, op.max_cond_size, whitelist, threads))
                    report.stats["ci_queries"] = oracle.queries
                elif op.method is OrientationMethod.HILL_CLIMB:
                    res = hill_climb(data, SearchConfig(op.max_indegree, op.tabu_length, op.max_iters, whitelist))
                    graph = res.graph
                    report.stats["hill_climb"] = {
                        "evaluations": res.evaluations, "iterations": res.iterations, "score": res.score,
                    }
                else:
                    start = whitelist if whitelist is not None else MixedGraph.complete(data.names)
                    graph = orient_skeleton_pairwise(data, start.to_skeleton(), AnmConfig(op.ridge, op.threshold, threads))

        if truth is not None:
            with _stage("evaluate", report.timings):
                report.metrics = evaluate(graph, truth).to_dict()
    finally:
        pkg_logger.removeHandler(collector)
    report.total_seconds = time.perf_counter() - t0
    report.graph = graph.mark_counts()
    report.warnings = collector.messages
    return graph, report
