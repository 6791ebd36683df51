"""
Single runs and the ten-combination suite, persisted as CSV.
"""

import logging
import os
from dataclasses import dataclass, replace

from ..algorithms import NumericalError, run
from ..metrics import atomic_write, bits_to_threshold, write_records
from .config import TUNED_COMBOS, combo_config
from .data import RNG_DESCRIPTION, build_problem, stream, PURPOSE_COMPRESSION

__all__ = ["RunResult", "run_experiment", "run_suite", "SUMMARY_COLUMNS"]

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("combo", "bits_to_threshold", "reached")


@dataclass
class RunResult:
    config: object
    path: str
    records: list
    error: str = ""

    @property
    def bits_to_threshold(self):
        return bits_to_threshold(self.records, self.config.threshold)


def _compression_streams(cfg):
    return [stream(cfg.seed, PURPOSE_COMPRESSION, i) for i in range(cfg.n)]


def output_path(cfg):
    return os.path.join(cfg.out, f"{cfg.combo}_seed{cfg.seed}.csv")


def header_lines(cfg, topology=None):
    """Resolved config, then ``info`` and ``warning`` lines, for the CSV header."""
    lines = cfg.to_lines()
    lines.append(f"info: rng = {RNG_DESCRIPTION}")
    lines.append("info: p_of_t is the running minimum over rounds 0..k, the starting point included")
    lines.append("info: bits_cumulative counts bits sent per agent before round k")
    if topology is not None:
        lines.append(
            f"info: laplacian spectrum rho2 = {topology.rho2!r}, rho = {topology.rho!r}"
        )
    lines.extend(f"warning: {w}" for w in cfg.warnings())
    return lines


def run_experiment(cfg, sink=None):
    """Build, run and persist one configuration.

    The CSV goes to ``<out>/<combo>_seed<seed>.csv``. On a numerical failure
    the rounds completed so far are still written, with an ``error`` header
    line, before the :class:`NumericalError` propagates.

    Returns
    -------
    RunResult
    """
    cfg.validate()
    for w in cfg.warnings():
        log.warning("%s: %s", cfg.combo, w)
    topology, objective, x0 = build_problem(cfg)
    header = header_lines(cfg, topology)
    path = output_path(cfg)
    try:
        _, records = run(
            cfg.variant,
            topology,
            objective,
            cfg.hyper(),
            x0,
            cfg.T,
            compressor=cfg.make_compressor(),
            rng=_compression_streams(cfg),
            sink=sink,
            stop_below=cfg.threshold if cfg.stop_at_threshold else None,
        )
    except NumericalError as exc:
        write_records(path, exc.records, header + [f"error: {exc}"])
        raise
    write_records(path, records, header)
    return RunResult(cfg, path, records)


def run_suite(cfg, combos=None):
    """Run DPDA and the nine compressed combinations on one shared problem.

    Every combination reuses the seed of ``cfg``, hence the same graph, data
    and starting point. A failing run is logged and reported in the summary
    as not reached; the others still run.

    Returns
    -------
    results : list of RunResult
    summary_path : str
    """
    names = [c[0] for c in TUNED_COMBOS] if combos is None else list(combos)
    results = []
    for name in names:
        sub = combo_config(cfg, name)
        try:
            res = run_experiment(sub)
        except NumericalError as exc:
            log.error("%s failed: %s", name, exc)
            res = RunResult(sub, output_path(sub), exc.records, str(exc))
        results.append(res)
        bits = res.bits_to_threshold
        log.info("%s: %d rounds, bits to threshold %s", name, len(res.records), bits)

    rows = [",".join(SUMMARY_COLUMNS)]
    for res in results:
        bits = res.bits_to_threshold
        rows.append(f"{res.config.combo},{'' if bits is None else bits},{str(bits is not None).lower()}")
    summary = os.path.join(cfg.out, f"summary_seed{cfg.seed}.csv")
    header = [f"threshold = {cfg.threshold!r}"]
    atomic_write(summary, "".join(f"# {h}\n" for h in header) + "\n".join(rows) + "\n")
    return results, summary


def with_overrides(cfg, seed=None, out=None, threshold=None):
    changes = {k: v for k, v in dict(seed=seed, out=out, threshold=threshold).items() if v is not None}
    return replace(cfg, **changes)
