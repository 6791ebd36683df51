"""
Per-round metrics and their CSV form.
"""

import csv
import math
import os
import tempfile
from dataclasses import astuple, dataclass, fields

import numpy as np

__all__ = [
    "RunRecord",
    "CSV_COLUMNS",
    "snapshot",
    "stationarity_gap",
    "bits_to_threshold",
    "running_min",
    "write_records",
    "read_records",
    "atomic_write",
]


@dataclass(frozen=True)
class RunRecord:
    """Metrics of the iterate at round ``k``.

    ``p_of_t`` is the running minimum over rounds ``0..k`` of
    ``grad_norm_sq + consensus_err``, where the gradient is that of the
    global cost at the agents' mean.
    """

    k: int
    grad_norm_sq: float
    consensus_err: float
    p_of_t: float
    f_bar: float
    bits_cumulative: int


CSV_COLUMNS = tuple(f.name for f in fields(RunRecord))


def stationarity_gap(x, objective):
    """Return ``(grad_norm_sq, consensus_err, f_bar)`` for stacked iterates ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite iterate")
    x_bar = x.mean(axis=0)
    f_bar, g = objective.global_value_and_gradient(x_bar)
    dev = x - x_bar
    consensus = float(np.sum(dev * dev) / x.shape[0])
    return float(g @ g), consensus, f_bar


def snapshot(state, objective, running_min=math.inf):
    grad_sq, cons, f_bar = stationarity_gap(state.x, objective)
    return RunRecord(
        k=state.k,
        grad_norm_sq=grad_sq,
        consensus_err=cons,
        p_of_t=min(running_min, grad_sq + cons),
        f_bar=f_bar,
        bits_cumulative=int(state.bits),
    )


def running_min(records):
    """Recompute the running minimum from scratch (for cross-checking ``p_of_t``)."""
    return np.minimum.accumulate([r.grad_norm_sq + r.consensus_err for r in records])


def bits_to_threshold(records, threshold):
    """Bits sent per agent when ``p_of_t`` first drops to ``threshold``; ``None`` if never."""
    for rec in records:
        if rec.p_of_t <= threshold:
            return rec.bits_cumulative
    return None


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def atomic_write(path, text):
    """Write ``text`` to a temporary file beside ``path`` and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records(path, records, header=()):
    """Write records as CSV; ``header`` lines go first, each prefixed by ``# ``."""
    lines = [f"# {h}\n" for h in header]
    lines.append(",".join(CSV_COLUMNS) + "\n")
    for rec in records:
        lines.append(",".join(_fmt(v) for v in astuple(rec)) + "\n")
    atomic_write(path, "".join(lines))


def read_records(path):
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    return [
        RunRecord(
            k=int(r["k"]),
            grad_norm_sq=float(r["grad_norm_sq"]),
            consensus_err=float(r["consensus_err"]),
            p_of_t=float(r["p_of_t"]),
            f_bar=float(r["f_bar"]),
            bits_cumulative=int(r["bits_cumulative"]),
        )
        for r in reader
    ]
