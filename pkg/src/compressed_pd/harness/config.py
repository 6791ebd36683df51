"""
Experiment configuration: a flat ``section.key = value`` text format.

Blank lines and lines starting with ``#`` are ignored. The resolved
configuration is written back in the same format (one ``# key = value``
line each) at the top of every output CSV, and ``load_config`` accepts such
a CSV directly, which makes any run reproducible from its output.
"""

import math
from dataclasses import dataclass, field, fields, replace

from ..algorithms import VARIANTS, HyperParams
from ..compressors import COMPRESSORS, make_compressor

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "TUNED_COMBOS",
    "combo_config",
]


class ConfigError(ValueError):
    pass


# compressor parameter names accepted per kind
_COMPRESSOR_PARAMS = {
    "unbiased_lbit": ("l", "b1"),
    "topk": ("k", "b1"),
    "norm_sign": ("b1",),
    "uniform": ("delta", "b2"),
    "one_bit": (),
    "identity": ("b1",),
}

# assumption class each variant relies on, and the compressors that satisfy it
_ADMISSIBLE = {
    "dpda": {"identity"},
    "alg1": {"unbiased_lbit", "topk", "norm_sign", "identity"},
    "alg2": {"unbiased_lbit", "topk", "norm_sign", "identity"},
    "alg3": {"topk", "norm_sign", "uniform", "one_bit", "identity"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    # problem
    n: int = 20
    d: int = 50
    m_i: int = 200
    lam: float = 0.001
    mu: float = 1.0
    signal_scale: float = 0.5
    data_dir: str = ""
    # graph
    graph_kind: str = "geometric"
    radius: float = 0.5
    edge_list: str = ""
    rho_target: float = 0.012
    max_retries: int = 10_000
    # algorithm
    variant: str = "dpda"
    compressor: str = "identity"
    l: int = 2
    b1: int = 64
    k: int = 10
    delta: float = 1.0
    b2: int = 8
    alpha: float = 85.0
    beta: float = 5.0
    eta: float = 1.4
    psi: float = 0.0
    sigma: float = 0.0
    s0: float = 0.0
    gamma: float = 0.0
    # run
    T: int = 1000
    seed: int = 0
    x0_scale: float = 0.1
    threshold: float = 1e-20
    stop_at_threshold: bool = False
    out: str = "runs"
    name: str = ""

    @property
    def combo(self):
        if self.name:
            return self.name
        return self.variant if self.variant == "dpda" else f"{self.variant}-{self.compressor}"

    def hyper(self):
        opt = {}
        for p in ("psi", "sigma", "s0", "gamma"):
            val = getattr(self, p)
            if val:
                opt[p] = val
        return HyperParams(alpha=self.alpha, beta=self.beta, eta=self.eta, **opt)

    def make_compressor(self):
        params = {p: getattr(self, p) for p in _COMPRESSOR_PARAMS[self.compressor]}
        return make_compressor(self.compressor, dim=self.d, **params)

    def warnings(self):
        """Soft problems: the run proceeds but the header flags them."""
        out = []
        if self.compressor not in _ADMISSIBLE[self.variant]:
            out.append(
                f"compressor {self.compressor} is outside the class {self.variant} is designed for"
            )
        return out

    def validate(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.compressor not in COMPRESSORS:
            raise ConfigError(
                f"unknown compressor {self.compressor!r}; choose from {sorted(COMPRESSORS)}"
            )
        if self.graph_kind not in ("geometric", "edge_list"):
            raise ConfigError(f"graph.kind must be geometric or edge_list, got {self.graph_kind!r}")
        if self.graph_kind == "edge_list" and not self.edge_list:
            raise ConfigError("graph.kind = edge_list needs graph.path")
        for name in ("n", "d", "m_i", "T", "max_retries", "l", "k", "b1", "b2"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.graph_kind == "geometric" and self.n < 2:
            raise ConfigError("a geometric graph needs n >= 2")
        if self.compressor == "topk" and self.k > self.d:
            raise ConfigError("topk needs k <= d")
        for name in ("radius", "delta", "x0_scale", "signal_scale"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.rho_target < 0:
            raise ConfigError("graph.rho_target must be >= 0 (0 keeps unit weights)")
        if self.lam < 0 or self.mu < 0:
            raise ConfigError("lam and mu must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        try:
            self.hyper().check(self.variant)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def to_lines(self):
        """``section.key = value`` lines that parse back to this config."""
        out = []
        for key, attr in _KEYS.items():
            val = getattr(self, attr)
            if isinstance(val, float):
                val = repr(val)
            elif isinstance(val, bool):
                val = "true" if val else "false"
            out.append(f"{key} = {val}")
        return out


# file key -> dataclass attribute
_KEYS = {
    "problem.n": "n",
    "problem.d": "d",
    "problem.m_i": "m_i",
    "problem.lambda": "lam",
    "problem.mu": "mu",
    "problem.signal_scale": "signal_scale",
    "problem.data_dir": "data_dir",
    "graph.kind": "graph_kind",
    "graph.radius": "radius",
    "graph.path": "edge_list",
    "graph.rho_target": "rho_target",
    "graph.max_retries": "max_retries",
    "algorithm.variant": "variant",
    "compressor.kind": "compressor",
    "compressor.l": "l",
    "compressor.b1": "b1",
    "compressor.k": "k",
    "compressor.delta": "delta",
    "compressor.b2": "b2",
    "hyper.alpha": "alpha",
    "hyper.beta": "beta",
    "hyper.eta": "eta",
    "hyper.psi": "psi",
    "hyper.sigma": "sigma",
    "hyper.s0": "s0",
    "hyper.gamma": "gamma",
    "run.T": "T",
    "run.seed": "seed",
    "run.x0_scale": "x0_scale",
    "run.threshold": "threshold",
    "run.stop_at_threshold": "stop_at_threshold",
    "run.out": "out",
    "run.name": "name",
}
_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(attr, raw):
    typ = _TYPES[attr]
    try:
        if typ in (int, "int"):
            val = float(raw) if any(c in raw for c in ".eE") else int(raw, 0)
            if val != int(val):
                raise ValueError
            return int(val)
        if typ in (float, "float"):
            val = float(raw)
            if math.isnan(val):
                raise ValueError
            return val
        if typ in (bool, "bool"):
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError
    except ValueError:
        raise ConfigError(f"bad value for {attr}: {raw!r}") from None
    return raw


def parse_config(text, base=None, strict=True):
    """Parse ``section.key = value`` text on top of ``base`` (defaults if None).

    With ``strict`` False only lines of the form ``# section.key = value``
    are read and everything else is skipped, which recovers the config
    echoed at the top of an output CSV.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not strict:
            # output files: only '# key = value' header lines carry config
            if not line.startswith("#"):
                continue
            line = line.lstrip("#").strip()
            if "=" not in line or line.split("=", 1)[0].strip() not in _KEYS:
                continue
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[_KEYS[key]] = _coerce(_KEYS[key], raw)
    return replace(base or ExperimentConfig(), **values)


def load_config(path, **overrides):
    with open(path) as fh:
        text = fh.read()
    cfg = parse_config(text, strict=not str(path).endswith(".csv"))
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides)


# benchmark combinations: name, variant, compressor, step sizes (alpha=85, beta=5 throughout)
TUNED_COMBOS = (
    ("dpda", "dpda", "identity", dict(eta=1.4)),
    ("alg1-unbiased_lbit", "alg1", "unbiased_lbit", dict(eta=1.4, psi=0.2)),
    ("alg1-topk", "alg1", "topk", dict(eta=1.4, psi=0.05)),
    ("alg1-norm_sign", "alg1", "norm_sign", dict(eta=1.3, psi=0.05)),
    ("alg2-topk", "alg2", "topk", dict(eta=1.4, psi=0.05, sigma=0.03)),
    ("alg2-norm_sign", "alg2", "norm_sign", dict(eta=1.3, psi=0.05, sigma=0.03)),
    ("alg3-topk", "alg3", "topk", dict(eta=0.46, s0=1.0, gamma=0.99)),
    ("alg3-norm_sign", "alg3", "norm_sign", dict(eta=0.64, s0=1.0, gamma=0.99)),
    ("alg3-uniform", "alg3", "uniform", dict(eta=0.46, s0=0.01, gamma=0.99)),
    ("alg3-one_bit", "alg3", "one_bit", dict(eta=0.46, s0=1.0, gamma=0.99)),
)


def combo_config(base, name):
    """``base`` with the algorithm, compressor and tuned parameters of one benchmark combination."""
    for combo, variant, comp, hyper in TUNED_COMBOS:
        if combo == name:
            cleared = dict(psi=0.0, sigma=0.0, s0=0.0, gamma=0.0, alpha=85.0, beta=5.0)
            cleared.update(hyper)
            return replace(base, name=combo, variant=variant, compressor=comp, **cleared)
    raise ConfigError(f"unknown combination {name!r}")
