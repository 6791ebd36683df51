"""
Synchronous-round distributed primal-dual solvers.

All per-agent quantities are stored stacked as ``(n, d)`` arrays, row ``i``
belonging to agent ``i``. One call to a ``step_*`` function is one round:
every agent broadcasts its round-``k`` message, then all agents update from
round-``k`` values only. Steps return a fresh state and never mutate their
input.

Variants
--------
``dpda``
    Exact communication of ``x``.
``alg1``
    Compresses ``x - a`` against a reference ``a``; one message per round.
``alg2``
    ``alg1`` plus an error-feedback message ``q_hat``; two messages per round.
``alg3``
    Compresses ``(x - x_hat) / s_k`` with a geometrically shrinking scale
    ``s_k = s0 * gamma**k``; suited to quantizers with bounded absolute error.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .compressors import Identity
from .metrics import snapshot

__all__ = [
    "VARIANTS",
    "HyperParams",
    "AlgorithmState",
    "NumericalError",
    "init",
    "step",
    "step_dpda",
    "step_alg1",
    "step_alg2",
    "step_alg3",
    "run",
    "agent_streams",
]

VARIANTS = ("dpda", "alg1", "alg2", "alg3")

_REQUIRED = {
    "dpda": ("alpha", "beta", "eta"),
    "alg1": ("alpha", "beta", "eta", "psi"),
    "alg2": ("alpha", "beta", "eta", "psi", "sigma"),
    "alg3": ("alpha", "beta", "eta", "s0", "gamma"),
}


class NumericalError(FloatingPointError):
    """Raised when the iterates stop being finite or the scale underflows.

    ``records`` holds the metrics collected before the failure.
    """

    def __init__(self, msg, records=None):
        super().__init__(msg)
        self.records = records if records is not None else []


@dataclass(frozen=True)
class HyperParams:
    alpha: float
    beta: float
    eta: float
    psi: float = None
    sigma: float = None
    s0: float = None
    gamma: float = None

    def __post_init__(self):
        for name in ("alpha", "beta", "eta", "psi", "sigma", "s0", "gamma"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValueError(f"{name} must be positive, got {val}")
        if self.gamma is not None and not self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")

    def check(self, variant):
        missing = [p for p in _REQUIRED[variant] if getattr(self, p) is None]
        if missing:
            raise ValueError(f"{variant} needs hyper-parameters {missing}")


@dataclass
class AlgorithmState:
    """Iterate of one solver at round ``k``.

    The trackers ``b`` and ``y`` only ever enter the updates through the
    small differences ``a - b`` and ``x_hat - y``. Those differences are
    accumulated directly (``la`` and ``lx_hat``, each agent summing the
    Laplacian-weighted messages it receives) instead of subtracting two
    order-one accumulators, which would leave a rounding drift in the dual
    average near 1e-10. ``b`` and ``y`` are available as properties.

    For ``alg3``, ``x_hat`` and ``lx_hat`` hold the round ``k-1`` values and
    ``s`` the current scale ``s_k``. ``bits`` counts bits sent per agent so
    far.
    """

    variant: str
    k: int
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray = None
    la: np.ndarray = None
    q: np.ndarray = None
    e: np.ndarray = None
    q_hat: np.ndarray = None
    x_hat: np.ndarray = None
    lx_hat: np.ndarray = None
    s: float = None
    bits: int = 0
    rngs: list = field(default=None, repr=False)

    @property
    def b(self):
        """Neighbour-average tracker of ``alg1``/``alg2``, equal to ``a - L a``."""
        return None if self.a is None else self.a - self.la

    @property
    def y(self):
        """Tracker of ``alg3``, equal to ``x_hat - L x_hat``."""
        return None if self.x_hat is None else self.x_hat - self.lx_hat

    def arrays(self):
        names = ("x", "v", "a", "la", "q", "e", "q_hat", "x_hat", "lx_hat")
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}

    def is_finite(self):
        # non-finite auxiliaries reach x or v within one round
        return bool(np.isfinite(self.x).all() and np.isfinite(self.v).all())


def agent_streams(seed, n, purpose=3):
    """One independent PCG64 generator per agent for a given purpose tag."""
    return [
        np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(purpose, i))))
        for i in range(n)
    ]


def init(variant, topology, objective, hyper, x0, compressor=None, rng=None):
    """Initial state for ``variant`` from per-agent starting points ``x0``.

    ``rng`` is a seed, a Generator or a list of per-agent Generators; it only
    matters for stochastic compressors.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    hyper.check(variant)
    x0 = np.array(x0, dtype=np.float64)
    if x0.ndim == 1:
        x0 = x0[:, None]
    n, d = x0.shape
    if n != topology.n or n != objective.n_agents or d != objective.dim:
        raise ValueError(
            f"x0 has shape {x0.shape}, expected ({topology.n}, {objective.dim}) "
            f"for {objective.n_agents} agents"
        )
    if compressor is None:
        compressor = Identity(dim=d)
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = agent_streams(rng, n)
    zeros = np.zeros_like(x0)
    state = AlgorithmState(variant=variant, k=0, x=x0, v=zeros.copy(), rngs=rng)
    if variant in ("alg1", "alg2"):
        state.a, state.la = zeros.copy(), zeros.copy()
        state.q = compressor.compress(x0, rng)
        if variant == "alg2":
            state.e = zeros.copy()
            state.q_hat = state.q.copy()
    elif variant == "alg3":
        state.x_hat, state.lx_hat = zeros.copy(), zeros.copy()
        state.s = float(hyper.s0)
        state.q = compressor.compress(x0 / state.s, rng)
    return state


def step_dpda(state, topology, objective, hyper, compressor=None):
    L = topology.laplacian
    x, v = state.x, state.v
    Lx = L @ x
    grad = objective.gradients(x)
    x_new = x - hyper.eta * (hyper.alpha * Lx + hyper.beta * v + grad)
    v_new = v + hyper.eta * hyper.beta * Lx
    bits = state.bits + x.shape[1] * getattr(compressor, "b1", 64)
    return replace(state, k=state.k + 1, x=x_new, v=v_new, bits=bits)


def step_alg1(state, topology, objective, hyper, compressor):
    L = topology.laplacian
    x, v, a, la, q = state.x, state.v, state.a, state.la, state.q
    Lq = L @ q
    a_new = a + hyper.psi * q
    la_new = la + hyper.psi * Lq
    consensus = la + Lq
    x_new = x - hyper.eta * hyper.alpha * consensus - hyper.eta * (
        hyper.beta * v + objective.gradients(x)
    )
    v_new = v + hyper.eta * hyper.beta * consensus
    q_new = compressor.compress(x_new - a_new, state.rngs)
    return replace(
        state,
        k=state.k + 1,
        x=x_new,
        v=v_new,
        a=a_new,
        la=la_new,
        q=q_new,
        bits=state.bits + compressor.bit_cost(x.shape[1]),
    )


def step_alg2(state, topology, objective, hyper, compressor):
    L = topology.laplacian
    x, v, a, la, q = state.x, state.v, state.a, state.la, state.q
    e, q_hat = state.e, state.q_hat
    a_new = a + hyper.psi * q
    la_new = la + hyper.psi * (L @ q)
    consensus = la + L @ q_hat
    x_new = x - hyper.eta * hyper.alpha * consensus - hyper.eta * (
        hyper.beta * v + objective.gradients(x)
    )
    v_new = v + hyper.eta * hyper.beta * consensus
    q_new = compressor.compress(x_new - a_new, state.rngs)
    e_new = hyper.sigma * e + x - a - q_hat
    q_hat_new = compressor.compress(hyper.sigma * e_new + x_new - a_new, state.rngs)
    return replace(
        state,
        k=state.k + 1,
        x=x_new,
        v=v_new,
        a=a_new,
        la=la_new,
        q=q_new,
        e=e_new,
        q_hat=q_hat_new,
        bits=state.bits + 2 * compressor.bit_cost(x.shape[1]),
    )


def step_alg3(state, topology, objective, hyper, compressor):
    L = topology.laplacian
    x, v, s, q = state.x, state.v, state.s, state.q
    x_hat = state.x_hat + s * q
    consensus = state.lx_hat + s * (L @ q)
    x_new = x - hyper.eta * hyper.alpha * consensus - hyper.eta * (
        hyper.beta * v + objective.gradients(x)
    )
    v_new = v + hyper.eta * hyper.beta * consensus
    s_new = s * hyper.gamma
    if s_new < np.finfo(np.float64).tiny:
        raise NumericalError(
            f"scale s_k underflowed at round {state.k + 1} (s0 * gamma**k < {np.finfo(float).tiny:.3g}); "
            "truncate the run or raise gamma"
        )
    q_new = compressor.compress((x_new - x_hat) / s_new, state.rngs)
    return replace(
        state,
        k=state.k + 1,
        x=x_new,
        v=v_new,
        q=q_new,
        x_hat=x_hat,
        lx_hat=consensus,
        s=s_new,
        bits=state.bits + compressor.bit_cost(x.shape[1]),
    )


_STEPS = {"dpda": step_dpda, "alg1": step_alg1, "alg2": step_alg2, "alg3": step_alg3}


def step(state, topology, objective, hyper, compressor=None):
    """Advance any variant by one synchronous round."""
    if compressor is None:
        compressor = Identity(dim=state.x.shape[1])
    return _STEPS[state.variant](state, topology, objective, hyper, compressor)


def run(
    variant,
    topology,
    objective,
    hyper,
    x0,
    T,
    compressor=None,
    rng=None,
    sink=None,
    stop_below=None,
):
    """Run ``T`` rounds and collect one metrics record per round.

    Record ``k`` describes the iterate entering round ``k`` (``k = 0`` is the
    starting point) with the bits sent before it, so ``T`` rounds yield
    records ``0 .. T-1`` and the returned state is the iterate after round
    ``T-1``. ``sink``, if given, is called with every record as it is made.
    With ``stop_below`` the run ends early at the first record whose
    running-minimum metric is at or below that value.

    Returns
    -------
    state : AlgorithmState
    records : list of RunRecord
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if compressor is None:
        compressor = Identity(dim=objective.dim)
    state = init(variant, topology, objective, hyper, x0, compressor, rng)
    records = []
    best = math.inf
    step_fn = _STEPS[variant]
    for k in range(T):
        if not state.is_finite():
            raise NumericalError(f"non-finite iterate at round {k}", records)
        rec = snapshot(state, objective, best)
        best = rec.p_of_t
        records.append(rec)
        if sink is not None:
            sink(rec)
        if stop_below is not None and best <= stop_below:
            break
        try:
            with np.errstate(over="raise", invalid="raise"):
                state = step_fn(state, topology, objective, hyper, compressor)
        except FloatingPointError as exc:
            if isinstance(exc, NumericalError):
                exc.records = records
                raise
            raise NumericalError(f"overflow at round {k}: {exc}", records) from exc
    return state, records
