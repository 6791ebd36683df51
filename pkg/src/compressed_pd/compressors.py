"""
Compression operators for inter-agent messages.

Every operator acts row-wise on the last axis, so a stacked ``(n, d)`` array
of per-agent messages is compressed in one call. Operators follow the
scikit-learn transformer protocol (``get_params``, ``fit``, ``transform``) so
they can be cloned, echoed into run headers and dropped into pipelines.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

__all__ = [
    "RelativeError",
    "GlobalAbsolute",
    "LocalAbsolute",
    "Compressor",
    "UnbiasedLBit",
    "TopK",
    "NormSign",
    "UniformQuantizer",
    "OneBitBinary",
    "Identity",
    "VerificationReport",
    "verify_assumption",
    "verify_unbiased",
    "make_compressor",
    "COMPRESSORS",
]


# ---------------------------------------------------------------------------
# assumption classes

@dataclass(frozen=True)
class RelativeError:
    """E||C(x)/r - x||^2 <= (1 - phi) ||x||^2 for every x."""

    phi: float
    r: float

    def __post_init__(self):
        if not 0 < self.phi <= 1:
            raise ValueError(f"phi must lie in (0, 1], got {self.phi}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")

    @property
    def r0(self):
        """Constant of the unscaled bound E||C(x) - x||^2 <= r0 ||x||^2."""
        return 2 * self.r**2 * (1 - self.phi) + 2 * (1 - self.r) ** 2


@dataclass(frozen=True)
class GlobalAbsolute:
    """E||C(x) - x||_p^2 <= C for every x. ``p`` may be ``math.inf``."""

    p: float
    C: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not self.C >= 0:
            raise ValueError(f"C must be nonnegative, got {self.C}")


@dataclass(frozen=True)
class LocalAbsolute:
    """||C(x) - x||_p <= 1 - phi whenever ||x||_p <= 1. ``p`` may be ``math.inf``."""

    p: float
    phi: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not 0 < self.phi <= 1:
            raise ValueError(f"phi must lie in (0, 1], got {self.phi}")


# ---------------------------------------------------------------------------
# operators

def _sign(x):
    # sign(0) = +1 everywhere, matching the 1-bit quantizer convention
    return np.where(x >= 0, 1.0, -1.0)


def _inf_norm(x):
    return np.max(np.abs(x), axis=-1, keepdims=True)


class Compressor(BaseEstimator, TransformerMixin):
    """Base class. Subclasses implement ``_compress`` and ``bit_cost``.

    ``dim`` is optional at construction; it is needed for the bit cost and
    for parameter-dependent assumption constants, and is inferred by ``fit``.
    """

    stochastic = False

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 0:
            raise ValueError("compressor input must be at least 1-d")
        if self.dim is not None and x.shape[-1] != self.dim:
            raise ValueError(
                f"dimension mismatch: compressor expects {self.dim}, got {x.shape[-1]}"
            )
        return x

    def _resolve_dim(self, dim=None):
        dim = self.dim if dim is None else dim
        if dim is None:
            raise ValueError(f"{type(self).__name__} has no dimension; pass dim")
        return int(dim)

    def compress(self, x, rng=None):
        """Compress ``x`` along its last axis.

        Parameters
        ----------
        x : array_like, shape (..., d)
        rng : numpy Generator, sequence of Generators, or None
            Randomness source for stochastic operators. A sequence supplies
            one stream per row of a 2-d input (one per agent). Deterministic
            operators ignore it.
        """
        x = self._check_input(x)
        return self._compress(x, rng)

    __call__ = compress

    def bit_cost(self, dim=None):
        raise NotImplementedError

    def declared_classes(self, dim=None):
        raise NotImplementedError

    # scikit-learn protocol ------------------------------------------------

    def fit(self, X, y=None):
        X = check_array(X)
        self._check_input(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, compressor was fitted with {self.n_features_in_}"
            )
        # an int or None seeds a fresh Generator, so equal seeds give equal output
        rng = np.random.default_rng(getattr(self, "random_state", None))
        return self.compress(X, rng)


class UnbiasedLBit(Compressor):
    """Stochastic l-bit quantizer, unbiased.

    Each coordinate is scaled to ``2**(l-1) |x_s| / ||x||_inf``, randomly
    rounded up or down with a uniform perturbation, and rescaled.
    """

    stochastic = True

    def __init__(self, l=2, b1=64, dim=None, random_state=None):
        self.l = l
        self.b1 = b1
        self.dim = dim
        self.random_state = random_state

    def _noise(self, shape, rng):
        if rng is None:
            raise ValueError("UnbiasedLBit is stochastic and needs an rng")
        if isinstance(rng, np.random.Generator):
            return rng.random(shape)
        if len(shape) != 2 or len(rng) != shape[0]:
            raise ValueError("one random stream per row is required")
        return np.stack([g.random(shape[1]) for g in rng])

    def _compress(self, x, rng):
        if self.l < 1:
            raise ValueError("l must be a positive integer")
        levels = 2.0 ** (self.l - 1)
        noise = self._noise(x.shape, rng)
        norm = _inf_norm(x)
        safe = np.where(norm > 0, norm, 1.0)
        q = np.floor(levels * np.abs(x) / safe + noise)
        out = (safe / levels) * _sign(x) * q
        return np.where(norm > 0, out, 0.0)

    def bit_cost(self, dim=None):
        d = self._resolve_dim(dim)
        return (self.l + 1) * d + self.b1

    def declared_classes(self, dim=None):
        d = self._resolve_dim(dim)
        r1 = d / 4.0**self.l
        return [RelativeError(phi=1 / (1 + r1), r=1 + r1)]


class TopK(Compressor):
    """Keep the ``k`` largest-magnitude coordinates, zero the rest.

    Ties are broken toward lower indices.
    """

    def __init__(self, k=10, b1=64, dim=None):
        self.k = k
        self.b1 = b1
        self.dim = dim

    def _compress(self, x, rng):
        d = x.shape[-1]
        if not 1 <= self.k <= d:
            raise ValueError(f"TopK requires 1 <= k <= d, got k={self.k}, d={d}")
        # stable sort on -|x| keeps the lowest index among equal magnitudes
        order = np.argsort(-np.abs(x), axis=-1, kind="stable")[..., : self.k]
        out = np.zeros_like(x)
        np.put_along_axis(out, order, np.take_along_axis(x, order, axis=-1), axis=-1)
        return out

    def bit_cost(self, dim=None):
        # index bits are not counted, only the k transmitted scalars
        return self.k * self.b1

    def declared_classes(self, dim=None):
        d = self._resolve_dim(dim)
        phi = self.k / d
        # on the unit 2-ball the error is at most sqrt(1 - k/d), attained at
        # constant vectors, so the local constant is 1 - sqrt(1 - k/d), not k/d
        return [
            RelativeError(phi=phi, r=1.0),
            LocalAbsolute(p=2.0, phi=1 - math.sqrt(1 - phi)) if phi < 1 else LocalAbsolute(p=2.0, phi=1.0),
        ]


class NormSign(Compressor):
    """``(||x||_inf / 2) * sign(x)``: biased, non-contractive."""

    def __init__(self, b1=64, dim=None):
        self.b1 = b1
        self.dim = dim

    def _compress(self, x, rng):
        return 0.5 * _inf_norm(x) * _sign(x)

    def bit_cost(self, dim=None):
        return 2 * self._resolve_dim(dim) + self.b1

    def declared_classes(self, dim=None):
        d = self._resolve_dim(dim)
        return [
            RelativeError(phi=1 / d**2, r=d / 2),
            LocalAbsolute(p=math.inf, phi=0.5),
        ]


class UniformQuantizer(Compressor):
    """Round to the nearest multiple of ``delta`` (halves round up)."""

    def __init__(self, delta=1.0, b2=8, dim=None):
        self.delta = delta
        self.b2 = b2
        self.dim = dim

    def _compress(self, x, rng):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        return self.delta * np.floor(x / self.delta + 0.5)

    def bit_cost(self, dim=None):
        return self._resolve_dim(dim) * self.b2

    def declared_classes(self, dim=None):
        classes = [GlobalAbsolute(p=math.inf, C=self.delta**2 / 4)]
        if self.delta < 2:
            classes.append(LocalAbsolute(p=math.inf, phi=1 - self.delta / 2))
        return classes


class OneBitBinary(Compressor):
    """Each coordinate becomes +0.5 (entry >= 0) or -0.5."""

    def __init__(self, dim=None):
        self.dim = dim

    def _compress(self, x, rng):
        return 0.5 * _sign(x)

    def bit_cost(self, dim=None):
        return self._resolve_dim(dim)

    def declared_classes(self, dim=None):
        return [LocalAbsolute(p=math.inf, phi=0.5)]


class Identity(Compressor):
    """Exact communication; ``b1`` bits per scalar."""

    def __init__(self, b1=64, dim=None):
        self.b1 = b1
        self.dim = dim

    def _compress(self, x, rng):
        return x.copy()

    def bit_cost(self, dim=None):
        return self._resolve_dim(dim) * self.b1

    def declared_classes(self, dim=None):
        return [
            RelativeError(phi=1.0, r=1.0),
            GlobalAbsolute(p=math.inf, C=0.0),
            LocalAbsolute(p=math.inf, phi=1.0),
        ]


COMPRESSORS = {
    "unbiased_lbit": UnbiasedLBit,
    "topk": TopK,
    "norm_sign": NormSign,
    "uniform": UniformQuantizer,
    "one_bit": OneBitBinary,
    "identity": Identity,
}


def make_compressor(kind, dim=None, **params):
    """Build a compressor from its registry name, e.g. ``make_compressor("topk", k=10)``."""
    try:
        cls = COMPRESSORS[kind]
    except KeyError:
        raise ValueError(
            f"unknown compressor {kind!r}; choose from {sorted(COMPRESSORS)}"
        ) from None
    return cls(dim=dim, **params)


# ---------------------------------------------------------------------------
# Monte-Carlo verification

@dataclass
class VerificationReport:
    compressor: str
    assumption: object
    trials: int
    max_ratio: float
    passed: bool

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.compressor} vs {self.assumption}: "
            f"max ratio {self.max_ratio:.6g} over {self.trials} trials"
        )


def _pnorm(x, p):
    return np.linalg.norm(x, ord=p, axis=-1)


def _sample_vectors(rng, trials, d):
    """Gaussian directions with log-uniform scales, plus structured cases."""
    x = rng.standard_normal((trials, d))
    x *= 10.0 ** rng.uniform(-3, 3, size=(trials, 1))
    # sprinkle sparse, constant and tied vectors, where greedy operators are tight
    m = trials // 10
    if m:
        x[:m] = np.where(rng.random((m, d)) < 0.2, x[:m], 0.0)
        x[m : 2 * m] = rng.choice([-1.0, 1.0], size=(m, d)) * rng.uniform(0.1, 5, (m, 1))
    return x


def _sample_unit_ball(rng, trials, d, p):
    x = rng.standard_normal((trials, d))
    x /= _pnorm(x, p)[:, None]
    x *= rng.uniform(0, 1, size=(trials, 1))
    # boundary of the ball is where the bound binds
    m = trials // 4
    x[:m] /= _pnorm(x[:m], p)[:, None]
    if math.isinf(p) and trials >= 8:
        k = trials // 8
        x[m : m + k] = rng.choice([-1.0, 1.0], size=(k, d))
    else:
        k = min(trials - m, max(1, trials // 8))
        x[m : m + k] = d ** (-1.0 / p)
    return x


def _expected_sq_error(c, x, p, rng, inner):
    """E||C(x) - x||_p^2 (exact for deterministic operators)."""
    if not c.stochastic:
        return _pnorm(c.compress(x) - x, p) ** 2
    acc = np.zeros(x.shape[0])
    for _ in range(inner):
        acc += _pnorm(c.compress(x, rng) - x, p) ** 2
    return acc / inner


def verify_assumption(c, assumption, trials=1000, rng=None, dim=None, inner=64, tol=1e-9):
    """Check a compressor against an assumption class by random sampling.

    The report's ratio is observed error over the declared bound, so the
    class holds on the sample iff ``max_ratio <= 1 + tol``. Stochastic
    operators are averaged over ``inner`` draws per vector, which calls for
    a looser ``tol``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    d = c._resolve_dim(dim)
    rng = np.random.default_rng(rng)
    if type(assumption) not in {type(a) for a in c.declared_classes(d)}:
        raise ValueError(
            f"{type(c).__name__} is not declared to satisfy {type(assumption).__name__}"
        )

    if isinstance(assumption, RelativeError):
        x = _sample_vectors(rng, trials, d)
        scaled = _ScaledCompressor(c, assumption.r)
        err = _expected_sq_error(scaled, x, 2, rng, inner)
        bound = (1 - assumption.phi) * _pnorm(x, 2) ** 2
    elif isinstance(assumption, GlobalAbsolute):
        x = _sample_vectors(rng, trials, d)
        err = _expected_sq_error(c, x, assumption.p, rng, inner)
        bound = np.full(trials, assumption.C)
    elif isinstance(assumption, LocalAbsolute):
        x = _sample_unit_ball(rng, trials, d, assumption.p)
        if c.stochastic:
            raise ValueError("the local class is a pointwise bound for deterministic operators")
        err = _pnorm(c.compress(x) - x, assumption.p)
        bound = np.full(trials, 1 - assumption.phi)
    else:
        raise TypeError(f"unknown assumption class {assumption!r}")

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(err == 0, 0.0, err / bound)
    max_ratio = float(np.max(ratio))
    return VerificationReport(
        compressor=repr(c),
        assumption=assumption,
        trials=trials,
        max_ratio=max_ratio,
        passed=max_ratio <= 1 + tol,
    )


class _ScaledCompressor:
    def __init__(self, c, r):
        self.c, self.r, self.stochastic = c, r, c.stochastic

    def compress(self, x, rng=None):
        return self.c.compress(x, rng) / self.r


def verify_unbiased(c, x, draws=10_000, rng=None, z=3.0):
    """Test E[C(x)] = x from ``draws`` independent compressions of ``x``.

    Returns ``(passed, score)`` where ``score`` is ``||mean - x||`` divided by
    its standard error ``sqrt(sum_s var_s / draws)``; unbiasedness passes when
    the score is within ``z`` standard errors.
    """
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(rng)
    samples = c.compress(np.broadcast_to(x, (draws, x.shape[-1])), rng)
    mean = samples.mean(axis=0)
    se = math.sqrt(samples.var(axis=0, ddof=1).sum() / draws)
    dev = float(np.linalg.norm(mean - x))
    if se == 0:
        return dev == 0, 0.0 if dev == 0 else math.inf
    score = dev / se
    return score <= z, score
