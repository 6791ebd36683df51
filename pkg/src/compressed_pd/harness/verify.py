"""
Monte-Carlo check of every compressor against the constants it is run with.
"""

import math

import numpy as np

from ..compressors import (
    GlobalAbsolute,
    LocalAbsolute,
    NormSign,
    OneBitBinary,
    RelativeError,
    TopK,
    UnbiasedLBit,
    UniformQuantizer,
    verify_assumption,
    verify_unbiased,
)

__all__ = ["CheckResult", "compressor_checks"]


class CheckResult:
    def __init__(self, name, passed, detail):
        self.name, self.passed, self.detail = name, bool(passed), detail

    def __str__(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def compressor_checks(trials=10_000, d=50, seed=0, k=10, l=2, delta=1.0):
    """Run the standard battery and return a list of :class:`CheckResult`.

    Deterministic bounds allow no violation at all (a relative slack of
    1e-9 absorbs rounding). The stochastic quantizer is checked for
    unbiasedness at three standard errors, on ``trials`` draws for each of
    a few fixed vectors.
    """
    rng = np.random.default_rng(seed)
    out = []
    cases = [
        (TopK(k=k, dim=d), RelativeError(phi=k / d, r=1.0)),
        (UniformQuantizer(delta=delta, dim=d), GlobalAbsolute(p=math.inf, C=delta**2 / 4)),
        (OneBitBinary(dim=d), LocalAbsolute(p=math.inf, phi=0.5)),
        (NormSign(dim=d), LocalAbsolute(p=math.inf, phi=0.5)),
        (NormSign(dim=d), RelativeError(phi=1 / d**2, r=d / 2)),
    ]
    for comp, cls in cases:
        rep = verify_assumption(comp, cls, trials=trials, rng=rng)
        out.append(
            CheckResult(
                f"{type(comp).__name__} {cls}",
                rep.passed,
                f"max observed/bound {rep.max_ratio:.6g} over {trials} vectors",
            )
        )

    lbit = UnbiasedLBit(l=l, dim=d)
    vectors = {
        "gaussian": rng.standard_normal(d),
        "sparse": np.where(rng.random(d) < 0.2, rng.standard_normal(d), 0.0),
        "tiny": 1e-8 * rng.standard_normal(d),
    }
    for label, x in vectors.items():
        ok, score = verify_unbiased(lbit, x, draws=trials, rng=rng)
        out.append(
            CheckResult(
                f"UnbiasedLBit(l={l}) unbiased, {label} vector",
                ok,
                f"|mean - x| = {score:.3g} standard errors over {trials} draws",
            )
        )
    return out
