"""Distributed primal-dual optimization with compressed communication."""

from .algorithms import HyperParams, NumericalError, init, run, step
from .compressors import (
    Identity,
    NormSign,
    OneBitBinary,
    TopK,
    UnbiasedLBit,
    UniformQuantizer,
    make_compressor,
)
from .objectives import LogisticNonconvex, PLScalar, Quadratic
from .topology import Topology, random_geometric_graph
from .estimator import DistributedLogisticClassifier

__version__ = "0.1.0"
