"""Quantum graphs on M_n and degree-matrix certificates of quantum rigidity."""

from .linalg import Backend, TolerancePolicy, TraceMode
from .opsys import OperatorSystem, OperatorTuple, RngSpec
from .rigidity import RigidityCertificate, SweepReport, Verdict, certify_tuple, sweep
from .scalar import GaussianRational
from .superop import ChoiMatrix, KrausTuple, Superoperator

__version__ = "0.1.0"
