"""Exact linear differential operators: adjoints, involutive bases,
compatibility conditions, double duality and Spencer cohomology."""

from __future__ import annotations

from .coeff import Context, RatFunc
from .ore import DiffOp, adjoint
from .opmat import JetExpr, OpMatrix, compose, mat_adjoint
from .janet import complete, differential_rank, is_involutive
from .cc import free_resolution, generating_cc
from .duality import double_duality, minimal_parametrization

__version__ = "0.1.0"

__all__ = [
    "Context",
    "RatFunc",
    "DiffOp",
    "adjoint",
    "OpMatrix",
    "JetExpr",
    "compose",
    "mat_adjoint",
    "complete",
    "differential_rank",
    "is_involutive",
    "generating_cc",
    "free_resolution",
    "double_duality",
    "minimal_parametrization",
]
