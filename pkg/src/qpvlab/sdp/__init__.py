"""Semidefinite programming: modeling layer, interior-point engine and program builders."""
from .problem import SdpProblem, Term, excitation_mask, functional_op, identity_op, pt_op
from .solver import SdpSolution, SolverSettings, solve

__all__ = [
    "SdpProblem", "SdpSolution", "SolverSettings", "Term", "excitation_mask",
    "functional_op", "identity_op", "pt_op", "solve",
]
