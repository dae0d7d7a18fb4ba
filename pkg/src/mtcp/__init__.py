"""Sequential lower-dimensional solvers for M-tensor complementarity problems."""
from .kernels import BACKEND
from .problems import GeneratorSpec, generate, strong_m_certificate
from .solver import (
    ProblemInstance,
    SolveOutcome,
    SolverConfig,
    check_trace,
    eval_F,
    solve,
    ld_a_newton,
    ld_leqa,
    residual,
    verify_solution,
)
from .tensor_core import DenseTensor, contract_power, identity_tensor, majorization_split

__all__ = [
    "BACKEND",
    "DenseTensor",
    "GeneratorSpec",
    "ProblemInstance",
    "SolveOutcome",
    "SolverConfig",
    "check_trace",
    "contract_power",
    "eval_F",
    "generate",
    "identity_tensor",
    "ld_a_newton",
    "ld_leqa",
    "majorization_split",
    "residual",
    "solve",
    "strong_m_certificate",
    "verify_solution",
]
