"""Pseudoinverse-free greedy average block nonlinear Kaczmarz solvers."""

from .diagnostics import (
    ConeEstimate,
    Lemma1Check,
    OrderingReport,
    StepBound,
    VerifiedStep,
    check_lemma1,
    estimate_cone,
    nrk_bound,
    per_step_contraction,
    remark2_compare,
    sample_pairs,
    theorem_bound,
    verified_contraction_steps,
)
from .exceptions import BreakdownError, DomainError
from .kernels import BACKEND as KERNEL_BACKEND
from .problems import (
    Problem,
    get_problem,
    make_brown,
    make_h_equation,
    make_overdetermined_rational,
    make_singular_broyden,
)
from .solvers import (
    BlockSelection,
    Method,
    SolverConfig,
    SolverReport,
    Status,
    average_block_step,
    newton_step,
    nrk_step,
    rbcnk_step,
    run,
    select_mrnabk,
    select_ngabk,
    select_rdcnk,
)
from .system import IterateState, NonlinearSystem, fd_check

__all__ = [
    "BlockSelection", "BreakdownError", "ConeEstimate", "DomainError",
    "IterateState", "KERNEL_BACKEND", "Lemma1Check", "Method",
    "NonlinearSystem", "OrderingReport", "Problem", "SolverConfig",
    "SolverReport", "StepBound", "Status", "VerifiedStep",
    "average_block_step", "check_lemma1", "estimate_cone", "fd_check",
    "get_problem", "make_brown", "make_h_equation",
    "make_overdetermined_rational", "make_singular_broyden", "newton_step",
    "nrk_bound", "nrk_step", "per_step_contraction", "rbcnk_step",
    "remark2_compare", "run", "sample_pairs", "select_mrnabk", "select_ngabk",
    "select_rdcnk", "theorem_bound", "verified_contraction_steps",
]

__version__ = "0.1.0"
