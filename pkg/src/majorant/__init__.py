"""Minimal majorants in L^p at the special exponents p = 2j/(2j-1)."""

from .dual import (
    ConjugateResult,
    DualSolution,
    EmptyInput,
    ScalingMismatch,
    SolverConfig,
    kkt_report,
    minimal_majorant,
    rescale_to_conjugate,
    solve_dual,
)
from .primal import CrossValidation, MismatchError, PrimalSolution, cross_validate, solve_primal
from .spectral import (
    CoefficientSequence,
    ExponentPair,
    NonConvergence,
    QuadratureConfig,
    convolve,
    exact_majorant,
    norm_even,
    norm_p,
    power_product,
    reflect_conjugate,
    self_convolve,
)
from .sumsets import BjWitness, FrequencySet, is_bj_set, majorant_window, sj_growth_report, sumset
from .verify import (
    BudgetExceeded,
    EqualityCase,
    PreconditionViolated,
    Verdict,
    VerificationReport,
    brute_oracle,
    check_dual_norm_inequality,
    equality_case_report,
    factorability_check,
    verify_conjugate,
)

__version__ = "0.1.0"
