"""Pole-free rational approximation with simplex-weighted Bernstein denominators."""

from .basis import (
    JacobiSpec,
    RootVerdict,
    bernstein_root_exclusion,
    bernstein_to_monomial,
    cauchy_root_lower_bound,
    eval_bernstein_basis,
    eval_jacobi_basis,
    lagrange_root_lower_bound,
    monomial_to_bernstein,
)
from .errors import DegenerateError, DivergenceError, DomainError, EvaluationError, PoleError, StepError
from .fitting import (
    Dataset,
    FitConfig,
    FitReport,
    cross_validate,
    fit,
    fit_shared,
    grad_w_nonlinear,
    linearized_loss,
    max_step,
    nonlinear_loss,
    reweighted_loss,
    simplex_step,
    sk_fit,
    sobolev_jacobi_penalty,
    solve_numerator,
)
from .multivariate import TensorRationalModel, mv_evaluate, mv_fit, mv_penalty
from .rational import PoleAudit, RationalModel, audit_model, audit_poles, evaluate, load_model, save_model

__all__ = [
    "Dataset",
    "DegenerateError",
    "DivergenceError",
    "DomainError",
    "EvaluationError",
    "FitConfig",
    "FitReport",
    "JacobiSpec",
    "PoleAudit",
    "PoleError",
    "RationalModel",
    "RootVerdict",
    "StepError",
    "TensorRationalModel",
    "audit_model",
    "audit_poles",
    "bernstein_root_exclusion",
    "bernstein_to_monomial",
    "cauchy_root_lower_bound",
    "cross_validate",
    "eval_bernstein_basis",
    "eval_jacobi_basis",
    "evaluate",
    "fit",
    "fit_shared",
    "grad_w_nonlinear",
    "lagrange_root_lower_bound",
    "linearized_loss",
    "load_model",
    "max_step",
    "monomial_to_bernstein",
    "mv_evaluate",
    "mv_fit",
    "mv_penalty",
    "nonlinear_loss",
    "reweighted_loss",
    "save_model",
    "simplex_step",
    "sk_fit",
    "sobolev_jacobi_penalty",
    "solve_numerator",
]
