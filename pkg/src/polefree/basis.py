"""Polynomial bases on [0, 1]: Bernstein and shifted Jacobi.

Also holds the monomial <-> Bernstein coefficient conversions and a few
classical root bounds used as positivity diagnostics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import DegenerateError, DomainError

ZERO_TOL = 1e-14


@dataclass(frozen=True)
class JacobiSpec:
    """Shifted Jacobi family P_n^(alpha, beta)(2x - 1) on [0, 1]."""

    alpha: float = -0.5
    beta: float = -0.5

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise DomainError(f"Jacobi parameters must exceed -1, got {self.alpha}, {self.beta}")


def _check_unit(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x > 1):
        raise DomainError("points must lie in [0, 1]")
    return x


def eval_bernstein_basis(n, x):
    """Evaluate all degree-``n`` Bernstein polynomials at ``x``.

    Returns an array of shape ``x.shape + (n + 1,)``.
    """
    if n < 0:
        raise DomainError(f"degree must be non-negative, got {n}")
    x = _check_unit(x)
    k = np.arange(n + 1)
    xe = x[..., None]
    return comb(n, k) * xe**k * (1.0 - xe) ** (n - k)


def eval_jacobi_basis(spec, n, x):
    """Shifted Jacobi polynomials of degree 0..n at ``x`` in [0, 1].

    Standard normalisation P_n(1) = C(n + alpha, n); generated by the
    three-term recurrence in t = 2x - 1.
    """
    if n < 0:
        raise DomainError(f"degree must be non-negative, got {n}")
    x = _check_unit(x)
    a, b = spec.alpha, spec.beta
    t = 2.0 * x - 1.0
    out = np.empty(x.shape + (n + 1,))
    out[..., 0] = 1.0
    if n == 0:
        return out
    out[..., 1] = (a + 1.0) + (a + b + 2.0) * (t - 1.0) / 2.0
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c0 = 2 * k * (k + a + b) * (s - 2)
        c1 = (s - 1) * (s * (s - 2) * t + a * a - b * b)
        c2 = 2 * (k + a - 1) * (k + b - 1) * s
        out[..., k] = (c1 * out[..., k - 1] - c2 * out[..., k - 2]) / c0
    return out


def _binom_table(n):
    """Exact C(j, k) for 0 <= k <= j <= n, as extended-precision floats."""
    t = np.zeros((n + 1, n + 1), dtype=np.longdouble)
    for j in range(n + 1):
        for k in range(j + 1):
            t[j, k] = math.comb(j, k)
    return t


def monomial_to_bernstein(a):
    """Bernstein coefficients (same degree) of the polynomial sum a_j x^j.

    b_j = sum_{k<=j} C(j,k)/C(n,k) a_k, built from exact integer binomials and
    accumulated in extended precision.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise DegenerateError("need a non-empty coefficient vector")
    n = a.size - 1
    C = _binom_table(n)
    return ((C / C[n]) @ a.astype(np.longdouble)).astype(float)


def bernstein_to_monomial(b):
    """Monomial coefficients of sum b_k B_k^(n); inverse of :func:`monomial_to_bernstein`."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size < 1:
        raise DegenerateError("need a non-empty coefficient vector")
    n = b.size - 1
    C = _binom_table(n)
    j, k = np.indices(C.shape)
    sign = np.where((j - k) % 2 == 0, 1, -1)
    # a_j = C(n, j) sum_k (-1)^(j-k) C(j, k) b_k
    mat = C[n][:, None] * sign * C
    return (mat @ b.astype(np.longdouble)).astype(float)


class RootVerdict(str, enum.Enum):
    NO_ROOTS = "no_roots_in_closed_interval"
    ROOT_AT_0 = "root_at_0"
    ROOT_AT_1 = "root_at_1"
    ROOT_AT_BOTH = "root_at_both"
    INCONCLUSIVE = "inconclusive"


def bernstein_root_exclusion(a):
    """Decide from the Bernstein coefficients whether sum a_j x^j can vanish on [0, 1]."""
    b = monomial_to_bernstein(a)
    b = np.where(np.abs(b) < ZERO_TOL, 0.0, b)
    if np.any(b < 0) or not np.any(b > 0):
        return RootVerdict.INCONCLUSIVE
    at0, at1 = b[0] == 0, b[-1] == 0
    if b.size == 1:
        return RootVerdict.NO_ROOTS
    if at0 and at1:
        return RootVerdict.ROOT_AT_BOTH
    if at0:
        return RootVerdict.ROOT_AT_0
    if at1:
        return RootVerdict.ROOT_AT_1
    return RootVerdict.NO_ROOTS


def _ratios(a):
    a = np.asarray(a, dtype=float)
    if a.size < 1 or a[0] == 0:
        raise DegenerateError("root bounds need a non-zero constant coefficient")
    return a[1:] / a[0]


def lagrange_root_lower_bound(a):
    """Lower bound 1 / max(1, sum |a_i / a_0|) on the root magnitudes."""
    r = _ratios(a)
    return 1.0 / max(1.0, float(np.sum(np.abs(r))))


def cauchy_root_lower_bound(a):
    """Lower bound 1 / (1 + max_i a_i / a_0), in the signed form."""
    r = _ratios(a)
    denom = 1.0 + (float(np.max(r)) if r.size else 0.0)
    # all ratios <= -1: the signed form gives no finite bound
    return 1.0 / denom if denom > 0 else np.inf
