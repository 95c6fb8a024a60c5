"""Chebyshev collocation eigen-solves for two Bessel parameterisations.

The non-constant coefficients are replaced by polynomial or rational
approximations before discretising, so the eigenvalue error measures how
well each approximation carries the coefficient into the spectrum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg
from numpy.polynomial import chebyshev as C

from .errors import DegenerateError, DomainError, EvaluationError
from .fitting import Dataset, FitConfig, fit, fit_shared

N_POINTS = 256
FIT_SAMPLES = 1001
NUM_EIGS = 20
SERIES_CUTOFF = 12.0
IMAG_TOL = 1e-6


# ---------------------------------------------------------------------------
# collocation


@dataclass(frozen=True, eq=False)
class CollocationGrid:
    nodes: np.ndarray
    D1: np.ndarray
    D2: np.ndarray

    @property
    def interval(self):
        return float(self.nodes[0]), float(self.nodes[-1])


def build_grid(n_points, interval=(0.0, 1.0), dtype=np.float64):
    """Gauss-Lobatto nodes on ``interval`` (increasing) with dense D1 and D2.

    ``dtype=np.longdouble`` builds the matrices in extended precision for
    :func:`refine_eigenvalues`.
    """
    if n_points < 4:
        raise DomainError("need at least 4 collocation points")
    one = np.asarray(1, dtype=dtype)
    a, b = (one * float(v) for v in interval)
    if not b > a:
        raise DomainError("interval must have b > a")
    N = n_points - 1
    j = np.arange(n_points)
    theta = j * np.arccos(-one) / N
    c = np.where((j == 0) | (j == N), 2 * one, one) * (-one) ** j
    # x_i - x_j = -2 sin((t_i + t_j)/2) sin((t_i - t_j)/2), exact away from cancellation
    dx = -2.0 * np.sin(0.5 * (theta[:, None] + theta[None, :])) * np.sin(0.5 * (theta[:, None] - theta[None, :]))
    np.fill_diagonal(dx, 1.0)
    Z = 1.0 / dx
    np.fill_diagonal(Z, 0.0)
    ratio = c[:, None] / c[None, :]
    # D^(l) = l Z (ratio diag(D^(l-1)) - D^(l-1)), diagonals by the negative-sum trick
    mats = []
    D = np.eye(n_points, dtype=theta.dtype)
    for ell in (1, 2):
        D = ell * Z * (ratio * np.diag(D)[:, None] - D)
        np.fill_diagonal(D, 0.0)
        np.fill_diagonal(D, -D.sum(axis=1))
        mats.append(D)
    # cos(theta) is decreasing; flip to increasing order
    t = -np.cos(theta)
    nodes = a + (b - a) * (t + 1.0) / 2.0
    nodes[0], nodes[-1] = a, b
    scale = 2.0 / (b - a)
    D1 = mats[0][::-1, ::-1] * scale
    D2 = mats[1][::-1, ::-1] * scale**2
    return CollocationGrid(nodes, D1, D2)


# ---------------------------------------------------------------------------
# coefficient approximations


@dataclass
class CoefficientApprox:
    """Approximations of the non-constant coefficients on the problem interval.

    ``numerators`` are callables of the problem variable; ``denominator``
    is ``None`` except in rational mode, where all numerators share it.
    """

    numerators: list
    denominator: object = None
    mode: str = "exact"
    approx_error: float = 0.0

    def scaled(self, c):
        nums = [(lambda z, f=f: c * f(z)) for f in self.numerators]
        den = self.denominator
        if den is not None:
            den = lambda z, f=den: c * f(z)  # noqa: E731
        return CoefficientApprox(nums, den, self.mode, self.approx_error)


def _to_unit(z, interval):
    lo, hi = interval
    return np.clip((np.asarray(z, dtype=float) - lo) / (hi - lo), 0.0, 1.0)


def approximate(funcs, interval, mode, n, samples=FIT_SAMPLES, config=None):
    """Polynomial (degree n), rational R(n, n) with one shared denominator, or exact."""
    funcs = list(funcs)
    if mode == "exact":
        return CoefficientApprox(funcs, None, "exact", 0.0)
    t = np.linspace(0.0, 1.0, samples)
    lo, hi = interval
    z = lo + (hi - lo) * t
    Y = np.column_stack([f(z) for f in funcs])
    if mode == "polynomial":
        series = [C.Chebyshev.fit(t, Y[:, k], n, domain=[0.0, 1.0]) for k in range(Y.shape[1])]
        fitted = np.column_stack([s(t) for s in series])
        nums = [(lambda zz, s=s: s(_to_unit(zz, interval))) for s in series]
        den = None
    elif mode == "rational":
        cfg = config or FitConfig(num_degree=n, den_degree=n, loss="nonlinear", hot_start=True)
        if Y.shape[1] == 1:
            models = [fit(Dataset(t, Y[:, 0]), cfg).model]
        else:
            shared = fit_shared(t, Y, cfg)
            models = [shared.model(k) for k in range(Y.shape[1])]
        fitted = np.column_stack([m(t) for m in models])
        nums = [(lambda zz, m=m: m.numerator_values(_to_unit(zz, interval))) for m in models]
        ref = models[0]
        den = lambda zz: ref.denominator_values(_to_unit(zz, interval))  # noqa: E731
    else:
        raise DomainError(f"unknown approximation mode {mode!r}")
    errs = np.sqrt(np.sum((fitted - Y) ** 2, axis=0))
    return CoefficientApprox(nums, den, mode, float(np.mean(errs)))


def single_coefficient(a):
    return [lambda x: np.exp(2.0 * a * x)]


def multiple_coefficients(a):
    """c2, c1, c0 on [0, ln 2 / a]: y'' weight, y' weight and the lambda weight."""
    return [
        lambda z: (1.0 - np.exp(-a * z)) ** 2 / a**2,
        lambda z: np.exp(-a * z) * (1.0 - np.exp(-a * z)) / a,
        lambda z: np.expm1(a * z) ** 2,
    ]


def multiple_interval(a):
    return (0.0, math.log(2.0) / a)


# ---------------------------------------------------------------------------
# pencils


@dataclass(frozen=True, eq=False)
class EigenProblem:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1] or self.A.shape != self.B.shape:
            raise DomainError("A and B must be square with equal shapes")


def _den_at_nodes(coeff, nodes):
    if coeff.denominator is None:
        return np.ones_like(nodes)
    q = np.asarray(coeff.denominator(nodes))
    if np.any(q <= 0):
        raise DegenerateError("rational coefficient denominator is not positive at every node")
    return q


def _dirichlet(A, B):
    A, B = A.copy(), B.copy()
    for r in (0, -1):
        A[r, :] = 0.0
        A[r, r] = 1.0
        B[r, :] = 0.0
    return EigenProblem(A, B)


def assemble_bessel_single(coeff, a, m, grid):
    """(1/a^2) y'' - m^2 y = -lambda p y on [0, 1], denominator cleared in rational mode."""
    x = grid.nodes
    p = np.asarray(coeff.numerators[0](x))
    q = _den_at_nodes(coeff, x)
    L = grid.D2 / a**2 - m**2 * np.eye(x.size, dtype=x.dtype)
    return _dirichlet(q[:, None] * L, -np.diag(p))


def assemble_bessel_multiple(coeff, a, m, grid):
    """c2 y'' + c1 y' - m^2 y = -lambda c0 y on [0, ln 2 / a], one shared denominator."""
    z = grid.nodes
    p2, p1, p0 = (np.asarray(f(z)) for f in coeff.numerators)
    q = _den_at_nodes(coeff, z)
    A = p2[:, None] * grid.D2 + p1[:, None] * grid.D1 - m**2 * np.diag(q)
    return _dirichlet(A, -np.diag(p0))


@dataclass
class EigenResult:
    values: np.ndarray
    flagged: np.ndarray  # modes whose imaginary part exceeded the relative tolerance


def _dirichlet_rows(problem):
    A, B = problem.A, problem.B
    n = A.shape[0]
    rows = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        if not np.any(B[i]) and np.array_equal(A[i], e):
            rows.append(i)
    return rows


def solve_eigen(problem, k, positive=True):
    """Smallest ``k`` finite eigenvalues of A y = lambda B y by real part.

    Dirichlet rows (zero row in B, unit row in A) are eliminated, and the
    remaining pencil is inverted so the wanted eigenvalues are the
    dominant ones of A^{-1} B, which keeps their relative accuracy near
    machine precision. A singular A falls back to QZ. Infinite modes are
    dropped; with ``positive`` so are non-positive ones, which cannot occur
    for these Sturm-Liouville problems and only arise from a poor
    coefficient.
    """
    n = problem.A.shape[0]
    if not 1 <= k <= n - 2:
        raise DomainError("k must lie in [1, dimension - 2]")
    A = np.asarray(problem.A, dtype=float)
    B = np.asarray(problem.B, dtype=float)
    keep = np.setdiff1d(np.arange(n), _dirichlet_rows(problem))
    A, B = A[np.ix_(keep, keep)], B[np.ix_(keep, keep)]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            mu = scipy.linalg.eigvals(scipy.linalg.solve(A, B))
        finite = np.abs(mu) > 1e-14 * np.max(np.abs(mu))
        lam = 1.0 / mu[finite]
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
        alpha, beta = scipy.linalg.eig(A, B, right=False, homogeneous_eigvals=True)
        finite = np.abs(beta) > 1e-12 * np.abs(alpha)
        lam = alpha[finite] / beta[finite]
    if positive:
        lam = lam[lam.real > 0]
    lam = lam[np.argsort(lam.real, kind="stable")][:k]
    flagged = np.abs(lam.imag) > IMAG_TOL * np.maximum(np.abs(lam.real), 1.0)
    return EigenResult(lam.real.copy(), flagged)


def _lu_solve(M, b):
    # partial-pivot elimination that works in any numpy float dtype
    M, b = M.copy(), b.copy()
    n = b.size
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if p != k:
            M[[k, p]] = M[[p, k]]
            b[[k, p]] = b[[p, k]]
        f = M[k + 1 :, k] / M[k, k]
        M[k + 1 :, k:] -= f[:, None] * M[k, k:]
        b[k + 1 :] -= f * b[k]
    y = np.zeros_like(b)
    for k in range(n - 1, -1, -1):
        y[k] = (b[k] - M[k, k + 1 :] @ y[k + 1 :]) / M[k, k]
    return y


def refine_eigenvalues(problem, estimates, iters=3):
    """Shifted inverse iteration carried out in the dtype of ``problem``.

    With a pencil assembled in ``np.longdouble`` this pushes simple
    eigenvalues past double-precision roundoff in the dense solve.
    """
    keep = np.setdiff1d(np.arange(problem.A.shape[0]), _dirichlet_rows(problem))
    A = problem.A[np.ix_(keep, keep)]
    B = problem.B[np.ix_(keep, keep)]
    out = []
    for lam in np.atleast_1d(estimates):
        s = A.dtype.type(lam)
        y = np.ones(keep.size, dtype=A.dtype)
        for _ in range(iters):
            z = _lu_solve(A - s * B, B @ y)
            i = int(np.argmax(np.abs(z)))
            s = s + y[i] / z[i]
            y = z / z[i]
        out.append(s)
    return np.asarray(out, dtype=A.dtype)


# ---------------------------------------------------------------------------
# Bessel functions


def _j_series(m, x):
    half = 0.5 * x
    term = half**m / math.factorial(m)
    total, k = term, 0
    while True:
        k += 1
        term *= -(half * half) / (k * (k + m))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) or k > 500:
            return total


def _j_miller(m, x):
    # backward recurrence normalised with J_0 + 2 sum J_2k = 1
    start = 2 * ((max(m, int(x)) + 20 + int(math.sqrt(40.0 * max(m, x)))) // 2)
    jp, j = 0.0, 1e-30
    norm, want = 0.0, 0.0
    for k in range(start, 0, -1):
        jm = 2.0 * k / x * j - jp
        jp, j = j, jm
        if abs(j) > 1e250:
            j, jp, norm, want = j * 1e-250, jp * 1e-250, norm * 1e-250, want * 1e-250
        if k - 1 == m:
            want = j
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j
    norm += j
    return want / norm


def bessel_j(m, x):
    """J_m(x) for integer m and x >= 0."""
    m = int(m)
    x = float(x)
    if x < 0:
        raise DomainError("bessel_j needs x >= 0")
    sign = 1.0
    if m < 0:
        m, sign = -m, (-1.0) ** m
    if x == 0:
        return sign * (1.0 if m == 0 else 0.0)
    val = _j_series(m, x) if x <= SERIES_CUTOFF else _j_miller(m, x)
    return sign * val


def bessel_y(m, x):
    """Y_m(x) for integer m and x > 0 from its integral representation.

    Y_m(x) = (1/pi) int_0^pi sin(x sin t - m t) dt
             - (1/pi) int_0^inf (e^{mt} + (-1)^m e^{-mt}) e^{-x sinh t} dt
    """
    m = int(m)
    x = float(x)
    if not x > 0:
        raise DomainError("bessel_y needs x > 0")
    sign = 1.0
    if m < 0:
        m, sign = -m, (-1.0) ** m
    with warnings.catch_warnings():
        # the tolerances sit at roundoff level; quad reports that but the value is fine
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        first, _ = scipy.integrate.quad(
            lambda t: math.sin(x * math.sin(t) - m * t), 0.0, math.pi, limit=400, epsabs=1e-14, epsrel=1e-13
        )
    # cut the tail where the integrand is below e^{-40} of its peak scale
    t_peak = math.asinh(m / x) if m else 0.0
    upper = t_peak + 1.0
    while x * math.sinh(upper) - m * upper - (x * math.sinh(t_peak) - m * t_peak) < 45.0:
        upper += 1.0
    parity = -1.0 if m % 2 else 1.0

    def g(t):
        return (math.exp(m * t - x * math.sinh(t)) + parity * math.exp(-m * t - x * math.sinh(t)))

    pts = [t_peak] if 0 < t_peak < upper else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        second, _ = scipy.integrate.quad(g, 0.0, upper, points=pts, limit=400, epsabs=1e-14, epsrel=1e-13)
    return sign * (first - second) / math.pi


def _bisect(f, lo, hi, tol=1e-12):
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bessel_j_roots(m, k, step=0.05):
    """First ``k`` positive roots of J_m from a sign scan plus bisection."""
    if k < 1:
        raise DomainError("k must be positive")
    roots = []
    f = lambda x: bessel_j(m, x)  # noqa: E731
    lo = step
    flo = f(lo)
    while len(roots) < k:
        hi = lo + step
        fhi = f(hi)
        if fhi == 0:
            roots.append(hi)
            lo, flo = hi + step, f(hi + step)
            continue
        if flo * fhi < 0:
            roots.append(_bisect(f, lo, hi))
        lo, flo = hi, fhi
    return np.asarray(roots)


def reference_eigenvalues(m, k):
    """Squares of the first ``k`` roots of J_m."""
    return bessel_j_roots(m, k) ** 2


def eigenvalue_ratio_error(lam, a, m):
    """|J_m(s e^a) Y_m(s) / (J_m(s) Y_m(s e^a)) - 1| with s = sqrt(lam)."""
    lam = float(lam)
    if not lam > 0:
        raise DomainError("eigenvalue must be positive")
    s = math.sqrt(lam)
    big = s * math.exp(a)
    f = [bessel_j(m, big), bessel_y(m, s), bessel_j(m, s), bessel_y(m, big)]
    if not all(math.isfinite(v) and v != 0.0 for v in f):
        raise EvaluationError(f"Bessel factor underflow or overflow at lambda={lam}")
    return abs(f[0] * f[1] / (f[2] * f[3]) - 1.0)


# ---------------------------------------------------------------------------
# table runs


@dataclass
class TableRow:
    num_coefs: int
    mode: str
    eig_error: float
    approx_error: float


def single_case_error(n, mode, a=4.0, m=2, n_points=N_POINTS, k=NUM_EIGS):
    coeff = approximate(single_coefficient(a), (0.0, 1.0), mode, n)
    lam = solve_eigen(assemble_bessel_single(coeff, a, m, build_grid(n_points)), k).values
    err = float(np.mean([eigenvalue_ratio_error(v, a, m) for v in lam]))
    return TableRow(n, mode, err, coeff.approx_error)


def multiple_case_error(n, mode, a=1.0, m=2, n_points=N_POINTS, k=NUM_EIGS, reference=None):
    interval = multiple_interval(a)
    coeff = approximate(multiple_coefficients(a), interval, mode, n)
    lam = solve_eigen(assemble_bessel_multiple(coeff, a, m, build_grid(n_points, interval)), k).values
    ref = reference_eigenvalues(m, k) if reference is None else reference
    if lam.size < k:
        return TableRow(n, mode, float("inf"), coeff.approx_error)
    return TableRow(n, mode, float(np.mean(np.abs(lam - ref))), coeff.approx_error)


def run_table(case, coefs, n_points=N_POINTS, modes=("polynomial", "rational")):
    """Rows of (num_coefs, mode, eig_error, approx_error) for each n and mode."""
    if case not in ("single", "multiple"):
        raise DomainError(f"unknown case {case!r}")
    rows = []
    ref = reference_eigenvalues(2, NUM_EIGS) if case == "multiple" else None
    for n in coefs:
        for mode in modes:
            try:
                if case == "single":
                    rows.append(single_case_error(n, mode, n_points=n_points))
                else:
                    rows.append(multiple_case_error(n, mode, n_points=n_points, reference=ref))
            except (ArithmeticError, ValueError, np.linalg.LinAlgError):
                rows.append(TableRow(n, mode, float("nan"), float("nan")))
    return rows
