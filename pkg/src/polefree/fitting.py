"""Fitting rational models with a simplex-constrained Bernstein denominator.

The optimisation alternates a multiplicative step on the denominator
weights (which stays on the simplex by construction) with an exact
ridge-type solve for the numerator coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from scipy.optimize import nnls

from .basis import (
    JacobiSpec,
    eval_bernstein_basis,
    eval_jacobi_basis,
    monomial_to_bernstein,
)
from .errors import DegenerateError, DivergenceError, DomainError, PoleError, StepError
from .rational import RationalModel, audit_model

log = logging.getLogger(__name__)

LOSSES = ("linearized", "reweighted", "nonlinear")
MAX_PENALTY_DEGREE = 120
ENDPOINT_TOL = 1e-12
SK_MAX_ITERS = 20
SK_TOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Samples ``(points[i], values[i])`` with optional quadrature weights.

    ``points`` is ``(I,)`` for univariate data or ``(I, s)`` on the unit
    hypercube.
    """

    points: np.ndarray
    values: np.ndarray
    quad_weights: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.points, dtype=float)
        y = np.asarray(self.values, dtype=float).reshape(-1)
        if x.shape[0] != y.size or y.size < 1:
            raise DomainError("points and values must have equal, non-zero length")
        if np.any(x < 0) or np.any(x > 1) or not np.all(np.isfinite(x)):
            raise DomainError("points must lie in the unit interval/hypercube")
        if not np.all(np.isfinite(y)):
            raise DomainError("values must be finite")
        object.__setattr__(self, "points", x)
        object.__setattr__(self, "values", y)
        if self.quad_weights is not None:
            mu = np.asarray(self.quad_weights, dtype=float).reshape(-1)
            if mu.size != y.size or np.any(mu <= 0):
                raise DomainError("quadrature weights must be positive, one per sample")
            object.__setattr__(self, "quad_weights", mu)

    def __len__(self):
        return self.values.size

    @property
    def ndim(self):
        return 1 if self.points.ndim == 1 else self.points.shape[1]

    @property
    def mu(self):
        if self.quad_weights is None:
            return np.full(len(self), 1.0 / len(self))
        return self.quad_weights

    def subset(self, idx):
        mu = None if self.quad_weights is None else self.quad_weights[idx]
        return Dataset(self.points[idx], self.values[idx], mu)


@dataclass(frozen=True)
class FitConfig:
    num_degree: int | tuple = 10
    den_degree: int | tuple = 10
    loss: str = "nonlinear"
    smoothing: float = 0.0
    max_iters: int = 500
    rel_tol: float = 1e-10
    hot_start: bool = True
    seed: int = 0
    basis: JacobiSpec = field(default_factory=JacobiSpec)

    def __post_init__(self):
        degs = np.atleast_1d(self.num_degree).tolist() + np.atleast_1d(self.den_degree).tolist()
        if any(int(d) != d or d < 0 for d in degs):
            raise DomainError("degrees must be non-negative integers")
        if self.loss not in LOSSES:
            raise DomainError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if not self.smoothing >= 0:
            raise DomainError("smoothing strength must be non-negative")
        if self.max_iters < 1:
            raise DomainError("max_iters must be at least 1")


@dataclass
class FitReport:
    model: object
    final_loss: float
    loss_trajectory: np.ndarray
    iterations: int
    hot_start_source: str
    pole_audit: object
    converged: bool = True


# ---------------------------------------------------------------------------
# penalty and design matrices


def penalty_weights(n):
    """n^n for n = 0..N with 0^0 = 1."""
    if n > MAX_PENALTY_DEGREE:
        raise OverflowError(f"penalty weight n^n overflows beyond degree {MAX_PENALTY_DEGREE}")
    k = np.arange(n + 1, dtype=float)
    return k**k


def sobolev_jacobi_penalty(a):
    """Smoothing penalty sum_n a_n^2 n^n on spectral coefficients."""
    a = np.asarray(a, dtype=float).reshape(-1)
    return float(np.sum(a**2 * penalty_weights(a.size - 1)))


def design_matrices(points, num_degree, den_degree, basis=None):
    basis = basis or JacobiSpec()
    return (
        eval_jacobi_basis(basis, num_degree, points),
        eval_bernstein_basis(den_degree, points),
    )


def _as2d(y):
    y = np.asarray(y, dtype=float)
    return y[:, None] if y.ndim == 1 else y


# ---------------------------------------------------------------------------
# losses on raw design matrices; A is (Nn, K), Y is (I, K)


def _lin_loss(P, B, Y, mu, pen, lam, A, w, scale=None):
    D = B @ w
    r = Y * D[:, None] - P @ A
    m = mu if scale is None else mu / scale**2
    return float(np.sum(m[:, None] * r**2) + lam * np.sum(pen[:, None] * A**2))


def _nonlin_loss(P, B, Y, mu, pen, lam, A, w):
    D = B @ w
    if np.any(D == 0):
        raise PoleError("denominator vanishes at a sample point")
    r = Y - (P @ A) / D[:, None]
    return float(np.sum(mu[:, None] * r**2) + lam * np.sum(pen[:, None] * A**2))


def _prev_den(B, prev_w):
    Dp = B @ prev_w
    if np.any(Dp == 0):
        raise PoleError("previous denominator vanishes at a sample point")
    return Dp


def _loss(kind, P, B, Y, mu, pen, lam, A, w, prev_w=None):
    if kind == "linearized":
        return _lin_loss(P, B, Y, mu, pen, lam, A, w)
    if kind == "nonlinear":
        return _nonlin_loss(P, B, Y, mu, pen, lam, A, w)
    return _lin_loss(P, B, Y, mu, pen, lam, A, w, scale=_prev_den(B, prev_w))


def _grad(kind, P, B, Y, mu, A, w, prev_w=None):
    D = B @ w
    N = P @ A
    if kind == "nonlinear":
        if np.any(D == 0):
            raise PoleError("denominator vanishes at a sample point")
        r = Y - N / D[:, None]
        g = 2.0 * mu * np.sum(r * N, axis=1) / D**2
    else:
        m = mu if kind == "linearized" else mu / _prev_den(B, prev_w) ** 2
        r = Y * D[:, None] - N
        g = 2.0 * m * np.sum(r * Y, axis=1)
    return g @ B


def _solve_num(kind, P, B, Y, mu, pen, lam, w, prev_w=None):
    D = B @ w
    s = np.sqrt(mu)
    if kind == "linearized":
        rows, rhs = s[:, None] * P, s[:, None] * Y * D[:, None]
    elif kind == "nonlinear":
        if np.any(D == 0):
            raise PoleError("denominator vanishes at a sample point")
        rows, rhs = (s / D)[:, None] * P, s[:, None] * Y
    else:
        Dp = _prev_den(B, prev_w)
        rows, rhs = (s / Dp)[:, None] * P, (s * D / Dp)[:, None] * Y
    if lam > 0:
        rows = np.vstack([rows, np.diag(np.sqrt(lam * pen))])
        rhs = np.vstack([rhs, np.zeros((pen.size, Y.shape[1]))])
    # complete orthogonal factorisation with column pivoting; minimum norm if rank deficient
    A, *_ = scipy.linalg.lstsq(rows, rhs, lapack_driver="gelsy", check_finite=False)
    return A


def _linearized_qp(P, B, Y, mu, pen, lam):
    """Exact minimiser over the simplex of the linearized loss with a eliminated."""
    s = np.sqrt(mu)
    rows = s[:, None] * P
    if lam > 0:
        rows = np.vstack([rows, np.diag(np.sqrt(lam * pen))])
    Q = scipy.linalg.orth(rows)
    blocks = []
    for k in range(Y.shape[1]):
        C = (s * Y[:, k])[:, None] * B
        if lam > 0:
            C = np.vstack([C, np.zeros((pen.size, B.shape[1]))])
        blocks.append(C - Q @ (Q.T @ C))
    L = np.vstack(blocks)
    kappa = 1e4 * max(1.0, np.linalg.norm(L, 2))
    Laug = np.vstack([L, kappa * np.ones((1, B.shape[1]))])
    rhs = np.zeros(Laug.shape[0])
    rhs[-1] = kappa
    w, _ = nnls(Laug, rhs, maxiter=50 * B.shape[1])
    if not w.sum() > 0:
        raise DegenerateError("linearized fit produced an all-zero denominator")
    return w / w.sum()


# ---------------------------------------------------------------------------
# public univariate operations


def _prep(dataset, basis, num_degree, den_degree):
    P, B = design_matrices(dataset.points, num_degree, den_degree, basis)
    return P, B, _as2d(dataset.values), dataset.mu


def linearized_loss(a, w, dataset, lam=0.0, basis=None):
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    P, B, Y, mu = _prep(dataset, basis, a.size - 1, w.size - 1)
    return _lin_loss(P, B, Y, mu, penalty_weights(a.size - 1), lam, a[:, None], w)


def nonlinear_loss(a, w, dataset, lam=0.0, basis=None):
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    P, B, Y, mu = _prep(dataset, basis, a.size - 1, w.size - 1)
    return _nonlin_loss(P, B, Y, mu, penalty_weights(a.size - 1), lam, a[:, None], w)


def reweighted_loss(a, w, dataset, lam, prev_w, basis=None):
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    P, B, Y, mu = _prep(dataset, basis, a.size - 1, w.size - 1)
    pen = penalty_weights(a.size - 1)
    return _loss("reweighted", P, B, Y, mu, pen, lam, a[:, None], w, np.asarray(prev_w, float))


def grad_w_nonlinear(a, w, dataset, lam=0.0, basis=None):
    """Gradient of the nonlinear loss in the denominator weights (the penalty does not depend on w)."""
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    P, B, Y, mu = _prep(dataset, basis, a.size - 1, w.size - 1)
    return _grad("nonlinear", P, B, Y, mu, a[:, None], w)


def max_step(w, grad):
    """Largest admissible step: 1 / max_i(grad_i - w.grad), or 1 if that max is <= 0."""
    c = np.asarray(grad, dtype=float) - np.dot(w, grad)
    cmax = float(np.max(c))
    return 1.0 / cmax if cmax > 0 else 1.0


def simplex_step(w, grad, eta):
    """Multiplicative update w_m (1 - eta (grad_m - w.grad)); stays on the simplex."""
    w = np.asarray(w, dtype=float)
    grad = np.asarray(grad, dtype=float)
    c = grad - np.dot(w, grad)
    eta_max = max_step(w, grad)
    if not 0 < eta <= eta_max * (1 + 1e-12):
        raise StepError(f"step {eta!r} outside (0, {eta_max!r}]")
    out = w * (1.0 - eta * c)
    out = np.maximum(out, 0.0)
    return out / out.sum()


def solve_numerator(w, dataset, lam=0.0, basis=None, num_degree=0, loss="nonlinear", prev_w=None):
    """Exact minimiser in the numerator coefficients for fixed weights ``w``."""
    w = np.asarray(w, dtype=float)
    P, B, Y, mu = _prep(dataset, basis, num_degree, w.size - 1)
    pw = None if prev_w is None else np.asarray(prev_w, dtype=float)
    return _solve_num(loss, P, B, Y, mu, penalty_weights(num_degree), lam, w, pw)[:, 0]


# ---------------------------------------------------------------------------
# Sanathanan-Koerner baseline (monomial basis, b_0 = 1)


def _sk_core(x, Y, mu, n, m, iters=SK_MAX_ITERS):
    I, K = Y.shape
    V = np.vander(x, max(n, m) + 1, increasing=True)
    Vn, Vm = V[:, : n + 1], V[:, 1 : m + 1]
    q_prev = np.ones(I)
    s = np.sqrt(mu)
    coef_prev = None
    for _ in range(iters):
        if np.any(q_prev == 0) or not np.all(np.isfinite(q_prev)):
            raise DivergenceError("reweighting denominator vanished at a sample")
        wt = s / np.abs(q_prev)
        # unknowns: K numerators then the shared b_1..b_m
        blocks, rhs = [], []
        for k in range(K):
            row = np.zeros((I, K * (n + 1) + m))
            row[:, k * (n + 1) : (k + 1) * (n + 1)] = wt[:, None] * Vn
            row[:, K * (n + 1) :] = -(wt * Y[:, k])[:, None] * Vm
            blocks.append(row)
            rhs.append(wt * Y[:, k])
        Amat, rvec = np.vstack(blocks), np.concatenate(rhs)
        colscale = np.linalg.norm(Amat, axis=0)
        colscale[colscale == 0] = 1.0
        sol, *_ = scipy.linalg.lstsq(Amat / colscale, rvec, lapack_driver="gelsd")
        coef = sol / colscale
        num = coef[: K * (n + 1)].reshape(K, n + 1).T
        den = np.concatenate([[1.0], coef[K * (n + 1) :]])
        q_prev = np.polynomial.polynomial.polyval(x, den)
        if coef_prev is not None:
            change = np.linalg.norm(coef - coef_prev) / max(np.linalg.norm(coef), 1e-300)
            if change < SK_TOL:
                break
        coef_prev = coef
    if np.any(q_prev == 0) or not np.all(np.isfinite(q_prev)):
        raise DivergenceError("final SK denominator vanished at a sample")
    return num, den


def sk_fit(dataset, num_degree, den_degree, iters=SK_MAX_ITERS):
    """Sanathanan-Koerner iteration; returns monomial (numerator, denominator) with b_0 = 1."""
    if dataset.ndim != 1:
        raise DomainError("SK fitting is univariate only")
    if len(dataset) < num_degree + den_degree + 1:
        raise DegenerateError("not enough samples for the requested degrees")
    num, den = _sk_core(dataset.points, _as2d(dataset.values), dataset.mu, num_degree, den_degree, iters)
    return num[:, 0], den


def _monomial_to_jacobi(c, num_degree, basis):
    """Re-express a monomial polynomial in the shifted Jacobi basis (exact for degree <= num_degree)."""
    c = np.asarray(c, dtype=float)
    k = np.arange(num_degree + 1)
    nodes = 0.5 - 0.5 * np.cos((2 * k + 1) * np.pi / (2 * num_degree + 2))
    J = eval_jacobi_basis(basis, num_degree, nodes)
    vals = np.polynomial.polynomial.polyval(nodes, c)
    return np.linalg.solve(J, vals)


def _project(num, den, num_degree, den_degree, basis):
    den = np.asarray(den, dtype=float)
    padded = np.zeros(den_degree + 1)
    padded[: den.size] = den[: den_degree + 1]
    b = np.maximum(monomial_to_bernstein(padded), 0.0)
    s = b.sum()
    if not s > 0:
        raise DegenerateError("every projected Bernstein weight clamped to zero")
    num = np.asarray(num, dtype=float)
    num2 = num if num.ndim == 2 else num[:, None]
    coeffs = np.column_stack([_monomial_to_jacobi(num2[:, k], num_degree, basis) for k in range(num2.shape[1])])
    return coeffs / s, b / s


def project_to_simplex_model(num, den, num_degree=None, basis=None):
    """Map a monomial (numerator, denominator) pair onto the simplex-constrained form.

    Negative Bernstein coefficients of the denominator are clamped to zero
    and the rest renormalised; the numerator is scaled by the same factor.
    """
    basis = basis or JacobiSpec()
    num = np.asarray(num, dtype=float)
    n = num.size - 1 if num_degree is None else num_degree
    A, w = _project(num, den, n, np.asarray(den).size - 1, basis)
    return RationalModel(A[:, 0], w, basis)


# ---------------------------------------------------------------------------
# the iterative scheme


@dataclass
class _Result:
    A: np.ndarray
    w: np.ndarray
    trajectory: list
    iterations: int
    source: str
    converged: bool


def _endpoints_ok(w, corners):
    return bool(np.all(w[list(corners)] >= ENDPOINT_TOL))


def _iterate(kind, P, B, Y, mu, pen, lam, w, max_iters, rel_tol):
    A = _solve_num(kind, P, B, Y, mu, pen, lam, w, w)
    L = _loss(kind, P, B, Y, mu, pen, lam, A, w, w)
    traj = [L]
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        if L == 0:
            converged = True
            it -= 1
            break
        prev = w
        g = _grad(kind, P, B, Y, mu, A, w, prev)
        c = g - w @ g
        if not np.max(c) > 0:
            converged = True
            it -= 1
            break
        eta = 0.9 * max_step(w, g)
        base = L if kind != "reweighted" else _loss(kind, P, B, Y, mu, pen, lam, A, w, prev)
        accepted = False
        for _ in range(31):
            cand = simplex_step(w, g, eta)
            try:
                Lc = _loss(kind, P, B, Y, mu, pen, lam, A, cand, prev)
            except PoleError:
                Lc = np.inf
            if Lc < base:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            # no descent along the step direction at working precision
            converged = True
            it -= 1
            break
        w = cand
        A_new = _solve_num(kind, P, B, Y, mu, pen, lam, w, prev)
        Lnew = _loss(kind, P, B, Y, mu, pen, lam, A_new, w, prev)
        if kind != "reweighted" and Lnew > Lc:
            # the exact solve lost to roundoff; keep the previous numerator
            Lnew = Lc
        else:
            A = A_new
        traj.append(Lnew)
        rel = (L - Lnew) / L if L > 0 else 0.0
        L = Lnew
        if abs(rel) < rel_tol:
            converged = True
            break
    return A, w, traj, it, converged


def _run(P, B, Y, mu, config, pen, corners, sk_candidate=None):
    lam = float(config.smoothing)
    kind = config.loss
    Mm = B.shape[1]
    w0 = np.full(Mm, 1.0 / Mm)
    source = "uniform"
    if config.hot_start:
        cands = []
        try:
            cands.append(("linearized", _linearized_qp(P, B, Y, mu, pen, lam)))
        except (DegenerateError, np.linalg.LinAlgError, RuntimeError) as exc:
            log.debug("linearized hot-start failed: %s", exc)
        if sk_candidate is not None:
            try:
                cands.append(("sk", sk_candidate()))
            except (DegenerateError, DivergenceError, np.linalg.LinAlgError) as exc:
                log.debug("SK hot-start failed: %s", exc)
        best = None
        for name, w in cands:
            if not _endpoints_ok(w, corners):
                continue
            try:
                A = _solve_num(kind, P, B, Y, mu, pen, lam, w, w)
                L = _loss(kind, P, B, Y, mu, pen, lam, A, w, w)
            except PoleError:
                continue
            if best is None or L < best[0]:
                best = (L, name, w)
        if best is not None:
            _, source, w0 = best
    A, w, traj, iters, conv = _iterate(kind, P, B, Y, mu, pen, lam, w0, config.max_iters, config.rel_tol)
    return _Result(A, w, traj, iters, source, conv)


def fit(dataset, config=None):
    """Fit a univariate rational model R(N, M) to ``dataset``."""
    config = config or FitConfig()
    if dataset.ndim != 1:
        raise DomainError("use multivariate.mv_fit for data on [0, 1]^s")
    N, M = int(config.num_degree), int(config.den_degree)
    P, B = design_matrices(dataset.points, N, M, config.basis)
    Y = _as2d(dataset.values)
    mu = dataset.mu

    def sk_candidate():
        num, den = _sk_core(dataset.points, Y, mu, N, M)
        return _project(num, den, N, M, config.basis)[1]

    use_sk = len(dataset) >= N + M + 1
    res = _run(P, B, Y, mu, config, penalty_weights(N), (0, M), sk_candidate if use_sk else None)
    model = RationalModel.normalized(res.A[:, 0], res.w, config.basis)
    return FitReport(
        model=model,
        final_loss=res.trajectory[-1],
        loss_trajectory=np.asarray(res.trajectory),
        iterations=res.iterations,
        hot_start_source=res.source,
        pole_audit=audit_model(model),
        converged=res.converged,
    )


@dataclass
class SharedFit:
    """Several numerators over one simplex-weighted denominator."""

    numerators: np.ndarray  # (N + 1, K)
    weights: np.ndarray
    basis: JacobiSpec
    final_loss: float
    iterations: int
    hot_start_source: str

    def model(self, k):
        return RationalModel(self.numerators[:, k], self.weights, self.basis)


def fit_shared(points, values, config):
    """Fit K targets (columns of ``values``) with a common denominator.

    The residuals of all targets are stacked into one loss; SK and the
    linearized candidate are generalised the same way for the hot start.
    """
    x = np.asarray(points, dtype=float)
    Y = _as2d(values)
    N, M = int(config.num_degree), int(config.den_degree)
    P, B = design_matrices(x, N, M, config.basis)
    mu = np.full(x.size, 1.0 / x.size)

    def sk_candidate():
        num, den = _sk_core(x, Y, mu, N, M)
        return _project(num, den, N, M, config.basis)[1]

    res = _run(P, B, Y, mu, config, penalty_weights(N), (0, M), sk_candidate)
    s = res.w.sum()
    return SharedFit(res.A / s, res.w / s, config.basis, res.trajectory[-1], res.iterations, res.source)


# ---------------------------------------------------------------------------
# cross-validation


def kfold_indices(n, k, seed):
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, k)


def _predict(report, points):
    model = report.model
    if hasattr(model, "shape_numerator"):
        from .multivariate import mv_evaluate

        return mv_evaluate(model, points)
    return model(points)


def cross_validate(dataset, configs, k=5, seed=0, fitter=None):
    """Pick the config with the lowest mean held-out RMSE over seeded k folds.

    Ties go to the smaller smoothing strength, then the smaller numerator
    degree. Returns ``(best_config, scores)``.
    """
    configs = list(configs)
    if not configs:
        raise DomainError("need at least one candidate config")
    if k < 2 or len(dataset) < k:
        raise DomainError("need k >= 2 and at least k samples")
    if fitter is None:
        if dataset.ndim == 1:
            fitter = fit
        else:
            from .multivariate import mv_fit as fitter
    if len(configs) == 1:
        return configs[0], [float("nan")]
    folds = kfold_indices(len(dataset), k, seed)
    scores = []
    for cfg in configs:
        errs = []
        for i, test in enumerate(folds):
            train = np.concatenate([f for j, f in enumerate(folds) if j != i])
            try:
                rep = fitter(dataset.subset(train), cfg)
                pred = _predict(rep, dataset.points[test])
                errs.append(float(np.sqrt(np.mean((pred - dataset.values[test]) ** 2))))
            except (PoleError, DegenerateError, DivergenceError, np.linalg.LinAlgError):
                errs.append(np.inf)
        scores.append(float(np.mean(errs)))
    order = sorted(
        range(len(configs)),
        key=lambda i: (scores[i], configs[i].smoothing, int(np.prod(np.atleast_1d(configs[i].num_degree)))),
    )
    return configs[order[0]], scores


def with_smoothing(config, values):
    return [replace(config, smoothing=float(v)) for v in values]
