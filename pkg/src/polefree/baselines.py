"""AAA barycentric rational fitting, used as a comparison baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateError, DomainError, PoleError

CLEANUP_TOL = 1e-13
REAL_TOL = 1e-8


@dataclass
class BarycentricModel:
    """r(x) = sum w_k f_k / (x - x_k) / sum w_k / (x - x_k)."""

    support_points: np.ndarray
    support_values: np.ndarray
    weights: np.ndarray
    errors: list | None = None

    def __post_init__(self):
        self.support_points = np.asarray(self.support_points, dtype=float)
        self.support_values = np.asarray(self.support_values, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        n = self.support_points.size
        if n < 1 or self.support_values.size != n or self.weights.size != n:
            raise DomainError("support points, values and weights need equal non-zero length")
        if np.unique(self.support_points).size != n:
            raise DomainError("support points must be distinct")
        if not np.any(self.weights != 0):
            raise DomainError("weights must not all vanish")

    def __call__(self, x):
        return barycentric_eval(self, x)

    def denominator(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 / (x[..., None] - self.support_points)) @ self.weights


def barycentric_eval(model, x):
    """Evaluate the barycentric quotient; support points return their stored value."""
    xs = np.asarray(x, dtype=float)
    xv = np.atleast_1d(xs).ravel()
    zj, fj, wj = model.support_points, model.support_values, model.weights
    with np.errstate(divide="ignore", invalid="ignore"):
        C = 1.0 / (xv[:, None] - zj[None, :])
        num = C @ (wj * fj)
        den = C @ wj
        r = num / den
    hit_i, hit_k = np.nonzero(xv[:, None] == zj[None, :])
    r[hit_i] = fj[hit_k]
    on_support = np.zeros(xv.size, dtype=bool)
    on_support[hit_i] = True
    if np.any((den == 0) & ~on_support):
        raise PoleError("barycentric denominator vanishes")
    return float(r[0]) if xs.ndim == 0 else r.reshape(xs.shape)


def _loewner_weights(x, y, support):
    mask = np.ones(x.size, dtype=bool)
    mask[support] = False
    if mask.sum() < 2:
        raise DegenerateError("fewer than two non-support points left for the weight solve")
    zj, fj = x[support], y[support]
    C = 1.0 / (x[mask][:, None] - zj[None, :])
    Lmat = y[mask][:, None] * C - C * fj[None, :]
    _, _, vh = np.linalg.svd(Lmat, full_matrices=True)
    return vh[-1]


def aaa_fit(points, values, max_terms=100, tol=1e-13, cleanup=True):
    """Greedy AAA fit on real data.

    Support points are added at the largest residual until the maximum
    residual drops below ``tol * max|values|`` or ``max_terms`` support
    points are in use. Cleanup removes support points next to poles with
    negligible residues (Froissart doublets) and re-solves once.
    """
    x = np.asarray(points, dtype=float).ravel()
    y = np.asarray(values, dtype=float).ravel()
    if x.size != y.size or x.size < 1:
        raise DomainError("points and values must have equal non-zero length")
    if np.unique(x).size != x.size:
        raise DomainError("sample points must be distinct")
    if not tol > 0:
        raise DomainError("tol must be positive")
    scale = float(np.max(np.abs(y))) if np.any(y) else 1.0
    support = []
    R = np.full(y.size, np.mean(y))
    errors = []
    w = None
    for _ in range(max_terms):
        if x.size - len(support) - 1 < 2:
            if not support:
                raise DegenerateError("fewer than two non-support points left for the weight solve")
            break
        j = int(np.argmax(np.abs(y - R)))
        support.append(j)
        w = _loewner_weights(x, y, support)
        R = _eval_all(BarycentricModel(x[support], y[support], w), x)
        errors.append(float(np.max(np.abs(y - R))))
        if errors[-1] <= tol * scale:
            break
    model = BarycentricModel(x[support], y[support], w, errors)
    if cleanup and len(support) > 1:
        model = _cleanup(model, x, y, support, scale)
    return model


def _eval_all(model, x):
    # residuals at every sample; an exact zero of the denominator counts as infinite error
    with np.errstate(divide="ignore", invalid="ignore"):
        try:
            return model(x)
        except PoleError:
            zj, fj, wj = model.support_points, model.support_values, model.weights
            C = 1.0 / (x[:, None] - zj[None, :])
            r = (C @ (wj * fj)) / (C @ wj)
            hit_i, hit_k = np.nonzero(x[:, None] == zj[None, :])
            r[hit_i] = fj[hit_k]
            return np.where(np.isfinite(r), r, np.inf)


def _residues(model, poles):
    zj, fj, wj = model.support_points, model.support_values, model.weights
    C = 1.0 / (poles[:, None] - zj[None, :])
    num = C @ (wj * fj)
    dden = -(C**2) @ wj
    return num / dden


def _cleanup(model, x, y, support, scale):
    poles = aaa_poles(model, validate=False)
    if poles.size == 0:
        return model
    res = _residues(model, poles)
    bad = np.abs(res) < CLEANUP_TOL * scale
    if not np.any(bad):
        return model
    keep = list(support)
    for p in poles[bad]:
        if len(keep) <= 1:
            break
        k = int(np.argmin(np.abs(x[keep] - p)))
        keep.pop(k)
    w = _loewner_weights(x, y, keep)
    return BarycentricModel(x[keep], y[keep], w, model.errors)


def aaa_poles(model, validate=True):
    """Poles as the finite eigenvalues of the (m+1) x (m+1) arrowhead pencil."""
    zj, wj = model.support_points, model.weights
    m = zj.size
    if m < 2:
        return np.array([], dtype=complex)
    try:
        E = np.zeros((m + 1, m + 1))
        E[0, 1:] = wj
        E[1:, 0] = 1.0
        E[1:, 1:] = np.diag(zj)
        Bm = np.eye(m + 1)
        Bm[0, 0] = 0.0
        alpha, beta = scipy.linalg.eig(E, Bm, right=False, homogeneous_eigvals=True)
        finite = np.abs(beta) > 1e-13 * np.abs(alpha)
        poles = alpha[finite] / beta[finite]
    except (np.linalg.LinAlgError, ValueError):
        return _scan_real_poles(model)
    if validate and poles.size:
        keep = []
        for p in poles:
            d = np.sum(wj / (p - zj))
            scale = np.sum(np.abs(wj / (p - zj)))
            keep.append(abs(d) < 1e-8 * scale)
        poles = poles[np.asarray(keep, dtype=bool)]
    return poles.astype(complex)


def _scan_real_poles(model, n=10_000):
    x = np.linspace(0.0, 1.0, n)
    x = x[~np.isin(x, model.support_points)]
    d = model.denominator(x)
    out = []
    for i in np.nonzero(d[:-1] * d[1:] < 0)[0]:
        lo, hi = x[i], x[i + 1]
        # a sign change across a support point is a pole of d, not a zero
        if np.any((model.support_points > lo) & (model.support_points < hi)):
            continue
        out.append(0.5 * (lo + hi))
    return np.asarray(out, dtype=complex)


def real_poles_in_unit(poles, tol=REAL_TOL):
    """Real poles (|Im| <= tol) lying in [0, 1]."""
    poles = np.asarray(poles, dtype=complex)
    mask = (np.abs(poles.imag) <= tol) & (poles.real >= 0) & (poles.real <= 1)
    return np.sort(poles[mask].real)


def confirm_sign_change(model, p, radius=1e-10):
    """True when the barycentric denominator changes sign across ``p`` (excluding support points)."""
    zj = model.support_points
    gap = np.min(np.abs(zj - p)) if zj.size else np.inf
    h = min(radius, 0.5 * gap)
    lo, hi = p - h, p + h
    dlo, dhi = model.denominator(lo), model.denominator(hi)
    return bool(dlo * dhi <= 0)
