"""Rational models N(x) / D(x) on [0, 1] with a simplex-weighted Bernstein denominator."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .basis import JacobiSpec, eval_bernstein_basis, eval_jacobi_basis
from .errors import DegenerateError, DomainError, PoleError

SIMPLEX_TOL = 1e-12
REMOVABLE_TOL = 1e-9
SCAN_POINTS = 10_000


def check_simplex(w, tol=SIMPLEX_TOL):
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise DomainError("simplex weights must be a non-empty vector")
    if np.any(~np.isfinite(w)) or np.any(w < 0) or np.any(w > 1 + tol):
        raise DomainError("simplex weights must lie in [0, 1]")
    if abs(w.sum() - 1.0) > tol:
        raise DomainError(f"simplex weights sum to {w.sum()!r}, not 1")
    return w


@dataclass(frozen=True, eq=False)
class RationalModel:
    """R(x) = sum a_n p_n(x) / sum w_m B_m^(M)(x) on [0, 1].

    ``numerator`` holds coefficients in the shifted Jacobi basis ``basis``;
    ``weights`` live on the probability simplex.
    """

    numerator: np.ndarray
    weights: np.ndarray
    basis: JacobiSpec = field(default_factory=JacobiSpec)

    def __post_init__(self):
        num = np.array(self.numerator, dtype=float).reshape(-1)
        w = check_simplex(np.array(self.weights, dtype=float).reshape(-1))
        if num.size < 1 or not np.all(np.isfinite(num)):
            raise DomainError("numerator must be a finite non-empty vector")
        num.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, numerator, weights, basis=None):
        """Build a model from any non-negative weights, dividing both parts by their sum."""
        w = np.asarray(weights, dtype=float)
        s = w.sum()
        if np.any(w < 0) or not s > 0:
            raise DegenerateError("denominator weights must be non-negative and not all zero")
        return cls(np.asarray(numerator, dtype=float) / s, w / s, basis or JacobiSpec())

    @property
    def num_degree(self):
        return self.numerator.size - 1

    @property
    def den_degree(self):
        return self.weights.size - 1

    def numerator_values(self, x):
        return eval_jacobi_basis(self.basis, self.num_degree, x) @ self.numerator

    def denominator_values(self, x):
        return eval_bernstein_basis(self.den_degree, x) @ self.weights

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, RationalModel):
            return NotImplemented
        return (
            self.basis == other.basis
            and np.array_equal(self.numerator, other.numerator)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def to_dict(self):
        return {
            "basis": {"alpha": float(self.basis.alpha), "beta": float(self.basis.beta)},
            "numerator": [float(v) for v in self.numerator],
            "denominator_weights": [float(v) for v in self.weights],
            "domain": [0.0, 1.0],
        }

    @classmethod
    def from_dict(cls, data):
        if list(data.get("domain", [0.0, 1.0])) != [0.0, 1.0]:
            raise DomainError("only the unit interval is supported")
        basis = JacobiSpec(**data["basis"])
        return cls(data["numerator"], data["denominator_weights"], basis)


def evaluate(model, x):
    """Evaluate ``model`` at ``x`` (scalar or array) in [0, 1]."""
    num = model.numerator_values(x)
    den = model.denominator_values(x)
    if np.any(den == 0):
        raise PoleError("denominator vanishes at an evaluation point")
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def denominator_min(model, grid_size=4097):
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    return float(np.min(model.denominator_values(np.linspace(0.0, 1.0, grid_size))))


class AuditMethod(str, enum.Enum):
    BERNSTEIN_CERTIFICATE = "bernstein_certificate"
    EIGENVALUE = "eigenvalue"
    GRID_SCAN = "grid_scan"


@dataclass
class PoleAudit:
    has_pole_in_interval: bool
    pole_locations: list
    method: AuditMethod
    removable: list = field(default_factory=list)

    def to_dict(self):
        return {
            "has_pole_in_interval": bool(self.has_pole_in_interval),
            "pole_locations": [float(p) for p in self.pole_locations],
            "removable": [bool(r) for r in self.removable],
            "method": self.method.value,
        }


def audit_model(model):
    """Pole audit from the simplex structure alone.

    With non-negative weights, D > 0 on the open interval, and D equals
    w_0 at x = 0 and w_M at x = 1; so only a zero endpoint weight can
    produce a pole.
    """
    poles, removable = [], []
    for x, wv in ((0.0, model.weights[0]), (1.0, model.weights[-1])):
        if wv == 0 and x not in poles:
            poles.append(x)
            num = model.numerator_values(x)
            removable.append(bool(abs(num) <= REMOVABLE_TOL))
    return PoleAudit(bool(poles), poles, AuditMethod.BERNSTEIN_CERTIFICATE, removable)


def _trim(c):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else c[:0]


def _bisect(p, lo, hi, tol=1e-15, maxit=200):
    flo = np.polynomial.polynomial.polyval(lo, p)
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        fm = np.polynomial.polynomial.polyval(mid, p)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def _real_roots_unit(den):
    roots = np.polynomial.polynomial.polyroots(den)
    scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
    real = roots[np.abs(roots.imag) <= 1e-8 * scale].real
    real = real[(real >= -1e-10) & (real <= 1 + 1e-10)]
    out = []
    for r in np.sort(np.clip(real, 0.0, 1.0)):
        h = 1e-7
        lo, hi = max(r - h, 0.0), min(r + h, 1.0)
        flo = np.polynomial.polynomial.polyval(lo, den)
        fhi = np.polynomial.polynomial.polyval(hi, den)
        if flo * fhi < 0:
            r = _bisect(den, lo, hi)
        out.append(float(r))
    return out


def scan_sign_changes(den, n=SCAN_POINTS):
    """Roots of the polynomial ``den`` (monomial) on [0, 1] located by a sign scan."""
    x = np.linspace(0.0, 1.0, n)
    v = np.polynomial.polynomial.polyval(x, den)
    out = [float(x[i]) for i in np.nonzero(v == 0)[0]]
    idx = np.nonzero(v[:-1] * v[1:] < 0)[0]
    out += [_bisect(den, x[i], x[i + 1]) for i in idx]
    return sorted(out)


def audit_poles(numerator, denominator):
    """Locate real zeros of ``denominator`` in [0, 1] (monomial coefficients).

    Companion-matrix eigenvalues refined by bisection, with a sign-scan
    fallback. Roots shared with the numerator within 1e-9 are flagged
    removable but still reported.
    """
    den = _trim(denominator)
    if den.size == 0:
        raise DegenerateError("denominator is identically zero")
    try:
        poles = _real_roots_unit(den) if den.size > 1 else []
        method = AuditMethod.EIGENVALUE
    except np.linalg.LinAlgError:
        poles = scan_sign_changes(den)
        method = AuditMethod.GRID_SCAN
    num = _trim(numerator)
    removable = []
    for p in poles:
        if num.size == 0:
            removable.append(True)
            continue
        nv = np.polynomial.polynomial.polyval(p, num)
        nroots = np.polynomial.polynomial.polyroots(num) if num.size > 1 else np.array([])
        near = np.any(np.abs(nroots - p) <= REMOVABLE_TOL) if nroots.size else False
        removable.append(bool(near or nv == 0))
    return PoleAudit(bool(poles), poles, method, removable)


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=2)


def load_model(path):
    with open(path) as fh:
        data = json.load(fh)
    if "shape_numerator" in data:
        from .multivariate import TensorRationalModel

        return TensorRationalModel.from_dict(data)
    return RationalModel.from_dict(data)
