"""Tensor-product rational models on [0, 1]^s."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .basis import JacobiSpec, eval_bernstein_basis, eval_jacobi_basis
from .errors import DomainError, PoleError
from .fitting import FitConfig, FitReport, _run, penalty_weights
from .rational import AuditMethod, PoleAudit, check_simplex


def _degrees(deg, s):
    d = tuple(int(v) for v in np.atleast_1d(deg))
    if len(d) == 1:
        d = d * s
    if len(d) != s:
        raise DomainError(f"expected {s} per-axis degrees, got {len(d)}")
    return d


def khatri_rao_rows(mats):
    """Row-wise Kronecker product of per-axis design matrices (C order over axes)."""
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, :, None] * m[:, None, :]).reshape(out.shape[0], -1)
    return out


def tensor_designs(points, num_degrees, den_degrees, basis):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    P = khatri_rao_rows([eval_jacobi_basis(basis, n, pts[:, d]) for d, n in enumerate(num_degrees)])
    B = khatri_rao_rows([eval_bernstein_basis(m, pts[:, d]) for d, m in enumerate(den_degrees)])
    return P, B


def corner_indices(den_degrees):
    """Flat (row-major) indices of the weights attached to the hypercube corners."""
    shape = tuple(m + 1 for m in den_degrees)
    corners = itertools.product(*[(0, m) for m in den_degrees])
    return sorted({int(np.ravel_multi_index(c, shape)) for c in corners})


@dataclass(frozen=True, eq=False)
class TensorRationalModel:
    numerator: np.ndarray  # shape (N_1 + 1, ..., N_s + 1)
    weights: np.ndarray  # flattened row-major, length prod(M_d + 1)
    den_degrees: tuple
    basis: JacobiSpec = field(default_factory=JacobiSpec)

    def __post_init__(self):
        num = np.array(self.numerator, dtype=float)
        dd = tuple(int(m) for m in self.den_degrees)
        w = check_simplex(np.array(self.weights, dtype=float).reshape(-1))
        if num.ndim != len(dd):
            raise DomainError("numerator rank must match the number of axes")
        if w.size != int(np.prod([m + 1 for m in dd])):
            raise DomainError("weight count does not match the denominator degrees")
        num.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "den_degrees", dd)

    @property
    def ndim(self):
        return len(self.den_degrees)

    @property
    def num_degrees(self):
        return tuple(n - 1 for n in self.numerator.shape)

    @property
    def shape_numerator(self):
        return list(self.numerator.shape)

    @property
    def shape_denominator(self):
        return [m + 1 for m in self.den_degrees]

    @property
    def dof(self):
        return int(self.numerator.size + self.weights.size - 1)

    def __call__(self, points):
        return mv_evaluate(self, points)

    def denominator_values(self, points):
        _, B = tensor_designs(points, (0,) * self.ndim, self.den_degrees, self.basis)
        return B @ self.weights

    def to_dict(self):
        return {
            "basis": {"alpha": float(self.basis.alpha), "beta": float(self.basis.beta)},
            "numerator": [float(v) for v in self.numerator.ravel()],
            "denominator_weights": [float(v) for v in self.weights],
            "domain": [0.0, 1.0],
            "shape_numerator": self.shape_numerator,
            "shape_denominator": self.shape_denominator,
        }

    @classmethod
    def from_dict(cls, data):
        num = np.asarray(data["numerator"], dtype=float).reshape(data["shape_numerator"])
        dd = tuple(m - 1 for m in data["shape_denominator"])
        return cls(num, data["denominator_weights"], dd, JacobiSpec(**data["basis"]))


def mv_evaluate(model, points):
    """Evaluate at one point (shape ``(s,)``) or many (shape ``(k, s)``)."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != model.ndim:
        raise DomainError("point dimension does not match the model")
    P, B = tensor_designs(pts, model.num_degrees, model.den_degrees, model.basis)
    den = B @ model.weights
    if np.any(den == 0):
        raise PoleError("tensor denominator vanishes at an evaluation point")
    out = (P @ model.numerator.ravel()) / den
    return float(out[0]) if single else out


def tensor_penalty_weights(num_degrees):
    w = penalty_weights(num_degrees[0])
    for n in num_degrees[1:]:
        w = np.multiply.outer(w, penalty_weights(n))
    return w


def mv_penalty(a):
    """sum a_{n_1..n_s}^2 prod_d n_d^{n_d}, with 0^0 = 1 on each axis."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1)
    return float(np.sum(a**2 * tensor_penalty_weights([n - 1 for n in a.shape])))


def audit_tensor_model(model):
    """A vanishing corner weight is the only way to put a zero of D on the closed cube."""
    shape = model.shape_denominator
    poles = []
    for idx in corner_indices(model.den_degrees):
        if model.weights[idx] == 0:
            corner = np.unravel_index(idx, shape)
            poles.append(tuple(float(c != 0) for c in corner))
    return PoleAudit(bool(poles), poles, AuditMethod.BERNSTEIN_CERTIFICATE)


def mv_fit(dataset, config=None):
    """Fit a tensor-product rational model; hot start uses the linearized candidate only."""
    config = config or FitConfig()
    s = dataset.ndim
    if dataset.points.ndim != 2:
        raise DomainError("multivariate fitting expects points of shape (I, s)")
    nd, md = _degrees(config.num_degree, s), _degrees(config.den_degree, s)
    P, B = tensor_designs(dataset.points, nd, md, config.basis)
    Y = dataset.values[:, None]
    pen = tensor_penalty_weights(nd).ravel()
    res = _run(P, B, Y, dataset.mu, config, pen, corner_indices(md), None)
    scale = res.w.sum()
    model = TensorRationalModel(res.A[:, 0].reshape([n + 1 for n in nd]) / scale, res.w / scale, md, config.basis)
    return FitReport(
        model=model,
        final_loss=res.trajectory[-1],
        loss_trajectory=np.asarray(res.trajectory),
        iterations=res.iterations,
        hot_start_source=res.source,
        pole_audit=audit_tensor_model(model),
        converged=res.converged,
    )
