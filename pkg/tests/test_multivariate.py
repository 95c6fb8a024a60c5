import json

import numpy as np
import pytest

from polefree.errors import DomainError, PoleError
from polefree.fitting import Dataset, FitConfig, sobolev_jacobi_penalty
from polefree.multivariate import (
    TensorRationalModel,
    audit_tensor_model,
    corner_indices,
    khatri_rao_rows,
    mv_evaluate,
    mv_fit,
    mv_penalty,
)
from polefree.rational import load_model, save_model

W13 = np.array([1 / 3, 2 / 3])


def separable_model():
    return TensorRationalModel(np.array([[1 / 9]]), np.outer(W13, W13).ravel(), (1, 1))


def test_separable_constant():
    m = TensorRationalModel(np.array([[2.0]]), np.full(9, 1 / 9), (2, 2))
    np.testing.assert_allclose(m(np.random.default_rng(0).uniform(size=(20, 2))), 18.0)


def test_tensor_closed_form(rng):
    pts = rng.uniform(size=(50, 2))
    got = mv_evaluate(separable_model(), pts)
    np.testing.assert_allclose(got, 1 / ((1 + pts[:, 0]) * (1 + pts[:, 1])), rtol=1e-14)
    assert isinstance(mv_evaluate(separable_model(), [0.5, 0.5]), float)


def test_uniform_weights_denominator():
    m = TensorRationalModel(np.ones((2, 3)), np.full(12, 1 / 12), (2, 3))
    np.testing.assert_allclose(m.denominator_values(np.random.default_rng(2).uniform(size=(9, 2))), 1 / 12)


def test_corner_pole():
    w = np.zeros(4)
    w[1:] = 1 / 3
    m = TensorRationalModel(np.ones((1, 1)), w, (1, 1))
    with pytest.raises(PoleError):
        m([0.0, 0.0])
    audit = audit_tensor_model(m)
    assert audit.has_pole_in_interval and audit.pole_locations == [(0.0, 0.0)]
    assert not audit_tensor_model(separable_model()).has_pole_in_interval


def test_shapes_validated():
    with pytest.raises(DomainError):
        TensorRationalModel(np.ones((2, 2)), np.full(5, 0.2), (1, 1))
    with pytest.raises(DomainError):
        separable_model()(np.zeros((3, 3)))


def test_corner_indices_row_major():
    assert corner_indices((2, 3)) == [0, 3, 8, 11]


def test_khatri_rao_rows():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    B = np.array([[5.0, 6.0, 7.0], [8.0, 9.0, 10.0]])
    K = khatri_rao_rows([A, B])
    for i in range(2):
        np.testing.assert_allclose(K[i], np.kron(A[i], B[i]))


def test_penalty_examples():
    a = np.zeros((3, 4))
    a[2, 3] = 1.0
    assert mv_penalty(a) == 108.0
    c = np.zeros((3, 3))
    c[0, 0] = 2.0
    assert mv_penalty(c) == 4.0
    b = a.copy()
    b[1, 1] = 0.5
    assert mv_penalty(b) == pytest.approx(108.0 + 0.25)
    v = np.array([0.5, -1.0, 2.0, 0.3])
    assert mv_penalty(v) == pytest.approx(sobolev_jacobi_penalty(v))


def test_dof_and_json(tmp_path):
    m = TensorRationalModel(np.arange(12.0).reshape(3, 4) / 10, np.full(9, 1 / 9), (2, 2))
    assert m.dof == 12 + 9 - 1
    path = tmp_path / "t.json"
    save_model(m, path)
    data = json.loads(path.read_text())
    assert data["shape_numerator"] == [3, 4] and data["shape_denominator"] == [3, 3]
    back = load_model(path)
    np.testing.assert_array_equal(back.numerator, m.numerator)
    np.testing.assert_array_equal(back.weights, m.weights)


def grid(n):
    g = np.linspace(0, 1, n)
    X, Z = np.meshgrid(g, g, indexing="ij")
    return np.column_stack([X.ravel(), Z.ravel()])


def test_fit_exact_separable_rational():
    pts = grid(21)
    y = 1 / ((1 + pts[:, 0]) * (1 + pts[:, 1]))
    rep = mv_fit(Dataset(pts, y), FitConfig(num_degree=0, den_degree=1))
    assert rep.final_loss < 1e-14
    assert np.sqrt(np.mean((rep.model(pts) - y) ** 2)) < 1e-10
    assert abs(rep.model.weights.sum() - 1) < 1e-12


def test_fit_product_of_rationals():
    pts = grid(15)
    y = (1 + pts[:, 0]) / (1 + 2 * pts[:, 0]) * (2 - pts[:, 1]) / (1 + pts[:, 1])
    rep = mv_fit(Dataset(pts, y), FitConfig(num_degree=1, den_degree=1))
    assert abs(rep.model.weights.sum() - 1) < 1e-12
    assert np.sqrt(np.mean((rep.model(pts) - y) ** 2)) < 1e-10


def test_fit_iterations_stay_on_simplex(rng):
    pts = rng.uniform(size=(300, 2))
    y = np.sin(3 * pts[:, 0]) * np.cos(2 * pts[:, 1]) + 0.01 * rng.normal(size=300)
    rep = mv_fit(Dataset(pts, y), FitConfig(num_degree=3, den_degree=2, hot_start=False, max_iters=40))
    assert abs(rep.model.weights.sum() - 1) < 1e-12 and rep.model.weights.min() >= 0
    traj = rep.loss_trajectory
    assert np.all(np.diff(traj) <= 1e-12 * traj[:-1])


def test_fit_constant():
    pts = grid(9)
    rep = mv_fit(Dataset(pts, np.full(len(pts), -1.5)), FitConfig(num_degree=2, den_degree=2))
    np.testing.assert_allclose(rep.model(pts), -1.5, atol=1e-10)


def test_fit_rejects_1d_points():
    with pytest.raises(DomainError):
        mv_fit(Dataset(np.linspace(0, 1, 5), np.zeros(5)), FitConfig(num_degree=1, den_degree=1))
