"""Benchmark datasets, metrics and convergence-study runners."""

from __future__ import annotations

import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import chebyshev as C

from .baselines import aaa_fit, aaa_poles, real_poles_in_unit
from .errors import DomainError
from .fitting import Dataset, FitConfig, cross_validate, fit, with_smoothing
from .multivariate import mv_evaluate, mv_fit

FUNCTIONS = {
    "F1": lambda x: np.arctan(50.0 * (x - 0.5)),
    "F2": lambda x: np.abs(2.0 * (x - 0.5)),
    "F3": lambda x: np.exp(-x) * np.sin(16.0 * x**2),
    "G1": lambda x, z: np.sin((4.0 * (x - 0.5)) ** 2 + (4.0 * (z - 0.5)) ** 2),
    "G2": lambda x, z: np.sin(8.0 * x**2) * np.sin(8.0 * z**2),
    "G3": lambda x, z: np.exp(4.0 * (x - 0.5)) * np.sin(4.0 * (z - 0.5)),
}
UNIVARIATE = ("F1", "F2", "F3")
BIVARIATE = ("G1", "G2", "G3")

SUITES = ("aaa_comparison", "nonconstant_noise", "multivariate")
CSV_HEADER = "function,method,n,seed,rmse,has_pole,error"
CV_LAMBDAS = (0.0, 1e-14, 1e-12, 1e-10)


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian noise with standard deviation sigma + slope * x."""

    kind: str = "none"
    sigma: float = 0.0
    slope: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian_const", "gaussian_linear"):
            raise DomainError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0 or self.slope < 0:
            raise DomainError("noise scales must be non-negative")

    @classmethod
    def none(cls):
        return cls()

    @classmethod
    def gaussian_const(cls, sigma, seed=0):
        return cls("gaussian_const", sigma, 0.0, seed)

    @classmethod
    def gaussian_linear(cls, sigma0, slope, seed=0):
        return cls("gaussian_linear", sigma0, slope, seed)

    def std(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "none":
            return np.zeros(x.shape[0])
        if self.kind == "gaussian_const":
            return np.full(x.shape[0], self.sigma)
        # the slope acts on the first coordinate
        first = x if x.ndim == 1 else x[:, 0]
        return self.sigma + self.slope * first

    def sample(self, x):
        std = self.std(x)
        if self.kind == "none":
            return std
        return np.random.default_rng(self.seed).normal(0.0, 1.0, std.size) * std


@dataclass(frozen=True)
class Sampling:
    kind: str
    size: int
    seed: int = 0

    @classmethod
    def uniform_grid(cls, size):
        """``size + 1`` equispaced points per axis, endpoints included."""
        return cls("uniform_grid", size)

    @classmethod
    def uniform_random(cls, size, seed=0):
        return cls("uniform_random", size, seed)


def true_values(function_id, points):
    f = _lookup(function_id)
    pts = np.asarray(points, dtype=float)
    return f(pts) if function_id in UNIVARIATE else f(pts[:, 0], pts[:, 1])


def _lookup(function_id):
    try:
        return FUNCTIONS[function_id]
    except KeyError:
        raise DomainError(f"unknown function id {function_id!r}") from None


def generate_dataset(function_id, sampling, noise=None):
    """Deterministic dataset for ``function_id``; returns ``(dataset, truth)``."""
    _lookup(function_id)
    noise = noise or NoiseModel.none()
    s = 1 if function_id in UNIVARIATE else 2
    if sampling.kind == "uniform_grid":
        g = np.arange(sampling.size + 1) / sampling.size
        if s == 1:
            pts = g
        else:
            X, Z = np.meshgrid(g, g, indexing="ij")
            pts = np.column_stack([X.ravel(), Z.ravel()])
    elif sampling.kind == "uniform_random":
        rng = np.random.default_rng(sampling.seed)
        pts = rng.uniform(0.0, 1.0, sampling.size if s == 1 else (sampling.size, s))
    else:
        raise DomainError(f"unknown sampling {sampling.kind!r}")
    truth = true_values(function_id, pts)
    return Dataset(pts, truth + noise.sample(pts)), truth


def rmse(predictions, truth):
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if p.size == 0 or p.size != t.size:
        raise DomainError("rmse needs two non-empty vectors of equal length")
    return float(np.sqrt(np.mean((p - t) ** 2)))


# ---------------------------------------------------------------------------
# studies


@dataclass(frozen=True)
class StudyRow:
    function: str
    method: str
    n: int
    seed: int
    rmse: float
    has_pole: bool
    error: str = ""

    def key(self):
        return (self.function, self.method, self.n, self.seed)


@dataclass
class StudyReport:
    rows: list

    def to_csv(self):
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in sorted(self.rows, key=StudyRow.key):
            has = "true" if r.has_pole else "false"
            buf.write(f"{r.function},{r.method},{r.n},{r.seed},{r.rmse:.17g},{has},{r.error}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class _Task:
    suite: str
    function: str
    method: str
    n: int
    seed: int
    noise: str
    options: tuple = ()


def _suite_plan(suite, noise):
    """(functions, methods, noise model factory, sampling factory) for a suite."""
    if suite == "aaa_comparison":
        funcs, methods = UNIVARIATE, ("polynomial", "aaa", "bernstein")
        if noise == "none":
            return funcs, methods, lambda seed: NoiseModel.none(), lambda seed: Sampling.uniform_grid(1000)
        return (
            funcs,
            methods,
            lambda seed: NoiseModel.gaussian_const(0.01, seed),
            lambda seed: Sampling.uniform_random(1000, seed),
        )
    if suite == "nonconstant_noise":
        return (
            UNIVARIATE,
            ("polynomial", "bernstein"),
            lambda seed: NoiseModel.gaussian_linear(0.01, 0.1, seed),
            lambda seed: Sampling.uniform_random(1000, seed),
        )
    if suite == "multivariate":
        if noise == "none":
            return BIVARIATE, ("bernstein",), lambda seed: NoiseModel.none(), lambda seed: Sampling.uniform_grid(50)
        return (
            BIVARIATE,
            ("bernstein",),
            lambda seed: NoiseModel.gaussian_const(0.1, seed),
            lambda seed: Sampling.uniform_random(1000, seed),
        )
    raise DomainError(f"unknown suite {suite!r}")


def _default_noise(suite):
    return "none" if suite in ("aaa_comparison", "multivariate") else "gaussian"


def _run_task(task):
    _, _, noise_of, sampling_of = _suite_plan(task.suite, task.noise)
    opts = dict(task.options)
    try:
        data, truth = generate_dataset(task.function, sampling_of(task.seed), noise_of(task.seed))
        pred, has_pole = _METHODS[task.method](data, task.n, task.noise == "none", opts)
        return StudyRow(task.function, task.method, task.n, task.seed, rmse(pred, truth), has_pole)
    except Exception as exc:  # a failed row is data, not a crash
        msg = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
        return StudyRow(task.function, task.method, task.n, task.seed, float("nan"), False, msg)


def _polynomial(data, n, noiseless, opts):
    series = C.Chebyshev.fit(data.points, data.values, 2 * n, domain=[0.0, 1.0])
    return series(data.points), False


def _aaa(data, n, noiseless, opts):
    model = aaa_fit(data.points, data.values, max_terms=n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pred = model(data.points)
    return pred, bool(real_poles_in_unit(aaa_poles(model)).size)


def _bernstein(data, n, noiseless, opts):
    if data.ndim == 1:
        cfg = FitConfig(num_degree=n, den_degree=n, loss="nonlinear", smoothing=0.0, hot_start=noiseless)
        rep = fit(data, cfg)
        return rep.model(data.points), rep.pole_audit.has_pole_in_interval
    cfg = FitConfig(num_degree=n, den_degree=n, loss="nonlinear", hot_start=noiseless)
    lambdas = opts.get("lambdas", CV_LAMBDAS)
    cv_cfg = replace(cfg, max_iters=opts.get("cv_iters", 100))
    best, _ = cross_validate(data, with_smoothing(cv_cfg, lambdas), k=opts.get("cv_folds", 3), seed=0, fitter=mv_fit)
    rep = mv_fit(data, replace(cfg, smoothing=best.smoothing))
    return mv_evaluate(rep.model, data.points), rep.pole_audit.has_pole_in_interval


_METHODS = {"polynomial": _polynomial, "aaa": _aaa, "bernstein": _bernstein}


def worker_count():
    """Workers from POLEFREE_THREADS (0 or 1 = serial); defaults to the CPU count."""
    raw = os.environ.get("POLEFREE_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(0, int(raw))
    except ValueError:
        raise DomainError("POLEFREE_THREADS must be an integer") from None


def run_convergence_study(
    suite,
    n_range,
    seeds,
    noise=None,
    functions=None,
    methods=None,
    cv_lambdas=CV_LAMBDAS,
    cv_folds=3,
    cv_iters=100,
    workers=None,
):
    """Fit every (function, method, n, seed) of ``suite`` and collect RMSE and pole flags.

    ``noise`` is ``"none"`` or ``"gaussian"``; the default follows the suite
    (noiseless for aaa_comparison and multivariate). Noiseless rows share one
    dataset, so each (function, method, n) is fitted once and copied across
    seeds.
    """
    n_range, seeds = [int(n) for n in n_range], [int(s) for s in seeds]
    if not n_range:
        raise DomainError("n_range must be non-empty")
    if not seeds:
        raise DomainError("seeds must be non-empty")
    noise = noise or _default_noise(suite)
    if noise not in ("none", "gaussian"):
        raise DomainError(f"noise must be 'none' or 'gaussian', got {noise!r}")
    funcs, all_methods, _, _ = _suite_plan(suite, noise)
    funcs = tuple(functions or funcs)
    for f in funcs:
        if f not in FUNCTIONS or (f in UNIVARIATE) != (suite != "multivariate"):
            raise DomainError(f"function {f!r} does not belong to suite {suite!r}")
    methods = tuple(methods or all_methods)
    for m in methods:
        if m not in all_methods:
            raise DomainError(f"method {m!r} is not part of suite {suite!r}")
    opts = (("lambdas", tuple(cv_lambdas)), ("cv_folds", int(cv_folds)), ("cv_iters", int(cv_iters)))
    run_seeds = seeds[:1] if noise == "none" else seeds
    tasks = [
        _Task(suite, f, m, n, s, noise, opts) for f in funcs for m in methods for n in n_range for s in run_seeds
    ]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_run_task, tasks))
    else:
        done = [_run_task(t) for t in tasks]
    if noise == "none":
        done = [replace(r, seed=s) for r in done for s in seeds]
    return StudyReport(sorted(done, key=StudyRow.key))
