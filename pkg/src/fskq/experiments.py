"""Desk-scale versions of the three numerical experiments.

* ``ex1``: random fully symmetric sets (FSKMC) against kernel Monte Carlo on a
  non-radial 3-D integrand under the standard normal.
* ``ex2``: Clenshaw-Curtis sparse grids on an 11-D Gaussian bump under the
  uniform measure, with the length-scale known a priori.
* ``ex3``: Gauss-Hermite sparse grids for a Vasicek zero-coupon bond, against
  plain Monte Carlo with matched node counts.
"""

from __future__ import annotations

import csv
import io
import math
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import erf

from .errors import DegenerateDataWarning, FskqError, NumericalError, NumericalWarning, ValidationError
from .kernels import GaussianKernel, SymmetricMeasure, initial_error_sq, kernel_mean
from .nodes import gauss_hermite_basis, make_basis, random_generators, sparse_grid_generators
from .weights import (
    FsQuadratureRule,
    SymmetricNodeSet,
    build_s_matrix,
    integrate,
    naive_weights,
    solve_weights,
    worst_case_error,
)

CSV_COLUMNS = ("n", "J", "estimate", "truth", "rel_error", "wce", "t_kernel_s", "t_weights_s", "t_fss_s")

EX1_TRUTH = 0.389
EX2_DIM = 11
EX2_LENGTH_SCALE = 0.8
EX2_CENTER = np.linspace(0.2, 0.5, EX2_DIM)


# ---------------------------------------------------------------- integrands


def integrand_ex1(x) -> np.ndarray:
    """``exp(sin(5|x|)^2 - (x1^2 + 0.5 x2^2 + 2 x3^4))`` on rows of ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != 3:
        raise ValidationError(f"ex1 integrand is 3-dimensional, got {x.shape[1]}")
    r = np.sqrt(np.sum(x**2, axis=1))
    return np.exp(np.sin(5.0 * r) ** 2 - (x[:, 0] ** 2 + 0.5 * x[:, 1] ** 2 + 2.0 * x[:, 2] ** 4))


def integrand_ex2(x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != EX2_DIM:
        raise ValidationError(f"ex2 integrand is {EX2_DIM}-dimensional, got {x.shape[1]}")
    return np.exp(-np.sum((x - EX2_CENTER) ** 2, axis=1) / (2.0 * EX2_LENGTH_SCALE**2))


def true_integral_ex2() -> float:
    c = EX2_LENGTH_SCALE * math.sqrt(2.0)
    factors = erf((EX2_CENTER + 1.0) / c) - erf((EX2_CENTER - 1.0) / c)
    return float((math.pi * EX2_LENGTH_SCALE**2 / 8.0) ** (EX2_DIM / 2) * np.prod(factors))


@dataclass(frozen=True)
class VasicekParams:
    """Vasicek short-rate model discretised with ``steps`` Euler steps over ``[0, T]``.

    The bond price is an integral over ``steps - 1`` standard normal variables.
    Defaults are the classical test parameters.
    """

    kappa: float = 0.1817303
    theta: float = 0.0825398957
    sigma: float = 0.0125901
    r0: float = 0.021673
    T: float = 5.0
    steps: int = 10

    def __post_init__(self):
        for name in ("kappa", "theta", "sigma", "r0", "T"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.steps < 2:
            raise ValidationError("steps must be >= 2")
        if not self.kappa * self.dt < 1:
            raise ValidationError("kappa * dt must be < 1")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @property
    def dim(self) -> int:
        return self.steps - 1


def bond_integrand(p: VasicekParams, x) -> np.ndarray:
    """``exp(-dt * sum_{k<d} r_k)`` along the Euler path driven by standard normals ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != p.dim:
        raise ValidationError(f"bond integrand is {p.dim}-dimensional, got {x.shape[1]}")
    dt = p.dt
    r = np.full(x.shape[0], p.r0)
    total = r.copy()
    noise = p.sigma * math.sqrt(dt) * x
    for k in range(p.dim):
        r = r + p.kappa * (p.theta - r) * dt + noise[:, k]
        total += r
    return np.exp(-dt * total)


def bond_closed_form(p: VasicekParams) -> float:
    dt = p.dt
    a = 1.0 - p.kappa * dt
    beta = np.cumsum(a ** np.arange(p.steps))  # beta[k-1] = sum_{j=1}^k a^(j-1)
    b = beta[: p.steps - 1]
    gamma = float(np.sum(b * p.kappa * p.theta * dt - (b * p.sigma * dt) ** 2 / 2.0))
    return math.exp(-(gamma + beta[p.steps - 1] * p.r0) * p.T / p.steps)


# ---------------------------------------------------------------- length-scale fitting


def _sq_distances(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X**2, axis=1)
    D = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D


def _lml_from_distances(D: np.ndarray, y: np.ndarray, length_scale: float, jitter: float) -> float:
    K = np.exp(-D / (2.0 * length_scale**2))
    K[np.diag_indices_from(K)] += jitter
    L = scipy.linalg.cholesky(K, lower=True, overwrite_a=True, check_finite=False)
    alpha = scipy.linalg.cho_solve((L, True), y, check_finite=False)
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * y.size * math.log(2 * math.pi))


def log_marginal_likelihood(nodes, values, length_scale: float, jitter: float = 1e-10) -> float:
    """Zero-mean GP log marginal likelihood with a unit-scale Gaussian kernel."""
    X = np.atleast_2d(np.asarray(nodes, dtype=float))
    y = np.asarray(values, dtype=float).reshape(-1)
    return _lml_from_distances(_sq_distances(X), y, length_scale, jitter)


def mle_lengthscale(nodes, values, grid, jitter: float = 1e-10, cap: int = 3000) -> float:
    """Grid candidate with the largest log marginal likelihood; ties go to the smaller value."""
    X = np.atleast_2d(np.asarray(nodes, dtype=float))
    y = np.asarray(values, dtype=float).reshape(-1)
    if X.shape[0] > cap:
        raise ValidationError(f"{X.shape[0]} nodes exceed the likelihood cap of {cap}")
    if not np.any(y):
        warnings.warn("all values are zero; the likelihood only sees the log-determinant", DegenerateDataWarning)
    D = _sq_distances(X)
    best, best_ll = None, -math.inf
    for ell in sorted(float(v) for v in grid):
        try:
            ll = _lml_from_distances(D, y, ell, jitter)
        except np.linalg.LinAlgError:
            warnings.warn(f"Cholesky failed at length_scale={ell}; skipped", NumericalWarning)
            continue
        if ll > best_ll:
            best, best_ll = ell, ll
    if best is None:
        raise NumericalError("likelihood could not be evaluated at any grid candidate")
    return best


# ---------------------------------------------------------------- reports


@dataclass
class ReportRow:
    n: int
    J: int
    estimate: float
    truth: float
    rel_error: float
    wce: float
    t_kernel_s: float = 0.0
    t_weights_s: float = 0.0
    t_fss_s: float = 0.0
    method: str = ""
    params: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def as_csv_row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass
class ExperimentReport:
    experiment: str
    rows: list = field(default_factory=list)
    baselines: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def sort(self) -> "ExperimentReport":
        self.rows.sort(key=lambda r: r.n)
        self.baselines.sort(key=lambda r: r.n)
        return self

    @property
    def has_warnings(self) -> bool:
        return bool(self.errors) or any(r.warnings for r in self.rows + self.baselines)

    def to_csv(self, baselines: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.baselines if baselines else self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r.as_csv_row()])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "columns": list(CSV_COLUMNS),
            "rows": [asdict(r) for r in self.rows],
            "baselines": [asdict(r) for r in self.baselines],
            "errors": self.errors,
        }


def _rel(est: float, truth: float) -> float:
    return abs(est - truth) / abs(truth) if truth else float("nan")


def timed_rule(node_set: SymmetricNodeSet, k: GaussianKernel, mu: SymmetricMeasure):
    """Build a rule, returning it with (kernel, weights) wall times."""
    t0 = time.perf_counter()
    S = build_s_matrix(node_set, k)
    t1 = time.perf_counter()
    gens = np.array([g.values for g in node_set.generators])
    means = np.asarray(kernel_mean(k, mu, gens), dtype=float)
    w = solve_weights(S, means)
    t2 = time.perf_counter()
    rule = FsQuadratureRule(
        node_set, w, k, mu, means,
        cond_estimate=float(np.linalg.cond(S.values)),
        kernel_evaluations=S.kernel_evaluations,
    )
    object.__setattr__(rule, "wce", worst_case_error(rule))
    return rule, t1 - t0, t2 - t1


# ---------------------------------------------------------------- ex1


@dataclass
class Ex1Config:
    J_values: tuple = (5, 10, 20, 30, 40, 50)
    seeds: tuple = (0,)
    ell_grid: tuple = tuple(np.round(np.geomspace(0.2, 2.0, 25), 6))
    fit_on: str = "mc"  # or "fss"
    kmc_cap: int = 3000


def run_ex1(cfg: Ex1Config) -> ExperimentReport:
    report = ExperimentReport("ex1", config=_cfg_dict(cfg))
    d = 3
    mu = SymmetricMeasure("std_gaussian", d)
    for J in cfg.J_values:
        if J <= 0:
            continue
        for seed in cfg.seeds:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", NumericalWarning)
                try:
                    _ex1_row(report, J, int(seed), cfg, mu)
                except FskqError as exc:
                    report.errors.append({"J": J, "seed": seed, "code": exc.code, "message": str(exc)})
            msgs = [str(c.message) for c in caught if issubclass(c.category, NumericalWarning)]
            if msgs and report.rows:
                report.rows[-1].warnings.extend(msgs)
    return report.sort()


def _ex1_row(report, J, seed, cfg: Ex1Config, mu):
    ss = np.random.SeedSequence(seed)
    mc_seq, fs_seq = ss.spawn(2)
    n = 48 * J
    t0 = time.perf_counter()
    gens = random_generators(J, 3, "std_gaussian", seed=fs_seq)
    node_set = SymmetricNodeSet.from_generators(gens)
    t_fss = time.perf_counter() - t0

    if cfg.fit_on == "fss":
        fit_x = node_set.points
    else:
        fit_x = np.random.default_rng(mc_seq).standard_normal((n, 3))
    if fit_x.shape[0] > cfg.kmc_cap:
        raise ValidationError(f"{fit_x.shape[0]} fitting points exceed cap {cfg.kmc_cap}")
    ell = mle_lengthscale(fit_x, integrand_ex1(fit_x), cfg.ell_grid, cap=cfg.kmc_cap)
    k = GaussianKernel(ell)

    if cfg.fit_on != "fss":
        t0 = time.perf_counter()
        w = naive_weights(fit_x, k, mu, cap=cfg.kmc_cap)
        t_w = time.perf_counter() - t0
        est = float(w @ integrand_ex1(fit_x))
        e2 = initial_error_sq(k, mu) - float(kernel_mean(k, mu, fit_x) @ w)
        report.baselines.append(ReportRow(
            n, n, est, EX1_TRUTH, _rel(est, EX1_TRUTH), math.sqrt(max(e2, 0.0)),
            t_weights_s=t_w, method="kmc", params={"seed": seed, "length_scale": ell},
        ))

    rule, t_k, t_w = timed_rule(node_set, k, mu)
    est = integrate(rule, integrand_ex1)
    report.rows.append(ReportRow(
        rule.n, rule.J, est, EX1_TRUTH, _rel(est, EX1_TRUTH), rule.wce, t_k, t_w, t_fss,
        method="fskmc", params={"seed": seed, "length_scale": ell},
    ))


# ---------------------------------------------------------------- ex2


@dataclass
class Ex2Config:
    q_max: int = 5
    q_min: int = 1
    length_scale: float = EX2_LENGTH_SCALE


def run_ex2(cfg: Ex2Config) -> ExperimentReport:
    report = ExperimentReport("ex2", config=_cfg_dict(cfg))
    d = EX2_DIM
    mu = SymmetricMeasure("uniform_cube", d)
    k = GaussianKernel(cfg.length_scale)
    truth = true_integral_ex2()
    for q in range(cfg.q_min, cfg.q_max + 1):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NumericalWarning)
            try:
                t0 = time.perf_counter()
                gens = sparse_grid_generators(q, d, make_basis("cc", q))
                node_set = SymmetricNodeSet.from_generators(gens)
                t_fss = time.perf_counter() - t0
                rule, t_k, t_w = timed_rule(node_set, k, mu)
                est = integrate(rule, integrand_ex2)
            except FskqError as exc:
                report.errors.append({"q": q, "code": exc.code, "message": str(exc)})
                continue
        report.rows.append(ReportRow(
            rule.n, rule.J, est, truth, _rel(est, truth), rule.wce, t_k, t_w, t_fss,
            method="ccsgkq", params={"q": q, "dim": d, "length_scale": cfg.length_scale},
            warnings=[str(c.message) for c in caught if issubclass(c.category, NumericalWarning)],
        ))
    return report.sort()


# ---------------------------------------------------------------- ex3


@dataclass
class Ex3Config:
    dims: tuple = (10, 20, 30, 40, 50)
    q: int = 2
    length_scale: float | None = None  # None: the heuristic length_scale = steps
    drop_center: bool = True
    mc_seeds: tuple = tuple(range(10))


def run_ex3(cfg: Ex3Config) -> ExperimentReport:
    report = ExperimentReport("ex3", config=_cfg_dict(cfg))
    basis = gauss_hermite_basis(cfg.q)
    for steps in cfg.dims:
        p = VasicekParams(steps=int(steps))
        truth = bond_closed_form(p)
        ell = float(steps) if cfg.length_scale is None else cfg.length_scale
        mu = SymmetricMeasure("std_gaussian", p.dim)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NumericalWarning)
            try:
                t0 = time.perf_counter()
                node_set = SymmetricNodeSet.from_generators(sparse_grid_generators(cfg.q, p.dim, basis))
                if cfg.drop_center:
                    node_set = node_set.without_origin()
                t_fss = time.perf_counter() - t0
                rule, t_k, t_w = timed_rule(node_set, GaussianKernel(ell), mu)
                est = integrate(rule, lambda x: bond_integrand(p, x))
            except FskqError as exc:
                report.errors.append({"steps": steps, "code": exc.code, "message": str(exc)})
                continue
        report.rows.append(ReportRow(
            rule.n, rule.J, est, truth, _rel(est, truth), rule.wce, t_k, t_w, t_fss,
            method="ghsgkq", params={"steps": steps, "dim": p.dim, "q": cfg.q, "length_scale": ell},
            warnings=[str(c.message) for c in caught if issubclass(c.category, NumericalWarning)],
        ))
        for seed in cfg.mc_seeds:
            est = mc_estimate(lambda x: bond_integrand(p, x), mu, rule.n, seed)
            report.baselines.append(ReportRow(
                rule.n, 0, est, truth, _rel(est, truth), float("nan"),
                method="mc", params={"steps": steps, "dim": p.dim, "seed": seed},
            ))
    return report.sort()


def mc_estimate(f, mu: SymmetricMeasure, n: int, seed) -> float:
    """Plain Monte Carlo mean of ``f`` over ``n`` draws from ``mu``."""
    rng = np.random.default_rng(seed)
    total = 0.0
    for start in range(0, n, 2**14):
        total += float(np.sum(f(mu.sample(min(2**14, n - start), rng))))
    return total / n


# ---------------------------------------------------------------- dispatch

CONFIGS = {"ex1": Ex1Config, "ex2": Ex2Config, "ex3": Ex3Config}
RUNNERS = {"ex1": run_ex1, "ex2": run_ex2, "ex3": run_ex3}


def run_experiment(experiment: str, config=None) -> ExperimentReport:
    if experiment not in RUNNERS:
        raise ValidationError(f"unknown experiment {experiment!r}; choose from {sorted(RUNNERS)}")
    if config is None:
        config = CONFIGS[experiment]()
    elif isinstance(config, dict):
        config = CONFIGS[experiment](**config)
    return RUNNERS[experiment](config)


def _cfg_dict(cfg) -> dict:
    out = {}
    for k, v in asdict(cfg).items():
        out[k] = list(v) if isinstance(v, tuple) else v
    return out
