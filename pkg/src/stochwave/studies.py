"""Monte Carlo studies over the regularization scale, with reproducible pooling.

Every study maps independent path simulations (one RNG stream per path index)
over an optional process pool and reduces the per-path values in path order,
so reports are bit-identical for a fixed seed regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .errors import NumericError
from .noise import ito_isometry_check, path_rng
from .solver import SERIES_COLUMNS, PathResult, SolverConfig, ibp_residual, simulate_path

__all__ = [
    "StudySpec",
    "StudyReport",
    "energy_study",
    "pairing_study",
    "lambda_convergence_study",
    "isometry_study",
    "write_csv",
    "write_path_csv",
    "write_field_csv",
]


@dataclass
class StudySpec:
    """A base solver setup plus the parameter grids a study sweeps over."""

    base: SolverConfig
    lambdas: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    dts: tuple = (4e-3, 2e-3, 1e-3)
    eps_grid: tuple = (1e-2, 1e-3, 0.0)
    n_paths: int = 200
    seed: int = 42
    workers: int = 1

    def __post_init__(self):
        if not self.lambdas:
            raise ValueError("lambda grid must be non-empty")
        if any(l2 > l1 for l1, l2 in zip(self.lambdas, self.lambdas[1:])):
            raise ValueError("lambda grid must be descending")
        if any(l <= 0 for l in self.lambdas):
            raise ValueError("lambda grid entries must be positive")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")

    def config_for(self, lam, **overrides) -> SolverConfig:
        return replace(self.base, lam=lam, seed=self.seed, **overrides)


@dataclass
class StudyReport:
    """Tabular study output: column names plus one tuple per row."""

    name: str
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)


def _format_cell(value):
    if isinstance(value, float):
        return repr(float(value))  # shortest round-trip form, also for np.float64
    return str(value)


def write_csv(report: StudyReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(report.columns) + "\n")
        for row in report.rows:
            f.write(",".join(_format_cell(v) for v in row) + "\n")


def write_path_csv(result: PathResult, path) -> None:
    """Per-step functional trace: t,energy,lyapunov,l2_u,h1_u,l2_v,pairing_running."""
    result.require("series")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(SERIES_COLUMNS) + "\n")
        for t, row in zip(result.times, result.series):
            cells = [repr(float(t))] + [repr(float(v)) for v in row]
            f.write(",".join(cells) + "\n")


def write_field_csv(grid, coeffs, path) -> None:
    """Dump a coefficient field as k1[,k2],coeff rows in lexicographic order."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != grid.shape:
        raise ValueError(f"field has shape {coeffs.shape}, expected {grid.shape}")
    header = "k1,coeff" if grid.dim == 1 else "k1,k2,coeff"
    flat = coeffs.ravel()
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(header + "\n")
        for indices, value in zip(grid.mode_indices, flat):
            f.write(",".join(str(int(k)) for k in indices) + f",{float(value)!r}\n")


def _map_ordered(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunk = max(1, math.ceil(len(items) / (4 * workers)))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    se = float(np.std(arr, ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return mean, se


def _sup_energy_job(config, path_index):
    try:
        return simulate_path(config, path_index).sup_energy, None
    except NumericError as exc:
        return None, exc.step


def energy_study(spec: StudySpec) -> StudyReport:
    """E sup_t (|u|_{H10}^2 + |v|_{L2}^2) per lambda; blow-ups flagged, not fatal."""
    rows, blowups = [], {}
    for lam in spec.lambdas:
        config = spec.config_for(lam, record=frozenset())
        results = _map_ordered(partial(_sup_energy_job, config), range(spec.n_paths), spec.workers)
        ok = [r[0] for r in results if r[0] is not None]
        n_blown = spec.n_paths - len(ok)
        if n_blown:
            blowups[lam] = n_blown
        if ok:
            est, se = _mean_se(ok)
        else:
            est, se = float("nan"), float("nan")
        rows.append((lam, est, se, len(ok)))
    return StudyReport(
        name="energy",
        columns=("lambda", "estimate", "std_error", "n_paths"),
        rows=rows,
        meta={"blowups": blowups},
    )


def _pairing_job(config, path_index):
    try:
        return simulate_path(config, path_index).pairing_eps, None
    except NumericError as exc:
        return None, exc.step


def pairing_study(spec: StudySpec, eps_grid=None) -> StudyReport:
    """E int <yosida(u), resolvent(u)> dt per (lambda, eps), eps -> 0 sweep.

    Positive eps applies the elliptic smoother to both pairing factors, the
    way the uniform bound is derived before letting the smoothing vanish.
    """
    eps_values = tuple(spec.eps_grid if eps_grid is None else eps_grid)
    if 0.0 not in eps_values:
        eps_values = eps_values + (0.0,)
    rows, blowups = [], {}
    for lam in spec.lambdas:
        config = spec.config_for(lam, record=frozenset(), eps_pairing=eps_values)
        results = _map_ordered(partial(_pairing_job, config), range(spec.n_paths), spec.workers)
        ok = [r[0] for r in results if r[0] is not None]
        n_blown = spec.n_paths - len(ok)
        if n_blown:
            blowups[lam] = n_blown
        for eps in eps_values:
            if ok:
                est, se = _mean_se([d[eps] for d in ok])
            else:
                est, se = float("nan"), float("nan")
            rows.append((lam, eps, est, se, len(ok)))
    return StudyReport(
        name="pairing",
        columns=("lambda", "eps", "estimate", "std_error", "n_paths"),
        rows=rows,
        meta={"blowups": blowups},
    )


def _coupled_gaps_job(configs, path_index):
    """Simulate one path under every lambda with shared noise; consecutive gaps.

    Returns one tuple (u_gap, beta_l1_gap, beta_hm2_gap, beta_hm3_gap) per
    consecutive lambda pair.  Raises if the increment streams ever differ.
    """
    grid = configs[0].grid
    dt = configs[0].dt
    prev = None
    prev_hash = None
    gaps = []
    for config in configs:
        result = simulate_path(config, path_index)
        if prev_hash is not None and result.increment_hash != prev_hash:
            raise RuntimeError("coupled paths consumed different noise streams")
        prev_hash = result.increment_hash
        if prev is not None:
            du = result.u - prev.u
            u_gap = float(np.max(np.sqrt(np.sum(du**2, axis=tuple(range(1, du.ndim))))))
            dbeta = result.beta - prev.beta
            l1 = 0.0
            for n in range(dbeta.shape[0]):
                l1 += grid.weight * float(np.sum(np.abs(grid.to_nodes(dbeta[n]))))
            l1 *= dt
            axes = tuple(range(1, dbeta.ndim))
            hm2 = dt * float(np.sum(np.sqrt(np.sum((1.0 + grid.mu) ** -2.0 * dbeta**2, axis=axes))))
            hm3 = dt * float(np.sum(np.sqrt(np.sum((1.0 + grid.mu) ** -3.0 * dbeta**2, axis=axes))))
            gaps.append((u_gap, l1, hm2, hm3))
        prev = result
    return gaps


def lambda_convergence_study(spec: StudySpec) -> StudyReport:
    """Cauchy gaps between consecutive regularization scales under coupled noise."""
    if len(spec.lambdas) < 3:
        raise ValueError("lambda convergence needs a grid of at least 3 values")
    configs = tuple(
        spec.config_for(lam, record=frozenset({"states"})) for lam in spec.lambdas
    )
    per_path = _map_ordered(
        partial(_coupled_gaps_job, configs), range(spec.n_paths), spec.workers
    )
    rows = []
    for j in range(len(spec.lambdas) - 1):
        u_gaps = [gaps[j][0] for gaps in per_path]
        l1_gaps = [gaps[j][1] for gaps in per_path]
        hm2 = float(np.mean([gaps[j][2] for gaps in per_path]))
        hm3 = float(np.mean([gaps[j][3] for gaps in per_path]))
        u_est, u_se = _mean_se(u_gaps)
        b_est, b_se = _mean_se(l1_gaps)
        rows.append(
            (spec.lambdas[j], spec.lambdas[j + 1], u_est, u_se, b_est, b_se, hm2, hm3, spec.n_paths)
        )
    return StudyReport(
        name="lambda-conv",
        columns=(
            "lambda_hi",
            "lambda_lo",
            "u_gap",
            "u_gap_se",
            "beta_l1_gap",
            "beta_l1_gap_se",
            "beta_hm2_gap",
            "beta_hm3_gap",
            "n_paths",
        ),
        rows=rows,
    )


def isometry_study(spec: StudySpec) -> StudyReport:
    """Second-moment identity, discrete quadratic variation, and the telescoping
    integration-by-parts defect, all for the configured driver."""
    base = spec.base
    if base.driver is None:
        raise ValueError("isometry study needs a noise driver in the base config")
    driver = base.driver
    iso = ito_isometry_check(driver, base.t_final, 1, spec.n_paths, spec.seed)
    rows = [
        (
            f"ito_isometry_{driver.kind}",
            iso["lhs_estimate"],
            iso["rhs"],
            iso["std_error"],
            iso["n_paths"],
        )
    ]

    n_steps = base.n_steps
    dt = base.dt
    qv = np.empty(spec.n_paths)
    for p in range(spec.n_paths):
        rng = path_rng(spec.seed, p)
        total = 0.0
        for _ in range(n_steps):
            total += float(np.sum(driver.sample_increment(dt, rng) ** 2))
        qv[p] = total
    qv_est, qv_se = _mean_se(qv)
    rows.append(
        ("quadratic_variation", qv_est, base.t_final * driver.covariance.trace, qv_se, spec.n_paths)
    )

    config = spec.config_for(spec.lambdas[0], record=frozenset({"states"}))
    result = simulate_path(config, 0)
    grid = config.grid
    worst = 0.0
    probe_rng = path_rng(spec.seed, 2**31)
    probes = [
        (grid.basis_field(*grid.mode_indices[0]), grid.basis_field(*grid.mode_indices[-1])),
        (probe_rng.standard_normal(grid.shape), probe_rng.standard_normal(grid.shape)),
    ]
    for phi, psi in probes:
        worst = max(worst, ibp_residual(result, phi, psi))
    rows.append(("integration_by_parts", worst, 0.0, 0.0, 1))

    return StudyReport(
        name="isometry",
        columns=("check", "estimate", "target", "std_error", "n_paths"),
        rows=rows,
    )
