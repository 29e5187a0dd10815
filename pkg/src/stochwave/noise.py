"""Samplers for L2-valued square-integrable martingale increments.

Two drivers share the same nuclear covariance Q: a Q-Wiener process and a
compensator-free compound Poisson martingale (symmetric bounded jumps).  Per
unit time both have per-mode variance q_k, so downstream estimates can be
checked against the same trace targets.

Streams are derived counter-style from (master_seed, path_index) via Philox,
and increments are consumed in a fixed order (modes lexicographic, then time),
which is what makes coupled-noise continuation across regularization scales
possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralGrid

__all__ = [
    "NuclearCovariance",
    "MartingaleDriver",
    "DiffusionMap",
    "path_rng",
    "ito_isometry_check",
    "DIFFUSION_MAPS",
]

_SQRT3 = np.sqrt(3.0)


def path_rng(master_seed: int, path_index: int) -> np.random.Generator:
    """Independent per-path stream: Philox keyed by (master_seed, path_index)."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(path_index),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class NuclearCovariance:
    """Diagonal covariance q_k = q0 * |k|^(-r) on the grid's mode set.

    r > dim keeps the trace convergent as the mode cutoff grows.
    """

    q0: float
    r: float
    q: np.ndarray = field(repr=False)

    @classmethod
    def from_grid(cls, grid: SpectralGrid, q0: float, r: float) -> "NuclearCovariance":
        if q0 < 0.0:
            raise ValueError(f"q0 must be >= 0, got {q0}")
        if r <= grid.dim:
            raise ValueError(f"decay exponent r must exceed dim={grid.dim}, got {r}")
        # |k| = sqrt(mu_k), so q = q0 * mu^(-r/2)
        q = q0 * grid.mu ** (-r / 2.0)
        return cls(q0=float(q0), r=float(r), q=q)

    @property
    def trace(self) -> float:
        return float(np.sum(self.q))


@dataclass(frozen=True)
class MartingaleDriver:
    """Increment sampler for the driving martingale M with <<M>>(t) = t*Q."""

    kind: str  # "wiener" | "poisson"
    covariance: NuclearCovariance
    rate: float = 0.0  # jump intensity, poisson only

    def __post_init__(self):
        if self.kind not in ("wiener", "poisson"):
            raise ValueError(f"unknown driver kind {self.kind!r}")
        if self.kind == "poisson" and self.rate <= 0.0:
            raise ValueError(f"poisson driver needs rate > 0, got {self.rate}")

    def increment_sampler(self, dt: float):
        """Precompiled sampler rng -> increment of M over a step of length dt."""
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        q = self.covariance.q
        if self.kind == "wiener":
            scale = np.sqrt(q * dt)

            def draw(rng):
                return scale * rng.standard_normal(scale.shape)

            return draw
        # compound Poisson: Poisson(rate*dt) jumps, each sum_k sqrt(q_k/rate) xi_k e_k
        # with xi uniform on [-sqrt(3), sqrt(3)] (unit variance, symmetric, bounded)
        jump_scale = np.sqrt(q / self.rate)
        mean_jumps = self.rate * dt

        def draw(rng):
            n_jumps = int(rng.poisson(mean_jumps))
            if n_jumps == 0:
                return np.zeros(jump_scale.shape)
            xi = rng.uniform(-_SQRT3, _SQRT3, size=(n_jumps,) + jump_scale.shape)
            return jump_scale * xi.sum(axis=0)

        return draw

    def sample_increment(self, dt: float, rng: np.random.Generator) -> np.ndarray:
        """One increment of M over a step of length dt, as mode coefficients."""
        return self.increment_sampler(dt)(rng)


def _clip_unit(x):
    return np.asarray(x).clip(-1.0, 1.0)


# named module-level callables only: maps must survive pickling into worker pools
DIFFUSION_MAPS = {
    "one": (np.ones_like, 1.0, 0.0),
    "clip": (_clip_unit, 1.0, 1.0),
    "sin": (np.sin, 1.0, 1.0),
    "zero": (np.zeros_like, 0.0, 0.0),  # switches the noise term off entirely
}


@dataclass(frozen=True)
class DiffusionMap:
    """Bounded Lipschitz scalar sigma; acts on noise by nodal multiplication."""

    name: str
    func: object = field(repr=False)
    bound: float = 1.0
    lipschitz: float = 1.0

    @classmethod
    def from_name(cls, name: str) -> "DiffusionMap":
        try:
            func, bound, lip = DIFFUSION_MAPS[name]
        except KeyError:
            raise ValueError(f"unknown diffusion map {name!r}") from None
        return cls(name=name, func=func, bound=bound, lipschitz=lip)

    def apply(self, grid: SpectralGrid, u_nodes: np.ndarray, dm_coeffs: np.ndarray) -> np.ndarray:
        """Modes of sigma(u(x)) * dM(x); sigma evaluated at the pre-step state."""
        if u_nodes.shape != grid.shape or dm_coeffs.shape != grid.shape:
            raise ValueError("field shapes do not match the grid")
        if self.name == "one":
            return dm_coeffs
        if self.name == "zero":
            return np.zeros(grid.shape)
        return grid.to_modes(self.func(u_nodes) * grid.to_nodes(dm_coeffs))

    def hs_norm(self, grid: SpectralGrid, u_nodes: np.ndarray, cov: NuclearCovariance) -> float:
        """Hilbert-Schmidt norm of h -> sigma(u)*h against Q^(1/2).

        (sum_k q_k |sigma(u) e_k|_{L2}^2)^(1/2), all L2 products by quadrature.
        """
        s2 = np.asarray(self.func(u_nodes), dtype=float) ** 2
        g = grid.mode_square_sum(cov.q)
        return float(np.sqrt(grid.weight * np.sum(s2 * g)))


def ito_isometry_check(
    driver: MartingaleDriver,
    t_final: float,
    n_steps: int,
    n_paths: int,
    master_seed: int,
) -> dict:
    """Monte Carlo check of E|M(T)|_{L2}^2 against T * trace(Q).

    The integrand is the identity, so M(T) is just the accumulated increment;
    the estimator averages the squared coefficient norm across paths.
    """
    if t_final < 0.0:
        raise ValueError(f"t_final must be >= 0, got {t_final}")
    rhs = t_final * driver.covariance.trace
    if t_final == 0.0 or n_paths < 1:
        return {"lhs_estimate": 0.0, "rhs": rhs, "std_error": 0.0, "n_paths": n_paths}
    dt = t_final / n_steps
    sq = np.empty(n_paths)
    for p in range(n_paths):
        rng = path_rng(master_seed, p)
        total = np.zeros(driver.covariance.q.shape)
        for _ in range(n_steps):
            total += driver.sample_increment(dt, rng)
        sq[p] = np.sum(total**2)
    lhs = float(np.mean(sq))
    se = float(np.std(sq, ddof=1) / np.sqrt(n_paths)) if n_paths > 1 else 0.0
    return {"lhs_estimate": lhs, "rhs": rhs, "std_error": se, "n_paths": n_paths}
