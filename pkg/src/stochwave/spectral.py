"""Dirichlet sine eigenbasis on the box (0, pi)^d and its spectral calculus.

Fields live as real coefficient arrays of shape ``grid.shape`` (one axis per
space dimension, mode indices 1..N along each axis, C order = lexicographic).
Transforms use the explicit orthonormal sine matrix, which is its own inverse
up to the quadrature weight, so round trips are exact to round-off.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError

__all__ = ["SpectralGrid"]


class SpectralGrid:
    """Collocation grid and mode table for the Dirichlet Laplacian on (0, pi)^d."""

    def __init__(self, dim: int, n_modes: int):
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        if n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {n_modes}")
        self.dim = int(dim)
        self.n_modes = int(n_modes)
        self.shape = (n_modes,) * dim
        self.size = n_modes**dim

        k = np.arange(1, n_modes + 1, dtype=float)
        # interior nodes i*pi/(N+1); quadrature weight h^d is exact on the basis
        self.nodes_1d = k * np.pi / (n_modes + 1.0)
        self.h = np.pi / (n_modes + 1.0)
        self.weight = self.h**dim
        # sine matrix S[i-1, k-1] = sin(i k pi / (N+1)); symmetric, S@S = (N+1)/2 I
        self._sine = np.sin(np.outer(k, k) * np.pi / (n_modes + 1.0))
        self._scale = (2.0 / np.pi) ** (dim / 2.0)

        if dim == 1:
            self.mu = k**2
        else:
            self.mu = (k**2)[:, None] + (k**2)[None, :]
        self.mode_indices = self._mode_index_table()

    def _mode_index_table(self):
        k = np.arange(1, self.n_modes + 1)
        if self.dim == 1:
            return k.reshape(-1, 1)
        k1, k2 = np.meshgrid(k, k, indexing="ij")
        return np.stack([k1.ravel(), k2.ravel()], axis=1)

    def zero_field(self) -> np.ndarray:
        return np.zeros(self.shape)

    def basis_field(self, *k: int) -> np.ndarray:
        """Coefficient array of the single eigenfunction with multi-index k."""
        if len(k) != self.dim:
            raise ValueError(f"expected {self.dim} mode indices, got {len(k)}")
        out = self.zero_field()
        out[tuple(i - 1 for i in k)] = 1.0
        return out

    def _check_shape(self, arr, what):
        if arr.shape != self.shape:
            raise ValueError(f"{what} has shape {arr.shape}, expected {self.shape}")

    def to_nodes(self, coeffs: np.ndarray) -> np.ndarray:
        """Evaluate the field at the collocation nodes."""
        coeffs = np.asarray(coeffs, dtype=float)
        self._check_shape(coeffs, "coefficient array")
        if self.dim == 1:
            return self._scale * (self._sine @ coeffs)
        return self._scale * (self._sine @ coeffs @ self._sine)

    def to_modes(self, nodal: np.ndarray) -> np.ndarray:
        """Project nodal values onto the eigenbasis (quadrature inner products)."""
        nodal = np.asarray(nodal, dtype=float)
        self._check_shape(nodal, "nodal array")
        if self.dim == 1:
            return self._scale * self.h * (self._sine @ nodal)
        return self._scale * self.h**2 * (self._sine @ nodal @ self._sine)

    def apply_spectral(self, coeffs: np.ndarray, phi) -> np.ndarray:
        """Multiply mode k by phi(mu_k); realizes any function of -Laplacian."""
        coeffs = np.asarray(coeffs, dtype=float)
        self._check_shape(coeffs, "coefficient array")
        factors = np.asarray(phi(self.mu), dtype=float)
        if not np.all(np.isfinite(factors)):
            raise NumericError("spectral multiplier is not finite on the mode set")
        return coeffs * factors

    def smoother(self, eps: float) -> np.ndarray:
        """Multiplier table of (I - eps*Laplacian)^{-1}: 1/(1 + eps*mu)."""
        if eps < 0.0:
            raise ValueError(f"smoothing parameter must be >= 0, got {eps}")
        return 1.0 / (1.0 + eps * self.mu)

    def nemytskii(self, coeffs: np.ndarray, f) -> np.ndarray:
        """Apply the scalar map f pointwise at the nodes, back in modes."""
        values = f(self.to_nodes(coeffs))
        if not np.all(np.isfinite(values)):
            raise NumericError("pointwise map produced non-finite nodal values")
        return self.to_modes(values)

    def norm(self, coeffs: np.ndarray, m: float = 0.0) -> float:
        """Sobolev-scale norm (sum (1+mu_k)^m uhat_k^2)^(1/2); m=0 is L2."""
        coeffs = np.asarray(coeffs, dtype=float)
        self._check_shape(coeffs, "coefficient array")
        if m == 0.0:
            return float(np.sqrt(np.sum(coeffs**2)))
        return float(np.sqrt(np.sum((1.0 + self.mu) ** m * coeffs**2)))

    def grad_seminorm(self, coeffs: np.ndarray) -> float:
        """|grad u|_{L2} = (sum mu_k uhat_k^2)^(1/2), the H^1_0 energy norm."""
        coeffs = np.asarray(coeffs, dtype=float)
        self._check_shape(coeffs, "coefficient array")
        return float(np.sqrt(np.sum(self.mu * coeffs**2)))

    def quad_l2(self, nodal: np.ndarray) -> float:
        """L2 norm of nodal values via the collocation quadrature."""
        nodal = np.asarray(nodal, dtype=float)
        self._check_shape(nodal, "nodal array")
        return float(np.sqrt(self.weight * np.sum(nodal**2)))

    def quad_integral(self, nodal: np.ndarray) -> float:
        """Integral over the box of nodal values via the collocation quadrature."""
        nodal = np.asarray(nodal, dtype=float)
        self._check_shape(nodal, "nodal array")
        return float(self.weight * np.sum(nodal))

    def mode_square_sum(self, weights: np.ndarray) -> np.ndarray:
        """Nodal values of sum_k w_k e_k(x)^2 for per-mode weights w."""
        weights = np.asarray(weights, dtype=float)
        self._check_shape(weights, "weight array")
        sine2 = self._sine**2
        if self.dim == 1:
            return (2.0 / np.pi) * (sine2 @ weights)
        return (2.0 / np.pi) ** 2 * (sine2 @ weights @ sine2)

    def __repr__(self):
        return f"SpectralGrid(dim={self.dim}, n_modes={self.n_modes})"
