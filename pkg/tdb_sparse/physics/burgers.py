"""Stochastic viscous Burgers equation on [0, 1] with penalized Dirichlet boundaries."""

from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from tdb_sparse.linalg import sym_eig
from tdb_sparse.models.config import BurgersConfig
from tdb_sparse.physics.base import RK4_REAL_LIMIT, Model, ModelError
from tdb_sparse.physics.random_inputs import BURGERS_STREAM, standard_normal


def burgers_grid(n: int) -> Tuple[np.ndarray, float]:
    """Uniform grid with both boundaries and its spacing."""
    if n < 3:
        raise ModelError(f"Burgers grid needs at least 3 points, got {n}")
    return np.linspace(0.0, 1.0, n), 1.0 / (n - 1)


def initial_profile(x: np.ndarray) -> np.ndarray:
    """Deterministic initial condition 0.5 sin(2πx)(e^{cos 2πx} − 1.5)."""
    return 0.5 * np.sin(2.0 * np.pi * x) * (np.exp(np.cos(2.0 * np.pi * x)) - 1.5)


@lru_cache(maxsize=8)
def _kernel_eigenpairs(n: int, length_scale: float) -> Tuple[np.ndarray, np.ndarray]:
    x, dx = burgers_grid(n)
    K = np.exp(-((x[:, None] - x[None, :]) ** 2) / (2.0 * length_scale**2))
    Psi, lam = sym_eig(dx * K)
    Psi.setflags(write=False)
    lam.setflags(write=False)
    return lam, Psi


def kl_modes(n: int, length_scale: float, d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Leading Karhunen-Loève pairs of the squared-exponential covariance.

    The discrete eigenproblem uses the symmetric kernel matrix W^{1/2} K W^{1/2}
    with uniform weights dx; its eigenvectors are rescaled to W-orthonormal modes.
    The full decomposition is computed once per (n, length_scale).

    Args:
        n: Grid points.
        length_scale: Covariance length.
        d: Number of leading pairs.

    Returns:
        (lam_d, psi_d n×d, lam_all) with lam_all the complete descending spectrum.
    """
    lam, Psi = _kernel_eigenpairs(n, float(length_scale))
    _, dx = burgers_grid(n)
    return lam[:d].copy(), Psi[:, :d] / np.sqrt(dx), lam.copy()


def burgers_initial_ensemble(cfg: BurgersConfig, s: int, seed: int) -> np.ndarray:
    """
    Sampled initial ensemble, one column per Monte Carlo sample.

    Column j is the deterministic profile plus σ_x Σ_i sqrt(λ_i) ψ_i(x) ξ_ij.

    Args:
        cfg: Burgers configuration.
        s: Number of samples.
        seed: Run seed.

    Returns:
        Matrix n×s.
    """
    x, _ = burgers_grid(cfg.n)
    profile = initial_profile(x)
    V0 = np.repeat(profile[:, None], s, axis=1)
    if cfg.sigma_x == 0.0 or cfg.d == 0:
        return V0
    lam, psi, _ = kl_modes(cfg.n, cfg.length_scale, cfg.d)
    xi = standard_normal(seed, BURGERS_STREAM, cfg.d, s)
    return V0 + cfg.sigma_x * psi @ (np.sqrt(np.maximum(lam, 0.0))[:, None] * xi)


def burgers_stable_dt(cfg: BurgersConfig) -> float:
    """Largest dt inside the real-axis RK4 stability interval of the viscous term."""
    dx = 1.0 / (cfg.n - 1)
    return RK4_REAL_LIMIT * dx * dx / (4.0 * cfg.nu)


class BurgersModel(Model):
    """
    Viscous Burgers with second-order central differences.

    Interior rows evaluate −v v_x + ν v_xx. The two boundary rows relax towards their
    Dirichlet values with the penalty −κ(v_b − g), κ = penalty/dt; the left value
    carries the random boundary process of each sample.
    """

    def __init__(
        self,
        cfg: BurgersConfig,
        dt: float,
        s: int,
        seed: int,
        threads: int = 1,
    ) -> None:
        self.cfg = cfg
        self.n = cfg.n
        self.x, self.dx = burgers_grid(cfg.n)
        self.wx = np.full(cfg.n, self.dx)
        self.threads = threads
        self.kappa = cfg.penalty / dt
        self.seed = seed
        self.xi = standard_normal(seed, BURGERS_STREAM, cfg.d, s)
        self._inv_2dx = 1.0 / (2.0 * self.dx)
        self._nu_inv_dx2 = cfg.nu / (self.dx * self.dx)
        i = np.arange(1, cfg.d + 1, dtype=float)
        self._lambda_t = 0.01 / i**2
        self._modes = i

    @property
    def sample_count(self) -> Optional[int]:
        return int(self.xi.shape[1])

    def boundary_value(self, t: float, samples: np.ndarray) -> np.ndarray:
        """Left boundary value −sin(2πt) + σ_t Σ λ_ti sin(iπt) ξ_i for the given samples."""
        g = -self.cfg.left_amplitude * np.sin(2.0 * np.pi * t)
        if self.cfg.d == 0 or self.cfg.sigma_t == 0.0:
            return np.full(samples.shape[0], g)
        phi = self._lambda_t * np.sin(self._modes * np.pi * t)
        return g + self.cfg.sigma_t * (phi @ self.xi[:, samples])

    def _interior(self, vm: np.ndarray, v0: np.ndarray, vp: np.ndarray) -> np.ndarray:
        diffusion = (vp - 2.0 * v0 + vm) * self._nu_inv_dx2
        if not self.cfg.advection:
            return diffusion
        return diffusion - v0 * (vp - vm) * self._inv_2dx

    def _columns(self, V: np.ndarray, t: float, samples: np.ndarray) -> np.ndarray:
        out = np.empty_like(V)
        out[1:-1] = self._interior(V[:-2], V[1:-1], V[2:])
        out[0] = -self.kappa * (V[0] - self.boundary_value(t, samples))
        out[-1] = -self.kappa * (V[-1] - 0.0)
        return out

    def _rows(
        self,
        rows: np.ndarray,
        lookup: np.ndarray,
        Vsub: np.ndarray,
        t: float,
        samples: np.ndarray,
    ) -> np.ndarray:
        out = np.empty((rows.shape[0], Vsub.shape[1]))
        left = rows == 0
        right = rows == self.n - 1
        inner = ~(left | right)
        if np.any(inner):
            r = rows[inner]
            out[inner] = self._interior(
                self.gather(lookup, r - 1, Vsub),
                self.gather(lookup, r, Vsub),
                self.gather(lookup, r + 1, Vsub),
            )
        if np.any(left):
            out[left] = -self.kappa * (
                self.gather(lookup, rows[left], Vsub) - self.boundary_value(t, samples)
            )
        if np.any(right):
            out[right] = -self.kappa * (self.gather(lookup, rows[right], Vsub) - 0.0)
        return out

    def stencil(self, row: int) -> List[int]:
        if row <= 0 or row >= self.n - 1:
            return []
        return [row - 1, row + 1]

    def initial_ensemble(self) -> np.ndarray:
        """Initial ensemble drawn from the same random inputs as the boundary process."""
        return burgers_initial_ensemble(self.cfg, self.xi.shape[1], self.seed)

    def stable_dt(self) -> float:
        return burgers_stable_dt(self.cfg)
