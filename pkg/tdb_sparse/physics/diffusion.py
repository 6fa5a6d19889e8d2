"""Homogeneous linear diffusion on a periodic grid (linear test model)."""

from typing import List

import numpy as np

from tdb_sparse.models.config import DiffusionConfig
from tdb_sparse.physics.base import RK4_REAL_LIMIT, Model, ModelError
from tdb_sparse.physics.random_inputs import DIFFUSION_STREAM, standard_normal


class DiffusionModel(Model):
    """ν v_xx with the periodic three-point Laplacian on x_i = i/n."""

    def __init__(self, cfg: DiffusionConfig, threads: int = 1) -> None:
        if cfg.n < 3:
            raise ModelError(f"diffusion grid needs at least 3 points, got {cfg.n}")
        self.cfg = cfg
        self.n = cfg.n
        self.dx = 1.0 / cfg.n
        self.x = np.arange(cfg.n) * self.dx
        self.wx = np.full(cfg.n, self.dx)
        self.threads = threads
        self._coef = cfg.nu / (self.dx * self.dx)

    def _laplacian(self, vm: np.ndarray, v0: np.ndarray, vp: np.ndarray) -> np.ndarray:
        return (vp - 2.0 * v0 + vm) * self._coef

    def _columns(self, V: np.ndarray, t: float, samples: np.ndarray) -> np.ndarray:
        return self._laplacian(np.roll(V, 1, axis=0), V, np.roll(V, -1, axis=0))

    def _rows(
        self,
        rows: np.ndarray,
        lookup: np.ndarray,
        Vsub: np.ndarray,
        t: float,
        samples: np.ndarray,
    ) -> np.ndarray:
        return self._laplacian(
            self.gather(lookup, (rows - 1) % self.n, Vsub),
            self.gather(lookup, rows, Vsub),
            self.gather(lookup, (rows + 1) % self.n, Vsub),
        )

    def stencil(self, row: int) -> List[int]:
        return sorted({(row - 1) % self.n, (row + 1) % self.n} - {row})

    def linear_action(self, U: np.ndarray) -> np.ndarray:
        """The linear operator applied column by column."""
        return self.rhs_columns(U, 0.0)

    def dense_operator(self) -> np.ndarray:
        """Assembled n×n operator (test scale only)."""
        L = -2.0 * np.eye(self.n) + np.roll(np.eye(self.n), 1, axis=1)
        L += np.roll(np.eye(self.n), -1, axis=1)
        return L * self._coef

    def initial_ensemble(self, s: int, seed: int) -> np.ndarray:
        """
        Random Fourier ensemble 1 + Σ_i ξ_i φ_i(x)/i.

        φ_{2k-1} = sin(2πkx) and φ_{2k} = cos(2πkx); the ensemble has rank d+1.
        """
        d = self.cfg.d
        xi = standard_normal(seed, DIFFUSION_STREAM, d, s)
        modes = np.empty((self.n, d))
        for i in range(d):
            k = i // 2 + 1
            wave = np.sin if i % 2 == 0 else np.cos
            modes[:, i] = wave(2.0 * np.pi * k * self.x) / (i + 1)
        return 1.0 + modes @ xi

    def stable_dt(self) -> float:
        return diffusion_stable_dt(self.cfg)


def diffusion_stable_dt(cfg: DiffusionConfig) -> float:
    """Largest dt inside the real-axis RK4 stability interval of the periodic Laplacian."""
    dx = 1.0 / cfg.n
    return RK4_REAL_LIMIT * dx * dx / (4.0 * cfg.nu)
