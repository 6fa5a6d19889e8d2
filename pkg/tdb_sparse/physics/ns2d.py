"""Compressible Navier-Stokes on a doubly periodic box, stacked as [ρ; ρu; ρv; E]."""

import logging
from typing import Callable, Dict, List, Tuple

import numpy as np

from tdb_sparse.models.config import NSConfig
from tdb_sparse.physics.base import RK4_IMAG_LIMIT, Model, ModelError
from tdb_sparse.physics.random_inputs import NS2D_STREAM, standard_normal

logger = logging.getLogger(__name__)

# name -> 3×3 neighbourhood, hood[a][b] holds the value at (i + a - 1, j + b - 1)
Neighbourhood = Dict[str, List[List[np.ndarray]]]


class NS2DModel(Model):
    """
    Finite-volume style central scheme in conservative face-flux form.

    The RHS of every point is minus the divergence of fluxes through its four faces.
    Each face flux is the average of the convective fluxes on both sides minus the
    viscous and heat fluxes from compact differences across the face and averaged
    central differences along it. The scheme touches the 3×3 neighbourhood of a point,
    and neighbouring points share face fluxes bit for bit, so grid sums of ρ, ρu, ρv
    and E are conserved up to round-off.

    Row index of field f at grid point (ix, iy) is f·nx·ny + ix·ny + iy.
    """

    def __init__(self, cfg: NSConfig, threads: int = 1) -> None:
        if cfg.nx < 3 or cfg.ny < 3:
            raise ModelError(f"NS grid must be at least 3×3, got {cfg.nx}×{cfg.ny}")
        self.cfg = cfg
        self.nx, self.ny = cfg.nx, cfg.ny
        self.points = cfg.nx * cfg.ny
        self.n = 4 * self.points
        self.dx = cfg.Lx / cfg.nx
        self.dy = cfg.Ly / cfg.ny
        self.x = np.arange(cfg.nx) * self.dx
        self.y = np.arange(cfg.ny) * self.dy
        self.wx = np.full(self.n, self.dx * self.dy)
        self.threads = threads
        self._inv_re = 1.0 / cfg.Re
        self._heat = 1.0 / ((cfg.gamma - 1.0) * cfg.Ma**2 * cfg.Re * cfg.Pr)
        self._gm1 = cfg.gamma - 1.0
        self._t_scale = cfg.gamma * cfg.Ma**2

    # -- closures ---------------------------------------------------------------

    def _primitives(
        self, rho: np.ndarray, mu: np.ndarray, mv: np.ndarray, E: np.ndarray
    ) -> Dict[str, np.ndarray]:
        u = mu / rho
        v = mv / rho
        p = self._gm1 * (E - 0.5 * rho * (u * u + v * v))
        T = self._t_scale * p / rho
        return {"rho": rho, "mu": mu, "mv": mv, "E": E, "u": u, "v": v, "p": p, "T": T}

    def pressure_temperature(self, V: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Pressure and temperature fields (points×k) of stacked states."""
        rho, mu, mv, E = np.asarray(V, dtype=float).reshape(4, self.points, -1)
        prim = self._primitives(rho, mu, mv, E)
        return prim["p"], prim["T"]

    def _check_density(self, rho: np.ndarray, points: np.ndarray) -> None:
        bad = np.argwhere(rho <= 0.0)
        if bad.size:
            k = int(points[bad[0][0]])
            raise ModelError(
                f"non-positive density {rho[tuple(bad[0])]:.6e} at grid index "
                f"(ix={k // self.ny}, iy={k % self.ny})"
            )

    # -- face fluxes -----------------------------------------------------------

    @staticmethod
    def _x_convective(P: Neighbourhood, a: int, b: int) -> List[np.ndarray]:
        mu, u, v = P["mu"][a][b], P["u"][a][b], P["v"][a][b]
        E, p = P["E"][a][b], P["p"][a][b]
        return [mu, mu * u + p, mu * v, (E + p) * u]

    @staticmethod
    def _y_convective(P: Neighbourhood, a: int, b: int) -> List[np.ndarray]:
        mv, u, v = P["mv"][a][b], P["u"][a][b], P["v"][a][b]
        E, p = P["E"][a][b], P["p"][a][b]
        return [mv, mv * u, mv * v + p, (E + p) * v]

    def _x_face(self, P: Neighbourhood, a: int) -> List[np.ndarray]:
        """Flux through the face between columns a and a+1 of the neighbourhood."""
        u, v, T = P["u"], P["v"], P["T"]
        conv = [
            0.5 * (left + right)
            for left, right in zip(self._x_convective(P, a, 1), self._x_convective(P, a + 1, 1))
        ]
        u_x = (u[a + 1][1] - u[a][1]) / self.dx
        v_x = (v[a + 1][1] - v[a][1]) / self.dx
        T_x = (T[a + 1][1] - T[a][1]) / self.dx
        u_y = ((u[a][2] - u[a][0]) + (u[a + 1][2] - u[a + 1][0])) / (4.0 * self.dy)
        v_y = ((v[a][2] - v[a][0]) + (v[a + 1][2] - v[a + 1][0])) / (4.0 * self.dy)
        u_f = 0.5 * (u[a][1] + u[a + 1][1])
        v_f = 0.5 * (v[a][1] + v[a + 1][1])
        txx = self._inv_re * (4.0 / 3.0 * u_x - 2.0 / 3.0 * v_y)
        txy = self._inv_re * (u_y + v_x)
        return [
            conv[0],
            conv[1] - txx,
            conv[2] - txy,
            conv[3] - (txx * u_f + txy * v_f + self._heat * T_x),
        ]

    def _y_face(self, P: Neighbourhood, b: int) -> List[np.ndarray]:
        """Flux through the face between rows b and b+1 of the neighbourhood."""
        u, v, T = P["u"], P["v"], P["T"]
        conv = [
            0.5 * (left + right)
            for left, right in zip(self._y_convective(P, 1, b), self._y_convective(P, 1, b + 1))
        ]
        u_y = (u[1][b + 1] - u[1][b]) / self.dy
        v_y = (v[1][b + 1] - v[1][b]) / self.dy
        T_y = (T[1][b + 1] - T[1][b]) / self.dy
        u_x = ((u[2][b] - u[0][b]) + (u[2][b + 1] - u[0][b + 1])) / (4.0 * self.dx)
        v_x = ((v[2][b] - v[0][b]) + (v[2][b + 1] - v[0][b + 1])) / (4.0 * self.dx)
        u_f = 0.5 * (u[1][b] + u[1][b + 1])
        v_f = 0.5 * (v[1][b] + v[1][b + 1])
        tyy = self._inv_re * (4.0 / 3.0 * v_y - 2.0 / 3.0 * u_x)
        txy = self._inv_re * (u_y + v_x)
        return [
            conv[0],
            conv[1] - txy,
            conv[2] - tyy,
            conv[3] - (txy * u_f + tyy * v_f + self._heat * T_y),
        ]

    def _divergence(self, P: Neighbourhood) -> List[np.ndarray]:
        east, west = self._x_face(P, 1), self._x_face(P, 0)
        north, south = self._y_face(P, 1), self._y_face(P, 0)
        return [
            -((east[f] - west[f]) / self.dx + (north[f] - south[f]) / self.dy)
            for f in range(4)
        ]

    # -- access paths ----------------------------------------------------------

    def _hood(self, sample: Callable[[int, int], Dict[str, np.ndarray]]) -> Neighbourhood:
        cells = [[sample(a, b) for b in range(3)] for a in range(3)]
        return {
            name: [[cells[a][b][name] for b in range(3)] for a in range(3)]
            for name in cells[0][0]
        }

    def _columns(self, V: np.ndarray, t: float, samples: np.ndarray) -> np.ndarray:
        k = V.shape[1]
        rho, mu, mv, E = V.reshape(4, self.nx, self.ny, k)
        self._check_density(rho.reshape(self.points, k), np.arange(self.points))
        prim = self._primitives(rho, mu, mv, E)

        def shifted(a: int, b: int) -> Dict[str, np.ndarray]:
            shift = (1 - a, 1 - b)
            return {name: np.roll(arr, shift, axis=(0, 1)) for name, arr in prim.items()}

        rhs = self._divergence(self._hood(shifted))
        return np.stack(rhs).reshape(self.n, k)

    def _neighbour_points(self, points: np.ndarray, a: int, b: int) -> np.ndarray:
        ix, iy = np.divmod(points, self.ny)
        return ((ix + a - 1) % self.nx) * self.ny + (iy + b - 1) % self.ny

    def _rows(
        self,
        rows: np.ndarray,
        lookup: np.ndarray,
        Vsub: np.ndarray,
        t: float,
        samples: np.ndarray,
    ) -> np.ndarray:
        field, point = np.divmod(rows, self.points)
        centres, inverse = np.unique(point, return_inverse=True)

        def gathered(a: int, b: int) -> Dict[str, np.ndarray]:
            nb = self._neighbour_points(centres, a, b)
            rho, mu, mv, E = (
                self.gather(lookup, nb + f * self.points, Vsub) for f in range(4)
            )
            self._check_density(rho, nb)
            return self._primitives(rho, mu, mv, E)

        rhs = np.stack(self._divergence(self._hood(gathered)))
        return rhs[field, inverse]

    def stencil(self, row: int) -> List[int]:
        point = row % self.points
        nbs = [
            int(self._neighbour_points(np.array([point]), a, b)[0])
            for a in range(3)
            for b in range(3)
        ]
        return sorted({f * self.points + q for f in range(4) for q in nbs} - {row})

    # -- states ----------------------------------------------------------------

    def stack(
        self, rho: np.ndarray, u: np.ndarray, v: np.ndarray, p: np.ndarray
    ) -> np.ndarray:
        """Stacked conservative state from primitive fields (nx×ny or nx×ny×k)."""
        E = p / self._gm1 + 0.5 * rho * (u * u + v * v)
        fields = [rho, rho * u, rho * v, E]
        return np.concatenate([f.reshape(self.points, -1) for f in fields], axis=0)

    def quiescent_state(self) -> np.ndarray:
        """Uniform fluid at rest with ρ = 1 and p = 1, as an n×1 column."""
        ones = np.ones((self.nx, self.ny))
        return self.stack(ones, 0.0 * ones, 0.0 * ones, ones)

    def _envelope(self) -> np.ndarray:
        c = self.cfg
        y = self.y
        return (y - c.b) * np.exp(-((y - c.b) ** 2) / c.h**2) + (y - c.a) * np.exp(
            -((y - c.a) ** 2) / c.h**2
        )

    def initial_state(self) -> np.ndarray:
        """
        Deterministic double shear layer with a seeded instability, as an n×1 column.

        Temperature and mean velocity follow tanh profiles across y = a and y = b, the
        pressure is uniform and the density follows from ρ = γMa² p / T.
        """
        c = self.cfg
        X, Yg = np.meshgrid(self.x, self.y, indexing="ij")
        layers = np.tanh((Yg - c.a) / c.h) - np.tanh((Yg - c.b) / c.h)
        T = 0.5 + 0.25 * layers
        u_mean = 0.5 * c.u_max * (layers - 1.0)
        wave = 10.0 * np.pi * X / c.Lx
        env = self._envelope()[None, :]
        u = u_mean + 2.0 * c.Lx * c.delta / c.h**2 * env * np.sin(wave)
        gauss = np.exp(-((Yg - c.b) ** 2) / c.h**2) + np.exp(-((Yg - c.a) ** 2) / c.h**2)
        v = 10.0 * np.pi * c.delta * gauss * np.cos(wave)
        p = np.ones_like(T)
        rho = self._t_scale * p / T
        return self.stack(rho, u, v, p)

    def perturb(self, base: np.ndarray, s: int, seed: int) -> np.ndarray:
        """
        Ensemble of s columns around a base state with random velocity fluctuations.

        u and v gain Σ_k (10/k²) env(y) {sin, cos}(2kπx/Lx) ξ_k; ρ and E are kept and
        the momenta are rebuilt from the perturbed velocities.
        """
        c = self.cfg
        base = np.asarray(base, dtype=float).reshape(self.n)
        V = np.repeat(base[:, None], s, axis=1)
        if c.d == 0:
            return V
        xi = standard_normal(seed, NS2D_STREAM, c.d, s)
        k = np.arange(1, c.d + 1, dtype=float)
        lam = 10.0 / k**2
        phase = 2.0 * np.pi * np.outer(self.x, k) / c.Lx
        env = self._envelope()
        du_x = (np.sin(phase) * lam) @ xi
        dv_x = (np.cos(phase) * lam) @ xi
        du = (du_x[:, None, :] * env[None, :, None]).reshape(self.points, s)
        dv = (dv_x[:, None, :] * env[None, :, None]).reshape(self.points, s)
        rho = V[: self.points]
        N = self.points
        u = V[N : 2 * N] / rho + du
        v = V[2 * N : 3 * N] / rho + dv
        V[N : 2 * N] = rho * u
        V[2 * N : 3 * N] = rho * v
        return V

    def stable_dt(self) -> float:
        return ns2d_stable_dt(self.cfg)


def ns2d_stable_dt(cfg: NSConfig) -> float:
    """Acoustic estimate of the largest RK4 step for the central convective terms."""
    speed = cfg.u_max + 1.0 / cfg.Ma
    return RK4_IMAG_LIMIT / (speed * (cfg.nx / cfg.Lx + cfg.ny / cfg.Ly))


def ns2d_initial_and_perturb(
    model: NS2DModel,
    s: int,
    seed: int,
    dt: float,
    spin_up: Callable[[np.ndarray, int], np.ndarray],
) -> np.ndarray:
    """
    Spun-up and perturbed NS ensemble.

    Args:
        model: NS model.
        s: Number of samples.
        seed: Run seed.
        dt: Spin-up step.
        spin_up: Advances a single-column state by a given number of FOM steps.

    Returns:
        Matrix n×s.
    """
    steps = int(round(model.cfg.t_spinup / dt))
    base = model.initial_state()
    if steps > 0:
        logger.info("spinning up NS base flow: %d steps to t=%.3f", steps, steps * dt)
        base = spin_up(base, steps)
    return model.perturb(base, s, seed)
