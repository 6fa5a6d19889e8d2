"""Unit tests for the physics models."""

from typing import Tuple

import numpy as np
import pytest

from tdb_sparse.integrate import rk4_fom
from tdb_sparse.models.config import BurgersConfig, DiffusionConfig, NSConfig
from tdb_sparse.physics import (
    BurgersModel,
    DiffusionModel,
    ModelError,
    NS2DModel,
    burgers_stable_dt,
    column_chunks,
    diffusion_stable_dt,
    kl_modes,
    ns2d_initial_and_perturb,
    ns2d_stable_dt,
)
from tdb_sparse.physics.random_inputs import standard_normal


def rows_match_columns(model, V: np.ndarray, rows: np.ndarray, t: float) -> None:
    full = model.rhs_columns(V, t)
    closure = model.closure(rows)
    sub = model.rhs_rows(rows, V[closure], t)
    np.testing.assert_array_equal(sub, full[rows])


class TestColumnChunks:
    """Tests for the column split used by the thread pool."""

    def test_covers_all_columns(self) -> None:
        """Test chunks are contiguous and cover 0..k-1."""
        chunks = column_chunks(10, 3)
        covered = [i for c in chunks for i in range(10)[c]]
        assert covered == list(range(10))

    def test_more_threads_than_columns(self) -> None:
        """Test the split never produces empty chunks."""
        assert len(column_chunks(2, 8)) == 2


class TestBurgers:
    """Tests for the stochastic Burgers model."""

    @pytest.fixture
    def model(self) -> BurgersModel:
        return BurgersModel(BurgersConfig(n=41, d=3), dt=1e-4, s=6, seed=5)

    def test_rows_match_columns(self, model) -> None:
        """Test row evaluation reproduces the same rows of the full RHS bit for bit."""
        V = model.initial_ensemble()
        rows_match_columns(model, V, np.array([0, 7, 20, 40]), 0.3)

    def test_closure_orders_rows_first(self, model) -> None:
        """Test closure is [rows; sorted adjacency]."""
        closure = model.closure(np.array([10, 3]))
        assert closure.tolist() == [10, 3, 2, 4, 9, 11]

    def test_missing_adjacency_rows(self, model) -> None:
        """Test a state block without the adjacency rows is rejected."""
        V = model.initial_ensemble()
        with pytest.raises(ModelError, match="missing adjacency rows"):
            model.rhs_rows(np.array([5]), V[[5]], 0.0)

    def test_thread_count_is_bit_identical(self) -> None:
        """Test column-parallel evaluation gives identical bits."""
        cfg = BurgersConfig(n=41, d=3)
        serial = BurgersModel(cfg, dt=1e-4, s=9, seed=1, threads=1)
        parallel = BurgersModel(cfg, dt=1e-4, s=9, seed=1, threads=4)
        V = serial.initial_ensemble()
        np.testing.assert_array_equal(
            serial.rhs_columns(V, 0.2), parallel.rhs_columns(V, 0.2)
        )

    def test_sample_indices_select_random_boundary(self, model) -> None:
        """Test a column evaluated alone uses its own boundary sample."""
        V = model.initial_ensemble()
        full = model.rhs_columns(V, 0.25)
        single = model.rhs_columns(V[:, [4]], 0.25, samples=np.array([4]))
        np.testing.assert_array_equal(single[:, 0], full[:, 4])

    def test_initial_ensemble_reproducible(self) -> None:
        """Test the same seed yields the same ensemble and another seed does not."""
        cfg = BurgersConfig(n=41, d=3)
        a = BurgersModel(cfg, dt=1e-4, s=5, seed=3).initial_ensemble()
        b = BurgersModel(cfg, dt=1e-4, s=5, seed=3).initial_ensemble()
        c = BurgersModel(cfg, dt=1e-4, s=5, seed=4).initial_ensemble()
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_kl_modes_orthonormal(self) -> None:
        """Test KL modes are orthonormal under the grid weights."""
        lam, psi, lam_all = kl_modes(41, 0.1, 4)
        dx = 1.0 / 40
        np.testing.assert_allclose(dx * psi.T @ psi, np.eye(4), atol=1e-12)
        assert np.all(np.diff(lam) <= 0)
        assert lam_all.shape == (41,)

    def test_stable_dt(self) -> None:
        """Test the default grid needs a small step and a coarse one allows 2.5e-4."""
        assert burgers_stable_dt(BurgersConfig(n=405)) < 2.5e-4
        assert burgers_stable_dt(BurgersConfig(n=48)) > 2.5e-4

    @staticmethod
    def interior_error(n: int, advection: bool) -> float:
        cfg = BurgersConfig(n=n, d=1, nu=0.05, advection=advection)
        model = BurgersModel(cfg, dt=1e-4, s=1, seed=0)
        k = 2.0 * np.pi
        u = np.sin(k * model.x)
        exact = -cfg.nu * k * k * u
        if advection:
            exact -= u * k * np.cos(k * model.x)
        rhs = model.rhs_columns(u[:, None], 0.0)[:, 0]
        err = rhs[1:-1] - exact[1:-1]
        return float(np.sqrt(np.mean(err * err)))

    def test_laplacian_of_sine(self) -> None:
        """Test the diffusion term matches -4π²ν sin(2πx) on interior rows."""
        assert self.interior_error(41, advection=False) <= 1e-2

    @pytest.mark.parametrize("advection", [False, True])
    def test_second_order_convergence(self, advection: bool) -> None:
        """Test halving dx divides the interior error by four."""
        ratio = self.interior_error(41, advection) / self.interior_error(81, advection)
        assert ratio == pytest.approx(4.0, rel=0.05)

    def test_energy_does_not_grow(self) -> None:
        """Test Σ wx v² never increases with homogeneous boundaries."""
        cfg = BurgersConfig(n=101, d=3, left_amplitude=0.0, sigma_t=0.0)
        dt = 5e-4
        model = BurgersModel(cfg, dt=dt, s=4, seed=2)
        V = model.initial_ensemble()
        energy = float(model.wx @ (V * V).sum(axis=1))
        for k in range(400):
            V = rk4_fom(model, V, k * dt, dt)
            current = float(model.wx @ (V * V).sum(axis=1))
            assert current <= energy * (1.0 + 1e-14)
            energy = current


class TestDiffusion:
    """Tests for the periodic diffusion model."""

    @pytest.fixture
    def model(self) -> DiffusionModel:
        return DiffusionModel(DiffusionConfig(nu=0.01, n=16, d=4))

    def test_matches_dense_operator(self, model) -> None:
        """Test the stencil equals the assembled operator."""
        V = model.initial_ensemble(5, seed=2)
        np.testing.assert_allclose(model.rhs_columns(V, 0.0), model.dense_operator() @ V)

    def test_rows_wrap_around(self, model) -> None:
        """Test periodic rows at both ends."""
        V = model.initial_ensemble(4, seed=2)
        rows_match_columns(model, V, np.array([0, 15, 8]), 0.0)
        assert model.stencil(0) == [1, 15]

    def test_constants_are_steady(self, model) -> None:
        """Test a constant state has zero RHS."""
        assert not np.any(model.rhs_columns(np.ones((16, 2)), 0.0))

    def test_ensemble_rank(self, model) -> None:
        """Test the Fourier ensemble has rank d+1."""
        V = model.initial_ensemble(20, seed=1)
        assert np.linalg.matrix_rank(V) == 5

    def test_stable_dt(self) -> None:
        """Test the estimate scales with dx²/ν."""
        a = diffusion_stable_dt(DiffusionConfig(nu=0.01, n=64))
        b = diffusion_stable_dt(DiffusionConfig(nu=0.01, n=128))
        assert a == pytest.approx(4.0 * b)


class TestNS2D:
    """Tests for the compressible Navier-Stokes model."""

    @pytest.fixture
    def cfg(self) -> NSConfig:
        return NSConfig(nx=8, ny=6, d=3, Re=100.0, h=0.1, t_spinup=0.0)

    @pytest.fixture
    def model(self, cfg) -> NS2DModel:
        return NS2DModel(cfg)

    def perturbed(self, model: NS2DModel, s: int = 3) -> np.ndarray:
        return model.perturb(model.initial_state(), s, seed=7)

    def test_quiescent_state_is_steady(self, model) -> None:
        """Test uniform fluid at rest has RHS below 1e-12."""
        assert np.max(np.abs(model.rhs_columns(model.quiescent_state(), 0.0))) <= 1e-12

    def test_rows_match_columns(self, model) -> None:
        """Test rows of every field equal the full evaluation bit for bit."""
        V = self.perturbed(model)
        N = model.points
        rows = np.array([0, 5, N + 13, 2 * N + N - 1, 3 * N + 20, 3 * N])
        rows_match_columns(model, V, rows, 0.0)

    def test_stencil_size(self, model) -> None:
        """Test a row depends on all fields of its 3×3 neighbourhood."""
        assert len(model.stencil(9)) == 4 * 9 - 1

    def test_conservation(self, model) -> None:
        """Test grid sums of ρ, ρu, ρv and E have zero time derivative."""
        V = self.perturbed(model)
        rhs = model.rhs_columns(V, 0.0).reshape(4, model.points, -1)
        totals = np.abs(rhs).sum(axis=1).max()
        np.testing.assert_allclose(rhs.sum(axis=1), 0.0, atol=1e-12 * max(totals, 1.0))

    def test_non_positive_density_is_located(self, model) -> None:
        """Test a negative density reports its grid index."""
        V = model.quiescent_state().copy()
        V[2 * model.ny + 3, 0] = -1.0
        with pytest.raises(ModelError, match=r"ix=2, iy=3"):
            model.rhs_columns(V, 0.0)

    def test_perturb_keeps_density_and_energy(self, model) -> None:
        """Test the random perturbation only changes the momenta."""
        base = model.initial_state()
        V = model.perturb(base, 4, seed=1)
        N = model.points
        np.testing.assert_array_equal(V[:N], np.repeat(base[:N], 4, axis=1))
        np.testing.assert_array_equal(V[3 * N :], np.repeat(base[3 * N :], 4, axis=1))
        assert not np.allclose(V[N : 2 * N, 0], V[N : 2 * N, 1])

    def test_initial_pressure_uniform(self, model) -> None:
        """Test the initial state has p = 1 everywhere."""
        p, _ = model.pressure_temperature(model.initial_state())
        np.testing.assert_allclose(p, 1.0, atol=1e-12)

    def test_spin_up_is_injected(self) -> None:
        """Test the spin-up callable receives the base state and step count."""
        model = NS2DModel(NSConfig(nx=8, ny=6, d=2, t_spinup=0.01))
        calls = []

        def spin_up(base: np.ndarray, steps: int) -> np.ndarray:
            calls.append(steps)
            return base

        V = ns2d_initial_and_perturb(model, 3, seed=1, dt=0.001, spin_up=spin_up)
        assert calls == [10]
        assert V.shape == (model.n, 3)

    def test_stable_dt(self) -> None:
        """Test the acoustic estimate shrinks on a finer grid."""
        assert ns2d_stable_dt(NSConfig(nx=128, ny=128)) < ns2d_stable_dt(NSConfig(nx=64, ny=64))

    @staticmethod
    def shear_rhs(ny: int) -> Tuple[NS2DModel, np.ndarray]:
        model = NS2DModel(NSConfig(nx=4, ny=ny, d=0, Re=100.0))
        shape = (model.nx, model.ny)
        u = np.broadcast_to(np.sin(2.0 * np.pi * model.y / model.cfg.Ly), shape)
        V = model.stack(np.ones(shape), u, np.zeros(shape), np.ones(shape))
        return model, model.rhs_columns(V, 0.0).reshape(4, model.nx, model.ny)

    @classmethod
    def shear_error(cls, ny: int) -> float:
        model, rhs = cls.shear_rhs(ny)
        k = 2.0 * np.pi / model.cfg.Ly
        exact = -k * k * np.sin(k * model.y) / model.cfg.Re
        err = rhs[1] - exact[None, :]
        return float(np.sqrt(np.mean(err * err)))

    def test_parallel_shear_reduces_to_viscous_diffusion(self) -> None:
        """Test a ρ = 1 shear u(y) only drives x-momentum, by (1/Re) u_yy."""
        model, rhs = self.shear_rhs(16)
        assert np.max(np.abs(rhs[0])) <= 1e-12
        assert np.max(np.abs(rhs[2])) <= 1e-12
        assert self.shear_error(16) <= 0.02 * (2.0 * np.pi) ** 2 / model.cfg.Re

    def test_shear_second_order_convergence(self) -> None:
        """Test halving dy divides the x-momentum error by four."""
        assert self.shear_error(16) / self.shear_error(32) == pytest.approx(4.0, rel=0.02)


class TestRandomInputs:
    """Tests for the seeded random streams."""

    def test_streams_independent_and_reproducible(self) -> None:
        """Test streams differ and repeat."""
        a = standard_normal(1, 0, 3, 4)
        np.testing.assert_array_equal(a, standard_normal(1, 0, 3, 4))
        assert not np.array_equal(a, standard_normal(1, 1, 3, 4))
