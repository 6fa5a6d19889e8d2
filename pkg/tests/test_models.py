"""Unit tests for data models."""

from pathlib import Path

import numpy as np
import pytest

from tdb_sparse.models.config import (
    AdaptiveConfig,
    BurgersConfig,
    Mode,
    ModelKind,
    NSConfig,
    RunConfig,
    section_keys,
)
from tdb_sparse.models.records import MetricRecord, SolverKind
from tdb_sparse.models.state import DBODerivative, DBOState, QuadratureWeights


class TestRunConfig:
    """Tests for RunConfig."""

    def test_default_config(self) -> None:
        """Test default configuration values."""
        config = RunConfig()
        assert config.mode == Mode.COMPARE
        assert config.model == ModelKind.BURGERS
        assert config.r == 5
        assert config.p == 8
        assert config.s == 256
        assert config.sampler == "deim"
        assert config.adaptive is None
        assert config.burgers.n == 405
        assert config.burgers.nu == 0.05

    def test_steps(self) -> None:
        """Test the step count rounds t_end / dt."""
        config = RunConfig(dt=1e-3, t_end=0.1)
        assert config.steps == 100

    def test_p_values(self) -> None:
        """Test the sweep starts with p and skips duplicates of it."""
        config = RunConfig(p=8, p_sweep=[4, 8, 12])
        assert config.p_values == [8, 4, 12]

    def test_state_dimension(self) -> None:
        """Test n follows the selected model."""
        assert RunConfig(burgers=BurgersConfig(n=101)).n == 101
        ns = RunConfig(model=ModelKind.NS2D, ns2d=NSConfig(nx=16, ny=8))
        assert ns.n == 4 * 16 * 8

    def test_serialization(self) -> None:
        """Test config serialization to nested dictionary."""
        config = RunConfig(mode=Mode.STDB, output_dir=Path("out"), p_sweep=[3])
        data = config.to_dict()
        assert data["run"]["mode"] == "stdb"
        assert data["run"]["model"] == "burgers"
        assert data["run"]["output_dir"] == "out"
        assert data["run"]["p_sweep"] == [3]
        assert data["burgers"]["n"] == 405
        assert "adaptive" not in data

    def test_deserialization(self) -> None:
        """Test config creation from nested dictionary."""
        data = {
            "run": {"mode": "tdb", "model": "diffusion", "r": 3, "output_dir": "x"},
            "diffusion": {"n": 64},
            "adaptive": {"eps_l": 1e-6, "eps_u": 1e-5, "p_min": 2, "p_max": 10},
        }
        config = RunConfig.from_dict(data)
        assert config.mode == Mode.TDB
        assert config.model == ModelKind.DIFFUSION
        assert config.r == 3
        assert config.output_dir == Path("x")
        assert config.diffusion.n == 64
        assert config.adaptive == AdaptiveConfig(eps_l=1e-6, eps_u=1e-5, p_min=2, p_max=10)

    def test_dictionary_round_trip(self) -> None:
        """Test to_dict and from_dict agree."""
        config = RunConfig(adaptive=AdaptiveConfig(), seed=9)
        assert RunConfig.from_dict(config.to_dict()) == config

    def test_section_keys(self) -> None:
        """Test allowed keys per section."""
        assert "output_every" in section_keys("run")
        assert "eps_u" in section_keys("adaptive")
        assert "Re" in section_keys("ns2d")


class TestQuadratureWeights:
    """Tests for QuadratureWeights."""

    def test_monte_carlo(self) -> None:
        """Test equal sample masses."""
        weights = QuadratureWeights.monte_carlo(np.full(5, 0.2), 4)
        assert weights.n == 5
        assert weights.s == 4
        np.testing.assert_allclose(weights.wxi, 0.25)

    def test_rejects_non_positive(self) -> None:
        """Test zero weights are rejected."""
        with pytest.raises(ValueError, match="strictly positive"):
            QuadratureWeights(wx=np.array([1.0, 0.0]), wxi=np.array([1.0]))

    def test_rejects_unnormalized_probability(self) -> None:
        """Test probability weights must sum to one."""
        with pytest.raises(ValueError, match="sum to"):
            QuadratureWeights(wx=np.ones(2), wxi=np.array([0.5, 0.6]))


class TestDBOState:
    """Tests for the DBO triplet containers."""

    @pytest.fixture
    def state(self) -> DBOState:
        U = np.eye(4)[:, :2]
        Y = np.eye(3)[:, :2]
        return DBOState(U=U, Sigma=np.diag([2.0, 1.0]), Y=Y, t=0.5)

    def test_reconstruct_rows_columns(self, state: DBOState) -> None:
        """Test row and column access agree with the dense product."""
        dense = state.reconstruct()
        np.testing.assert_array_equal(state.rows(np.array([1, 3])), dense[[1, 3]])
        np.testing.assert_array_equal(state.columns(np.array([2, 0])), dense[:, [2, 0]])
        assert state.rank == 2

    def test_advance(self, state: DBOState) -> None:
        """Test an Euler update of every factor and the time."""
        d = DBODerivative.zeros_like(state)
        d = DBODerivative(dU=d.dU, dSigma=np.eye(2), dY=d.dY)
        nxt = state.advance(d, 0.1)
        np.testing.assert_allclose(nxt.Sigma, np.diag([2.1, 1.1]))
        assert nxt.t == pytest.approx(0.6)
        assert state.t == 0.5

    def test_with_time(self, state: DBOState) -> None:
        """Test the time is replaced without touching the factors."""
        moved = state.with_time(2.0)
        assert moved.t == 2.0
        assert moved.U is state.U

    def test_to_dict(self, state: DBOState) -> None:
        """Test the shape summary."""
        assert state.to_dict() == {"n": 4, "s": 3, "r": 2, "t": 0.5}

    def test_combine(self, state: DBOState) -> None:
        """Test a weighted sum of derivatives."""
        one = DBODerivative(
            dU=np.ones_like(state.U), dSigma=np.ones((2, 2)), dY=np.ones_like(state.Y)
        )
        total = one.combine([one, one], [1.0, 2.0, 3.0])
        np.testing.assert_allclose(total.dSigma, 6.0)
        np.testing.assert_allclose(total.dU, 6.0)


class TestMetricRecord:
    """Tests for MetricRecord."""

    def test_defaults(self) -> None:
        """Test a record without reference has NaN error and no indices."""
        record = MetricRecord(t=0.0)
        assert np.isnan(record.total_error)
        assert record.selected_rows == []
        assert record.p is None

    def test_solver_kind_values(self) -> None:
        """Test solver labels used in output files."""
        assert [k.value for k in SolverKind] == ["FOM", "TDB", "STDB"]
