"""Tests for the experiment driver, metric files and the scaling benchmark."""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from tdb_sparse.core import dbo_rhs_decompressed, init_from_samples, reduced_linear_matrix
from tdb_sparse.driver import (
    METRIC_HEADER,
    emit_metrics,
    ensemble_checksum,
    output_steps,
    prepare,
    run,
    scaling_bench,
)
from tdb_sparse.driver.bench import (
    BENCH_HEADER,
    STABLE_FRACTION,
    _time_steps,
    growth_exponent,
    point_config,
)
from tdb_sparse.driver.experiment import fom_steps, git_revision
from tdb_sparse.integrate import DecompressedProvider, SparseProvider, rk4_dbo
from tdb_sparse.models.config import (
    AdaptiveConfig,
    BenchConfig,
    BurgersConfig,
    DiffusionConfig,
    Mode,
    ModelKind,
    NSConfig,
    RunConfig,
)
from tdb_sparse.models.records import MetricRecord
from tdb_sparse.physics import burgers_stable_dt
from tdb_sparse.storage import read_snapshot


def read_rows(path: Path) -> List[Dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def small_compare(tmp_path: Path, **overrides) -> RunConfig:
    settings = dict(
        mode=Mode.COMPARE,
        r=3,
        p=5,
        s=24,
        seed=11,
        dt=1e-3,
        t_end=0.02,
        output_every=5,
        output_dir=tmp_path,
        burgers=BurgersConfig(n=48, d=4),
    )
    settings.update(overrides)
    return RunConfig(**settings)


class TestOutputSteps:
    """Tests for output step selection."""

    def test_includes_final_step(self) -> None:
        """Test the last step is always an output."""
        assert output_steps(10, 4) == [0, 4, 8, 10]
        assert output_steps(10, 5) == [0, 5, 10]
        assert output_steps(3, 10) == [0, 3]

    def test_row_count(self) -> None:
        """Test steps/output_every + 1 outputs for a divisible run."""
        assert len(output_steps(4000, 200)) == 4000 // 200 + 1


class TestEmitMetrics:
    """Tests for the metric CSV."""

    def test_empty_records(self, tmp_path: Path) -> None:
        """Test an empty list yields a header-only file."""
        path = emit_metrics([], tmp_path / "metrics.csv")
        assert path.read_text().splitlines() == [",".join(METRIC_HEADER)]

    def test_one_record_parses_back(self, tmp_path: Path) -> None:
        """Test a single record round-trips through the file exactly."""
        record = MetricRecord(
            t=0.5,
            total_error=1.0 / 3.0,
            singular_values=np.array([2.0 / 3.0, 1e-7 / 7.0]),
            p=4,
            eps=2.5e-5,
            wall_ns=1234,
            selected_rows=[17, 3],
            selected_cols=[0, 9],
        )
        path = emit_metrics([record], tmp_path / "metrics.csv")
        assert len(path.read_text().splitlines()) == 2
        row = read_rows(path)[0]
        assert float(row["t"]) == record.t
        assert float(row["total_error"]) == record.total_error
        assert int(row["p"]) == 4
        assert float(row["eps"]) == record.eps
        assert int(row["wall_ns"]) == 1234
        values = [float(v) for v in row["singular_values"].split()]
        assert values == record.singular_values.tolist()
        assert row["selected_rows"] == "17 3"
        assert row["selected_cols"] == "0 9"

    def test_missing_values_are_empty(self, tmp_path: Path) -> None:
        """Test a full-order record leaves p and eps empty."""
        path = emit_metrics([MetricRecord(t=0.0, total_error=0.0)], tmp_path / "m.csv")
        row = read_rows(path)[0]
        assert row["p"] == "" and row["eps"] == ""


class TestPrepare:
    """Tests for the shared initial ensemble."""

    def test_checksum_reproducible(self, tmp_path: Path, caplog) -> None:
        """Test the same seed gives the same checksum and it is logged."""
        cfg = small_compare(tmp_path)
        with caplog.at_level(logging.INFO, logger="tdb_sparse"):
            first = prepare(cfg)
        again = prepare(cfg)
        other = prepare(small_compare(tmp_path, seed=12))
        assert first.checksum == again.checksum == ensemble_checksum(again.V0)
        assert other.checksum != first.checksum
        assert first.checksum in caplog.text
        assert first.V0.shape == (48, 24)

    def test_ns_spin_up(self, tmp_path: Path) -> None:
        """Test the NS ensemble is spun up with the FOM before perturbation."""
        cfg = RunConfig(
            model=ModelKind.NS2D,
            s=4,
            r=2,
            p=2,
            dt=1e-3,
            output_dir=tmp_path,
            ns2d=NSConfig(nx=8, ny=8, d=2, t_spinup=0.002),
        )
        exp = prepare(cfg)
        base = exp.model.initial_state()
        spun = fom_steps(exp.model, base, 2, 1e-3)
        N = exp.model.points
        np.testing.assert_array_equal(exp.V0[:N, 0], spun[:N, 0])


class TestRun:
    """End-to-end runs at small scale."""

    def test_fom_diffusion(self, tmp_path: Path) -> None:
        """Test a 10-step full-order diffusion run emits snapshots and a manifest."""
        cfg = RunConfig(
            mode=Mode.FOM,
            model=ModelKind.DIFFUSION,
            s=8,
            r=3,
            p=3,
            dt=0.01,
            t_end=0.1,
            output_every=4,
            output_dir=tmp_path,
            diffusion=DiffusionConfig(n=16, d=4),
        )
        result = run(cfg)
        assert result.status == 0
        for k in (0, 4, 8, 10):
            assert (tmp_path / f"fom_{k:06d}.bin").exists()
        V, t = read_snapshot(tmp_path / "fom_000010.bin")
        assert t == pytest.approx(0.1)
        exp = prepare(cfg)
        np.testing.assert_array_equal(V, fom_steps(exp.model, exp.V0, 10, 0.01))
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["checksum"] == result.checksum
        assert manifest["config"]["run"]["mode"] == "fom"
        assert "metrics_FOM.csv" in manifest["files"]
        assert not (tmp_path / "error.csv").exists()

    def test_compare_burgers(self, tmp_path: Path) -> None:
        """Test the comparison writes aligned error columns for every solver."""
        cfg = small_compare(tmp_path, p_sweep=[8], diagnostics=True)
        result = run(cfg)
        assert [r.label for r in result.runs] == ["FOM", "TDB", "STDB", "STDB_p8"]

        rows = read_rows(tmp_path / "error.csv")
        assert len(rows) == 5
        assert [float(r["t"]) for r in rows] == pytest.approx([0.0, 0.005, 0.01, 0.015, 0.02])
        first = rows[0]
        assert float(first["E_tdb"]) == float(first["E_stdb"]) == float(first["E_stdb_p8"])
        assert float(first["gap_tdb_stdb"]) < 1e-14
        for r in rows:
            e_tdb, e_stdb = float(r["E_tdb"]), float(r["E_stdb"])
            assert np.isfinite(e_tdb) and np.isfinite(e_stdb)
            assert float(r["abs_diff"]) == pytest.approx(abs(e_tdb - e_stdb))

        sigma = read_rows(tmp_path / "sigma.csv")
        assert len(sigma) == 4 * 5
        assert {r["solver"] for r in sigma} == {"FOM", "TDB", "STDB", "STDB_p8"}

        points = read_rows(tmp_path / "points.csv")
        assert len(points) == 2 * cfg.steps
        assert all(len(r["cols"].split()) == int(r["p"]) for r in points if r["solver"] == "STDB")

        diagnostics = read_rows(tmp_path / "diagnostics.csv")
        assert len(diagnostics) == 2 * 5
        assert all(float(r["exactness"]) <= 1e-12 for r in diagnostics)

        for name in ("moments.csv", "timing.csv", "Y_final_TDB.bin", "Y_final_STDB.json"):
            assert (tmp_path / name).exists()
        Y, _ = read_snapshot(tmp_path / "Y_final_STDB.bin")
        assert Y.shape == (24, 3)

        metrics = read_rows(tmp_path / "metrics_STDB.csv")
        assert len(metrics) == 5
        assert all(r["p"] == "5" for r in metrics)

    def test_sparse_only_has_no_reference(self, tmp_path: Path) -> None:
        """Test a run without the FOM leaves the total error undefined."""
        result = run(small_compare(tmp_path, mode=Mode.STDB))
        stdb = result.run("STDB")
        assert stdb is not None
        assert all(np.isnan(r.total_error) for r in stdb.records)
        assert result.run("TDB") is None

    def test_adaptive_run_logs_rank(self, tmp_path: Path) -> None:
        """Test an adaptive run records p per step within its bounds."""
        cfg = small_compare(
            tmp_path,
            mode=Mode.STDB,
            p=4,
            adaptive=AdaptiveConfig(eps_l=1e-5, eps_u=1e-4, p_min=2, p_max=10),
        )
        result = run(cfg)
        ranks = [4] + [p for _, p, _, _, _ in result.runs[0].points]
        assert all(2 <= p <= 10 for p in ranks)
        assert all(abs(b - a) <= 1 for a, b in zip(ranks[:-1], ranks[1:]))

    def test_threads_are_bit_identical(self, tmp_path: Path) -> None:
        """Test error and sigma tables do not depend on the thread count."""
        serial = tmp_path / "serial"
        parallel = tmp_path / "parallel"
        run(small_compare(serial, output_dir=serial, threads=1))
        run(small_compare(parallel, output_dir=parallel, threads=3))
        for name in ("error.csv", "sigma.csv", "points.csv", "moments.csv"):
            assert (serial / name).read_bytes() == (parallel / name).read_bytes()

    def test_git_revision_outside_repository(self, tmp_path: Path) -> None:
        """Test the manifest falls back to 'unknown'."""
        assert git_revision(tmp_path) == "unknown"


class TestScalingBench:
    """Tests for the scaling benchmark."""

    def test_single_point(self, tmp_path: Path) -> None:
        """Test one sweep value gives one row."""
        cfg = small_compare(tmp_path, bench=BenchConfig(sweep="n", values=[32], steps=2))
        result = scaling_bench(cfg)
        assert len(result.points) == 1
        assert result.points[0].n == 32
        assert np.isnan(result.exponents["TDB"])
        assert result.path is not None
        assert len(read_rows(result.path)) == 1

    def test_s_sweep(self, tmp_path: Path) -> None:
        """Test an s-sweep without writing."""
        cfg = small_compare(tmp_path, bench=BenchConfig(sweep="s", values=[12, 24], steps=1))
        result = scaling_bench(cfg, write=False)
        assert [pt.s for pt in result.points] == [12, 24]
        assert result.path is None
        assert not (tmp_path / "timing.csv").exists()

    def test_p_sweep_columns(self, tmp_path: Path) -> None:
        """Test every swept p gets its own timing column and exponent."""
        cfg = small_compare(
            tmp_path, p_sweep=[3], bench=BenchConfig(sweep="s", values=[12, 24], steps=1)
        )
        result = scaling_bench(cfg)
        assert result.header == BENCH_HEADER + ["stdb_ms_p3"]
        assert all(list(pt.sweep_ms) == [3] for pt in result.points)
        assert all(len(pt.row()) == len(result.header) for pt in result.points)
        assert set(result.exponents) == {"TDB", "STDB", "STDB_p3"}
        rows = read_rows(tmp_path / "timing.csv")
        assert [int(r["s"]) for r in rows] == [12, 24]
        assert all(float(r["stdb_ms_p3"]) > 0 for r in rows)

    def test_sparse_bootstrap_is_not_timed(self, tmp_path: Path) -> None:
        """Test the first index selection happens before the timed steps."""
        cfg = small_compare(tmp_path)
        exp = prepare(cfg)
        sparse = SparseProvider(exp.model, exp.weights, cfg.p)
        seen = []

        def step(provider, state, dt):
            seen.append(provider.carry is not None)
            report = MagicMock()
            report.wall_ns = 2_000_000
            return state, report

        with patch("tdb_sparse.driver.bench.rk4_dbo", side_effect=step):
            mean_ms = _time_steps(sparse, cfg, exp.V0, 3)
        assert seen == [True, True, True]
        assert mean_ms == pytest.approx(2.0)

    def test_point_dt_capped(self) -> None:
        """Test a large dt is reduced to a fraction of the stability estimate."""
        cfg = RunConfig(dt=1e-3, bench=BenchConfig(sweep="n", values=[810]))
        point = point_config(cfg, 810)
        assert point.burgers.n == 810
        assert point.dt == pytest.approx(STABLE_FRACTION * burgers_stable_dt(point.burgers))

    def test_growth_exponent(self) -> None:
        """Test the log-log slope of a quadratic law."""
        assert growth_exponent([1, 2, 4], [3.0, 12.0, 48.0]) == pytest.approx(2.0)


@pytest.mark.slow
class TestAcceptance:
    """Longer runs at the default Burgers scale."""

    def test_cur_exactness_on_default_burgers(self, tmp_path: Path) -> None:
        """Test sampled rows and columns are exact on every diagnostic step."""
        cfg = RunConfig(
            mode=Mode.STDB,
            dt=5e-5,
            t_end=0.01,
            output_every=50,
            diagnostics=True,
            output_dir=tmp_path,
        )
        run(cfg)
        rows = read_rows(tmp_path / "diagnostics.csv")
        assert len(rows) == 5
        assert all(float(r["exactness"]) <= 1e-12 for r in rows)

    def test_linear_property_over_many_steps(self, tmp_path: Path) -> None:
        """Test dY stays zero along a 1000-step diffusion TDB run."""
        cfg = RunConfig(
            model=ModelKind.DIFFUSION, s=64, r=4, dt=1e-3, diffusion=DiffusionConfig(n=64)
        )
        exp = prepare(cfg)
        state = init_from_samples(exp.V0, cfg.r, exp.weights)
        provider = DecompressedProvider(exp.model, exp.weights)
        for k in range(1000):
            d = dbo_rhs_decompressed(state, provider.assemble(state), exp.weights)
            scale = np.linalg.norm(state.Sigma)
            assert np.max(np.abs(d.dY)) <= 1e-10 * scale
            Lr = reduced_linear_matrix(exp.model, state.U, exp.weights)
            np.testing.assert_allclose(d.dSigma, Lr @ state.Sigma, atol=1e-10 * scale)
            state, _ = rk4_dbo(provider, state, cfg.dt)
            state = state.with_time((k + 1) * cfg.dt)

    def test_p_convergence(self, tmp_path: Path) -> None:
        """Test the S-TDB to TDB gap shrinks with p and p=8 tracks the TDB error."""
        cfg = RunConfig(
            p=8,
            p_sweep=[2, 4],
            dt=5e-5,
            t_end=0.25,
            output_every=1000,
            output_dir=tmp_path,
        )
        run(cfg)
        rows = read_rows(tmp_path / "error.csv")
        final = rows[-1]
        gaps = [float(final[k]) for k in ("gap_tdb_stdb_p2", "gap_tdb_stdb_p4", "gap_tdb_stdb")]
        assert gaps[0] > gaps[1] > gaps[2]
        for r in rows[1:]:
            assert float(r["E_stdb"]) == pytest.approx(float(r["E_tdb"]), rel=0.1)

        sigma = read_rows(tmp_path / "sigma.csv")
        last_t = max(float(r["t"]) for r in sigma)
        at_end = {r["solver"]: r for r in sigma if float(r["t"]) == last_t}
        for i in (1, 2, 3):
            tdb = float(at_end["TDB"][f"sigma_{i}"])
            assert float(at_end["STDB"][f"sigma_{i}"]) == pytest.approx(tdb, rel=0.01)
            assert float(at_end["FOM"][f"sigma_{i}"]) == pytest.approx(tdb, rel=0.05)

    def test_adaptive_rank_follows_buffer_interval(self, tmp_path: Path) -> None:
        """Test p leaves the buffer interval for one step only unless pinned at a bound."""
        adaptive = AdaptiveConfig(eps_l=1e-5, eps_u=1e-4, p_min=2, p_max=16)
        cfg = RunConfig(
            r=5,
            p=8,
            s=64,
            dt=5e-4,
            t_end=0.3,
            output_every=100,
            adaptive=adaptive,
            burgers=BurgersConfig(n=101),
            output_dir=tmp_path,
        )
        result = run(cfg)
        stdb = result.run("STDB")
        assert stdb is not None
        steps = [(p, eps) for _, p, eps, _, _ in stdb.points]
        assert len(steps) == cfg.steps
        assert steps[0][0] == cfg.p
        for (p, eps), (p_next, _) in zip(steps[:-1], steps[1:]):
            assert adaptive.p_min <= p <= adaptive.p_max
            assert eps is not None
            expected = p
            if eps > adaptive.eps_u and p < adaptive.p_max:
                expected = p + 1
            elif eps < adaptive.eps_l and p > adaptive.p_min:
                expected = p - 1
            assert p_next == expected

        rows = read_rows(tmp_path / "error.csv")
        assert float(rows[-1]["t"]) == pytest.approx(cfg.t_end)
        for r in rows:
            assert np.isfinite(float(r["E_stdb"]))
            assert np.isfinite(float(r["gap_tdb_stdb"]))

    def test_ns_gap_shrinks_with_p(self, tmp_path: Path) -> None:
        """Test an NS compare run stays finite and a larger p tracks TDB more closely."""
        cfg = RunConfig(
            model=ModelKind.NS2D,
            r=5,
            p=6,
            p_sweep=[16],
            s=32,
            dt=5e-3,
            t_end=0.1,
            output_every=10,
            ns2d=NSConfig(nx=16, ny=16, d=4, Re=200.0, h=0.1, a=0.3, b=0.7, t_spinup=0.1),
            output_dir=tmp_path,
        )
        run(cfg)
        rows = read_rows(tmp_path / "error.csv")
        assert float(rows[-1]["t"]) == pytest.approx(cfg.t_end)
        for r in rows:
            assert all(np.isfinite(float(value)) for value in r.values())
        final = rows[-1]
        assert float(final["gap_tdb_stdb_p16"]) < float(final["gap_tdb_stdb"])
