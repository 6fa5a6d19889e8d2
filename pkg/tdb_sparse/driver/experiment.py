"""Experiment orchestration: build the model, run the solvers and write every output file."""

import hashlib
import logging
import platform
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from tdb_sparse import __version__
from tdb_sparse.core import (
    ensemble_moments,
    ensemble_singular_values,
    init_from_samples,
    low_rank_distance,
    mean_and_variance,
    singular_values,
    total_error,
)
from tdb_sparse.driver.metrics import emit_metrics
from tdb_sparse.integrate import DecompressedProvider, SparseProvider, rk4_dbo, rk4_fom
from tdb_sparse.models.config import Mode, ModelKind, RunConfig
from tdb_sparse.models.records import MetricRecord, SolverKind
from tdb_sparse.models.state import DBOState, QuadratureWeights
from tdb_sparse.physics import (
    BurgersModel,
    DiffusionModel,
    Model,
    NS2DModel,
    ns2d_initial_and_perturb,
)
from tdb_sparse.sampling import Sampler
from tdb_sparse.sparse import CURDiagnostics, RankController, cur_diagnostics, sparse_rhs
from tdb_sparse.storage import OutputWriter, read_snapshot

logger = logging.getLogger(__name__)


@dataclass
class SolverRun:
    """
    Everything one solver produced.

    Attributes:
        label: Run label (FOM, TDB, STDB or STDB_p<k> for extra sweep ranks).
        kind: Solver kind.
        p: Initial interpolation rank (sparse runs only).
        records: One metric record per output step.
        states: DBO state at each output step (reduced runs only).
        moments: (t, mean, variance) per output step.
        points: (t, p, eps, rows, cols) per accepted sparse step.
        diagnostics: (t, CURDiagnostics) per output step when enabled.
        wall_s: Wall-clock seconds spent stepping.
    """

    label: str
    kind: SolverKind
    p: Optional[int] = None
    records: List[MetricRecord] = field(default_factory=list)
    states: Dict[int, DBOState] = field(default_factory=dict)
    moments: List[Tuple[float, np.ndarray, np.ndarray]] = field(default_factory=list)
    points: List[Tuple[float, int, Optional[float], List[int], List[int]]] = field(
        default_factory=list
    )
    diagnostics: List[Tuple[float, CURDiagnostics]] = field(default_factory=list)
    wall_s: float = 0.0


@dataclass
class RunResult:
    """Outcome of a run: solver results, written files and the ensemble checksum."""

    runs: List[SolverRun]
    files: List[Path]
    checksum: str
    status: int = 0

    def run(self, label: str) -> Optional[SolverRun]:
        """Solver run by label, if present."""
        for solver_run in self.runs:
            if solver_run.label == label:
                return solver_run
        return None


@dataclass
class Experiment:
    """The model, weights and shared initial ensemble of one run."""

    cfg: RunConfig
    model: Model
    weights: QuadratureWeights
    V0: np.ndarray
    checksum: str

    @property
    def output_steps(self) -> List[int]:
        return output_steps(self.cfg.steps, self.cfg.output_every)


def output_steps(steps: int, every: int) -> List[int]:
    """Step indices that produce output: 0, every, 2·every, ... and always the last step."""
    marks = list(range(0, steps + 1, every))
    if marks[-1] != steps:
        marks.append(steps)
    return marks


def ensemble_checksum(V: np.ndarray) -> str:
    """Short SHA-256 digest of an ensemble's float64 bytes."""
    data = np.ascontiguousarray(V, dtype="<f8").tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


def build_model(cfg: RunConfig) -> Model:
    """Physics model selected by the configuration."""
    if cfg.model == ModelKind.BURGERS:
        return BurgersModel(cfg.burgers, cfg.dt, cfg.s, cfg.seed, threads=cfg.threads)
    if cfg.model == ModelKind.DIFFUSION:
        return DiffusionModel(cfg.diffusion, threads=cfg.threads)
    return NS2DModel(cfg.ns2d, threads=cfg.threads)


def fom_steps(model: Model, V: np.ndarray, steps: int, dt: float, t0: float = 0.0) -> np.ndarray:
    """Advance a full-order ensemble by a number of RK4 steps."""
    for k in range(steps):
        V = rk4_fom(model, V, t0 + k * dt, dt)
    return V


def initial_ensemble(cfg: RunConfig, model: Model) -> np.ndarray:
    """Initial sample matrix n×s of the selected model."""
    if isinstance(model, BurgersModel):
        return model.initial_ensemble()
    if isinstance(model, DiffusionModel):
        return model.initial_ensemble(cfg.s, cfg.seed)
    if isinstance(model, NS2DModel):
        return ns2d_initial_and_perturb(
            model,
            cfg.s,
            cfg.seed,
            cfg.dt,
            spin_up=lambda base, steps: fom_steps(model, base, steps, cfg.dt),
        )
    raise TypeError(f"unsupported model {type(model).__name__}")


def prepare(cfg: RunConfig) -> Experiment:
    """Build the model, the weights and the shared initial ensemble."""
    model = build_model(cfg)
    V0 = initial_ensemble(cfg, model)
    weights = QuadratureWeights.monte_carlo(model.wx, cfg.s)
    checksum = ensemble_checksum(V0)
    logger.info(
        "initial ensemble %s: n=%d s=%d checksum=%s", cfg.model.value, *V0.shape, checksum
    )
    return Experiment(cfg=cfg, model=model, weights=weights, V0=V0, checksum=checksum)


def _snapshot_name(k: int) -> str:
    return f"fom_{k:06d}"


def run_fom(exp: Experiment, writer: OutputWriter) -> SolverRun:
    """Full-order ensemble; writes a snapshot at every output step."""
    cfg = exp.cfg
    result = SolverRun(label=SolverKind.FOM.value, kind=SolverKind.FOM)
    marks = set(exp.output_steps)
    V = exp.V0.copy()
    wall_ns = 0
    for k in range(cfg.steps + 1):
        t = k * cfg.dt
        if k in marks:
            writer.write_snapshot(_snapshot_name(k), V, t)
            mean, var = ensemble_moments(V, exp.weights)
            result.moments.append((t, mean, var))
            result.records.append(
                MetricRecord(
                    t=t,
                    total_error=0.0,
                    singular_values=ensemble_singular_values(V, exp.weights, cfg.r),
                    wall_ns=wall_ns,
                )
            )
        if k == cfg.steps:
            break
        start = time.perf_counter_ns()
        V = rk4_fom(exp.model, V, t, cfg.dt)
        wall_ns = time.perf_counter_ns() - start
        result.wall_s += wall_ns * 1e-9
    logger.info("FOM finished: %d steps in %.2f s", cfg.steps, result.wall_s)
    return result


def _reference(writer: OutputWriter, k: int, available: bool) -> Optional[np.ndarray]:
    if not available:
        return None
    V, _ = read_snapshot(writer.output_dir / f"{_snapshot_name(k)}.bin")
    return V


def _reduced_record(
    exp: Experiment,
    state: DBOState,
    reference: Optional[np.ndarray],
    wall_ns: int,
    p: Optional[int] = None,
    eps: Optional[float] = None,
    rows: Sequence[int] = (),
    cols: Sequence[int] = (),
) -> MetricRecord:
    error = float("nan")
    if reference is not None:
        error = total_error(state, reference, exp.weights, block_rows=exp.cfg.block_rows)
    return MetricRecord(
        t=state.t,
        total_error=error,
        singular_values=singular_values(state),
        p=p,
        eps=eps,
        wall_ns=wall_ns,
        selected_rows=list(rows),
        selected_cols=list(cols),
    )


def run_tdb(exp: Experiment, writer: OutputWriter, with_reference: bool) -> SolverRun:
    """Decompressed DBO solver."""
    cfg = exp.cfg
    result = SolverRun(label=SolverKind.TDB.value, kind=SolverKind.TDB)
    marks = set(exp.output_steps)
    provider = DecompressedProvider(exp.model, exp.weights)
    state = init_from_samples(exp.V0, cfg.r, exp.weights)
    wall_ns = 0
    for k in range(cfg.steps + 1):
        if k in marks:
            reference = _reference(writer, k, with_reference)
            result.records.append(_reduced_record(exp, state, reference, wall_ns))
            result.states[k] = state
            result.moments.append((state.t, *mean_and_variance(state, exp.weights)))
        if k == cfg.steps:
            break
        state, report = rk4_dbo(provider, state, cfg.dt)
        state = state.with_time((k + 1) * cfg.dt)
        wall_ns = report.wall_ns
        result.wall_s += wall_ns * 1e-9
    logger.info("TDB finished: %d steps in %.2f s", cfg.steps, result.wall_s)
    return result


def _controller(cfg: RunConfig, p: int) -> Optional[RankController]:
    if cfg.adaptive is None:
        return None
    a = cfg.adaptive
    return RankController(p=p, eps_l=a.eps_l, eps_u=a.eps_u, p_min=a.p_min, p_max=a.p_max)


def _diagnose(exp: Experiment, provider: SparseProvider, state: DBOState) -> CURDiagnostics:
    """CUR diagnostics of a fresh interpolation at `state` against the materialized F."""
    assert provider.carry is not None
    _, lowrank = sparse_rhs(
        state, exp.model, provider.carry, provider.p, provider.sampler, exp.weights
    )
    F = exp.model.rhs_columns(state.reconstruct(), state.t)
    return cur_diagnostics(lowrank, F, exp.weights)


def run_stdb(exp: Experiment, writer: OutputWriter, p: int, with_reference: bool) -> SolverRun:
    """Sparse DBO solver at initial interpolation rank p."""
    cfg = exp.cfg
    label = SolverKind.STDB.value if p == cfg.p else f"{SolverKind.STDB.value}_p{p}"
    result = SolverRun(label=label, kind=SolverKind.STDB, p=p)
    marks = set(exp.output_steps)
    provider = SparseProvider(
        exp.model,
        exp.weights,
        p,
        sampler=Sampler(cfg.sampler.lower()),
        stage_reuse=cfg.stage_reuse,
        controller=_controller(cfg, p),
    )
    state = init_from_samples(exp.V0, cfg.r, exp.weights)
    provider.bootstrap(state)
    wall_ns = 0
    for k in range(cfg.steps + 1):
        if k in marks:
            last = provider.last
            reference = _reference(writer, k, with_reference)
            result.records.append(
                _reduced_record(
                    exp,
                    state,
                    reference,
                    wall_ns,
                    p=provider.p,
                    eps=provider.eps,
                    rows=[] if last is None else last.prow.tolist(),
                    cols=[] if last is None else last.q.tolist(),
                )
            )
            result.states[k] = state
            result.moments.append((state.t, *mean_and_variance(state, exp.weights)))
            if cfg.diagnostics:
                result.diagnostics.append((state.t, _diagnose(exp, provider, state)))
        if k == cfg.steps:
            break
        state, report = rk4_dbo(provider, state, cfg.dt)
        state = state.with_time((k + 1) * cfg.dt)
        wall_ns = report.wall_ns
        result.wall_s += wall_ns * 1e-9
        last = provider.last
        result.points.append(
            (
                state.t,
                report.p if report.p is not None else provider.p,
                report.eps,
                [] if last is None else last.prow.tolist(),
                [] if last is None else last.q.tolist(),
            )
        )
    logger.info("%s finished: %d steps in %.2f s", label, cfg.steps, result.wall_s)
    return result


def git_revision(cwd: Optional[Path] = None) -> str:
    """Current git commit hash, or "unknown" outside a repository."""
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=cwd,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _sigma_cells(values: np.ndarray, r: int) -> List[Optional[float]]:
    cells: List[Optional[float]] = [float(v) for v in values[:r]]
    return cells + [None] * (r - len(cells))


def _join(indices: Sequence[int]) -> str:
    return " ".join(str(int(i)) for i in indices)


def write_outputs(exp: Experiment, writer: OutputWriter, runs: List[SolverRun]) -> List[Path]:
    """Write the CSV tables, final snapshots and metric files of a finished run."""
    cfg = exp.cfg
    files: List[Path] = []
    by_label = {r.label: r for r in runs}
    marks = exp.output_steps
    times = [k * cfg.dt for k in marks]

    for solver_run in runs:
        path = writer.output_dir / f"metrics_{solver_run.label}.csv"
        files.append(emit_metrics(solver_run.records, path))

    tdb = by_label.get(SolverKind.TDB.value)
    sparse_runs = [r for r in runs if r.kind == SolverKind.STDB]
    if tdb is not None or sparse_runs:
        header = ["t", "E_tdb", "E_stdb", "abs_diff", "gap_tdb_stdb"]
        for extra in sparse_runs[1:]:
            header += [f"E_stdb_p{extra.p}", f"gap_tdb_stdb_p{extra.p}"]
        rows: List[List[Any]] = []
        for i, (k, t) in enumerate(zip(marks, times)):
            e_tdb = tdb.records[i].total_error if tdb is not None else None
            cells: List[Any] = [t, e_tdb]
            for j, sparse_run in enumerate(sparse_runs):
                e_stdb = sparse_run.records[i].total_error
                gap = None
                if tdb is not None:
                    gap = low_rank_distance(sparse_run.states[k], tdb.states[k], exp.weights)
                if j == 0:
                    diff = None if e_tdb is None else abs(e_tdb - e_stdb)
                    cells += [e_stdb, diff, gap]
                else:
                    cells += [e_stdb, gap]
            if not sparse_runs:
                cells += [None, None, None]
            rows.append(cells)
        files.append(writer.write_csv("error.csv", header, rows))

    sigma_rows = []
    for solver_run in runs:
        for record in solver_run.records:
            sigma_rows.append(
                [record.t, solver_run.label] + _sigma_cells(record.singular_values, cfg.r)
            )
    files.append(
        writer.write_csv(
            "sigma.csv", ["t", "solver"] + [f"sigma_{i + 1}" for i in range(cfg.r)], sigma_rows
        )
    )

    moment_rows = []
    for solver_run in runs:
        for t, mean, var in solver_run.moments:
            for row, (m, v) in enumerate(zip(mean, var)):
                moment_rows.append([t, solver_run.label, row, float(m), float(v)])
    files.append(
        writer.write_csv("moments.csv", ["t", "solver", "row", "mean", "variance"], moment_rows)
    )

    if sparse_runs:
        point_rows = [
            [t, r.label, p, eps, _join(rows_), _join(cols)]
            for r in sparse_runs
            for t, p, eps, rows_, cols in r.points
        ]
        files.append(
            writer.write_csv("points.csv", ["t", "solver", "p", "eps", "rows", "cols"], point_rows)
        )

    if cfg.diagnostics and sparse_runs:
        diag_rows = []
        for r in sparse_runs:
            for t, d in r.diagnostics:
                keep = r.p if r.p is not None else cfg.p
                diag_rows.append(
                    [
                        t,
                        r.label,
                        d.err2,
                        d.bound,
                        d.sigma_next,
                        d.eta_p,
                        d.eta_q,
                        d.holds,
                        d.exactness,
                        d.oblique_residual,
                        " ".join(f"{v:.17g}" for v in d.sigma_f[: keep + 1]),
                        " ".join(f"{v:.17g}" for v in d.sigma_fhat),
                    ]
                )
        header = [
            "t",
            "solver",
            "err2",
            "bound",
            "sigma_next",
            "eta_p",
            "eta_q",
            "holds",
            "exactness",
            "oblique_residual",
            "sigma_f",
            "sigma_fhat",
        ]
        files.append(writer.write_csv("diagnostics.csv", header, diag_rows))

    timing_rows = [
        [r.label, cfg.steps, r.wall_s, 1e3 * r.wall_s / max(1, cfg.steps)] for r in runs
    ]
    files.append(
        writer.write_csv("timing.csv", ["solver", "steps", "total_s", "mean_step_ms"], timing_rows)
    )

    for r in runs:
        if r.states:
            final = r.states[marks[-1]]
            files.append(writer.write_snapshot(f"Y_final_{r.label}", final.Y, final.t))
    return files


def run(cfg: RunConfig) -> RunResult:
    """
    Execute the configured solvers and write all output files.

    Solvers run one after another on the same initial ensemble. The full-order run
    writes a snapshot at every output step, which the reduced runs read back to
    measure their total error.

    Args:
        cfg: Validated run configuration.

    Returns:
        RunResult with the solver runs and written files.

    Raises:
        TDBError: On any solver failure (blow-up, singular Σ, selection failure).
    """
    writer = OutputWriter(cfg.output_dir)
    exp = prepare(cfg)
    runs: List[SolverRun] = []
    has_fom = cfg.mode in (Mode.FOM, Mode.COMPARE)
    if has_fom:
        runs.append(run_fom(exp, writer))
    if cfg.mode in (Mode.TDB, Mode.COMPARE):
        runs.append(run_tdb(exp, writer, with_reference=has_fom))
    if cfg.mode in (Mode.STDB, Mode.COMPARE):
        for p in cfg.p_values:
            runs.append(run_stdb(exp, writer, p, with_reference=has_fom))

    files = write_outputs(exp, writer, runs)
    manifest = {
        "version": __version__,
        "git": git_revision(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "checksum": exp.checksum,
        "config": cfg.to_dict(),
        "timing_s": {r.label: r.wall_s for r in runs},
        "files": sorted(p.name for p in files),
    }
    files.append(writer.write_json("manifest.json", manifest))
    return RunResult(runs=runs, files=files, checksum=exp.checksum)
