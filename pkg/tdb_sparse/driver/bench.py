"""Wall-clock scaling of the decompressed and sparse solvers over n or s."""

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from tdb_sparse.core import init_from_samples
from tdb_sparse.integrate import DecompressedProvider, RHSProvider, SparseProvider, rk4_dbo
from tdb_sparse.models.config import RunConfig
from tdb_sparse.models.state import QuadratureWeights
from tdb_sparse.physics import BurgersModel, burgers_stable_dt
from tdb_sparse.sampling import Sampler
from tdb_sparse.storage import OutputWriter

logger = logging.getLogger(__name__)

BENCH_HEADER = ["value", "n", "s", "dt", "tdb_ms", "stdb_ms", "speedup"]

# fraction of the stability estimate used when the configured dt is too large for a point
STABLE_FRACTION = 0.9


def bench_header(p_values: List[int]) -> List[str]:
    """Timing columns: the base table plus one S-TDB column per extra p of the sweep."""
    return BENCH_HEADER + [f"stdb_ms_p{p}" for p in p_values[1:]]


@dataclass
class BenchPoint:
    """Mean per-step wall time of both solvers at one sweep value."""

    value: int
    n: int
    s: int
    dt: float
    tdb_ms: float
    stdb_ms: float
    sweep_ms: Dict[int, float] = field(default_factory=dict)

    @property
    def speedup(self) -> float:
        return self.tdb_ms / self.stdb_ms if self.stdb_ms > 0 else float("nan")

    def row(self) -> List[object]:
        base: List[object] = [
            self.value,
            self.n,
            self.s,
            self.dt,
            self.tdb_ms,
            self.stdb_ms,
            self.speedup,
        ]
        return base + list(self.sweep_ms.values())


@dataclass
class BenchResult:
    """Benchmark table plus the fitted log-log growth exponent of each solver."""

    sweep: str
    points: List[BenchPoint]
    exponents: Dict[str, float]
    header: List[str] = field(default_factory=lambda: list(BENCH_HEADER))
    path: Optional[Path] = None


def point_config(cfg: RunConfig, value: int) -> RunConfig:
    """Configuration of one sweep value, with dt capped to the stable step."""
    if cfg.bench.sweep == "n":
        point = dataclasses.replace(cfg, burgers=dataclasses.replace(cfg.burgers, n=value))
    else:
        point = dataclasses.replace(cfg, s=value)
    dt = min(cfg.dt, STABLE_FRACTION * burgers_stable_dt(point.burgers))
    return dataclasses.replace(point, dt=dt)


def _time_steps(provider: RHSProvider, cfg: RunConfig, V0: np.ndarray, steps: int) -> float:
    state = init_from_samples(V0, cfg.r, provider.weights)
    if isinstance(provider, SparseProvider):
        # the Y-based first selection is setup, not a step
        provider.bootstrap(state)
    total_ns = 0
    for _ in range(steps):
        state, report = rk4_dbo(provider, state, cfg.dt)
        total_ns += report.wall_ns
    return total_ns * 1e-6 / steps


def growth_exponent(sizes: List[int], times_ms: List[float]) -> float:
    """Slope of log(time) against log(size); NaN with fewer than two points."""
    if len(sizes) < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(sizes), np.log(times_ms), 1)
    return float(slope)


def scaling_bench(cfg: RunConfig, write: bool = True) -> BenchResult:
    """
    Time both solvers on Burgers for every value of the sweep.

    The sparse solver is timed once per interpolation rank in `cfg.p_values`; the
    first of them is the reference `stdb_ms` column.

    Args:
        cfg: Run configuration; `bench` selects the sweep.
        write: Write timing.csv to the output directory.

    Returns:
        BenchResult.
    """
    p_values = cfg.p_values
    points: List[BenchPoint] = []
    for value in cfg.bench.values:
        point = point_config(cfg, value)
        if point.dt < cfg.dt:
            logger.info(
                "bench %s=%d: dt reduced to %.3e for stability", cfg.bench.sweep, value, point.dt
            )
        model = BurgersModel(point.burgers, point.dt, point.s, point.seed, threads=point.threads)
        V0 = model.initial_ensemble()
        weights = QuadratureWeights.monte_carlo(model.wx, point.s)
        tdb_ms = _time_steps(DecompressedProvider(model, weights), point, V0, cfg.bench.steps)
        stdb_ms: Dict[int, float] = {}
        for p in p_values:
            sparse = SparseProvider(
                model,
                weights,
                p,
                sampler=Sampler(point.sampler.lower()),
                stage_reuse=point.stage_reuse,
            )
            stdb_ms[p] = _time_steps(sparse, point, V0, cfg.bench.steps)
        logger.info(
            "bench %s=%d: TDB %.3f ms/step, STDB %s",
            cfg.bench.sweep,
            value,
            tdb_ms,
            ", ".join(f"p={p} {ms:.3f} ms/step" for p, ms in stdb_ms.items()),
        )
        extra = {p: stdb_ms[p] for p in p_values[1:]}
        points.append(
            BenchPoint(value, model.n, point.s, point.dt, tdb_ms, stdb_ms[p_values[0]], extra)
        )

    sizes = [pt.value for pt in points]
    exponents = {
        "TDB": growth_exponent(sizes, [pt.tdb_ms for pt in points]),
        "STDB": growth_exponent(sizes, [pt.stdb_ms for pt in points]),
    }
    for p in p_values[1:]:
        exponents[f"STDB_p{p}"] = growth_exponent(sizes, [pt.sweep_ms[p] for pt in points])
    result = BenchResult(
        sweep=cfg.bench.sweep, points=points, exponents=exponents, header=bench_header(p_values)
    )
    if write:
        writer = OutputWriter(cfg.output_dir)
        result.path = writer.write_csv("timing.csv", result.header, [pt.row() for pt in points])
    return result
