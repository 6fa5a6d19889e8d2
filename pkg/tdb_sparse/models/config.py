"""Run configuration models."""

from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional


class Mode(str, Enum):
    """Which solvers a run executes."""

    FOM = "fom"
    TDB = "tdb"
    STDB = "stdb"
    COMPARE = "compare"


class ModelKind(str, Enum):
    """Physics model selection."""

    BURGERS = "burgers"
    DIFFUSION = "diffusion"
    NS2D = "ns2d"


@dataclass
class BurgersConfig:
    """
    Stochastic viscous Burgers on [0, 1].

    Attributes:
        nu: Viscosity.
        n: Grid points, boundaries included.
        d: Random dimension of the initial and boundary perturbations.
        sigma_t: Amplitude of the random left-boundary perturbation.
        sigma_x: Amplitude of the random initial-condition perturbation.
        length_scale: Squared-exponential covariance length of the initial perturbation.
        penalty: Boundary penalty strength times dt (κ = penalty / dt).
        left_amplitude: Amplitude of the deterministic -sin(2πt) left boundary value.
        advection: Include the nonlinear advection term.
    """

    nu: float = 0.05
    n: int = 405
    d: int = 4
    sigma_t: float = 0.01
    sigma_x: float = 0.005
    length_scale: float = 0.1
    penalty: float = 1.0
    left_amplitude: float = 1.0
    advection: bool = True


@dataclass
class DiffusionConfig:
    """Periodic linear diffusion on [0, 1) with random Fourier initial data."""

    nu: float = 0.01
    n: int = 128
    d: int = 4


@dataclass
class NSConfig:
    """
    Compressible Navier-Stokes on a periodic [0, Lx) × [0, Ly) box.

    Attributes:
        Re: Reynolds number.
        Pr: Prandtl number.
        gamma: Ratio of specific heats.
        Ma: Mach number.
        nx: Grid points in x.
        ny: Grid points in y.
        Lx: Domain length in x.
        Ly: Domain length in y.
        delta: Amplitude of the deterministic seed perturbation.
        h: Shear-layer thickness.
        a: Lower perturbation envelope centre (also the lower shear layer y_min).
        b: Upper perturbation envelope centre (also the upper shear layer y_max).
        u_max: Free-stream velocity scale.
        d: Number of random velocity perturbation modes.
        t_spinup: Deterministic spin-up time before the ensemble is perturbed.
    """

    Re: float = 3000.0
    Pr: float = 1.0
    gamma: float = 1.4
    Ma: float = 0.5
    nx: int = 64
    ny: int = 64
    Lx: float = 2.0
    Ly: float = 1.0
    delta: float = 1.45e-4
    h: float = 0.01
    a: float = 0.45
    b: float = 0.55
    u_max: float = 1.0
    d: int = 10
    t_spinup: float = 3.0


@dataclass
class AdaptiveConfig:
    """Buffer interval and bounds of the adaptive interpolation rank."""

    eps_l: float = 1e-5
    eps_u: float = 1e-4
    p_min: int = 2
    p_max: int = 20


@dataclass
class BenchConfig:
    """Wall-clock scaling sweep over n or s."""

    sweep: str = "n"
    values: List[int] = field(default_factory=lambda: [405, 810, 1620])
    steps: int = 50


@dataclass
class RunConfig:
    """
    Complete description of one experiment.

    Attributes:
        mode: fom, tdb, stdb or compare.
        model: burgers, diffusion or ns2d.
        r: DBO rank.
        p: Interpolation rank (initial rank when adaptive).
        p_sweep: Extra interpolation ranks run by compare mode.
        sampler: deim or qdeim.
        s: Monte Carlo sample count.
        seed: Seed of the random inputs.
        dt: Time step.
        t_end: Final time.
        output_dir: Directory receiving every output file.
        output_every: Output stride in steps.
        diagnostics: Materialize F at output steps and record CUR diagnostics.
        stage_reuse: Reuse stage-1 index sets in later Runge-Kutta stages.
        threads: Worker threads for model RHS evaluation.
        block_rows: Row block of the streamed error reconstruction.
        adaptive: Rank adaptivity settings, None for a fixed p.
    """

    mode: Mode = Mode.COMPARE
    model: ModelKind = ModelKind.BURGERS
    r: int = 5
    p: int = 8
    p_sweep: List[int] = field(default_factory=list)
    sampler: str = "deim"
    s: int = 256
    seed: int = 1234
    dt: float = 5e-5
    t_end: float = 1.0
    output_dir: Path = field(default_factory=lambda: Path("runs"))
    output_every: int = 200
    diagnostics: bool = False
    stage_reuse: bool = False
    threads: int = 1
    block_rows: int = 4096
    adaptive: Optional[AdaptiveConfig] = None
    burgers: BurgersConfig = field(default_factory=BurgersConfig)
    diffusion: DiffusionConfig = field(default_factory=DiffusionConfig)
    ns2d: NSConfig = field(default_factory=NSConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    @property
    def steps(self) -> int:
        """Number of time steps covering [0, t_end]."""
        return int(round(self.t_end / self.dt))

    @property
    def p_values(self) -> List[int]:
        """Interpolation ranks run by the sparse solver, in order."""
        values = [self.p] + [p for p in self.p_sweep if p != self.p]
        return values

    @property
    def n(self) -> int:
        """State dimension implied by the selected model."""
        if self.model == ModelKind.BURGERS:
            return self.burgers.n
        if self.model == ModelKind.DIFFUSION:
            return self.diffusion.n
        return 4 * self.ns2d.nx * self.ns2d.ny

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to nested dictionary for TOML and JSON serialization."""
        run = {f.name: getattr(self, f.name) for f in fields(self) if f.name in RUN_KEYS}
        run["mode"] = self.mode.value
        run["model"] = self.model.value
        run["output_dir"] = str(self.output_dir)
        data: Dict[str, Any] = {
            "run": run,
            "burgers": asdict(self.burgers),
            "diffusion": asdict(self.diffusion),
            "ns2d": asdict(self.ns2d),
            "bench": asdict(self.bench),
        }
        if self.adaptive is not None:
            data["adaptive"] = asdict(self.adaptive)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Create RunConfig from a nested dictionary (keys already checked)."""
        run = dict(data.get("run", {}))
        if "mode" in run:
            run["mode"] = Mode(run["mode"])
        if "model" in run:
            run["model"] = ModelKind(run["model"])
        if "output_dir" in run:
            run["output_dir"] = Path(run["output_dir"])
        adaptive = data.get("adaptive")
        return cls(
            **run,
            adaptive=AdaptiveConfig(**adaptive) if adaptive is not None else None,
            burgers=BurgersConfig(**data.get("burgers", {})),
            diffusion=DiffusionConfig(**data.get("diffusion", {})),
            ns2d=NSConfig(**data.get("ns2d", {})),
            bench=BenchConfig(**data.get("bench", {})),
        )


SECTION_TYPES = {
    "adaptive": AdaptiveConfig,
    "burgers": BurgersConfig,
    "diffusion": DiffusionConfig,
    "ns2d": NSConfig,
    "bench": BenchConfig,
}

RUN_KEYS = (
    "mode",
    "model",
    "r",
    "p",
    "p_sweep",
    "sampler",
    "s",
    "seed",
    "dt",
    "t_end",
    "output_dir",
    "output_every",
    "diagnostics",
    "stage_reuse",
    "threads",
    "block_rows",
)


def section_keys(section: str) -> List[str]:
    """Allowed keys of a config file section."""
    if section == "run":
        return list(RUN_KEYS)
    return [f.name for f in fields(SECTION_TYPES[section])]
