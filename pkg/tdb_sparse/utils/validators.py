"""Run configuration validation."""

from typing import List, Optional

from tdb_sparse.models.config import Mode, ModelKind, RunConfig
from tdb_sparse.physics.burgers import burgers_stable_dt
from tdb_sparse.physics.diffusion import diffusion_stable_dt
from tdb_sparse.physics.ns2d import ns2d_stable_dt
from tdb_sparse.sampling import Sampler

MEMORY_LIMIT_BYTES = 4 * 1024**3
MAX_PENALTY = 2.5
MIN_BENCH_STEPS = 50


def validate_sampler(sampler: str) -> Optional[str]:
    """
    Validate sampler name.

    Args:
        sampler: Sampler string to validate.

    Returns:
        Normalized sampler name or None if invalid.
    """
    try:
        return Sampler(sampler.lower()).value
    except ValueError:
        return None


def validate_threads(threads: int) -> int:
    """Clamp a requested worker count to at least one."""
    return max(1, int(threads))


def estimate_peak_bytes(cfg: RunConfig, n: Optional[int] = None, s: Optional[int] = None) -> int:
    """
    Rough peak memory of a run.

    The full-order integrator holds the ensemble, four stages and one stage state;
    the decompressed solver holds the reconstruction, F and the reference snapshot;
    the sparse solver only holds (n + s)-by-(r + p) factors unless diagnostics
    materialize F.
    """
    n = cfg.n if n is None else n
    s = cfg.s if s is None else s
    full = n * s
    p = max([cfg.p] + cfg.p_sweep + ([cfg.adaptive.p_max] if cfg.adaptive else []))
    skinny = 8 * (n + s) * (cfg.r + p)
    words = skinny
    if cfg.mode in (Mode.FOM, Mode.COMPARE):
        words = max(words, 7 * full)
    if cfg.mode in (Mode.TDB, Mode.COMPARE):
        words = max(words, 4 * full)
    if cfg.mode in (Mode.STDB, Mode.COMPARE) and cfg.diagnostics:
        words = max(words, 4 * full)
    return 8 * words


def stable_dt(cfg: RunConfig) -> float:
    """Explicit RK4 stability estimate of the selected model."""
    if cfg.model == ModelKind.BURGERS:
        return burgers_stable_dt(cfg.burgers)
    if cfg.model == ModelKind.DIFFUSION:
        return diffusion_stable_dt(cfg.diffusion)
    return ns2d_stable_dt(cfg.ns2d)


def _physics_errors(cfg: RunConfig) -> List[str]:
    errors: List[str] = []
    if cfg.model == ModelKind.BURGERS:
        b = cfg.burgers
        if b.nu <= 0:
            errors.append(f"burgers.nu: must be positive, got {b.nu}")
        if b.n < 3:
            errors.append(f"burgers.n: need at least 3 grid points, got {b.n}")
        if b.d < 0 or b.d > cfg.s:
            errors.append(f"burgers.d: must lie in [0, s={cfg.s}], got {b.d}")
        if b.d > b.n:
            errors.append(f"burgers.d: cannot exceed n={b.n}, got {b.d}")
        if b.sigma_t < 0 or b.sigma_x < 0:
            errors.append("burgers.sigma_t, burgers.sigma_x: amplitudes must be non-negative")
        if b.length_scale <= 0:
            errors.append(f"burgers.length_scale: must be positive, got {b.length_scale}")
        if not 0 < b.penalty <= MAX_PENALTY:
            errors.append(
                f"burgers.penalty: must lie in (0, {MAX_PENALTY}] for explicit RK4, "
                f"got {b.penalty}"
            )
    elif cfg.model == ModelKind.DIFFUSION:
        d = cfg.diffusion
        if d.nu <= 0:
            errors.append(f"diffusion.nu: must be positive, got {d.nu}")
        if d.n < 3:
            errors.append(f"diffusion.n: need at least 3 grid points, got {d.n}")
        if d.d < 0 or d.d > cfg.s:
            errors.append(f"diffusion.d: must lie in [0, s={cfg.s}], got {d.d}")
    else:
        ns = cfg.ns2d
        for name in ("Re", "Pr", "Ma", "Lx", "Ly", "h", "u_max"):
            if getattr(ns, name) <= 0:
                errors.append(f"ns2d.{name}: must be positive, got {getattr(ns, name)}")
        if ns.gamma <= 1:
            errors.append(f"ns2d.gamma: must exceed 1, got {ns.gamma}")
        if ns.nx < 3 or ns.ny < 3:
            errors.append(f"ns2d.nx, ns2d.ny: grid must be at least 3×3, got {ns.nx}×{ns.ny}")
        if ns.d < 0 or ns.d > cfg.s:
            errors.append(f"ns2d.d: must lie in [0, s={cfg.s}], got {ns.d}")
        if ns.t_spinup < 0:
            errors.append(f"ns2d.t_spinup: must be non-negative, got {ns.t_spinup}")
    return errors


def validate_config(cfg: RunConfig) -> List[str]:
    """
    Validate a run configuration.

    Args:
        cfg: Configuration to check.

    Returns:
        One message per problem, each prefixed with the offending field(s); empty if valid.
    """
    errors: List[str] = []
    n, s = cfg.n, cfg.s
    if s < 1:
        errors.append(f"run.s: must be at least 1, got {s}")
    limit = min(n, s)
    if cfg.r < 1 or cfg.r > limit:
        errors.append(f"run.r: must lie in [1, min(n, s)={limit}], got {cfg.r}")
    if cfg.p < 1 or cfg.p > limit:
        errors.append(f"run.p: must lie in [1, min(n, s)={limit}], got {cfg.p}")
    for p in cfg.p_sweep:
        if p < 1 or p > limit:
            errors.append(f"run.p_sweep: value {p} outside [1, {limit}]")
    if validate_sampler(cfg.sampler) is None:
        errors.append(f"run.sampler: expected deim or qdeim, got {cfg.sampler!r}")
    if cfg.dt <= 0:
        errors.append(f"run.dt: must be positive, got {cfg.dt}")
    if cfg.t_end <= 0:
        errors.append(f"run.t_end: must be positive, got {cfg.t_end}")
    if cfg.dt > 0 and cfg.t_end > 0:
        if cfg.steps < 1 or abs(cfg.steps * cfg.dt - cfg.t_end) > cfg.dt:
            errors.append(
                f"run.dt, run.t_end: t_end={cfg.t_end} is not covered by whole steps of {cfg.dt}"
            )
    if cfg.output_every < 1:
        errors.append(f"run.output_every: must be at least 1, got {cfg.output_every}")
    if cfg.threads < 1:
        errors.append(f"run.threads: must be at least 1, got {cfg.threads}")
    if cfg.block_rows < 1:
        errors.append(f"run.block_rows: must be at least 1, got {cfg.block_rows}")

    if cfg.adaptive is not None:
        a = cfg.adaptive
        if not 0 < a.eps_l < a.eps_u:
            errors.append(
                f"adaptive.eps_l, adaptive.eps_u: need 0 < eps_l < eps_u, "
                f"got eps_l={a.eps_l}, eps_u={a.eps_u}"
            )
        if not 1 <= a.p_min <= cfg.p <= a.p_max:
            errors.append(
                f"adaptive.p_min, adaptive.p_max: need 1 <= p_min <= p <= p_max, "
                f"got p_min={a.p_min}, p={cfg.p}, p_max={a.p_max}"
            )
        if a.p_max > limit:
            errors.append(f"adaptive.p_max: cannot exceed min(n, s)={limit}, got {a.p_max}")

    physics = _physics_errors(cfg)
    errors.extend(physics)
    if not physics and cfg.dt > 0:
        bound = stable_dt(cfg)
        if cfg.dt > bound:
            errors.append(
                f"run.dt: {cfg.dt} exceeds the explicit RK4 stability estimate "
                f"{bound:.3e} for {cfg.model.value} at n={n}"
            )

    peak = estimate_peak_bytes(cfg)
    if peak > MEMORY_LIMIT_BYTES:
        errors.append(
            f"run.s: estimated peak memory {peak / 1024**3:.1f} GiB exceeds the "
            f"{MEMORY_LIMIT_BYTES // 1024**3} GiB limit (n={n}, s={s})"
        )
    return errors


def validate_bench(cfg: RunConfig) -> List[str]:
    """Extra checks for the scaling benchmark."""
    errors: List[str] = []
    bench = cfg.bench
    if bench.sweep not in ("n", "s"):
        errors.append(f"bench.sweep: expected 'n' or 's', got {bench.sweep!r}")
    if not bench.values or any(v < 1 for v in bench.values):
        errors.append(f"bench.values: need positive sizes, got {bench.values}")
    if bench.steps < MIN_BENCH_STEPS:
        errors.append(f"bench.steps: need at least {MIN_BENCH_STEPS} steps, got {bench.steps}")
    if cfg.model != ModelKind.BURGERS:
        errors.append(f"run.model: the scaling benchmark runs burgers, got {cfg.model.value}")
    for value in bench.values:
        n = value if bench.sweep == "n" else cfg.n
        s = value if bench.sweep == "s" else cfg.s
        if estimate_peak_bytes(cfg, n=n, s=s) > MEMORY_LIMIT_BYTES:
            errors.append(f"bench.values: size {value} exceeds the memory limit")
        if value >= 1 and max(cfg.p_values) > min(n, s):
            errors.append(f"bench.values: size {value} is smaller than p={max(cfg.p_values)}")
    return errors


def error_fields(errors: List[str]) -> List[str]:
    """Field names quoted at the start of validation messages."""
    names: List[str] = []
    for message in errors:
        head = message.split(":", 1)[0]
        for name in head.split(","):
            name = name.strip()
            if name and name not in names:
                names.append(name)
    return names
