"""Time integration of the coupled density / orientation fields.

State is the pair (rho, w) on a periodic transverse grid: rho is the
density relative to its uniform mean (so mean(rho) = 1) and w is the
orientation (population imbalance) density, with Zeeman populations
rho_pm = (rho +- w)/2.

The pump enters through the closed optical loop (phase imprint, mirror
round trip) evaluated from the instantaneous state.  Transport driven
by the dipole force takes divergence form, so the spatial mean of rho
is conserved exactly; spectral evaluation keeps that true to roundoff.

Integration is Strang splitting: an exact half step of the linear
relaxation (spectral diffusion, or plain decay in ballistic mode)
around an explicit midpoint step of everything else, with the optical
loop re-evaluated at every stage.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import output
from .optics import PumpRates, TransverseGrid, closed_loop_pump
from .params import SystemParams
from .physics import A_PUMP, A_WEAK

_RELAXATIONS = ("diffusive", "ballistic")
_STABILITY_LIMIT = 0.5
_DT_SAFETY = 0.1
_MAX_LINEAR_AMP = 1e-2
_MIN_FIT_POINTS = 8
_POPULATION_FLOOR = -1e-8


class IntegrationAbort(RuntimeError):
    """Raised when a run violates an invariant or a stability bound."""

    def __init__(self, reason: str, step: int, time: float):
        super().__init__(f"step {step} (t = {time:.6g} s): {reason}")
        self.reason = reason
        self.step = step
        self.time = time
        self.diagnostics: Diagnostics | None = None


class GrowthFitError(RuntimeError):
    """Raised when a growth-rate fit would not be trustworthy."""


class ValidityWarning(UserWarning):
    """Phase modulation left the small-signal regime."""


@dataclass
class AtomicState:
    """Fields on the grid plus the physical time [s]."""

    rho: np.ndarray
    w: np.ndarray
    time: float = 0.0

    def copy(self) -> "AtomicState":
        return AtomicState(self.rho.copy(), self.w.copy(), self.time)

    def populations(self) -> tuple[np.ndarray, np.ndarray]:
        """Zeeman populations (rho_plus, rho_minus)."""
        return 0.5 * (self.rho + self.w), 0.5 * (self.rho - self.w)

    def min_population(self) -> float:
        """Smallest value of either Zeeman population."""
        return float(0.5 * np.min(self.rho - np.abs(self.w)))


def uniform_state(grid: TransverseGrid) -> AtomicState:
    return AtomicState(np.ones(grid.shape), np.zeros(grid.shape), 0.0)


@dataclass(frozen=True)
class SimConfig:
    """Run settings for :func:`run`.

    ``dt = None`` picks the default step from the fastest linear rate.
    ``track_q = None`` tracks the lattice mode of the system params.
    ``outdir = None`` keeps everything in memory; otherwise snapshots
    and a diagnostics table are written there as the run progresses.
    """

    grid: TransverseGrid
    dt: float | None = None
    n_steps: int = 10000
    snapshot_every: int = 250
    seed: int = 0
    perturbation: str = "mode"
    target: str = "orientation"
    amplitude: float = 1e-6
    track_q: float | None = None
    include_optomech: bool = True
    relaxation: str = "diffusive"
    abort_on_violation: bool = True
    outdir: str | None = None
    write_snapshots: bool = True
    header_lines: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be at least 1")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.perturbation not in ("mode", "noise"):
            raise ValueError("perturbation must be 'mode' or 'noise'")
        if self.target not in ("density", "orientation"):
            raise ValueError("target must be 'density' or 'orientation'")
        if self.relaxation not in _RELAXATIONS:
            raise ValueError(f"relaxation must be one of {_RELAXATIONS}")


@dataclass
class Diagnostics:
    """Per-snapshot scalar time series for a tracked mode q."""

    q: float
    step: list[int] = field(default_factory=list)
    time: list[float] = field(default_factory=list)
    amp_rho_q: list[float] = field(default_factory=list)
    amp_w_q: list[float] = field(default_factory=list)
    min_rho_pm: list[float] = field(default_factory=list)
    mean_rho: list[float] = field(default_factory=list)
    max_w: list[float] = field(default_factory=list)

    def record(self, step: int, state: AtomicState, grid: TransverseGrid) -> None:
        self.step.append(step)
        self.time.append(state.time)
        self.amp_rho_q.append(grid.mode_amplitude(state.rho, self.q))
        self.amp_w_q.append(grid.mode_amplitude(state.w, self.q))
        self.min_rho_pm.append(state.min_population())
        self.mean_rho.append(float(np.mean(state.rho)))
        self.max_w.append(float(np.max(np.abs(state.w))))

    def columns(self) -> dict[str, list]:
        return {name: getattr(self, name) for name in output.DIAG_COLUMNS}


@dataclass
class RunResult:
    state: AtomicState
    diagnostics: Diagnostics
    snapshots: list[AtomicState]
    snapshot_steps: list[int]
    dt: float


def seed_perturbation(
    state: AtomicState,
    grid: TransverseGrid,
    q: float,
    amplitude: float,
    target: str = "orientation",
    seed: int = 0,
) -> AtomicState:
    """Return a copy of ``state`` with a small perturbation added.

    ``target`` selects what is seeded: a cosine at wavenumber q on the
    density or on the orientation, or ``"noise"`` for band-limited
    white noise of rms ``amplitude`` on both fields.  The spatial mean
    of rho is left exactly unchanged.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    out = state.copy()
    if amplitude == 0:
        return out
    if target == "noise":
        rng = np.random.default_rng(seed)
        for arr, keep_mean in ((out.rho, True), (out.w, False)):
            noise = grid.dealias(rng.standard_normal(grid.shape))
            noise -= np.mean(noise)
            rms = float(np.sqrt(np.mean(noise**2)))
            if rms > 0:
                arr += amplitude / rms * noise
        return out
    grid.mode_index(q)  # validates q falls on the grid
    profile = amplitude * np.cos(q * grid.x)
    profile -= np.mean(profile)
    if grid.dims == 2:
        profile = profile[:, None] * np.ones((1, grid.n))
    if target == "density":
        out.rho = out.rho + profile
    elif target == "orientation":
        out.w = out.w + profile
    else:
        raise ValueError("target must be 'density', 'orientation' or 'noise'")
    return out


def default_timestep(
    grid: TransverseGrid,
    params: SystemParams,
    relaxation: str = "diffusive",
) -> float:
    """Step size resolving the fastest linear rate with a 0.1 margin."""
    if relaxation == "diffusive":
        relax = params.molasses().diffusion * grid.k_squared_max
    elif relaxation == "ballistic":
        relax = params.ballistic()
    else:
        raise ValueError(f"relaxation must be one of {_RELAXATIONS}")
    pump = 6.0 * params.molasses_efficiency * params.p_m
    pump += 2.0 * A_PUMP * params.p0 * (1.0 + params.reflectivity)
    fastest = max(relax, pump)
    if fastest <= 0:
        raise ValueError("no finite rates; cannot choose a time step")
    return _DT_SAFETY / fastest


def _explicit_terms(
    grid: TransverseGrid,
    rho: np.ndarray,
    w: np.ndarray,
    pump: PumpRates,
    params: SystemParams,
    include_optomech: bool,
    coupling: float,
) -> tuple[np.ndarray, np.ndarray, float]:
    """All local and optomechanical terms (no relaxation).

    Returns (drho_dt, dw_dt, max_total_pump).  ``coupling`` is
    sigma * D / Gamma in m^2; pass 0.0 with ``include_optomech`` False.
    Inputs are filtered to the de-aliased band before any product so
    quadratic terms are alias-free and the mean of drho_dt vanishes to
    roundoff.
    """
    mask = grid.dealias_mask
    a = A_WEAK
    total_hat = grid.spectral(pump.total) * mask
    imbal_hat = grid.spectral(pump.imbalance) * mask
    total = grid.physical(total_hat)
    imbal = grid.physical(imbal_hat)
    rho_hat = grid.spectral(rho) * mask
    w_hat = grid.spectral(w) * mask
    rho_f = grid.physical(rho_hat)
    w_f = grid.physical(w_hat)

    dw = A_PUMP * (imbal * rho_f - total * w_f)
    eta_pm = params.molasses_efficiency * params.p_m
    if eta_pm > 0:
        dw -= 6.0 * eta_pm * w_f

    if include_optomech:
        k2 = grid.k_squared
        lap_total = grid.physical(-k2 * total_hat)
        lap_imbal = grid.physical(-k2 * imbal_hat)
        drho = coupling * ((1 + a) * rho_f * lap_total + (1 - a) * w_f * lap_imbal)
        dw += coupling * ((1 + a) * w_f * lap_total + (1 - a) * rho_f * lap_imbal)
        for ka in grid.k_axes:
            g_total = grid.physical(1j * ka * total_hat)
            g_imbal = grid.physical(1j * ka * imbal_hat)
            # gradients of P+ + a P- and P- + a P+
            g_plus = 0.5 * ((1 + a) * g_total + (1 - a) * g_imbal)
            g_minus = 0.5 * ((1 + a) * g_total - (1 - a) * g_imbal)
            g_rho = grid.physical(1j * ka * rho_hat)
            g_w = grid.physical(1j * ka * w_hat)
            drho += coupling * ((g_rho + g_w) * g_plus + (g_rho - g_w) * g_minus)
            dw += coupling * ((g_w + g_rho) * g_plus + (g_w - g_rho) * g_minus)
        drho = grid.physical(grid.spectral(drho) * mask)
    else:
        drho = np.zeros(grid.shape)
    dw = grid.physical(grid.spectral(dw) * mask)
    return drho, dw, float(np.max(total))


def rhs(
    state: AtomicState,
    pump: PumpRates,
    params: SystemParams,
    include_optomech: bool = True,
    relaxation: str = "diffusive",
) -> tuple[np.ndarray, np.ndarray]:
    """Full time derivative (drho_dt, dw_dt) for a given pump pattern.

    In diffusive mode both fields relax by diffusion and the dipole
    force drives transport; in ballistic mode the orientation decays at
    the time-of-flight rate, the density is frozen, and optomechanical
    coupling is not available.
    """
    grid = pump.grid
    if state.rho.shape != grid.shape or state.w.shape != grid.shape:
        raise ValueError("state arrays do not match the pump grid")
    if relaxation not in _RELAXATIONS:
        raise ValueError(f"relaxation must be one of {_RELAXATIONS}")
    if relaxation == "ballistic" and include_optomech:
        raise ValueError("optomechanical coupling requires diffusive transport")
    coupling = 0.0
    if include_optomech:
        mol = params.molasses()
        coupling = params.sigma() * mol.diffusion / params.species.gamma
    drho, dw, _ = _explicit_terms(
        grid, state.rho, state.w, pump, params, include_optomech, coupling
    )
    if relaxation == "diffusive":
        diff = params.molasses().diffusion
        mask = grid.dealias_mask
        drho += diff * grid.physical(
            -grid.k_squared * grid.spectral(state.rho) * mask
        )
        dw += diff * grid.physical(-grid.k_squared * grid.spectral(state.w) * mask)
    else:
        dw -= params.ballistic() * state.w
        drho = np.zeros(grid.shape)
    return drho, dw


class _Stepper:
    """Strang splitting with cached spectral factors."""

    def __init__(
        self,
        grid: TransverseGrid,
        params: SystemParams,
        dt: float,
        include_optomech: bool = True,
        relaxation: str = "diffusive",
    ):
        if relaxation not in _RELAXATIONS:
            raise ValueError(f"relaxation must be one of {_RELAXATIONS}")
        if relaxation == "ballistic" and include_optomech:
            raise ValueError("optomechanical coupling requires diffusive transport")
        self.grid = grid
        self.params = params
        self.dt = dt
        self.include_optomech = include_optomech
        self.relaxation = relaxation
        self.p0 = params.p0
        self.coupling = 0.0
        if include_optomech:
            mol = params.molasses()
            self.coupling = params.sigma() * mol.diffusion / params.species.gamma
        if relaxation == "diffusive":
            diff = params.molasses().diffusion
            self.half_relax = np.exp(-diff * grid.k_squared * 0.5 * dt)
            self.relax_rate = diff * grid.k_squared_max
        else:
            rate = params.ballistic()
            self.half_relax = math.exp(-rate * 0.5 * dt)
            self.relax_rate = rate
        self.eta_pm6 = 6.0 * params.molasses_efficiency * params.p_m

    def _half_relaxation(self, state: AtomicState) -> AtomicState:
        if self.relaxation == "diffusive":
            grid = self.grid
            rho = grid.physical(grid.spectral(state.rho) * self.half_relax)
            w = grid.physical(grid.spectral(state.w) * self.half_relax)
        else:
            rho = state.rho
            w = state.w * self.half_relax
        return AtomicState(rho, w, state.time)

    def _terms(self, rho: np.ndarray, w: np.ndarray) -> tuple:
        pump = closed_loop_pump(self.grid, rho, w, self.params, self.p0)
        return _explicit_terms(
            self.grid, rho, w, pump, self.params, self.include_optomech, self.coupling
        )

    def step(self, state: AtomicState, step_index: int = 0) -> AtomicState:
        dt = self.dt
        mid = self._half_relaxation(state)
        drho1, dw1, max_pump = self._terms(mid.rho, mid.w)
        fastest = max(self.relax_rate, self.eta_pm6 + A_PUMP * max_pump)
        if dt * fastest > _STABILITY_LIMIT:
            raise IntegrationAbort(
                f"time step {dt:.3g} s too large for rate {fastest:.3g} 1/s",
                step_index,
                state.time,
            )
        rho_mid = mid.rho + 0.5 * dt * drho1
        w_mid = mid.w + 0.5 * dt * dw1
        drho2, dw2, _ = self._terms(rho_mid, w_mid)
        out = AtomicState(mid.rho + dt * drho2, mid.w + dt * dw2, state.time)
        out = self._half_relaxation(out)
        out.time = state.time + dt
        return out


def step(
    state: AtomicState,
    grid: TransverseGrid,
    params: SystemParams,
    dt: float,
    include_optomech: bool = True,
    relaxation: str = "diffusive",
) -> AtomicState:
    """Advance one time step (convenience wrapper; ``run`` is faster
    for long integrations because it reuses cached spectral factors)."""
    stepper = _Stepper(grid, params, dt, include_optomech, relaxation)
    return stepper.step(state)


def run(config: SimConfig, params: SystemParams) -> RunResult:
    """Integrate from the seeded uniform state for n_steps.

    Snapshots and diagnostics are recorded every ``snapshot_every``
    steps (plus the initial and final states) and written to
    ``config.outdir`` when set.  Identical (config, params) give
    bit-identical results.  Raises :class:`IntegrationAbort` (with the
    partial diagnostics attached) if the run goes unstable or the
    populations turn negative while ``abort_on_violation`` is set.
    """
    grid = config.grid
    q = params.q if config.track_q is None else config.track_q
    dt = config.dt
    if dt is None:
        dt = default_timestep(grid, params, config.relaxation)
    target = "noise" if config.perturbation == "noise" else config.target
    state = seed_perturbation(
        uniform_state(grid), grid, q, config.amplitude, target, config.seed
    )
    stepper = _Stepper(
        grid, params, dt, config.include_optomech, config.relaxation
    )
    diags = Diagnostics(q=q)
    snapshots: list[AtomicState] = []
    snapshot_steps: list[int] = []
    outdir = config.outdir
    if outdir is not None:
        os.makedirs(outdir, exist_ok=True)
    tag = output.params_hash(params)

    phi_lin = abs(params.phases().phi_lin)
    warned = False

    def record(step_index: int, current: AtomicState) -> None:
        diags.record(step_index, current, grid)
        snapshots.append(current.copy())
        snapshot_steps.append(step_index)
        if outdir is not None and config.write_snapshots:
            path = os.path.join(outdir, f"snapshot_{step_index:07d}.dat")
            output.write_snapshot(path, current.rho, current.w, current.time,
                                  grid.spacing, tag)

    def flush_diagnostics() -> None:
        if outdir is not None:
            output.write_diagnostics(
                os.path.join(outdir, "diagnostics.csv"),
                diags.columns(),
                config.header_lines,
            )

    record(0, state)
    try:
        for i in range(1, config.n_steps + 1):
            state = stepper.step(state, i)
            if not (np.isfinite(state.rho).all() and np.isfinite(state.w).all()):
                if config.abort_on_violation:
                    raise IntegrationAbort("field values are not finite", i,
                                           state.time)
            elif config.abort_on_violation:
                floor = state.min_population()
                if floor < _POPULATION_FLOOR:
                    raise IntegrationAbort(
                        f"population went negative (min rho_pm = {floor:.3g})",
                        i,
                        state.time,
                    )
            if not warned and phi_lin * float(np.max(np.abs(state.rho - 1.0))) > 1.0:
                warnings.warn(
                    "phase modulation exceeds the small-signal regime; "
                    "treat amplitudes as qualitative",
                    ValidityWarning,
                    stacklevel=2,
                )
                warned = True
            if i % config.snapshot_every == 0 or i == config.n_steps:
                record(i, state)
    except IntegrationAbort as abort:
        # keep everything recorded so far; add the aborting state only
        # if it still holds numbers
        if np.isfinite(state.rho).all() and np.isfinite(state.w).all():
            record(abort.step, state)
        flush_diagnostics()
        abort.diagnostics = diags
        raise
    flush_diagnostics()
    return RunResult(state, diags, snapshots, snapshot_steps, dt)


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares exponential growth rate of a tracked mode."""

    rate: float
    residual: float
    n_points: int
    field: str


def measure_growth_rate(
    diagnostics: Diagnostics,
    q: float,
    fit_window: tuple[float, float] | None = None,
    field: str | None = None,
) -> GrowthFit:
    """Fit log amplitude of the tracked mode against time.

    ``field`` picks the series ("density" or "orientation"); by default
    the one with the larger final amplitude is used.  Refuses to fit
    when fewer than 8 snapshots fall in the window, when any amplitude
    is not positive, or when any amplitude exceeds 1e-2 (outside the
    linear regime).
    """
    if abs(q - diagnostics.q) > 1e-9 * max(1.0, abs(diagnostics.q)):
        raise ValueError(
            f"q = {q:.6g} does not match the tracked mode {diagnostics.q:.6g}"
        )
    t = np.asarray(diagnostics.time)
    series = {
        "density": np.asarray(diagnostics.amp_rho_q),
        "orientation": np.asarray(diagnostics.amp_w_q),
    }
    if field is None:
        field = max(series, key=lambda name: series[name][-1] if len(t) else 0.0)
    if field not in series:
        raise ValueError("field must be 'density' or 'orientation'")
    amp = series[field]
    if fit_window is not None:
        lo, hi = fit_window
        keep = (t >= lo) & (t <= hi)
        t, amp = t[keep], amp[keep]
    if len(t) < _MIN_FIT_POINTS:
        raise GrowthFitError(
            f"need at least {_MIN_FIT_POINTS} snapshots in the window, got {len(t)}"
        )
    if np.any(amp <= 0):
        raise GrowthFitError("mode amplitude vanished; nothing to fit")
    if np.any(amp > _MAX_LINEAR_AMP):
        raise GrowthFitError(
            f"amplitude exceeded {_MAX_LINEAR_AMP:g}; outside the linear regime"
        )
    log_amp = np.log(amp)
    slope, intercept = np.polyfit(t, log_amp, 1)
    fitted = slope * t + intercept
    residual = float(np.sqrt(np.mean((fitted - log_amp) ** 2)))
    return GrowthFit(float(slope), residual, len(t), field)
