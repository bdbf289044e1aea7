"""Threshold tables: parameter sweeps and the standard report figures.

Every table reports the same four instability branches side by side,
all evaluated at the mirror placement that is optimal for the branch:

* ``magnetic``     orientation instability, dipole force excluded,
                   delta = -|delta|, sin(Theta) = +1;
* ``optomech``     density instability (detuning sign immaterial),
                   sin(Theta) = +1;
* ``combined_neg`` orientation with the dipole force, delta = -|delta|,
                   sin(Theta) = +1 (force assists);
* ``combined_pos`` orientation with the dipole force, delta = +|delta|,
                   sin(Theta) = -1 (force opposes).

Cells that do not exist (no finite threshold, no feedback, out of
numeric range) are written as empty fields with the matching exists
flag set to 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, RunConfig, to_system_params
from .lsa import ThresholdResult, threshold_density, threshold_orientation
from .params import SystemParams, ThinMediumWarning
from .physics import ballistic_rate, sat_to_intensity

BRANCHES = ("magnetic", "optomech", "combined_neg", "combined_pos")

FIGURES = ("fig4", "fig5a", "fig5b", "fig6", "fig7")

#: (temperature [uK], diffusion constant [m^2/s]) pairs for the
#: transport-rate comparison figure; the diffusion values are measured
#: transport fits quoted for these temperatures, not molasses theory.
RATE_FIGURE_PAIRS = ((290.0, 8.7e-7), (200.0, 7.0e-7), (120.0, 3.0e-7))


def _quiet_replace(params: SystemParams, **changes) -> SystemParams:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThinMediumWarning)
        return params.replace(**changes)


def threshold_branches(params: SystemParams) -> dict[str, ThresholdResult | None]:
    """Evaluate the four standard branches at |delta| of ``params``.

    Branches that cannot be evaluated at all (no feedback, zero
    detuning) come back as None.
    """
    mag = abs(params.delta)
    out: dict[str, ThresholdResult | None] = {}

    def attempt(name, fn):
        try:
            out[name] = fn()
        except (ValueError, ZeroDivisionError, FloatingPointError):
            out[name] = None

    neg = _quiet_replace(params, delta=-mag) if mag else params
    pos = _quiet_replace(params, delta=+mag) if mag else params
    attempt(
        "magnetic",
        lambda: threshold_orientation(neg, sin_theta=1.0, include_optomech=False),
    )
    attempt("optomech", lambda: threshold_density(neg, sin_theta=1.0))
    attempt("combined_neg", lambda: threshold_orientation(neg, sin_theta=1.0))
    attempt("combined_pos", lambda: threshold_orientation(pos, sin_theta=-1.0))
    return out


def sweep_column_names(variable: str) -> list[str]:
    names = [variable]
    for branch in BRANCHES:
        names += [f"s0_{branch}", f"i_{branch}_mW_cm2"]
    names += [f"exists_{branch}" for branch in BRANCHES]
    return names


def threshold_table(cfg: RunConfig, variable: str,
                    values: np.ndarray) -> dict[str, list]:
    """Threshold branches per swept value of one config key."""
    columns: dict[str, list] = {name: [] for name in sweep_column_names(variable)}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThinMediumWarning)
        for value in values:
            columns[variable].append(float(value))
            try:
                params = to_system_params(cfg.replace(**{variable: float(value)}))
            except (ValueError, ConfigError):
                params = None
            branches = (
                threshold_branches(params)
                if params is not None
                else dict.fromkeys(BRANCHES)
            )
            for branch in BRANCHES:
                res = branches[branch]
                s0 = res.s0_th if res is not None and res.exists else None
                if s0 is not None and not (np.isfinite(s0) and s0 > 0):
                    s0 = None
                intensity = (
                    sat_to_intensity(s0, params.delta, params.species)
                    if s0 is not None
                    else None
                )
                columns[f"s0_{branch}"].append(s0)
                columns[f"i_{branch}_mW_cm2"].append(intensity)
                columns[f"exists_{branch}"].append(s0 is not None)
    return columns


def sweep_values(cfg: RunConfig) -> np.ndarray:
    if cfg.sweep_log:
        if cfg.sweep_start <= 0 or cfg.sweep_stop <= 0:
            raise ConfigError("sweep_log needs positive sweep_start/sweep_stop")
        return np.geomspace(cfg.sweep_start, cfg.sweep_stop, cfg.sweep_points)
    return np.linspace(cfg.sweep_start, cfg.sweep_stop, cfg.sweep_points)


@dataclass(frozen=True)
class TableSpec:
    """One output table plus how to render it."""

    stem: str
    x_key: str
    columns: dict
    notes: tuple[str, ...] = ()
    logx: bool = False
    logy: bool = True
    kind: str = "thresholds"  # thresholds | rates


def _threshold_spec(cfg: RunConfig, stem: str, variable: str,
                    values: np.ndarray, notes: tuple[str, ...] = (),
                    logx: bool = False) -> TableSpec:
    fixed = (
        f"fixed: delta = {cfg.delta}, b0 = {cfg.b0}, "
        f"T = {cfg.temperature_uK} uK, period = {cfg.lattice_period_um} um, "
        f"R = {cfg.reflectivity}, s_m = {cfg.molasses_sat}"
    )
    return TableSpec(
        stem=stem,
        x_key=variable,
        columns=threshold_table(cfg, variable, values),
        notes=notes + (fixed,),
        logx=logx,
    )


def build_figure(cfg: RunConfig, name: str) -> list[TableSpec]:
    """Tables for one named report figure.

    Figure-specific parameter values act as defaults: any key the user
    set explicitly (file or flag) wins over the figure's own value.
    """
    points = cfg.points
    if name == "fig4":
        return [_rate_comparison_spec(cfg)]
    if name == "fig5a":
        specs = []
        b0_values = (cfg.b0,) if "b0" in cfg.provided else (80.0, 70.0)
        for b0 in b0_values:
            sub = cfg.replace(b0=b0).with_defaults(delta=-8.6)
            specs.append(
                _threshold_spec(
                    sub,
                    f"fig5a_b0{b0:g}",
                    "temperature_uK",
                    np.linspace(100.0, 300.0, points),
                    notes=(f"pump thresholds against temperature at b0 = {b0:g}",),
                )
            )
        return specs
    if name == "fig5b":
        sub = cfg.with_defaults(b0=69.31, delta=-8.6)
        return [
            _threshold_spec(
                sub,
                "fig5b",
                "temperature_uK",
                np.linspace(100.0, 300.0, points),
                notes=("pump thresholds against temperature just above the "
                       "optical-density cutoff of the magnetic branch",),
            )
        ]
    if name == "fig6":
        sub = cfg.with_defaults(temperature_uK=150.0, b0=80.0, delta=-8.6)
        return [
            _threshold_spec(
                sub,
                "fig6",
                "lattice_period_um",
                np.geomspace(5.0, 300.0, points),
                notes=("pump thresholds against lattice period; the magnetic "
                       "and optomechanical branches swap places at small "
                       "periods",),
                logx=True,
            )
        ]
    if name == "fig7":
        sub = cfg.with_defaults(lattice_period_um=100.0, temperature_uK=150.0,
                                b0=80.0, delta=-8.6)
        return [
            _threshold_spec(
                sub,
                "fig7",
                "molasses_sat",
                np.linspace(0.0, 3e-3, points),
                notes=("pump thresholds against molasses saturation; "
                       "repumping damps only the orientation branches",),
            )
        ]
    raise ConfigError(f"unknown figure '{name}'; pick from {', '.join(FIGURES)}")


def _rate_comparison_spec(cfg: RunConfig) -> TableSpec:
    """Ballistic against diffusive relaxation rates per lattice period."""
    lam_um = np.geomspace(10.0, 1000.0, cfg.points)
    columns: dict[str, list] = {"lattice_period_um": [float(v) for v in lam_um]}
    notes = ["grating wash-out rate per transport model [1/s]"]
    for t_uk, diff in RATE_FIGURE_PAIRS:
        temperature = t_uk * 1e-6
        label = f"{t_uk:g}uK"
        columns[f"r_{label}"] = [
            ballistic_rate(v * 1e-6, temperature) for v in lam_um
        ]
        columns[f"dq2_{label}"] = [
            diff * (2.0 * np.pi / (v * 1e-6)) ** 2 for v in lam_um
        ]
        notes.append(
            f"dq2_{label} uses the measured transport fit D = {diff:g} m^2/s"
        )
    return TableSpec(
        stem="fig4",
        x_key="lattice_period_um",
        columns=columns,
        notes=tuple(notes),
        logx=True,
        logy=True,
        kind="rates",
    )
