"""Run configuration: one flat key = value namespace.

The same keys are accepted from a config file (``key = value`` lines,
``#`` comments) and as command-line flags (``--key-with-dashes value``);
flags override the file, the file overrides the built-in defaults.
Values carry bench units (uK, um, mm, saturation parameters) and are
converted to SI only when building :class:`~magopt.params.SystemParams`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .dynamics import SimConfig
from .optics import TransverseGrid
from .params import SystemParams


class ConfigError(ValueError):
    """Bad key, value, or combination in a config file or flag."""


_AUTO = "auto"


@dataclass(frozen=True)
class _Key:
    default: object
    kind: str  # float | floatauto | int | bool | choice | str
    choices: tuple[str, ...] = ()
    low: float | None = None
    high: float | None = None
    help: str = ""


SCHEMA: dict[str, _Key] = {
    # cloud, pump and mirror
    "delta": _Key(-8.6, "float", help="pump detuning in linewidths"),
    "b0": _Key(80.0, "float", low=1e-12, help="resonant optical density"),
    "reflectivity": _Key(1.0, "float", low=0.0, high=1.0,
                         help="mirror intensity reflectivity"),
    "mirror_distance_mm": _Key(_AUTO, "floatauto", low=0.0,
                               help="cloud-mirror distance, or auto"),
    "cloud_length_mm": _Key(2.0, "float", low=1e-9, help="medium thickness"),
    "lattice_period_um": _Key(100.0, "float", low=1e-6,
                              help="transverse pattern period"),
    "temperature_uK": _Key(150.0, "float", low=1e-6, help="cloud temperature"),
    "molasses_detuning": _Key(1.8, "float", low=1e-12,
                              help="molasses detuning in linewidths"),
    "molasses_sat": _Key(0.0, "float", low=0.0,
                         help="saturation parameter of one molasses beam"),
    "pump_sat": _Key(0.0, "float", low=0.0,
                     help="saturation parameter of the pump"),
    "molasses_efficiency": _Key(1.0, "float", low=1e-12,
                                help="scale on molasses orientation damping"),
    # analysis options
    "sin_theta": _Key(_AUTO, "floatauto", low=-1.0, high=1.0,
                      help="feedback phase sin(Theta), or auto for optimal"),
    "include_optomech": _Key(True, "bool",
                             help="keep density transport coupled in"),
    "relaxation": _Key("diffusive", "choice",
                       choices=("diffusive", "ballistic"),
                       help="orientation relaxation model"),
    # threshold sweeps
    "sweep_variable": _Key("temperature_uK", "choice",
                           choices=("delta", "b0", "reflectivity",
                                    "lattice_period_um", "temperature_uK",
                                    "molasses_detuning", "molasses_sat",
                                    "molasses_efficiency"),
                           help="config key swept across rows"),
    "sweep_start": _Key(100.0, "float", help="first swept value"),
    "sweep_stop": _Key(300.0, "float", help="last swept value"),
    "sweep_points": _Key(101, "int", low=1, help="number of sweep rows"),
    "sweep_log": _Key(False, "bool", help="log-spaced sweep values"),
    # report rendering
    "points": _Key(201, "int", low=2, help="resolution of figure tables"),
    "render_plots": _Key(True, "bool", help="render png next to each csv"),
    # simulation
    "grid_points": _Key(256, "int", low=4, help="grid points per axis"),
    "domain_periods": _Key(4, "int", low=1,
                           help="domain length in lattice periods"),
    "dims": _Key(1, "int", low=1, high=2, help="transverse dimensions"),
    "dt_s": _Key(_AUTO, "floatauto", low=0.0, help="time step, or auto"),
    "n_steps": _Key(10000, "int", low=1, help="number of time steps"),
    "snapshot_every": _Key(250, "int", low=1, help="steps between snapshots"),
    "rng_seed": _Key(0, "int", help="seed for noise perturbations"),
    "perturbation": _Key("mode", "choice", choices=("mode", "noise"),
                         help="seed a single cosine mode or white noise"),
    "perturbation_target": _Key("orientation", "choice",
                                choices=("density", "orientation"),
                                help="field that receives the seed"),
    "perturbation_amplitude": _Key(1e-6, "float", low=0.0,
                                   help="seed amplitude"),
    "abort_on_violation": _Key(True, "bool",
                               help="stop when populations go negative"),
    "write_snapshots": _Key(True, "bool", help="write snapshot files"),
    # growth measurement
    "growth_mode": _Key("density", "choice",
                        choices=("density", "orientation"),
                        help="instability branch to drive and fit"),
    "pump_scale": _Key(_AUTO, "floatauto", low=0.0,
                       help="pump as multiple of the branch threshold; "
                            "auto uses pump_sat directly"),
    "fit_skip": _Key(0, "int", low=0,
                     help="snapshots dropped from the start of the fit"),
    # output
    "outdir": _Key("out", "str", help="directory for output files"),
}


def parse_value(key: str, text: str, where: str = "") -> object:
    """Parse one raw string against the schema; raises ConfigError."""
    spec = SCHEMA.get(key)
    prefix = f"{where}: " if where else ""
    if spec is None:
        raise ConfigError(f"{prefix}unknown key '{key}'")
    text = text.strip()
    kind = spec.kind
    if kind == "floatauto" and text.lower() == _AUTO:
        return _AUTO
    if kind in ("float", "floatauto"):
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(f"{prefix}{key}: expected a number, got '{text}'")
    elif kind == "int":
        try:
            value = int(text)
        except ValueError:
            raise ConfigError(f"{prefix}{key}: expected an integer, got '{text}'")
    elif kind == "bool":
        lowered = text.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{prefix}{key}: expected true/false, got '{text}'")
    elif kind == "choice":
        if text not in spec.choices:
            raise ConfigError(
                f"{prefix}{key}: must be one of {', '.join(spec.choices)}; "
                f"got '{text}'"
            )
        return text
    else:
        return text
    if spec.low is not None and value < spec.low:
        raise ConfigError(f"{prefix}{key}: {value} is below {spec.low}")
    if spec.high is not None and value > spec.high:
        raise ConfigError(f"{prefix}{key}: {value} is above {spec.high}")
    return value


@dataclass
class RunConfig:
    """Resolved configuration: every schema key has a value."""

    values: dict = field(default_factory=dict)
    provided: set = field(default_factory=set)

    def __post_init__(self) -> None:
        for key, spec in SCHEMA.items():
            self.values.setdefault(key, spec.default)

    def __getattr__(self, key: str):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key)

    def get(self, key: str):
        return self.values[key]

    def replace(self, **changes) -> "RunConfig":
        """Copy with the given keys set (and marked user-provided)."""
        for key in changes:
            if key not in SCHEMA:
                raise ConfigError(f"unknown key '{key}'")
        return RunConfig(
            {**self.values, **changes}, set(self.provided) | set(changes)
        )

    def with_defaults(self, **changes) -> "RunConfig":
        """Copy where the given keys are set only if not user-provided."""
        effective = {k: v for k, v in changes.items() if k not in self.provided}
        return RunConfig({**self.values, **effective}, set(self.provided))

    def settings(self) -> dict:
        return {key: self.values[key] for key in SCHEMA}

    def tag(self) -> str:
        text = ";".join(f"{k}={self.values[k]}" for k in SCHEMA)
        return hashlib.md5(text.encode()).hexdigest()[:12]


def parse_config_file(path: str) -> dict:
    """Read ``key = value`` lines; unknown keys or bad values raise
    ConfigError naming the file and line."""
    values: dict = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, text = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        values[key.strip()] = parse_value(key.strip(), text, f"{path}:{lineno}")
    return values


def load_config(path: str | None = None,
                overrides: dict | None = None) -> RunConfig:
    """Defaults, then the config file, then explicit overrides."""
    values: dict = {}
    provided: set = set()
    if path is not None:
        file_values = parse_config_file(path)
        values.update(file_values)
        provided |= set(file_values)
    if overrides:
        for key in overrides:
            if key not in SCHEMA:
                raise ConfigError(f"unknown key '{key}'")
        values.update(overrides)
        provided |= set(overrides)
    return RunConfig(values, provided)


def to_system_params(cfg: RunConfig) -> SystemParams:
    """SystemParams in SI units from the bench-unit config values."""
    mirror = cfg.mirror_distance_mm
    return SystemParams(
        delta=cfg.delta,
        b0=cfg.b0,
        reflectivity=cfg.reflectivity,
        mirror_distance=None if mirror == _AUTO else mirror * 1e-3,
        cloud_length=cfg.cloud_length_mm * 1e-3,
        lattice_period=cfg.lattice_period_um * 1e-6,
        temperature=cfg.temperature_uK * 1e-6,
        molasses_detuning=cfg.molasses_detuning,
        molasses_sat=cfg.molasses_sat,
        pump_sat=cfg.pump_sat,
        molasses_efficiency=cfg.molasses_efficiency,
    )


def make_grid(cfg: RunConfig) -> TransverseGrid:
    return TransverseGrid.for_lattice(
        cfg.lattice_period_um * 1e-6,
        periods=cfg.domain_periods,
        n=cfg.grid_points,
        dims=cfg.dims,
    )


def to_sim_config(cfg: RunConfig, outdir: str | None = None,
                  header_lines: tuple = ()) -> SimConfig:
    return SimConfig(
        grid=make_grid(cfg),
        dt=None if cfg.dt_s == _AUTO else cfg.dt_s,
        n_steps=cfg.n_steps,
        snapshot_every=cfg.snapshot_every,
        seed=cfg.rng_seed,
        perturbation=cfg.perturbation,
        target=cfg.perturbation_target,
        amplitude=cfg.perturbation_amplitude,
        include_optomech=cfg.include_optomech,
        relaxation=cfg.relaxation,
        abort_on_violation=cfg.abort_on_violation,
        outdir=outdir,
        write_snapshots=cfg.write_snapshots,
        header_lines=tuple(header_lines),
    )
