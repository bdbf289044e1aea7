"""Command line interface.

Five commands share one flat configuration namespace (see
:mod:`magopt.config`): ``lsa`` prints a threshold report, ``sweep`` and
``figures`` write threshold tables as CSV (with a png next to each
unless ``render_plots`` is off), ``simulate`` integrates the nonlinear
fields and writes snapshots plus a diagnostics table, and ``growth``
measures one linear growth rate against the closed-form prediction.

Exit codes: 0 done, 1 bad configuration, 2 runtime abort (integrator
violation, missing crossover, unusable growth fit).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import (
    SCHEMA,
    ConfigError,
    RunConfig,
    load_config,
    parse_value,
    to_sim_config,
    to_system_params,
)
from .dynamics import (
    GrowthFitError,
    IntegrationAbort,
    measure_growth_rate,
    run,
)
from .lsa import (
    NoCrossoverError,
    crossover_molasses,
    crossover_period,
    growth_rate_density,
    growth_rate_orientation,
    min_b0,
    optimal_sin_theta,
    threshold_density,
    threshold_orientation,
)
from .output import fmt, header_comments, write_table
from .physics import sat_to_intensity, talbot_phase
from .reports import (
    FIGURES,
    TableSpec,
    build_figure,
    sweep_values,
    threshold_table,
)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE",
                        help="key = value config file")
    for key, spec in SCHEMA.items():
        parser.add_argument(_flag(key), dest=f"opt_{key}", metavar="V",
                            help=f"{spec.help} (default {spec.default})")


def _collect_config(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for key in SCHEMA:
        raw = getattr(args, f"opt_{key}", None)
        if raw is not None:
            overrides[key] = parse_value(key, raw, _flag(key))
    return load_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="magopt",
                     description="thresholds and dynamics of magnetic and "
                                 "optomechanical patterns under mirror "
                                 "feedback")
    parser.add_argument("--version", action="version",
                        version=f"magopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("lsa", "print the threshold report at one parameter point"),
        ("figures", "write the standard report tables"),
        ("sweep", "write a threshold table across one parameter"),
        ("simulate", "integrate the nonlinear fields"),
        ("growth", "measure one linear growth rate against theory"),
    ):
        p = sub.add_parser(name, help=doc, description=doc)
        if name == "figures":
            p.add_argument("which", choices=FIGURES + ("all",),
                           help="which figure table(s) to write")
        _add_config_flags(p)
    return parser


def _effective_command(argv: list[str]) -> str:
    return " ".join(["magopt"] + argv)


def _headers(argv: list[str], cfg: RunConfig) -> list[str]:
    return header_comments(_effective_command(argv), cfg.settings())


def _disp(value: float) -> str:
    """Compact number format for the on-screen report (files keep 12 digits)."""
    return f"{value:.6g}"


def _print_branch_report(cfg: RunConfig) -> None:
    params = to_system_params(cfg)
    if params.delta == 0:
        raise ValueError("delta must be non-zero for a finite phase shift")
    if params.reflectivity == 0:
        raise ValueError("no feedback: reflectivity must be positive")
    mol = params.molasses()
    phases = params.phases()
    print(f"magopt {__version__} threshold report")
    print(
        f"delta = {fmt(params.delta)}, b0 = {fmt(params.b0)}, "
        f"R = {fmt(params.reflectivity)}, T = {fmt(cfg.temperature_uK)} uK, "
        f"period = {fmt(cfg.lattice_period_um)} um, "
        f"mirror d = {_disp(params.mirror_distance * 1e3)} mm, "
        f"s_m = {fmt(params.molasses_sat)}"
    )
    print(
        f"phi_lin = {_disp(phases.phi_lin)} rad, "
        f"sigma = {_disp(params.sigma())}, "
        f"D = {_disp(mol.diffusion)} m^2/s"
    )
    sin_density = (
        optimal_sin_theta(params.delta, "density")
        if cfg.sin_theta == "auto"
        else cfg.sin_theta
    )
    sin_orient = (
        optimal_sin_theta(params.delta, "orientation")
        if cfg.sin_theta == "auto"
        else cfg.sin_theta
    )
    density = threshold_density(params, sin_theta=sin_density)
    orientation = threshold_orientation(
        params,
        sin_theta=sin_orient,
        relaxation=cfg.relaxation,
        include_optomech=cfg.include_optomech,
    )
    magnetic = threshold_orientation(
        params, sin_theta=sin_orient, relaxation=cfg.relaxation,
        include_optomech=False,
    )
    print(f"{'branch':<22}{'exists':<8}{'s0_th':<14}{'I_th [mW/cm^2]':<16}"
          f"{'sin_theta':<10}")
    rows = (
        ("density (rho)", density, sin_density),
        ("orientation (w)", orientation, sin_orient),
        ("orientation, no force", magnetic, sin_orient),
    )
    for label, res, sin_theta in rows:
        s0 = _disp(res.s0_th) if res.exists else ""
        intensity = (
            _disp(sat_to_intensity(res.s0_th, params.delta, params.species))
            if res.exists
            else ""
        )
        print(f"{label:<22}{'yes' if res.exists else 'no':<8}{s0:<14}"
              f"{intensity:<16}{_disp(sin_theta):<10}")
    if params.pump_sat > 0:
        q = params.q
        gd = growth_rate_density(q, params.p0, params, sin_density)
        go = growth_rate_orientation(
            q, params.p0, params.p_m, params, sin_orient,
            relaxation=cfg.relaxation, include_optomech=cfg.include_optomech,
        )
        print(f"growth at s0 = {fmt(params.pump_sat)}: "
              f"density {_disp(gd.rate)} 1/s, "
              f"orientation {_disp(go.rate)} 1/s")
    print(f"min b0 for the orientation branch: "
          f"{_disp(min_b0(params.delta, params.reflectivity))}")
    try:
        lam = crossover_period(params, sin_theta=sin_orient)
        print(f"threshold crossover period: {_disp(lam * 1e6)} um")
    except (NoCrossoverError, ValueError) as exc:
        print(f"threshold crossover period: none ({exc})")
    if params.molasses_sat == 0:
        try:
            s_m = crossover_molasses(params, sin_theta=sin_orient)
            print(f"molasses saturation lifting the orientation branch to "
                  f"the density one: {_disp(s_m)}")
        except (NoCrossoverError, ValueError) as exc:
            print(f"molasses crossover: none ({exc})")


def _write_spec_files(spec, outdir: str, headers: list[str],
                      render: bool) -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, f"{spec.stem}.csv")
    write_table(csv_path, spec.columns, headers + list(spec.notes))
    written = [csv_path]
    if render:
        from . import plots

        png_path = os.path.join(outdir, f"{spec.stem}.png")
        plots.render_table(spec, png_path)
        written.append(png_path)
    return written


def _cmd_figures(args, argv: list[str]) -> int:
    cfg = _collect_config(args)
    names = FIGURES if args.which == "all" else (args.which,)
    written: list[str] = []
    for name in names:
        for spec in build_figure(cfg, name):
            written += _write_spec_files(spec, cfg.outdir, _headers(argv, cfg),
                                         cfg.render_plots)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args, argv: list[str]) -> int:
    cfg = _collect_config(args)
    variable = cfg.sweep_variable
    values = sweep_values(cfg)
    columns = threshold_table(cfg, variable, values)
    spec = TableSpec(
        stem=f"sweep_{variable}",
        x_key=variable,
        columns=columns,
        notes=(f"threshold branches against {variable}",),
        logx=bool(cfg.sweep_log),
    )
    written = _write_spec_files(spec, cfg.outdir, _headers(argv, cfg),
                                cfg.render_plots)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_simulate(args, argv: list[str]) -> int:
    cfg = _collect_config(args)
    params = to_system_params(cfg)
    sim = to_sim_config(cfg, outdir=cfg.outdir,
                        header_lines=tuple(_headers(argv, cfg)))
    result = run(sim, params)
    diags = result.diagnostics
    print(f"wrote {os.path.join(cfg.outdir, 'diagnostics.csv')} "
          f"({len(diags.step)} snapshots)")
    if cfg.write_snapshots:
        print(f"wrote {len(result.snapshot_steps)} snapshot files in "
              f"{cfg.outdir}")
    if cfg.render_plots:
        from . import plots

        diag_png = os.path.join(cfg.outdir, "diagnostics.png")
        plots.render_diagnostics(diags.columns(), diag_png)
        state_png = os.path.join(cfg.outdir, "final_state.png")
        plots.render_state(result.state.rho, result.state.w,
                           sim.grid.spacing, state_png)
        print(f"wrote {diag_png}")
        print(f"wrote {state_png}")
    print(
        f"final t = {fmt(result.state.time)} s: "
        f"amp_rho_q = {fmt(diags.amp_rho_q[-1])}, "
        f"amp_w_q = {fmt(diags.amp_w_q[-1])}, "
        f"min rho_pm = {fmt(diags.min_rho_pm[-1])}, "
        f"mean rho = {fmt(diags.mean_rho[-1])}"
    )
    return 0


def _growth_pump(cfg: RunConfig, params, sin_theta: float):
    """Pump for the growth command: (params with pump set, threshold s0
    or None when the pump was given directly)."""
    if cfg.pump_scale == "auto":
        if params.pump_sat <= 0:
            raise ConfigError("growth needs pump_sat > 0 or pump_scale")
        return params, None
    if cfg.growth_mode == "density":
        th = threshold_density(params, sin_theta=sin_theta)
    else:
        th = threshold_orientation(
            params, sin_theta=sin_theta, relaxation=cfg.relaxation,
            include_optomech=cfg.include_optomech,
        )
    if not th.exists:
        raise ValueError(
            f"no finite {cfg.growth_mode} threshold at these parameters; "
            "set pump_sat directly"
        )
    return params.replace(pump_sat=cfg.pump_scale * th.s0_th), th.s0_th


def _cmd_growth(args, argv: list[str]) -> int:
    cfg = _collect_config(args)
    if cfg.growth_mode == "density" and not cfg.include_optomech:
        raise ConfigError("density growth needs include_optomech = true")
    cfg = cfg.with_defaults(perturbation_target=cfg.growth_mode)
    if cfg.growth_mode == "density":
        # Above the density threshold every Talbot-resonant band grows, with
        # rates scaling as k^2, so a wide spectral band is overrun by
        # grid-scale modes seeded from roundoff long before the tracked mode
        # leaves the linear regime.  Placing the lattice mode near the top of
        # the de-aliased band keeps it the dominant one.
        cfg = cfg.with_defaults(domain_periods=64)
    params = to_system_params(cfg)
    q = params.q
    sin_theta = float(
        np.sin(talbot_phase(q, params.mirror_distance, params.species))
    )
    params, threshold_s0 = _growth_pump(cfg, params, sin_theta)
    sim = to_sim_config(cfg, outdir=cfg.outdir,
                        header_lines=tuple(_headers(argv, cfg)))
    result = run(sim, params)
    window = None
    if cfg.fit_skip > 0:
        times = result.diagnostics.time
        if cfg.fit_skip >= len(times):
            raise GrowthFitError("fit_skip leaves no snapshots to fit")
        window = (times[cfg.fit_skip], times[-1])
    fit = measure_growth_rate(result.diagnostics, q, fit_window=window,
                              field=cfg.growth_mode)
    if cfg.growth_mode == "density":
        analytic = growth_rate_density(q, params.p0, params, sin_theta).rate
    else:
        analytic = growth_rate_orientation(
            q, params.p0, params.p_m, params, sin_theta,
            relaxation=cfg.relaxation, include_optomech=cfg.include_optomech,
        ).rate
    rel_err = abs(fit.rate - analytic) / abs(analytic) if analytic else float("inf")
    scale_note = ""
    if threshold_s0 is not None:
        scale_note = (f" ({fmt(cfg.pump_scale)} x threshold s0 = "
                      f"{fmt(threshold_s0)})")
    print(f"mode = {cfg.growth_mode}, q = {fmt(q)} rad/m, "
          f"sin_theta = {fmt(sin_theta)}, s0 = {fmt(params.pump_sat)}"
          f"{scale_note}")
    print(f"measured rate = {fmt(fit.rate)} 1/s, "
          f"analytic rate = {fmt(analytic)} 1/s, "
          f"relative error = {fmt(rel_err)}")
    print(f"fit: {fit.n_points} snapshots, rms residual = {fmt(fit.residual)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "lsa":
            _print_branch_report(_collect_config(args))
            return 0
        if args.command == "figures":
            return _cmd_figures(args, argv)
        if args.command == "sweep":
            return _cmd_sweep(args, argv)
        if args.command == "simulate":
            return _cmd_simulate(args, argv)
        if args.command == "growth":
            return _cmd_growth(args, argv)
        raise ConfigError(f"unknown command {args.command}")
    except SystemExit as exc:  # argparse --help / --version
        code = exc.code
        return int(code) if code else 0
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationAbort, NoCrossoverError, GrowthFitError) as exc:
        print(f"abort: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
