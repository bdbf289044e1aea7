"""Split-step integrator: exactness, conservation, symmetry, contracts."""

import os
import warnings

import numpy as np
import pytest

from magopt import (
    AtomicState,
    GrowthFitError,
    IntegrationAbort,
    SimConfig,
    SystemParams,
    ValidityWarning,
    closed_loop_pump,
    default_timestep,
    growth_rate_density,
    growth_rate_orientation,
    measure_growth_rate,
    rhs,
    run,
    seed_perturbation,
    step,
    threshold_density,
    threshold_orientation,
    uniform_state,
)
from magopt.output import read_snapshot, read_table


def test_uniform_state_is_a_fixed_point(grid4, params):
    p = params.replace(pump_sat=0.002)
    state = uniform_state(grid4)
    dt = default_timestep(grid4, p)
    for i in range(20):
        state = step(state, grid4, p, dt)
    assert np.array_equal(state.rho, np.ones(grid4.shape))
    assert np.array_equal(state.w, np.zeros(grid4.shape))
    assert state.time == pytest.approx(20 * dt, rel=1e-12)


def test_unpumped_density_mode_decays_diffusively(grid4, params):
    # with no light the split map reduces to the exact diffusion
    # semigroup, so a seeded mode decays by exp(-D q^2 t) to roundoff
    q = params.q
    state = seed_perturbation(
        uniform_state(grid4), grid4, q, 1e-3, target="density"
    )
    dt = 2e-7
    n = 400
    for i in range(n):
        state = step(state, grid4, params, dt)
    d = params.molasses().diffusion
    expected = 5e-4 * np.exp(-d * q * q * n * dt)
    assert grid4.mode_amplitude(state.rho, q) == pytest.approx(
        expected, rel=1e-12
    )
    assert np.array_equal(state.w, np.zeros(grid4.shape))


def test_unpumped_ballistic_orientation_decay(grid4, params):
    q = params.q
    state = seed_perturbation(
        uniform_state(grid4), grid4, q, 1e-3, target="orientation"
    )
    rho_before = state.rho.copy()
    dt = 2e-7
    n = 300
    for i in range(n):
        state = step(
            state, grid4, params, dt,
            include_optomech=False, relaxation="ballistic",
        )
    rate = params.ballistic()
    assert grid4.mode_amplitude(state.w, q) == pytest.approx(
        5e-4 * np.exp(-rate * n * dt), rel=1e-12
    )
    # ballistic wash-out acts on the orientation only
    assert np.array_equal(state.rho, rho_before)


def test_ballistic_with_optomech_rejected(grid4, params):
    state = uniform_state(grid4)
    with pytest.raises(ValueError):
        step(state, grid4, params, 1e-7, relaxation="ballistic")


def test_rhs_matches_lsa_rate_density(grid4, params):
    q = params.q
    th = threshold_density(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    state = seed_perturbation(
        uniform_state(grid4), grid4, q, 1e-6, target="density"
    )
    pump = closed_loop_pump(grid4, state.rho, state.w, p)
    drho, _ = rhs(state, pump, p)
    cosx = np.cos(q * grid4.x)
    rate = float(np.vdot(cosx, drho) / np.vdot(cosx, state.rho - 1.0))
    analytic = growth_rate_density(q, p.p0, p, 1.0).rate
    assert rate == pytest.approx(analytic, rel=1e-6)


def test_rhs_matches_lsa_rate_orientation(grid4, params):
    q = params.q
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    state = seed_perturbation(
        uniform_state(grid4), grid4, q, 1e-6, target="orientation"
    )
    pump = closed_loop_pump(grid4, state.rho, state.w, p)
    _, dw = rhs(state, pump, p)
    cosx = np.cos(q * grid4.x)
    rate = float(np.vdot(cosx, dw) / np.vdot(cosx, state.w))
    analytic = growth_rate_orientation(q, p.p0, p.p_m, p, 1.0).rate
    assert rate == pytest.approx(analytic, rel=1e-6)


def test_mean_density_is_conserved_when_driven(grid4, params):
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    cfg = SimConfig(grid=grid4, n_steps=2000, snapshot_every=200,
                    amplitude=1e-3)
    result = run(cfg, p)
    drift = np.abs(np.asarray(result.diagnostics.mean_rho) - 1.0).max()
    assert drift < 1e-13


def test_density_seed_keeps_orientation_identically_zero(grid64, params):
    th = threshold_density(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    cfg = SimConfig(grid=grid64, n_steps=300, snapshot_every=100,
                    target="density", amplitude=1e-6)
    result = run(cfg, p)
    assert np.array_equal(result.state.w, np.zeros(grid64.shape))
    # the cosine seed carries one-sided mode amplitude 5e-7 and grows
    # at the analytic density rate
    analytic = growth_rate_density(params.q, p.p0, p, 1.0).rate
    expected = 5e-7 * np.exp(analytic * result.state.time)
    assert grid64.mode_amplitude(result.state.rho, params.q) == pytest.approx(
        expected, rel=1e-4
    )


def test_spin_flip_equivariance_of_rhs(grid4, params):
    p = params.replace(pump_sat=0.002)
    q = params.q
    state = seed_perturbation(
        uniform_state(grid4), grid4, q, 1e-3, target="orientation"
    )
    flipped = AtomicState(rho=state.rho.copy(), w=-state.w)
    pump = closed_loop_pump(grid4, state.rho, state.w, p)
    pump_f = closed_loop_pump(grid4, flipped.rho, flipped.w, p)
    drho, dw = rhs(state, pump, p)
    drho_f, dw_f = rhs(flipped, pump_f, p)
    assert np.abs(drho_f - drho).max() <= 1e-10 * max(np.abs(drho).max(), 1.0)
    assert np.abs(dw_f + dw).max() <= 1e-10 * np.abs(dw).max()


def test_spin_flip_equivariance_of_full_run(grid4, params):
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    dt = default_timestep(grid4, p)
    seed = seed_perturbation(
        uniform_state(grid4), grid4, params.q, 1e-3, target="orientation"
    )
    a = AtomicState(rho=seed.rho.copy(), w=seed.w.copy())
    b = AtomicState(rho=seed.rho.copy(), w=-seed.w)
    for i in range(200):
        a = step(a, grid4, p, dt)
        b = step(b, grid4, p, dt)
    scale = np.abs(a.w).max()
    assert np.abs(a.w + b.w).max() <= 1e-10 * scale
    assert np.abs(a.rho - b.rho).max() <= 1e-10


def test_orientation_seed_drives_density_at_second_harmonic(grid4, params):
    # the q components of the two pump gratings cancel in the total
    # force, so the density response appears at 2q only
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    state = seed_perturbation(
        uniform_state(grid4), grid4, params.q, 1e-3, target="orientation"
    )
    dt = default_timestep(grid4, p)
    for i in range(500):
        state = step(state, grid4, p, dt)
    assert grid4.mode_amplitude(state.rho, params.q) < 1e-14
    assert grid4.mode_amplitude(state.rho, 2 * params.q) > 1e-11


def test_timestep_halving_reduces_error_fourth_fold(grid4, params):
    # Strang splitting with a midpoint core is second order in dt
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    q = params.q

    def final_amp(dt, n):
        state = seed_perturbation(
            uniform_state(grid4), grid4, q, 1e-4, target="orientation"
        )
        for i in range(n):
            state = step(state, grid4, p, dt)
        return grid4.mode_amplitude(state.w, q)

    t_total = 4e-5
    coarse = final_amp(4e-7, round(t_total / 4e-7))
    fine = final_amp(2e-7, round(t_total / 2e-7))
    finest = final_amp(1e-7, round(t_total / 1e-7))
    err_coarse = abs(coarse - finest)
    err_fine = abs(fine - finest)
    # anchoring the error at the finest level, a second-order scheme
    # gives (4^2 - 1) / (2^2 - 1) = 5
    assert err_coarse / err_fine == pytest.approx(5.0, rel=0.05)


def test_growth_measurement_against_theory(grid4, params):
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    cfg = SimConfig(grid=grid4, n_steps=3000, snapshot_every=250,
                    amplitude=1e-6)
    result = run(cfg, p)
    fit = measure_growth_rate(result.diagnostics, params.q,
                              field="orientation")
    analytic = growth_rate_orientation(params.q, p.p0, p.p_m, p, 1.0).rate
    assert fit.rate == pytest.approx(analytic, rel=1e-4)
    assert fit.n_points == 13
    assert fit.residual < 1e-6


def test_mirror_at_half_talbot_turns_off_the_drive(grid4, params):
    # at twice the quarter-Talbot distance sin(Theta) = 0 and the
    # orientation decays at the full pump-equilibration rate
    th = threshold_orientation(params, 1.0)
    p = params.replace(
        pump_sat=2.0 * th.s0_th,
        mirror_distance=2.0 * params.mirror_distance,
    )
    cfg = SimConfig(grid=grid4, n_steps=900, snapshot_every=100,
                    amplitude=1e-6)
    result = run(cfg, p)
    fit = measure_growth_rate(result.diagnostics, params.q,
                              field="orientation")
    analytic = growth_rate_orientation(params.q, p.p0, p.p_m, p, 0.0).rate
    assert analytic < -2e4
    assert fit.rate == pytest.approx(analytic, rel=1e-4)


def test_runs_are_deterministic(grid4, params):
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    cfg = SimConfig(grid=grid4, n_steps=400, snapshot_every=100,
                    perturbation="noise", amplitude=1e-6, seed=11)
    one = run(cfg, p)
    two = run(cfg, p)
    assert np.array_equal(one.state.rho, two.state.rho)
    assert np.array_equal(one.state.w, two.state.w)
    assert one.diagnostics.amp_w_q == two.diagnostics.amp_w_q


def test_noise_perturbation_contract(grid4, params):
    state = seed_perturbation(
        uniform_state(grid4), grid4, params.q, 1e-6, target="noise", seed=7
    )
    again = seed_perturbation(
        uniform_state(grid4), grid4, params.q, 1e-6, target="noise", seed=7
    )
    other = seed_perturbation(
        uniform_state(grid4), grid4, params.q, 1e-6, target="noise", seed=8
    )
    assert np.array_equal(state.w, again.w)
    assert not np.array_equal(state.w, other.w)
    assert np.std(state.w) == pytest.approx(1e-6, rel=1e-9)
    assert np.mean(state.rho) == pytest.approx(1.0, abs=1e-18)
    # the seed must live inside the de-aliased band
    spec = np.abs(np.fft.fft(state.w)) / grid4.n
    cutoff = (grid4.n + 2) // 3 - 1
    assert spec[cutoff + 1:grid4.n - cutoff].max() < 1e-20


def test_seed_amplitude_zero_returns_copy(grid4, params):
    base = uniform_state(grid4)
    state = seed_perturbation(base, grid4, params.q, 0.0)
    assert np.array_equal(state.rho, base.rho)
    assert np.array_equal(state.w, base.w)
    with pytest.raises(ValueError):
        seed_perturbation(base, grid4, params.q, 1e-6, target="bogus")


def test_default_timestep_respects_both_limits(grid4, params):
    p = params.replace(pump_sat=0.02)
    dt = default_timestep(grid4, p)
    assert dt == pytest.approx(1.4289661288798597e-07, rel=1e-9)
    d = p.molasses().diffusion
    assert dt * d * grid4.k_squared_max <= 0.1 * (1 + 1e-12)


def test_oversized_timestep_aborts(grid4, params):
    p = params.replace(pump_sat=0.02)
    cfg = SimConfig(grid=grid4, dt=1e-4, n_steps=10, snapshot_every=5)
    with pytest.raises(IntegrationAbort, match="too large"):
        run(cfg, p)


def test_negative_population_aborts(grid4, params):
    p = params.replace(pump_sat=0.002)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        cfg = SimConfig(grid=grid4, n_steps=50, snapshot_every=10,
                        target="density", amplitude=1.5)
        with pytest.raises(IntegrationAbort, match="negative"):
            run(cfg, p)


def test_validity_warning_on_large_phase_modulation(grid4, params):
    p = params.replace(pump_sat=0.0001)
    cfg = SimConfig(grid=grid4, n_steps=20, snapshot_every=10,
                    target="density", amplitude=0.6)
    with pytest.warns(ValidityWarning):
        run(cfg, p)


def test_growth_fit_error_contracts(grid4, params):
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    short = SimConfig(grid=grid4, n_steps=500, snapshot_every=250,
                      amplitude=1e-6)
    result = run(short, p)
    with pytest.raises(GrowthFitError, match="snapshots"):
        measure_growth_rate(result.diagnostics, params.q,
                            field="orientation")
    with pytest.raises(ValueError):
        measure_growth_rate(result.diagnostics, 1.5 * params.q)
    big = SimConfig(grid=grid4, n_steps=2000, snapshot_every=200,
                    amplitude=2e-2)
    result = run(big, p)
    with pytest.raises(GrowthFitError, match="linear"):
        measure_growth_rate(result.diagnostics, params.q,
                            field="orientation")


def test_wide_band_density_run_leaves_linear_regime(grid4, params):
    # above the density threshold the drive grows as k^2 along the
    # Talbot-resonant bands, so on a broad grid the highest re-imaged
    # band overruns the seeded mode from roundoff; this documents that
    # the truncated thin-medium model has no ultraviolet cutoff
    th = threshold_density(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    cfg = SimConfig(grid=grid4, n_steps=4000, snapshot_every=250,
                    target="density", amplitude=1e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        result = run(cfg, p)
    with pytest.raises(GrowthFitError, match="linear"):
        measure_growth_rate(result.diagnostics, params.q, field="density")


def test_run_writes_snapshots_and_diagnostics(grid4, params, tmp_path):
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    outdir = str(tmp_path / "run")
    cfg = SimConfig(grid=grid4, n_steps=200, snapshot_every=100,
                    amplitude=1e-6, outdir=outdir,
                    header_lines=("case: unit-test",))
    result = run(cfg, p)
    names = sorted(os.listdir(outdir))
    assert names == [
        "diagnostics.csv",
        "snapshot_0000000.dat",
        "snapshot_0000100.dat",
        "snapshot_0000200.dat",
    ]
    rho, w, info = read_snapshot(os.path.join(outdir, "snapshot_0000200.dat"))
    assert np.array_equal(rho, result.state.rho)
    assert np.array_equal(w, result.state.w)
    assert info["time"] == result.state.time
    comments, columns, names = read_table(
        os.path.join(outdir, "diagnostics.csv")
    )
    assert "case: unit-test" in comments
    assert names[0] == "step"
    assert [int(s) for s in columns["step"]] == [0, 100, 200]


def test_two_dimensional_run_grows_at_the_same_rate(params):
    from magopt import TransverseGrid

    grid = TransverseGrid(dims=2, n=64, length=4 * params.lattice_period)
    th = threshold_orientation(params, 1.0)
    p = params.replace(pump_sat=2.0 * th.s0_th)
    cfg = SimConfig(grid=grid, n_steps=2000, snapshot_every=250,
                    amplitude=1e-6)
    result = run(cfg, p)
    fit = measure_growth_rate(result.diagnostics, params.q,
                              field="orientation")
    analytic = growth_rate_orientation(params.q, p.p0, p.p_m, p, 1.0).rate
    assert fit.rate == pytest.approx(analytic, rel=1e-3)
