"""Closed-form growth rates, thresholds, and crossover scans."""

import numpy as np
import pytest

from magopt import (
    NoCrossoverError,
    SystemParams,
    crossover_molasses,
    crossover_period,
    growth_rate_density,
    growth_rate_orientation,
    min_b0,
    optimal_sin_theta,
    threshold_density,
    threshold_orientation,
)

DQ2_150 = 1549.7448310466596  # D q^2 at 150 uK, 100 um


def test_density_threshold_oracles(params):
    for temperature, expected in (
        (100e-6, 0.012923456617936754),
        (150e-6, 0.019385184926905132),
        (200e-6, 0.025846913235873507),
        (300e-6, 0.038770369853810265),
    ):
        result = threshold_density(params.replace(temperature=temperature), 1.0)
        assert result.exists
        assert result.s0_th == pytest.approx(expected, rel=1e-12)


def test_density_threshold_is_period_independent(params):
    ref = threshold_density(params, 1.0).s0_th
    other = threshold_density(params.replace(lattice_period=200e-6), 1.0).s0_th
    assert other == pytest.approx(ref, rel=1e-14)


def test_orientation_threshold_oracles(params):
    for temperature, expected in (
        (100e-6, 0.0003810323385574382),
        (150e-6, 0.0005715485078361572),
        (200e-6, 0.0007620646771148764),
        (300e-6, 0.0011430970156723144),
    ):
        result = threshold_orientation(
            params.replace(temperature=temperature), 1.0
        )
        assert result.exists
        assert result.s0_th == pytest.approx(expected, rel=1e-12)
        assert result.denominator == pytest.approx(
            0.14226952049682487, rel=1e-12
        )


def test_orientation_threshold_without_optomech(params):
    result = threshold_orientation(params, 1.0, include_optomech=False)
    assert result.s0_th == pytest.approx(0.000575792643596423, rel=1e-12)
    assert result.denominator == pytest.approx(0.1412208597224096, rel=1e-12)
    # the optomechanical term lowers the threshold at negative detuning
    combined = threshold_orientation(params, 1.0)
    assert combined.s0_th < result.s0_th


def test_growth_rate_vanishes_at_threshold(params):
    q = params.q
    th = threshold_density(params, 1.0)
    at = params.replace(pump_sat=th.s0_th)
    assert abs(growth_rate_density(q, at.p0, at, 1.0).rate) < 1e-9 * DQ2_150
    th_o = threshold_orientation(params, 1.0)
    at_o = params.replace(pump_sat=th_o.s0_th)
    rate = growth_rate_orientation(q, at_o.p0, at_o.p_m, at_o, 1.0).rate
    assert abs(rate) < 1e-9 * DQ2_150


def test_growth_rates_scale_with_pump_margin(params):
    q = params.q
    th = threshold_density(params, 1.0)
    above = params.replace(pump_sat=2.0 * th.s0_th)
    below = params.replace(pump_sat=0.5 * th.s0_th)
    assert growth_rate_density(q, above.p0, above, 1.0).rate == pytest.approx(
        DQ2_150, rel=1e-10
    )
    assert growth_rate_density(q, below.p0, below, 1.0).rate == pytest.approx(
        -0.5 * DQ2_150, rel=1e-10
    )
    th_o = threshold_orientation(params, 1.0)
    above_o = params.replace(pump_sat=2.0 * th_o.s0_th)
    rate = growth_rate_orientation(
        q, above_o.p0, above_o.p_m, above_o, 1.0
    ).rate
    assert rate == pytest.approx(DQ2_150, rel=1e-10)


def test_growth_rate_decomposition_sums_to_rate(params):
    q = params.q
    at = params.replace(pump_sat=0.001, molasses_sat=1e-4)
    result = growth_rate_orientation(q, at.p0, at.p_m, at, 1.0)
    total = sum(result.decay_terms.values()) + sum(result.drive_terms.values())
    assert result.rate == pytest.approx(total, rel=1e-12)
    assert all(v < 0 for v in result.decay_terms.values())
    assert all(v > 0 for v in result.drive_terms.values())


def test_molasses_damping_raises_orientation_threshold(params):
    plain = threshold_orientation(params, 1.0).s0_th
    damped = threshold_orientation(
        params.replace(molasses_sat=1e-4), 1.0
    ).s0_th
    assert damped > plain
    # with p_m = 1905.9 1/s the threshold pump rate grows by the ratio
    # (D q^2 + 6 p_m) / (D q^2)
    assert damped / plain == pytest.approx(
        (DQ2_150 + 6 * 1905.8785992267841) / DQ2_150, rel=1e-10
    )


def test_detuning_sign_invariance_is_exact(params):
    # the drive is proportional to phi_lin * sigma, both odd in delta,
    # so flipping the detuning sign leaves the threshold bit-identical
    neg = threshold_density(params, 1.0)
    pos = threshold_density(params.replace(delta=8.6), 1.0)
    assert pos.s0_th == neg.s0_th


def test_min_b0_closed_form():
    assert min_b0(-8.6, 1.0) == pytest.approx(69.03255813953487, rel=1e-12)
    assert min_b0(-4.0, 1.0) == pytest.approx(32.5, rel=1e-12)
    assert min_b0(-17.2, 1.0) == pytest.approx(137.71627906976744, rel=1e-9)
    assert min_b0(-30.0, 1.0) == pytest.approx(240.06666666666666, rel=1e-9)


def test_min_b0_matches_existence_of_magnetic_branch(params):
    cutoff = min_b0(params.delta, params.reflectivity)
    below = threshold_orientation(
        params.replace(b0=cutoff - 0.05), 1.0, include_optomech=False
    )
    above = threshold_orientation(
        params.replace(b0=cutoff + 0.05), 1.0, include_optomech=False
    )
    assert not below.exists
    assert below.s0_th is None
    assert above.exists


def test_optimal_sin_theta_per_branch():
    assert optimal_sin_theta(-8.6, "density") == 1.0
    assert optimal_sin_theta(8.6, "density") == 1.0
    assert optimal_sin_theta(-8.6, "orientation") == 1.0
    assert optimal_sin_theta(8.6, "orientation") == -1.0


def test_crossover_period_oracle(params):
    period = crossover_period(params, 1.0)
    assert 14.9e-6 < period < 14.96e-6
    # below the crossover the density branch is cheaper than the
    # orientation one; above it the ordering flips
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        short = params.replace(lattice_period=0.9 * period)
        long = params.replace(lattice_period=1.1 * period)
        assert (
            threshold_density(short, 1.0).s0_th
            < threshold_orientation(short, 1.0).s0_th
        )
        assert (
            threshold_density(long, 1.0).s0_th
            > threshold_orientation(long, 1.0).s0_th
        )


def test_crossover_molasses_oracle(params):
    # the scan bisects to 1e-3 relative tolerance
    s_m = crossover_molasses(params, 1.0)
    assert s_m == pytest.approx(4.461e-4, rel=2e-3)
    lifted = params.replace(molasses_sat=s_m)
    assert threshold_orientation(lifted, 1.0).s0_th == pytest.approx(
        threshold_density(lifted, 1.0).s0_th, rel=1e-3
    )


def test_crossover_molasses_already_above(params):
    # near the b0 cutoff the orientation threshold is already far above
    # the density one, so no extra damping is needed
    assert crossover_molasses(params.replace(b0=69.05), 1.0) == 0.0


def test_crossover_period_error_without_orientation_branch(params):
    with pytest.raises((NoCrossoverError, ValueError)):
        crossover_period(params.replace(b0=60.0), 1.0)


def test_feedback_required():
    with pytest.raises(ValueError, match="feedback"):
        threshold_density(SystemParams(reflectivity=0.0), 1.0)
    with pytest.raises(ValueError, match="delta"):
        threshold_density(SystemParams(delta=0.0), 1.0)


def test_wrong_sign_drive_has_no_threshold(params):
    # at negative detuning a mirror placement with sin(Theta) = -1
    # converts density bunching into de-bunching
    result = threshold_density(params, -1.0)
    assert not result.exists
    assert result.denominator < 0
