"""Closed-form relations between pump light, spin pumping and atomic transport.

Conventions used throughout the package:

* detunings are dimensionless, in units of the natural linewidth;
* pump strengths are dimensionless saturation parameters ``s``, and the
  corresponding optical pumping rate is ``P = gamma * s / 2`` [1/s];
* intensities cross the API boundary in mW/cm^2, the unit in which
  saturation intensities are usually quoted;
* everything else is SI.

The level scheme is a J=1/2 -> J'=3/2 transition driven by the two
circular field components.  Each component couples to one ground-state
Zeeman sublevel through a strong transition and to the other through a
weak one; the relative line strength of the weak transition is exactly
1/3 and the optical pumping efficiency of the strong one is 2/9.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar, k as k_B

from .species import RB87, AtomSpecies

#: Relative line strength of the weak circular transition (J=1/2 -> J'=3/2).
A_WEAK = 1.0 / 3.0

#: Optical pumping efficiency of the strong circular transition.
A_PUMP = 2.0 / 9.0


@dataclass(frozen=True)
class TransitionCoefficients:
    """Line-strength factors and phase shifts of the driven transition.

    Attributes
    ----------
    a_weak : float
        Relative strength of the weak circular transition.
    a_pump : float
        Optical pumping efficiency of the strong circular transition.
    phi_s : float
        Phase shift a unit-density cloud imprints on the circular
        component that drives its strong transition [rad].
    phi_lin : float
        Phase shift the homogeneous, unpolarized cloud imprints on
        either component, ``phi_lin = (1 + a_weak)/2 * phi_s`` [rad].
    """

    a_weak: float
    a_pump: float
    phi_s: float
    phi_lin: float


@dataclass(frozen=True)
class MolassesDerived:
    """Transport coefficients of an optical molasses.

    Attributes
    ----------
    friction : float
        Velocity damping coefficient alpha [kg/s].
    diffusion : float
        Spatial diffusion constant ``D = k_B T / alpha`` [m^2/s].
    momentum_diffusion : float
        Momentum diffusion constant ``D_p = alpha k_B T`` [kg^2 m^2/s^3].
    """

    friction: float
    diffusion: float
    momentum_diffusion: float


def optomech_sigma(
    delta: float, temperature: float, species: AtomSpecies = RB87
) -> float:
    """Strength of dipole-force drift relative to thermal diffusion.

    The dimensionless ratio ``sigma = hbar * gamma * delta / (2 k_B T)``
    controls how strongly atoms drift along gradients of the optical
    pumping rate compared to how fast diffusion smears them out.  It is
    negative for red detuning (high-field seekers) and grows as the
    cloud gets colder.

    Parameters
    ----------
    delta : float
        Pump detuning in units of the linewidth.
    temperature : float
        Cloud temperature [K].

    Returns
    -------
    float
        sigma, dimensionless.
    """
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    return hbar * species.gamma * delta / (2.0 * k_B * temperature)


def phase_shifts(b0: float, delta: float) -> TransitionCoefficients:
    """Phase shifts imprinted by the cloud on the transmitted pump.

    For a cloud of resonant optical density ``b0`` at detuning ``delta``
    the homogeneous single-pass phase shift of either circular component
    is ``phi_lin = b0 * delta / (1 + 4 delta^2)``.  The per-component,
    per-unit-density shift ``phi_s`` follows from the line strengths.

    Parameters
    ----------
    b0 : float
        Resonant optical density of the cloud.
    delta : float
        Pump detuning in units of the linewidth.
    """
    if not b0 > 0:
        raise ValueError("b0 must be positive")
    phi_lin = b0 * delta / (1.0 + 4.0 * delta * delta)
    phi_s = 2.0 * phi_lin / (1.0 + A_WEAK)
    return TransitionCoefficients(
        a_weak=A_WEAK, a_pump=A_PUMP, phi_s=phi_s, phi_lin=phi_lin
    )


def ballistic_rate(
    lattice_period: float, temperature: float, species: AtomSpecies = RB87
) -> float:
    """Wash-out rate of a density grating by free thermal flight.

    Atoms crossing a grating of period ``lattice_period`` at the mean
    thermal speed erase it at rate ``r = 4/(pi Lambda) * vbar`` with
    ``vbar = sqrt(8 k_B T / (pi M))``.

    Parameters
    ----------
    lattice_period : float
        Transverse grating period [m].
    temperature : float
        Cloud temperature [K].

    Returns
    -------
    float
        Relaxation rate [1/s].
    """
    if not lattice_period > 0:
        raise ValueError("lattice_period must be positive")
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    v_bar = np.sqrt(8.0 * k_B * temperature / (np.pi * species.mass))
    return 4.0 / (np.pi * lattice_period) * v_bar


def molasses_coefficients(
    molasses_detuning: float, temperature: float, species: AtomSpecies = RB87
) -> MolassesDerived:
    """Friction and diffusion constants of molasses cooling.

    The friction coefficient follows the low-saturation Doppler form
    ``alpha = (3/7) hbar k^2 |delta_m|``; the spatial diffusion constant
    then fixes itself through the measured temperature,
    ``D = k_B T / alpha``.

    Parameters
    ----------
    molasses_detuning : float
        Molasses detuning in units of the linewidth; only its magnitude
        enters.
    temperature : float
        Temperature the molasses settles to [K].
    """
    if molasses_detuning == 0:
        raise ValueError("molasses_detuning must be non-zero")
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    alpha = (3.0 / 7.0) * hbar * species.wavenumber**2 * abs(molasses_detuning)
    diffusion = k_B * temperature / alpha
    momentum_diffusion = alpha * k_B * temperature
    return MolassesDerived(
        friction=alpha, diffusion=diffusion, momentum_diffusion=momentum_diffusion
    )


def talbot_phase(q: float, mirror_distance: float, species: AtomSpecies = RB87) -> float:
    """Diffractive phase picked up by a sideband on the mirror round trip.

    A transverse sideband at wavenumber ``q`` propagating to a mirror at
    distance ``d`` and back dephases from the axis by
    ``Theta = q^2 d / k`` (paraxial, round-trip path ``2 d``).

    Parameters
    ----------
    q : float
        Transverse wavenumber of the sideband [rad/m].
    mirror_distance : float
        Cloud-to-mirror distance ``d`` [m].

    Returns
    -------
    float
        Round-trip phase Theta [rad].
    """
    if mirror_distance < 0:
        raise ValueError("mirror_distance must be non-negative")
    return q * q * mirror_distance / species.wavenumber


def quarter_talbot_distance(q: float, species: AtomSpecies = RB87) -> float:
    """Mirror distance at which ``talbot_phase(q) == pi/2`` exactly."""
    if not q > 0:
        raise ValueError("q must be positive")
    return 0.5 * np.pi * species.wavenumber / (q * q)


def sat_to_rate(s: float, species: AtomSpecies = RB87) -> float:
    """Optical pumping rate ``P = gamma s / 2`` [1/s] of one component."""
    if s < 0:
        raise ValueError("saturation parameter must be non-negative")
    return 0.5 * species.gamma * s


def rate_to_sat(p: float, species: AtomSpecies = RB87) -> float:
    """Saturation parameter of a pumping rate; inverse of sat_to_rate."""
    if p < 0:
        raise ValueError("pumping rate must be non-negative")
    return 2.0 * p / species.gamma


def sat_to_intensity(s0: float, delta: float, species: AtomSpecies = RB87) -> float:
    """Intensity [mW/cm^2] of a beam with detuned saturation parameter s0.

    The detuned saturation parameter is
    ``s0 = (I / I_sat) / (1 + 4 delta^2)``, so
    ``I = s0 (1 + 4 delta^2) I_sat``.
    """
    if s0 < 0:
        raise ValueError("saturation parameter must be non-negative")
    return s0 * (1.0 + 4.0 * delta * delta) * species.sat_intensity


def intensity_to_sat(intensity: float, delta: float, species: AtomSpecies = RB87) -> float:
    """Detuned saturation parameter of a beam; inverse of sat_to_intensity."""
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    return intensity / ((1.0 + 4.0 * delta * delta) * species.sat_intensity)
