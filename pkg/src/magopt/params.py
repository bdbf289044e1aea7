"""System parameters of the mirror-feedback experiment."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .physics import (
    ballistic_rate,
    molasses_coefficients,
    optomech_sigma,
    phase_shifts,
    quarter_talbot_distance,
    sat_to_rate,
)
from .species import RB87, AtomSpecies


class ThinMediumWarning(UserWarning):
    """Pattern period too small for the thin-medium treatment of the cloud."""


@dataclass(frozen=True)
class SystemParams:
    """Full parameter set of cloud, pump and feedback mirror.

    Attributes
    ----------
    delta : float
        Pump detuning in units of the linewidth.
    b0 : float
        Resonant optical density of the cloud.
    reflectivity : float
        Intensity reflectivity R of the feedback mirror, in [0, 1].
    mirror_distance : float or None
        Cloud-to-mirror distance d [m].  None selects the distance at
        which the lattice mode dephases by exactly pi/2 on the round
        trip (maximal feedback).
    cloud_length : float
        Medium thickness along the pump [m].
    lattice_period : float
        Transverse period Lambda of the pattern under study [m].
    temperature : float
        Cloud temperature [K].
    molasses_detuning : float
        Detuning of the cooling molasses in units of the linewidth.
    molasses_sat : float
        Saturation parameter s_m of one molasses beam (0 = molasses
        beams off during the pattern-forming phase).
    pump_sat : float
        Saturation parameter s0 of the pump beam.
    molasses_efficiency : float
        Scale factor on the molasses repump damping of the spin
        orientation (1 = bare rate; set to a_pump for a transfer-
        efficiency sensitivity study).
    species : AtomSpecies
        Atomic line data.
    """

    delta: float = -8.6
    b0: float = 80.0
    reflectivity: float = 1.0
    mirror_distance: float | None = None
    cloud_length: float = 2e-3
    lattice_period: float = 100e-6
    temperature: float = 150e-6
    molasses_detuning: float = 1.8
    molasses_sat: float = 0.0
    pump_sat: float = 0.0
    molasses_efficiency: float = 1.0
    species: AtomSpecies = field(default=RB87)

    def __post_init__(self) -> None:
        if not self.b0 > 0:
            raise ValueError("b0 must be positive")
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError("reflectivity must lie in [0, 1]")
        if not self.cloud_length > 0:
            raise ValueError("cloud_length must be positive")
        if not self.lattice_period > 0:
            raise ValueError("lattice_period must be positive")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.molasses_sat < 0 or self.pump_sat < 0:
            raise ValueError("saturation parameters must be non-negative")
        if not self.molasses_efficiency > 0:
            raise ValueError("molasses_efficiency must be positive")
        if self.mirror_distance is None:
            object.__setattr__(
                self,
                "mirror_distance",
                quarter_talbot_distance(self.q, self.species),
            )
        elif self.mirror_distance < 0:
            raise ValueError("mirror_distance must be non-negative")
        # single-pass diffraction inside the cloud must stay negligible
        if self.lattice_period < np.sqrt(self.species.wavelength * self.cloud_length):
            warnings.warn(
                "lattice_period "
                f"{self.lattice_period:.3g} m is below the thin-medium limit "
                f"sqrt(lambda L) = "
                f"{np.sqrt(self.species.wavelength * self.cloud_length):.3g} m",
                ThinMediumWarning,
                stacklevel=2,
            )

    @property
    def q(self) -> float:
        """Transverse wavenumber 2*pi/lattice_period [rad/m]."""
        return 2.0 * np.pi / self.lattice_period

    @property
    def p0(self) -> float:
        """Pumping rate of the forward pump per component [1/s]."""
        return sat_to_rate(self.pump_sat, self.species)

    @property
    def p_m(self) -> float:
        """Pumping rate of one molasses beam [1/s]."""
        return sat_to_rate(self.molasses_sat, self.species)

    def sigma(self) -> float:
        """Dipole-drift to diffusion ratio at these parameters."""
        return optomech_sigma(self.delta, self.temperature, self.species)

    def phases(self):
        """TransitionCoefficients at these parameters."""
        return phase_shifts(self.b0, self.delta)

    def molasses(self):
        """MolassesDerived transport coefficients at these parameters."""
        return molasses_coefficients(
            self.molasses_detuning, self.temperature, self.species
        )

    def ballistic(self) -> float:
        """Thermal transit relaxation rate of the lattice mode [1/s]."""
        return ballistic_rate(self.lattice_period, self.temperature, self.species)

    def replace(self, **changes) -> "SystemParams":
        """Copy with the given fields replaced (re-validated)."""
        return replace(self, **changes)
