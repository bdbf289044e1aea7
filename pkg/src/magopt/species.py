"""Atomic species data for laser-cooled clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AtomSpecies:
    """Line data of the cooling transition.

    Attributes
    ----------
    gamma : float
        Natural linewidth (angular) of the transition [rad/s].
    wavelength : float
        Transition wavelength in vacuum [m].
    mass : float
        Atomic mass [kg].
    sat_intensity : float
        Saturation intensity of the transition [mW/cm^2].
    """

    gamma: float
    wavelength: float
    mass: float
    sat_intensity: float

    def __post_init__(self) -> None:
        for name in ("gamma", "wavelength", "mass", "sat_intensity"):
            if not getattr(self, name) > 0:
                raise ValueError(f"AtomSpecies.{name} must be positive")

    @property
    def wavenumber(self) -> float:
        """Optical wavenumber 2*pi/wavelength [rad/m]."""
        return 2.0 * np.pi / self.wavelength


#: Rubidium-87 cooled on the D2 line.
RB87 = AtomSpecies(
    gamma=2.0 * np.pi * 6.0666e6,
    wavelength=780.241e-9,
    mass=1.44316e-25,
    sat_intensity=1.669,
)
