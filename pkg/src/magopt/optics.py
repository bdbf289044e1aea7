"""Phase imprint, mirror round trip, and pump-rate assembly.

The cloud is treated as a thin, purely dispersive phase mask for the two
circular pump components.  Diffraction acts only on the round trip to
the feedback mirror and back, applied in Fourier space as the phasor
``exp(i Theta)`` with ``Theta = |q|^2 d / k`` per transverse mode.
Forward and backward intensities add incoherently, so the pump rate per
component is the uniform forward rate plus the backward intensity.

Field amplitudes carry sqrt(pump rate) units: ``|E|^2`` is a pumping
rate in 1/s.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .params import SystemParams
from .physics import A_WEAK
from .species import RB87, AtomSpecies


@dataclass(frozen=True)
class TransverseGrid:
    """Periodic transverse grid, 1D or 2D square.

    Attributes
    ----------
    dims : int
        1 or 2.
    n : int
        Points per axis; a power of two.
    length : float
        Domain length per axis [m]; must be an integer number of
        lattice periods so the lattice mode falls on a grid wavenumber.
    """

    dims: int = 1
    n: int = 256
    length: float = 400e-6

    def __post_init__(self) -> None:
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ValueError("n must be a power of two, at least 4")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @classmethod
    def for_lattice(
        cls, lattice_period: float, periods: int = 4, n: int = 256, dims: int = 1
    ) -> "TransverseGrid":
        """Grid spanning an integer number of lattice periods."""
        if periods < 1:
            raise ValueError("periods must be at least 1")
        return cls(dims=dims, n=n, length=periods * lattice_period)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dims

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        """Coordinate along the first axis [m]."""
        return np.arange(self.n) * self.spacing

    @cached_property
    def k_axes(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers per axis, shaped for broadcasting."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        if self.dims == 1:
            return (k,)
        return (k[:, None], k[None, :])

    @cached_property
    def k_squared(self) -> np.ndarray:
        out = sum(ka**2 for ka in self.k_axes)
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Keep modes with per-axis index strictly inside n/3.

        Products of two retained modes then alias only onto removed
        modes, so quadratic nonlinearities stay exact on the retained
        set.
        """
        idx = np.abs(np.fft.fftfreq(self.n, d=1.0 / self.n))
        cutoff = (self.n + 2) // 3 - 1
        keep = idx <= cutoff
        if self.dims == 1:
            return keep
        return keep[:, None] & keep[None, :]

    @cached_property
    def k_squared_max(self) -> float:
        """Largest |k|^2 on the de-aliased set [rad^2/m^2]."""
        return float(np.max(self.k_squared[self.dealias_mask]))

    def mode_index(self, q: float) -> int:
        """Index along the first axis of the Fourier mode at wavenumber q."""
        m = q * self.length / (2.0 * np.pi)
        m_int = round(m)
        if abs(m - m_int) > 1e-9 * max(1.0, abs(m)) or not 0 < m_int < self.n // 2:
            raise ValueError(
                f"q = {q:.6g} rad/m does not fall on a resolvable grid wavenumber"
            )
        return int(m_int)

    def mode_amplitude(self, field: np.ndarray, q: float) -> float:
        """|Fourier coefficient| of the mode at wavenumber q along axis 0."""
        m = self.mode_index(q)
        spec = np.fft.fftn(field)
        if self.dims == 1:
            return abs(spec[m]) / field.size
        return abs(spec[m, 0]) / field.size

    def spectral(self, field: np.ndarray) -> np.ndarray:
        return np.fft.fftn(field)

    def physical(self, spec: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(spec).real

    def dealias(self, field: np.ndarray) -> np.ndarray:
        return self.physical(self.spectral(field) * self.dealias_mask)


def _check_grid_shape(grid: TransverseGrid, *arrays: np.ndarray) -> None:
    for arr in arrays:
        if arr.shape != grid.shape:
            raise ValueError(
                f"array shape {arr.shape} does not match grid shape {grid.shape}"
            )


@dataclass(frozen=True)
class FieldPair:
    """Circular field components on a grid, sqrt(pump rate) units."""

    grid: TransverseGrid
    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self) -> None:
        _check_grid_shape(self.grid, self.plus, self.minus)

    def power(self) -> float:
        """Grid-averaged total intensity of both components [1/s]."""
        return float(np.mean(np.abs(self.plus) ** 2 + np.abs(self.minus) ** 2))


@dataclass(frozen=True)
class PumpRates:
    """Total optical pumping rates per circular component [1/s]."""

    grid: TransverseGrid
    p_plus: np.ndarray
    p_minus: np.ndarray

    def __post_init__(self) -> None:
        _check_grid_shape(self.grid, self.p_plus, self.p_minus)
        if np.min(self.p_plus) < 0 or np.min(self.p_minus) < 0:
            raise ValueError("pump rates must be pointwise non-negative")

    @property
    def total(self) -> np.ndarray:
        return self.p_plus + self.p_minus

    @property
    def imbalance(self) -> np.ndarray:
        return self.p_plus - self.p_minus


def uniform_field(grid: TransverseGrid, p0: float) -> FieldPair:
    """Linearly polarized input: equal p0 in both circular components,
    zero relative phase."""
    if p0 < 0:
        raise ValueError("p0 must be non-negative")
    amp = np.sqrt(p0)
    e = np.full(grid.shape, amp, dtype=complex)
    return FieldPair(grid, e, e.copy())


def imprint_phase(
    fields: FieldPair,
    rho_plus: np.ndarray,
    rho_minus: np.ndarray,
    phi_s: float,
) -> FieldPair:
    """Thin-medium phase imprint of the Zeeman populations.

    Each circular component picks up ``phi_s`` per unit density from the
    population it pumps strongly and ``a * phi_s`` from the other:
    ``E± -> E± exp(i phi_s (rho± + a rho∓))``.  Moduli are preserved
    pointwise (dispersive medium).
    """
    _check_grid_shape(fields.grid, rho_plus, rho_minus)
    phase_plus = phi_s * (rho_plus + A_WEAK * rho_minus)
    phase_minus = phi_s * (rho_minus + A_WEAK * rho_plus)
    return FieldPair(
        fields.grid,
        fields.plus * np.exp(1j * phase_plus),
        fields.minus * np.exp(1j * phase_minus),
    )


def feedback_propagate(
    fields: FieldPair,
    mirror_distance: float,
    species: AtomSpecies = RB87,
    reflectivity: float = 1.0,
) -> FieldPair:
    """Round trip to the mirror and back, in Fourier space.

    Every transverse mode acquires the diffraction phasor
    ``exp(i |q|^2 d / k)`` over the full round trip and the amplitude
    scales with sqrt(R).  The on-axis mode only picks up the amplitude
    factor.
    """
    if mirror_distance < 0:
        raise ValueError("mirror_distance must be non-negative")
    if not 0.0 < reflectivity <= 1.0:
        raise ValueError("no feedback: reflectivity must be in (0, 1]")
    grid = fields.grid
    phasor = np.sqrt(reflectivity) * np.exp(
        1j * grid.k_squared * mirror_distance / species.wavenumber
    )
    back_plus = np.fft.ifftn(np.fft.fftn(fields.plus) * phasor)
    back_minus = np.fft.ifftn(np.fft.fftn(fields.minus) * phasor)
    return FieldPair(grid, back_plus, back_minus)


def assemble_pump_rates(p0: float, backward: FieldPair) -> PumpRates:
    """Total pump rates: uniform forward rate plus backward intensity.

    The forward pass is phase-only, so its contribution stays the
    uniform p0 per component; interference between the
    counterpropagating beams is neglected.
    """
    if p0 < 0:
        raise ValueError("p0 must be non-negative")
    return PumpRates(
        backward.grid,
        p0 + np.abs(backward.plus) ** 2,
        p0 + np.abs(backward.minus) ** 2,
    )


def closed_loop_pump(
    grid: TransverseGrid,
    rho: np.ndarray,
    w: np.ndarray,
    params: SystemParams,
    p0: float | None = None,
) -> PumpRates:
    """Pump rates seen by the cloud in state (rho, w).

    Runs the full loop: uniform forward beam, phase imprint by the
    Zeeman populations ``rho± = (rho ± w)/2``, mirror round trip,
    incoherent sum of forward and backward intensities.
    """
    if p0 is None:
        p0 = params.p0
    rho_plus = 0.5 * (rho + w)
    rho_minus = 0.5 * (rho - w)
    fields = uniform_field(grid, p0)
    transmitted = imprint_phase(fields, rho_plus, rho_minus, params.phases().phi_s)
    backward = feedback_propagate(
        transmitted, params.mirror_distance, params.species, params.reflectivity
    )
    return assemble_pump_rates(p0, backward)
