"""Linear stability analysis of the coupled spin / density instabilities.

Perturbations ``delta_rho, delta_w ~ exp(lambda t) cos(q x)`` around the
homogeneous, unpolarized cloud grow or decay at rates that are affine in
the pump rate ``p0``.  The two transverse instabilities decouple at
linear order:

* density bunching, driven by the dipole force of the feedback-converted
  phase modulation and relaxed by diffusion;
* spin-orientation patterning, driven by feedback-enhanced optical
  pumping (assisted or opposed by the dipole force acting on the spin
  gratings) and damped by relaxation, pump equilibration and, when the
  molasses beams stay on, repumping.

Thresholds follow by solving ``rate(p0) = 0``; the sign of the net drive
coefficient (the "denominator") decides whether a threshold exists at
all.  Rates are [1/s], wavenumbers [rad/m].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .params import SystemParams, ThinMediumWarning
from .physics import A_PUMP, A_WEAK, ballistic_rate, rate_to_sat, sat_to_rate

#: Denominators closer to zero than this count as non-existent
#: thresholds (tie-break toward exists = False).
DENOMINATOR_TOL = 1e-12

_BISECT_ITERS = 80
_BISECT_RTOL = 1e-3


class NoCrossoverError(RuntimeError):
    """The requested threshold crossover does not occur in the bracket."""


@dataclass(frozen=True)
class GrowthRate:
    """Perturbation growth rate and its term-by-term decomposition.

    ``rate`` always equals the sum of all entries of ``decay_terms``
    (negative contributions) and ``drive_terms`` (positive ones); terms
    that evaluate to exactly zero are omitted.
    """

    rate: float
    decay_terms: dict[str, float]
    drive_terms: dict[str, float]


@dataclass(frozen=True)
class ThresholdResult:
    """Instability threshold of one mode.

    Attributes
    ----------
    mode : str
        "density" or "orientation".
    exists : bool
        Whether a finite threshold exists (net drive coefficient
        positive).
    s0_th : float or None
        Threshold pump saturation parameter; None when no threshold.
    p0_th : float or None
        Threshold pumping rate [1/s]; None when no threshold.
    denominator : float
        Net drive coefficient (dimensionless).
    denominator_terms : dict
        Decomposition of the denominator; sums to ``denominator``.
    options : dict
        Record of the effects included in this evaluation.
    """

    mode: str
    exists: bool
    s0_th: float | None
    p0_th: float | None
    denominator: float
    denominator_terms: dict[str, float]
    options: dict


def _package(terms: dict[str, float]) -> GrowthRate:
    decay = {k: v for k, v in terms.items() if v < 0.0}
    drive = {k: v for k, v in terms.items() if v > 0.0}
    return GrowthRate(rate=sum(terms.values()), decay_terms=decay, drive_terms=drive)


def growth_rate_density(
    q: float, p0: float, params: SystemParams, sin_theta: float = 1.0
) -> GrowthRate:
    """Growth rate of a density-bunching perturbation at wavenumber q.

    The perturbation relaxes diffusively at ``D q^2`` and is driven by
    the dipole force of the feedback-modulated pump at
    ``4 sigma D phi_lin sin(Theta) p0 R q^2 (1 + a) / gamma``.  Drive
    and relaxation share the ``q^2`` scaling, so the threshold pump is
    independent of q.

    Parameters
    ----------
    q : float
        Perturbation wavenumber [rad/m].
    p0 : float
        Pumping rate of the forward pump per component [1/s].
    params : SystemParams
    sin_theta : float
        Sine of the round-trip diffraction phase of the mode.
    """
    if not q > 0:
        raise ValueError("q must be positive")
    if p0 < 0:
        raise ValueError("p0 must be non-negative")
    diffusion = params.molasses().diffusion
    sigma_d = params.sigma() * diffusion
    drive = (
        4.0
        * sigma_d
        * params.phases().phi_lin
        * sin_theta
        * p0
        * params.reflectivity
        * q
        * q
        * (1.0 + A_WEAK)
        / params.species.gamma
    )
    return _package({"relaxation": -diffusion * q * q, "optomech_drive": drive})


def _orientation_coefficients(
    params: SystemParams,
    sin_theta: float,
    include_optomech: bool,
    q: float,
) -> dict[str, float]:
    """Per-unit-p0 contributions to the orientation growth rate."""
    phi_lin = params.phases().phi_lin
    r = params.reflectivity
    terms = {
        "pump_equilibration": -2.0 * A_PUMP * (1.0 + r),
        "feedback_pumping": (
            -4.0 * r * phi_lin * sin_theta * A_PUMP * (1.0 - A_WEAK) / (1.0 + A_WEAK)
        ),
    }
    if include_optomech:
        sigma_d = params.sigma() * params.molasses().diffusion
        terms["optomech_drive"] = (
            4.0
            * r
            * phi_lin
            * sin_theta
            * q
            * q
            * sigma_d
            / params.species.gamma
            * (1.0 - A_WEAK) ** 2
            / (1.0 + A_WEAK)
        )
    return terms


def _check_orientation_options(relaxation: str, include_optomech: bool) -> None:
    if relaxation not in ("diffusive", "ballistic"):
        raise ValueError("relaxation must be 'diffusive' or 'ballistic'")
    if relaxation == "ballistic" and include_optomech:
        raise ValueError(
            "ballistic relaxation leaves the diffusion constant undefined; "
            "exclude the optomechanical drive term"
        )


def growth_rate_orientation(
    q: float,
    p0: float,
    p_m: float,
    params: SystemParams,
    sin_theta: float = 1.0,
    relaxation: str = "diffusive",
    include_optomech: bool = True,
) -> GrowthRate:
    """Growth rate of a spin-orientation perturbation at wavenumber q.

    Relaxation is diffusive (``D q^2``) or ballistic (thermal transit
    rate across the grating); optical pumping equilibration at
    ``2 a' p0 (1 + R)`` and molasses repumping at ``6 p_m`` damp the
    mode further.  Feedback-modulated optical pumping drives it,
    assisted (Delta < 0 at sin(Theta) = 1) or opposed by the dipole
    force acting on the spin gratings.

    Parameters
    ----------
    q : float
        Perturbation wavenumber [rad/m].
    p0 : float
        Pumping rate of the forward pump per component [1/s].
    p_m : float
        Pumping rate of one molasses beam [1/s]; its repump damping is
        scaled by ``params.molasses_efficiency``.
    params : SystemParams
    sin_theta : float
        Sine of the round-trip diffraction phase of the mode.
    relaxation : str
        "diffusive" or "ballistic".  Ballistic relaxation requires
        ``include_optomech=False``.
    include_optomech : bool
        Include the dipole-force drive on the spin gratings.
    """
    if not q > 0:
        raise ValueError("q must be positive")
    if p0 < 0 or p_m < 0:
        raise ValueError("pump rates must be non-negative")
    _check_orientation_options(relaxation, include_optomech)
    if relaxation == "diffusive":
        relax = -params.molasses().diffusion * q * q
    else:
        relax = -ballistic_rate(2.0 * np.pi / q, params.temperature, params.species)
    terms = {"relaxation": relax}
    if p_m > 0:
        terms["molasses_repump"] = -6.0 * params.molasses_efficiency * p_m
    for name, coeff in _orientation_coefficients(
        params, sin_theta, include_optomech, q
    ).items():
        terms[name] = coeff * p0
    return _package(terms)


def _require_feedback(params: SystemParams) -> None:
    if params.reflectivity == 0:
        raise ValueError("no feedback: reflectivity must be positive")
    if params.delta == 0:
        raise ValueError("delta must be non-zero for a finite phase shift")


def threshold_density(params: SystemParams, sin_theta: float = 1.0) -> ThresholdResult:
    """Pump threshold of the density-bunching instability.

    Independent of q since drive and diffusive relaxation both scale
    with ``q^2``: the threshold saturation parameter is the reciprocal
    of ``2 phi_lin sin(Theta) sigma R (1 + a)``.  A threshold exists for
    either detuning sign at the matching mirror placement because
    ``phi_lin * sigma > 0`` always.
    """
    _require_feedback(params)
    den_terms = {
        "optomech_drive": 2.0
        * params.phases().phi_lin
        * sin_theta
        * params.sigma()
        * params.reflectivity
        * (1.0 + A_WEAK)
    }
    return _threshold_from(
        mode="density",
        relaxation_rate=None,
        den_terms=den_terms,
        params=params,
        options={"sin_theta": sin_theta},
    )


def threshold_orientation(
    params: SystemParams,
    sin_theta: float = 1.0,
    relaxation: str = "diffusive",
    include_optomech: bool = True,
    include_molasses: bool = True,
) -> ThresholdResult:
    """Pump threshold of the spin-orientation instability.

    Solves ``rate(p0) = 0`` for the orientation mode at the lattice
    wavenumber of ``params``: the total relaxation rate (diffusive or
    ballistic, plus ``6 * efficiency * p_m`` repumping when
    ``include_molasses``) divided by the net drive coefficient.
    """
    _require_feedback(params)
    _check_orientation_options(relaxation, include_optomech)
    q = params.q
    if relaxation == "diffusive":
        relax = params.molasses().diffusion * q * q
    else:
        relax = ballistic_rate(params.lattice_period, params.temperature, params.species)
    if include_molasses:
        relax += 6.0 * params.molasses_efficiency * params.p_m
    den_terms = _orientation_coefficients(params, sin_theta, include_optomech, q)
    return _threshold_from(
        mode="orientation",
        relaxation_rate=relax,
        den_terms=den_terms,
        params=params,
        options={
            "sin_theta": sin_theta,
            "relaxation": relaxation,
            "include_optomech": include_optomech,
            "include_molasses": include_molasses,
            "molasses_efficiency": params.molasses_efficiency,
        },
    )


def _threshold_from(
    mode: str,
    relaxation_rate: float | None,
    den_terms: dict[str, float],
    params: SystemParams,
    options: dict,
) -> ThresholdResult:
    denominator = sum(den_terms.values())
    if denominator <= DENOMINATOR_TOL:
        return ThresholdResult(
            mode=mode,
            exists=False,
            s0_th=None,
            p0_th=None,
            denominator=denominator,
            denominator_terms=den_terms,
            options=options,
        )
    if relaxation_rate is None:
        # density: D q^2 relaxation cancels against the q^2 D of the
        # drive, leaving s0_th as the reciprocal of the net coefficient
        s0_th = 1.0 / denominator
        p0_th = sat_to_rate(s0_th, params.species)
    else:
        p0_th = relaxation_rate / denominator
        s0_th = rate_to_sat(p0_th, params.species)
    return ThresholdResult(
        mode=mode,
        exists=True,
        s0_th=s0_th,
        p0_th=p0_th,
        denominator=denominator,
        denominator_terms=den_terms,
        options=options,
    )


def min_b0(delta: float, reflectivity: float = 1.0) -> float:
    """Smallest optical density at which the orientation instability can
    be driven at all (dipole force excluded).

    Feedback pumping must beat pump equilibration on its own, which
    requires ``|phi_lin| (1-a)/(1+a) * 2R/(1+R) >= 1``.  ``phi_lin`` is
    linear in b0, so the marginal value is exact:
    ``b0_min = (1+a)(1+R) / ((1-a) 2R) * (1 + 4 delta^2) / |delta|``.
    """
    if not 0.0 < reflectivity <= 1.0:
        raise ValueError("feedback requires reflectivity in (0, 1]")
    if delta == 0:
        raise ValueError("delta must be non-zero")
    target = (1.0 + A_WEAK) * (1.0 + reflectivity) / ((1.0 - A_WEAK) * 2.0 * reflectivity)
    return target * (1.0 + 4.0 * delta * delta) / abs(delta)


def _bisect(f, lo: float, hi: float, what: str) -> float:
    """Bisection with a fixed iteration cap and relative tolerance."""
    if not hi > lo:
        raise ValueError(f"{what}: bracket must satisfy lo < hi")
    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoCrossoverError(
            f"{what}: no sign change in bracket [{lo:.6g}, {hi:.6g}]"
        )
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _BISECT_RTOL * abs(mid):
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _orientation_minus_density(params: SystemParams, sin_theta: float) -> float:
    oth = threshold_orientation(params, sin_theta=sin_theta)
    dth = threshold_density(params, sin_theta=sin_theta)
    if not (oth.exists and dth.exists):
        raise NoCrossoverError("threshold comparison needs both instabilities to exist")
    return oth.s0_th - dth.s0_th


def _quiet_replace(params: SystemParams, **changes) -> SystemParams:
    """Parameter variation inside a scan; the thin-medium geometry
    warning is left to the caller's endpoints rather than repeated for
    every iterate."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThinMediumWarning)
        return params.replace(**changes)


def crossover_period(
    params: SystemParams,
    sin_theta: float = 1.0,
    bracket: tuple[float, float] = (1e-6, 1e-3),
) -> float:
    """Lattice period at which both instabilities share one threshold.

    Below the returned period the orientation threshold lies above the
    density one (diffusive relaxation stiffens as q grows); above it the
    orientation instability is the cheaper one.  Found by bisection on
    the threshold difference.

    Returns
    -------
    float
        Crossover period [m].
    """

    def f(lam: float) -> float:
        return _orientation_minus_density(
            _quiet_replace(params, lattice_period=lam), sin_theta
        )

    return _bisect(f, bracket[0], bracket[1], "crossover_period")


def crossover_molasses(
    params: SystemParams,
    sin_theta: float = 1.0,
    bracket: tuple[float, float] = (0.0, 0.1),
) -> float:
    """Molasses saturation at which repumping lifts the orientation
    threshold up to the density one.

    Returns 0 when the orientation threshold already sits above the
    density threshold with the molasses off.

    Returns
    -------
    float
        Molasses saturation parameter per beam (dimensionless).
    """

    def f(s_m: float) -> float:
        return _orientation_minus_density(
            _quiet_replace(params, molasses_sat=s_m), sin_theta
        )

    if f(bracket[0]) >= 0.0:
        return 0.0
    return _bisect(f, bracket[0], bracket[1], "crossover_molasses")


def optimal_sin_theta(delta: float, mode: str = "orientation") -> float:
    """Feedback phase sign that minimizes the threshold of a mode.

    The density drive needs ``phi_lin * sigma * sin(Theta) > 0``, which
    holds at ``sin(Theta) = +1`` for either detuning sign; the
    orientation drive needs ``phi_lin * sin(Theta) < 0``.
    """
    if mode == "density":
        return 1.0
    return 1.0 if delta < 0 else -1.0
