"""Physical constants, recoil units and the coupling-regime criterion.

Everything downstream of this module works in dimensionless recoil units:

    momentum   in  hbar*k
    frequency  in  omega_B = hbar*k**2 / (2*M)
    time       in  1/omega_B
    length     in  1/k
    energy     in  epsilon_B = hbar*omega_B

In these units omega_p = p**2, omega_{p+hbar k} = (p + 1)**2 and the
generalized detuning is delta = Delta + 2*p + 1.  The walking velocity
hbar*k/(2M) is exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError, InvalidParameterError

# CODATA-2018
PLANCK_H = 6.62607015e-34  # J s (exact)
HBAR = PLANCK_H / (2.0 * math.pi)
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg

STRONG_THRESHOLD = 1e-3
SUPPORT_SIGMAS = 3.0


@dataclass(frozen=True)
class AtomSpecies:
    mass_amu: float
    wavelength: float  # m
    label: str = ""

    def __post_init__(self):
        if not (self.mass_amu > 0 and math.isfinite(self.mass_amu)):
            raise InvalidParameterError(f"mass_amu must be positive, got {self.mass_amu!r}")
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise InvalidParameterError(f"wavelength must be positive, got {self.wavelength!r}")

    @property
    def mass(self) -> float:
        """Mass in kg."""
        return self.mass_amu * ATOMIC_MASS_UNIT

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength


SPECIES_PRESETS = {
    "Yb173": AtomSpecies(172.938208, 578e-9, "173Yb 1S0-3P0 clock transition"),
}


def get_species(name: str) -> AtomSpecies:
    try:
        return SPECIES_PRESETS[name]
    except KeyError:
        valid = ", ".join(sorted(SPECIES_PRESETS))
        raise InvalidParameterError(f"unknown species preset {name!r}; valid: {valid}") from None


@dataclass(frozen=True)
class RecoilScales:
    """Recoil unit system of one atom/light pair (all SI)."""

    hbar_k: float  # kg m/s
    omega_B: float  # rad/s
    epsilon_B: float  # J
    recoil_length: float  # m, 1/k
    half_recoil_velocity: float  # m/s
    mass: float  # kg

    @property
    def wavenumber(self) -> float:
        return 1.0 / self.recoil_length

    @property
    def recoil_time(self) -> float:
        """The time unit 1/omega_B in seconds."""
        return 1.0 / self.omega_B

    @property
    def force_unit(self) -> float:
        """hbar*k*omega_B in newtons: d<p>/dt of one hbar*k per recoil time."""
        return self.hbar_k * self.omega_B

    def to_recoil(self, drive: DriveParams) -> DriveParams:
        """Express an SI drive (rad/s) in units of omega_B."""
        return replace(drive, rabi=drive.rabi / self.omega_B, detuning=drive.detuning / self.omega_B)

    def to_si(self, drive: DriveParams) -> DriveParams:
        return replace(drive, rabi=drive.rabi * self.omega_B, detuning=drive.detuning * self.omega_B)


@dataclass(frozen=True)
class DriveParams:
    """Rabi frequency, detuning and dipole phase of the light.

    Frequencies are angular; whether they are in rad/s or in units of
    omega_B depends on the caller (see ``RecoilScales.to_recoil``).
    """

    rabi: float
    detuning: float = 0.0
    dipole_phase: float = 0.0

    def __post_init__(self):
        if not self.rabi >= 0:
            raise InvalidParameterError(f"Rabi frequency must be >= 0, got {self.rabi!r}")
        if not math.isfinite(self.detuning):
            raise InvalidParameterError(f"detuning must be finite, got {self.detuning!r}")

    @property
    def period(self) -> float:
        """Rabi period T = 2*pi/Omega."""
        if self.rabi == 0:
            raise ZeroDivisionError("Rabi period undefined for rabi = 0")
        return 2.0 * math.pi / self.rabi


@dataclass(frozen=True)
class RegimeReport:
    ratio: float
    epsilon_effective: float
    verdict: str  # "Strong" | "Weak" | "Marginal"


def derive_recoil(species: AtomSpecies) -> RecoilScales:
    if not isinstance(species, AtomSpecies):
        raise InvalidParameterError(f"expected AtomSpecies, got {type(species).__name__}")
    m = species.mass
    hbar_k = PLANCK_H / species.wavelength
    omega_B = hbar_k**2 / (2.0 * m * HBAR)
    return RecoilScales(
        hbar_k=hbar_k,
        omega_B=omega_B,
        epsilon_B=HBAR * omega_B,
        recoil_length=species.wavelength / (2.0 * math.pi),
        half_recoil_velocity=hbar_k / (2.0 * m),
        mass=m,
    )


def step_length(scales: RecoilScales, drive: DriveParams) -> float:
    """Distance walked per Rabi period, pi*hbar*k/(M*Omega), in meters.

    ``drive`` is in SI (rad/s).
    """
    if drive.rabi == 0:
        raise ZeroDivisionError("step length pi*hbar*k/(M*Omega) diverges for Omega = 0")
    return math.pi * scales.hbar_k / (scales.mass * drive.rabi)


def mean_walk_velocity(scales: RecoilScales) -> float:
    """hbar*k/(2M): half the recoil velocity, independent of Omega."""
    return scales.half_recoil_velocity


def _criterion_bracket(scales, packet_width, detuning):
    return packet_width + detuning / (2.0 * scales.omega_B) + 0.5


def strong_coupling_rabi(scales: RecoilScales, epsilon: float, packet_width: float,
                         detuning: float) -> float:
    """Smallest Rabi frequency (rad/s) for which Sigma <= Omega*(1 + epsilon)
    holds across a packet of momentum width ``packet_width`` (in hbar*k).

    ``detuning`` is in rad/s.
    """
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be > 0, got {epsilon!r}")
    bracket = _criterion_bracket(scales, packet_width, detuning)
    if bracket <= 0:
        raise DomainError(
            f"criterion undefined: Pi/(hbar k) + Delta/(2 omega_B) + 1/2 = {bracket:g} <= 0")
    return math.sqrt(2.0) * scales.omega_B / math.sqrt(epsilon) * bracket


def effective_epsilon(scales: RecoilScales, rabi: float, packet_width: float,
                      detuning: float) -> float:
    """Invert the strong-coupling criterion for epsilon at a given Omega."""
    if rabi == 0:
        return math.inf
    bracket = _criterion_bracket(scales, packet_width, detuning)
    return 2.0 * (scales.omega_B * bracket / rabi) ** 2


def verdict_for(epsilon_effective: float, threshold: float = STRONG_THRESHOLD) -> str:
    if epsilon_effective <= threshold:
        return "Strong"
    if epsilon_effective >= 10.0 * threshold:
        return "Weak"
    return "Marginal"


def classify_regime(scales: RecoilScales, drive: DriveParams, packet_width: float,
                    p_center: float = 0.0, support_sigmas: float = SUPPORT_SIGMAS,
                    threshold: float = STRONG_THRESHOLD) -> RegimeReport:
    """Compare the Doppler-broadened detuning with the Rabi frequency.

    ``drive`` is SI; ``packet_width`` and ``p_center`` are in hbar*k.  The
    ratio uses delta(p) = Delta + omega_B + p*k/M at p_c +/- support_sigmas*Pi.
    A negative criterion bracket enters squared, so epsilon_effective stays
    defined where ``strong_coupling_rabi`` is not.
    """
    if not packet_width > 0:
        raise InvalidParameterError(f"packet_width must be > 0, got {packet_width!r}")
    wB = scales.omega_B
    extremes = (p_center - support_sigmas * packet_width, p_center + support_sigmas * packet_width)
    max_delta = max(abs(drive.detuning + wB + 2.0 * p * wB) for p in extremes)
    if drive.rabi == 0:
        return RegimeReport(ratio=math.inf, epsilon_effective=math.inf, verdict="Weak")
    eps = effective_epsilon(scales, drive.rabi, packet_width, drive.detuning)
    return RegimeReport(ratio=max_delta / drive.rabi, epsilon_effective=eps,
                        verdict=verdict_for(eps, threshold))
