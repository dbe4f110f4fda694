"""Spin-orbit form of the pair Hamiltonian in the symmetric momentum frame.

Shifting p = p_x - hbar k/2 puts the two dressed levels at
omega_{p_x -/+ hbar k/2}, and the 2x2 matrix decomposes as

    V(p_x) = -v p_x sigma_z + alpha sigma_x + beta(p_x) I

with v = hbar k/(2M), alpha = -hbar Omega/2 and
beta = p_x^2/(2M) + hbar^2 k^2/(8M).  In recoil units (p_x in hbar k,
energies in epsilon_B) this is v = 1, alpha = -Omega/2, beta = p_x^2 + 1/4.
Only Delta = 0 gives this symmetric form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError, NumericalValidationError
from .units import HBAR, DriveParams, RecoilScales

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# |p_x| <= this (in hbar k) counts as the low-momentum Dirac region
DIRAC_REGION = 0.1


@dataclass(frozen=True)
class SpinOrbitCoefficients:
    v: float  # m/s
    alpha: float  # J
    scales: RecoilScales

    def beta_at(self, p_x: float) -> float:
        """beta(p_x) in joules, ``p_x`` in hbar*k."""
        p = p_x * self.scales.hbar_k
        return p**2 / (2 * self.scales.mass) + self.scales.hbar_k**2 / (8 * self.scales.mass)


@dataclass(frozen=True)
class BandPoint:
    p_x: float
    e_lower: float
    e_upper: float
    e_dirac_lower: float
    e_dirac_upper: float

    @property
    def gap(self) -> float:
        return self.e_upper - self.e_lower


def _require_symmetric(drive: DriveParams):
    if drive.detuning != 0:
        raise DomainError(
            f"the symmetric spin-orbit frame requires Delta = 0 (got {drive.detuning!r}); "
            "a nonzero detuning breaks the p_x -> -p_x symmetry of the diagonal")


def coefficients(drive: DriveParams, scales: RecoilScales) -> SpinOrbitCoefficients:
    """SI coefficients; ``drive`` in rad/s."""
    _require_symmetric(drive)
    return SpinOrbitCoefficients(v=scales.half_recoil_velocity, alpha=-0.5 * HBAR * drive.rabi,
                                 scales=scales)


def _recoil_rabi(drive, scales):
    return drive.rabi / scales.omega_B


def so_matrix(p_x: float, drive: DriveParams, scales: RecoilScales, si: bool = False) -> np.ndarray:
    """Pair Hamiltonian at ``p_x`` (hbar k) in epsilon_B, or joules if ``si``.

    Built from the shifted kinetic frequencies and checked elementwise
    against the Pauli decomposition.
    """
    _require_symmetric(drive)
    rabi = _recoil_rabi(drive, scales)
    h = np.array([[(p_x - 0.5) ** 2, -0.5 * rabi],
                  [-0.5 * rabi, (p_x + 0.5) ** 2]], dtype=complex)
    pauli = -p_x * SIGMA_Z + (-0.5 * rabi) * SIGMA_X + (p_x**2 + 0.25) * IDENTITY
    scale = max(1.0, float(np.max(np.abs(h))))
    if not np.allclose(h, pauli, rtol=0.0, atol=1e-12 * scale):
        raise NumericalValidationError(f"spin-orbit decomposition mismatch at p_x={p_x!r}")
    return h * scales.epsilon_B if si else h


def band_energies(p_x: float, drive: DriveParams, scales: RecoilScales) -> BandPoint:
    """Exact and Dirac-approximated band energies in epsilon_B."""
    _require_symmetric(drive)
    rabi = _recoil_rabi(drive, scales)
    root = math.hypot(p_x, 0.5 * rabi)  # sqrt(v^2 p_x^2 + alpha^2)
    beta = p_x**2 + 0.25
    return BandPoint(p_x=float(p_x), e_lower=beta - root, e_upper=beta + root,
                     e_dirac_lower=0.25 - root, e_dirac_upper=0.25 + root)


def band_scan(p_x_range: tuple[float, float], n_points: int, drive: DriveParams,
              scales: RecoilScales) -> list[BandPoint]:
    if n_points < 2:
        raise InvalidParameterError(f"band scan needs n_points >= 2, got {n_points}")
    lo, hi = p_x_range
    return [band_energies(float(p), drive, scales) for p in np.linspace(lo, hi, n_points)]


def cone_slope(scales: RecoilScales, step: float = 1e-3) -> float:
    """Slope of the undriven cone in m/s, from a finite difference of the
    band splitting at small p_x."""
    drive = DriveParams(rabi=0.0)
    split = band_energies(step, drive, scales).gap - band_energies(0.0, drive, scales).gap
    # E+ - E- = 2 v |p_x|
    return 0.5 * split * scales.epsilon_B / (step * scales.hbar_k)
