"""Exact evolution of the dressed pairs {|0, p>, |1, p + hbar k>}.

Each momentum p couples only the ground amplitude at p to the excited
amplitude at p + hbar k, so the packet evolves as an independent 2x2
problem per grid point with the interaction-picture Hamiltonian

    [[ omega_p,      -Omega/2           ],
     [ -Omega/2,     Delta + omega_{p+1} ]]

All quantities here are in recoil units (see ``atomwalk.units``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import GridError, InvalidParameterError
from .units import DriveParams

DEFAULT_GRID_POINTS = 2048


@dataclass(frozen=True)
class MomentumGrid:
    p_min: float
    p_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise GridError(f"n_points must be an integer >= 2, got {self.n_points!r}")
        if not self.p_max > self.p_min:
            raise GridError(f"p_max ({self.p_max}) must exceed p_min ({self.p_min})")

    @property
    def spacing(self) -> float:
        return (self.p_max - self.p_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_points)

    @classmethod
    def around(cls, p_center: float, width: float, n_points: int = DEFAULT_GRID_POINTS):
        """Default grid: p_c +/- max(6*Pi, 4) so both the Gaussian tail and
        the one-recoil offset of the excited component fit."""
        half = max(6.0 * width, 4.0)
        return cls(p_center - half, p_center + half, n_points)


@dataclass(frozen=True)
class InitialCondition:
    """Gaussian packet with internal-state amplitudes (c0, c1)."""

    c0: float = 1.0
    c1: float = 0.0
    p_center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidParameterError(f"packet width must be > 0, got {self.width!r}")
        if abs(self.c0**2 + self.c1**2 - 1.0) > 1e-12:
            raise InvalidParameterError(
                f"c0**2 + c1**2 must equal 1, got {self.c0**2 + self.c1**2!r}")

    @property
    def imbalance(self) -> float:
        """C0**2 - C1**2, the sign of the walking direction."""
        return self.c0**2 - self.c1**2


@dataclass(frozen=True, eq=False)
class WavePacket:
    """Paired amplitudes on a momentum grid.

    ``amp0[i]`` is the ground amplitude at p_i; ``amp1[i]`` is the excited
    amplitude at p_i + 1 (its dressed partner), not at p_i.
    """

    grid: MomentumGrid
    amp0: np.ndarray
    amp1: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        for name in ("amp0", "amp1"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != (self.grid.n_points,):
                raise GridError(f"{name} has shape {arr.shape}, grid has {self.grid.n_points} points")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amp0) ** 2 + np.abs(self.amp1) ** 2) * self.grid.spacing)


@dataclass(frozen=True)
class DressedEigensystem:
    delta: np.ndarray | float
    sigma: np.ndarray | float
    w0: np.ndarray | float
    w1: np.ndarray | float
    a0: np.ndarray | complex | None = field(default=None)
    b0: np.ndarray | complex | None = field(default=None)
    a1: np.ndarray | complex | None = field(default=None)
    b1: np.ndarray | complex | None = field(default=None)


def generalized_detuning(p, detuning):
    """delta = Delta + omega_B + omega_D with omega_B = 1, omega_D = 2p."""
    return detuning + 1.0 + 2.0 * np.asarray(p, dtype=float)


def dressed_eigensystem(p, drive: DriveParams, phi0=None, phi1=None) -> DressedEigensystem:
    """Eigenfrequencies of the 2x2 pair at momentum ``p`` (drive in omega_B).

    With ``phi0``/``phi1`` given, the A/B propagation coefficients for that
    initial pair are filled in too (Sigma = 0 points get NaN).
    """
    p = np.asarray(p, dtype=float)
    delta = generalized_detuning(p, drive.detuning)
    sigma = np.hypot(delta, drive.rabi)
    mean = 0.5 * (drive.detuning + (p + 1.0) ** 2 + p**2)
    w0 = mean - 0.5 * sigma
    w1 = mean + 0.5 * sigma
    coeffs = {}
    if phi0 is not None or phi1 is not None:
        phi0 = np.asarray(0.0 if phi0 is None else phi0, dtype=complex)
        phi1 = np.asarray(0.0 if phi1 is None else phi1, dtype=complex)
        phi1 = phi1 * np.exp(-1j * drive.dipole_phase)
        coeffs = _ab_coefficients(phi0, phi1, delta, sigma, drive.rabi)
    if p.ndim == 0:
        delta, sigma, w0, w1 = (float(v) for v in (delta, sigma, w0, w1))
        coeffs = {k: complex(v) for k, v in coeffs.items()}
    return DressedEigensystem(delta, sigma, w0, w1, **coeffs)


def _ab_coefficients(phi0, phi1, delta, sigma, rabi):
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / (2.0 * sigma)
        a0 = ((sigma + delta) * phi0 + rabi * phi1) * inv
        b0 = ((sigma - delta) * phi0 - rabi * phi1) * inv
        a1 = ((sigma - delta) * phi1 + rabi * phi0) * inv
        b1 = ((sigma + delta) * phi1 - rabi * phi0) * inv
    return {"a0": a0, "b0": b0, "a1": a1, "b1": b1}


def propagate_pair(phi0_init, phi1_init, p, drive: DriveParams, t):
    """Analytic amplitudes (phi0(p, t), phi1(p + 1, t)) from their t = 0 values.

    Vectorized over any broadcastable inputs.  A nonzero dipole phase phi
    makes the coupling -Omega*exp(+i phi)/2 below the diagonal; it is gauged
    out by rotating the excited amplitude before and after.
    """
    phi0 = np.asarray(phi0_init, dtype=complex)
    phi1 = np.asarray(phi1_init, dtype=complex) * np.exp(-1j * drive.dipole_phase)
    p = np.asarray(p, dtype=float)
    t = np.asarray(t, dtype=float)

    delta = generalized_detuning(p, drive.detuning)
    sigma = np.hypot(delta, drive.rabi)
    common = np.exp(-0.5j * (drive.detuning + (p + 1.0) ** 2 + p**2) * t)

    c = _ab_coefficients(phi0, phi1, delta, sigma, drive.rabi)
    up = np.exp(0.5j * sigma * t)
    down = np.exp(-0.5j * sigma * t)
    out0 = (c["a0"] * up + c["b0"] * down) * common
    out1 = (c["a1"] * up + c["b1"] * down) * common

    # Sigma = 0 needs Omega = 0 and delta = 0: the levels are degenerate and
    # uncoupled, so both amplitudes only pick up the common phase.
    degenerate = sigma == 0
    if np.any(degenerate):
        out0 = np.where(degenerate, phi0 * common, out0)
        out1 = np.where(degenerate, phi1 * common, out1)

    out1 = out1 * np.exp(1j * drive.dipole_phase)
    if out0.ndim == 0:
        return complex(out0), complex(out1)
    return out0, out1


def gaussian_amplitude(p, p_center: float, width: float):
    """C-less initial Gaussian exp(-(p-pc)^2/(2 Pi^2)) / (pi^(1/4) sqrt(Pi))."""
    p = np.asarray(p, dtype=float)
    return np.exp(-((p - p_center) ** 2) / (2.0 * width**2)) / (math.pi**0.25 * math.sqrt(width))


def gaussian_packet(init: InitialCondition, grid: MomentumGrid | None = None) -> WavePacket:
    """Initial packet; each component sits at its own physical momentum.

    The excited Gaussian is evaluated at p_i + 1, so both internal states are
    centred on p_c in physical momentum.
    """
    if grid is None:
        grid = MomentumGrid.around(init.p_center, init.width)
    if grid.spacing > init.width:
        raise GridError(
            f"grid spacing {grid.spacing:g} exceeds packet width {init.width:g}; "
            f"use at least {math.ceil((grid.p_max - grid.p_min) / init.width) + 1} points")
    lo, hi = init.p_center - 3 * init.width, init.p_center + 3 * init.width
    if init.c1 != 0:
        lo -= 1.0
    if lo < grid.p_min or hi > grid.p_max:
        warnings.warn(
            f"momentum grid [{grid.p_min:g}, {grid.p_max:g}] does not cover the packet "
            f"support [{lo:g}, {hi:g}]", RuntimeWarning, stacklevel=2)
    p = grid.points
    amp0 = init.c0 * gaussian_amplitude(p, init.p_center, init.width)
    amp1 = init.c1 * gaussian_amplitude(p + 1.0, init.p_center, init.width)
    norm = np.sum(amp0**2 + amp1**2) * grid.spacing
    scale = 1.0 / math.sqrt(norm)
    return WavePacket(grid, amp0 * scale, amp1 * scale, 0.0)


def evolve(packet: WavePacket, drive: DriveParams, t: float) -> WavePacket:
    """Advance ``packet`` by a duration ``t`` with the exact pair propagator.

    Time series should call this on the same initial packet for every t
    rather than chaining steps.
    """
    if t == 0:
        return packet
    a0, a1 = propagate_pair(packet.amp0, packet.amp1, packet.grid.points, drive, t)
    return WavePacket(packet.grid, a0, a1, packet.time + t)


def evolve_many(packet: WavePacket, drive: DriveParams, times) -> tuple[np.ndarray, np.ndarray]:
    """Amplitudes at every time in ``times``: arrays shaped (len(times), n_points)."""
    times = np.asarray(times, dtype=float).reshape(-1, 1)
    return propagate_pair(packet.amp0[None, :], packet.amp1[None, :],
                          packet.grid.points[None, :], drive, times)


def excited_population_integral(phi0_init, phi1_init, p, drive: DriveParams, t):
    """Closed-form integral over [0, t] of |phi1(p + 1, t')|^2 per pair.

    Writing phi1 = exp(-iEt)[b cos(S t/2) + i q sin(S t/2)] with
    q = (Omega a - delta b)/S (a, b the initial pair, b rotated by the
    dipole phase), the square has cos^2, sin^2 and sin(S t) parts whose
    time integrals are elementary.  sinc forms keep S -> 0 finite.
    """
    a = np.asarray(phi0_init, dtype=complex)
    b = np.asarray(phi1_init, dtype=complex) * np.exp(-1j * drive.dipole_phase)
    t = np.asarray(t, dtype=float)
    delta = generalized_detuning(p, drive.detuning)
    sigma = np.hypot(delta, drive.rabi)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(sigma > 0, (drive.rabi * a - delta * b) / sigma, 0.0)
    half = 0.5 * sigma * t
    sin_over = t * np.sinc(sigma * t / np.pi)  # sin(S t)/S
    one_minus_cos_over = t * np.sin(half) * np.sinc(half / np.pi)  # (1 - cos S t)/S
    int_cos2 = 0.5 * t + 0.5 * sin_over
    int_sin2 = 0.5 * t - 0.5 * sin_over
    cross = np.imag(np.conj(b) * q)
    return np.abs(b) ** 2 * int_cos2 + np.abs(q) ** 2 * int_sin2 - cross * one_minus_cos_over


class RK4Result(NamedTuple):
    phi0: complex | np.ndarray
    phi1: complex | np.ndarray
    norm_drift: float | np.ndarray


def rk4_oracle(phi0, phi1, p, drive: DriveParams, t, n_steps: int) -> RK4Result:
    """Integrate the 2x2 pair equation with fixed-step classical RK4.

    Independent of the analytic propagator: it only uses the Hamiltonian
    matrix.  Refuses steps with (spectral radius)*dt > 0.1.  Broadcasts over
    array inputs; ``norm_drift`` is |norm(t) - norm(0)| per sample.
    """
    if n_steps < 1:
        raise InvalidParameterError("n_steps must be >= 1")
    p = np.asarray(p, dtype=float)
    t = np.asarray(t, dtype=float)
    y0 = np.asarray(phi0, dtype=complex)
    y1 = np.asarray(phi1, dtype=complex)
    y0, y1, p, t = np.broadcast_arrays(y0, y1, p, t)
    y0 = y0.astype(complex).copy()
    y1 = y1.astype(complex).copy()

    h00 = p**2
    h11 = drive.detuning + (p + 1.0) ** 2
    coupling = -0.5 * drive.rabi
    h10 = coupling * np.exp(1j * drive.dipole_phase)
    h01 = np.conj(h10)

    dt = t / n_steps
    radius = np.maximum(np.abs(h00), np.abs(h11)) + abs(coupling)
    sigma = np.hypot(h11 - h00, drive.rabi)
    worst = float(np.max(np.maximum(radius, sigma) * np.abs(dt), initial=0.0))
    if worst > 0.1:
        raise InvalidParameterError(
            f"RK4 step too large: spectral radius * dt = {worst:.3g} > 0.1; increase n_steps")

    def rhs(a, b):
        return -1j * (h00 * a + h01 * b), -1j * (h10 * a + h11 * b)

    norm0 = np.abs(y0) ** 2 + np.abs(y1) ** 2
    for _ in range(n_steps):
        k1 = rhs(y0, y1)
        k2 = rhs(y0 + 0.5 * dt * k1[0], y1 + 0.5 * dt * k1[1])
        k3 = rhs(y0 + 0.5 * dt * k2[0], y1 + 0.5 * dt * k2[1])
        k4 = rhs(y0 + dt * k3[0], y1 + dt * k3[1])
        y0 = y0 + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y1 = y1 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    drift = np.abs(np.abs(y0) ** 2 + np.abs(y1) ** 2 - norm0)
    if y0.ndim == 0:
        return RK4Result(complex(y0), complex(y1), float(drift))
    return RK4Result(y0, y1, drift)
