"""Mechanical observables of a packet and the strong-coupling closed forms.

Momentum is in hbar*k, position in 1/k, time in 1/omega_B, energy in
epsilon_B and force in F0 = hbar*k*Omega/2 unless a function says SI.

Position is read off interaction-picture amplitudes directly: the frame
rotation only involves internal-state energies, which carry no momentum
dependence, so x = i d/dp is unchanged by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (InitialCondition, MomentumGrid, WavePacket, evolve_many,
                       excited_population_integral, gaussian_packet)
from .errors import GridError, InvalidParameterError
from .units import DriveParams, RecoilScales

TIME_CHUNK = 64


def _weights(packet_or_amps):
    a0, a1 = packet_or_amps
    return np.abs(a0) ** 2, np.abs(a1) ** 2


def populations(packet: WavePacket) -> tuple[float, float]:
    dp = packet.grid.spacing
    w0, w1 = _weights((packet.amp0, packet.amp1))
    return float(np.sum(w0) * dp), float(np.sum(w1) * dp)


def mean_momentum(packet: WavePacket) -> float:
    """<p>; the excited amplitude at index i carries momentum p_i + 1."""
    p = packet.grid.points
    w0, w1 = _weights((packet.amp0, packet.amp1))
    return float(np.sum(p * w0 + (p + 1.0) * w1) * packet.grid.spacing)


def kinetic_energy(packet: WavePacket) -> tuple[float, float]:
    """Return (<p^2>, <p>^2) in epsilon_B: the exact kinetic energy and the
    form that drops the momentum variance."""
    p = packet.grid.points
    w0, w1 = _weights((packet.amp0, packet.amp1))
    exact = float(np.sum(p**2 * w0 + (p + 1.0) ** 2 * w1) * packet.grid.spacing)
    return exact, mean_momentum(packet) ** 2


def derivative4(f, h, axis=-1):
    """Fourth-order finite-difference derivative along ``axis``.

    Central five-point stencil inside, one-sided five-point stencils on the
    two outermost points at each end.
    """
    f = np.moveaxis(np.asarray(f), axis, -1)
    n = f.shape[-1]
    if n < 5:
        raise GridError(f"fourth-order stencil needs >= 5 points, got {n}")
    d = np.empty_like(f)
    d[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / (12 * h)
    d[..., 0] = (-25 * f[..., 0] + 48 * f[..., 1] - 36 * f[..., 2] + 16 * f[..., 3] - 3 * f[..., 4]) / (12 * h)
    d[..., 1] = (-3 * f[..., 0] - 10 * f[..., 1] + 18 * f[..., 2] - 6 * f[..., 3] + f[..., 4]) / (12 * h)
    d[..., -1] = (25 * f[..., -1] - 48 * f[..., -2] + 36 * f[..., -3] - 16 * f[..., -4] + 3 * f[..., -5]) / (12 * h)
    d[..., -2] = (3 * f[..., -1] + 10 * f[..., -2] - 18 * f[..., -3] + 6 * f[..., -4] - f[..., -5]) / (12 * h)
    return np.moveaxis(d, -1, axis)


def mean_position(packet: WavePacket) -> float:
    """<x> = <phi| i d/dp |phi> summed over both internal states.

    With the plane-wave kernel exp(+i p x) this is -Im sum conj(phi) phi' dp.
    Needs the momentum-space phase to be resolved by the grid.
    """
    h = packet.grid.spacing
    total = 0.0
    for amp in (packet.amp0, packet.amp1):
        total += -np.sum(np.imag(np.conj(amp) * derivative4(amp, h))) * h
    return float(total)


def displacement(packet: WavePacket, drive: DriveParams, t):
    """Exact <x(t)> - <x(0)> for ``packet`` evolved under ``drive``.

    x commutes with the light coupling (it only shifts momentum), so
    d<x>/dt = 2<p> in recoil units and the displacement is the time
    integral of <p>.  Per pair, norm is conserved and the excited partner
    carries one extra recoil, so the integral is 2 t <p>_pairs plus twice
    the closed-form integral of the excited population.
    """
    p = packet.grid.points
    dp = packet.grid.spacing
    t = np.asarray(t, dtype=float)
    w0, w1 = _weights((packet.amp0, packet.amp1))
    pair_momentum = np.sum(p * (w0 + w1)) * dp
    tt = t.reshape(-1, 1)
    excited = excited_population_integral(packet.amp0[None, :], packet.amp1[None, :],
                                          p[None, :], drive, tt)
    out = 2.0 * t.reshape(-1) * pair_momentum + 2.0 * np.sum(excited, axis=-1) * dp
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


# closed forms (recoil units, walking velocity = 1)

def walk_momentum(t, init: InitialCondition, rabi: float):
    return init.p_center + init.imbalance * np.sin(0.5 * rabi * np.asarray(t, dtype=float)) ** 2


def walk_displacement(t, init: InitialCondition, rabi: float):
    """<x(t)> - <x(0)> in 1/k; needs rabi > 0."""
    if rabi <= 0:
        raise InvalidParameterError("closed-form displacement needs Omega > 0")
    t = np.asarray(t, dtype=float)
    return 2.0 * init.p_center * t + init.imbalance * (t - np.sin(rabi * t) / rabi)


def walk_force(t, init: InitialCondition, rabi: float):
    """Force in units of F0 = hbar*k*Omega/2."""
    return init.imbalance * np.sin(rabi * np.asarray(t, dtype=float))


def closed_form_momentum(t, init: InitialCondition, drive: DriveParams):
    """Strong-coupling <p(t)> in hbar*k.  ``t`` and ``drive`` in any
    consistent units."""
    return walk_momentum(t, init, drive.rabi)


def closed_form_displacement(t, init: InitialCondition, drive: DriveParams,
                             scales: RecoilScales):
    """Strong-coupling <x(t)> - <x(0)> in meters; ``t`` in s, ``drive`` SI."""
    t_r = np.asarray(t, dtype=float) * scales.omega_B
    return scales.recoil_length * walk_displacement(t_r, init, drive.rabi / scales.omega_B)


def closed_form_force(t, init: InitialCondition, drive: DriveParams, scales: RecoilScales):
    """Strong-coupling force in newtons; ``t`` in s, ``drive`` SI."""
    f0 = 0.5 * scales.hbar_k * drive.rabi
    return f0 * walk_force(t, init, drive.rabi)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Time series in recoil units; ``rabi`` (omega_B units) sets F0."""

    times: np.ndarray
    pop0: np.ndarray
    pop1: np.ndarray
    p_mean: np.ndarray
    x_mean: np.ndarray
    kinetic_exact: np.ndarray
    kinetic_paper: np.ndarray
    force: np.ndarray
    rabi: float
    p_closed: np.ndarray | None = None
    x_closed: np.ndarray | None = None
    force_closed: np.ndarray | None = None

    def __len__(self):
        return len(self.times)

    def columns(self, scales: RecoilScales | None = None) -> dict[str, np.ndarray]:
        """Ordered columns named with their units, SI ones added when
        ``scales`` is given."""
        cols = {"t[1/omega_B]": self.times}
        if scales is not None:
            cols["t[s]"] = self.times / scales.omega_B
        cols.update({
            "pop0[1]": self.pop0,
            "pop1[1]": self.pop1,
            "p_mean[hbar_k]": self.p_mean,
            "x_mean[1/k]": self.x_mean,
            "kinetic_exact[epsilon_B]": self.kinetic_exact,
            "kinetic_paper[epsilon_B]": self.kinetic_paper,
            "force[F0]": self.force,
        })
        if scales is not None:
            f0 = 0.5 * scales.hbar_k * self.rabi * scales.omega_B
            cols["p_mean[kg*m/s]"] = self.p_mean * scales.hbar_k
            cols["x_mean[m]"] = self.x_mean * scales.recoil_length
            cols["kinetic_exact[J]"] = self.kinetic_exact * scales.epsilon_B
            cols["kinetic_paper[J]"] = self.kinetic_paper * scales.epsilon_B
            cols["force[N]"] = self.force * f0
        if self.p_closed is not None:
            cols["p_closed[hbar_k]"] = self.p_closed
            cols["x_closed[1/k]"] = self.x_closed
            cols["force_closed[F0]"] = self.force_closed
        return cols


def _is_uniform(times) -> bool:
    steps = np.diff(times)
    return bool(np.all(steps > 0) and np.allclose(steps, steps[0], rtol=1e-9, atol=0.0))


def _check_uniform(times):
    times = np.asarray(times, dtype=float)
    if times.size < 3:
        raise InvalidParameterError(f"force series needs >= 3 samples, got {times.size}")
    if not _is_uniform(times):
        raise InvalidParameterError("force series needs uniformly spaced, increasing times")
    return times[1] - times[0]


def force_series(trajectory: TrajectoryRecord) -> np.ndarray:
    """d<p>/dt by central differences (one-sided at the ends), in F0."""
    dt = _check_uniform(trajectory.times)
    if trajectory.rabi <= 0:
        raise InvalidParameterError("F0 = hbar*k*Omega/2 vanishes for Omega = 0")
    dpdt = np.gradient(np.asarray(trajectory.p_mean, dtype=float), dt, edge_order=2)
    return dpdt * (2.0 / trajectory.rabi)


def trajectory(init: InitialCondition, drive: DriveParams, times,
               grid: MomentumGrid | None = None) -> TrajectoryRecord:
    """Evaluate the exact packet at every time in ``times`` (recoil units).

    Each sample is propagated from t = 0 independently.  The force column
    is NaN unless the times are uniform with at least three samples.
    """
    times = np.asarray(times, dtype=float)
    packet = gaussian_packet(init, grid)
    grid = packet.grid
    p = grid.points
    dp = grid.spacing

    n = times.size
    pop0, pop1, pm, p2 = (np.empty(n) for _ in range(4))
    for start in range(0, n, TIME_CHUNK):
        sl = slice(start, min(start + TIME_CHUNK, n))
        a0, a1 = evolve_many(packet, drive, times[sl])
        w0, w1 = np.abs(a0) ** 2, np.abs(a1) ** 2
        pop0[sl] = w0.sum(axis=1) * dp
        pop1[sl] = w1.sum(axis=1) * dp
        pm[sl] = (w0 @ p + w1 @ (p + 1.0)) * dp
        p2[sl] = (w0 @ p**2 + w1 @ (p + 1.0) ** 2) * dp

    x0 = mean_position(packet)
    x = x0 + displacement(packet, drive, times) if n else np.empty(0)

    if n >= 3 and drive.rabi > 0 and _is_uniform(times):
        force = np.gradient(pm, times[1] - times[0], edge_order=2) * (2.0 / drive.rabi)
    else:
        force = np.full(n, math.nan)

    closed = {}
    if drive.rabi > 0:
        closed = dict(p_closed=walk_momentum(times, init, drive.rabi),
                      x_closed=x0 + walk_displacement(times, init, drive.rabi),
                      force_closed=walk_force(times, init, drive.rabi))
    return TrajectoryRecord(times=times, pop0=pop0, pop1=pop1, p_mean=pm, x_mean=x,
                            kinetic_exact=p2, kinetic_paper=pm**2, force=force,
                            rabi=drive.rabi, **closed)
