"""Position-space amplitudes and space-time density maps.

psi_n(x) = sum_j phi_n(p_j) exp(i p_j x) dp / sqrt(2 pi) on the conjugate
grid x_m = (m - N//2) dx, dx = 2 pi / (N dp).  With this normalization the
transform is exactly unitary between the discrete norms
sum |phi|^2 dp and sum |psi|^2 dx.  The excited amplitude is transformed
with its physical momentum p_j + 1, so psi_1 carries a factor exp(i x)
that never shows up in |psi_1|^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import InitialCondition, MomentumGrid, WavePacket, evolve, gaussian_packet
from .errors import GridError, InvalidParameterError
from .units import DriveParams


@dataclass(frozen=True, eq=False)
class PositionField:
    x_grid: np.ndarray
    psi0: np.ndarray
    psi1: np.ndarray
    time: float

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi0) ** 2 + np.abs(self.psi1) ** 2) * self.dx)

    def populations(self) -> tuple[float, float]:
        return (float(np.sum(np.abs(self.psi0) ** 2) * self.dx),
                float(np.sum(np.abs(self.psi1) ** 2) * self.dx))

    def centroid(self) -> float:
        density = np.abs(self.psi0) ** 2 + np.abs(self.psi1) ** 2
        return float(np.sum(self.x_grid * density) * self.dx)


def conjugate_grid(grid: MomentumGrid) -> np.ndarray:
    n = grid.n_points
    dx = 2.0 * math.pi / (n * grid.spacing)
    return (np.arange(n) - n // 2) * dx


def _transform(amp, grid: MomentumGrid, x, shift: float):
    n = grid.n_points
    j = np.arange(n)
    # exp(i p_j x_m) = exp(i p_min x_m) exp(2 pi i j m / N) exp(-2 pi i j (N//2) / N)
    pre = amp * np.exp(-2j * math.pi * j * (n // 2) / n)
    post = np.exp(1j * (grid.p_min + shift) * x)
    return post * np.fft.ifft(pre) * (n * grid.spacing / math.sqrt(2.0 * math.pi))


def to_position(packet: WavePacket) -> PositionField:
    grid = packet.grid
    if not isinstance(grid, MomentumGrid):
        raise GridError("position transform needs a uniform MomentumGrid")
    x = conjugate_grid(grid)
    psi0 = _transform(packet.amp0, grid, x, 0.0)
    psi1 = _transform(packet.amp1, grid, x, 1.0)
    return PositionField(x, psi0, psi1, packet.time)


@dataclass(frozen=True, eq=False)
class DensityMap:
    times: np.ndarray
    x_grid: np.ndarray
    density0: np.ndarray  # (n_times, n_x)
    density1: np.ndarray

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    def populations(self) -> tuple[np.ndarray, np.ndarray]:
        return self.density0.sum(axis=1) * self.dx, self.density1.sum(axis=1) * self.dx

    def norms(self) -> np.ndarray:
        p0, p1 = self.populations()
        return p0 + p1

    def centroids(self) -> np.ndarray:
        return (self.density0 + self.density1) @ self.x_grid * self.dx

    def window(self, half_width: float | None = None, stride: int = 1) -> DensityMap:
        """Crop to |x| <= half_width and keep every ``stride``-th point (for output)."""
        keep = np.ones(self.x_grid.size, dtype=bool)
        if half_width is not None:
            keep &= np.abs(self.x_grid) <= half_width
        idx = np.flatnonzero(keep)[::max(1, int(stride))]
        return DensityMap(self.times, self.x_grid[idx], self.density0[:, idx], self.density1[:, idx])


def density_map(init: InitialCondition, drive: DriveParams, grid: MomentumGrid | None,
                times, workers: int = 1) -> DensityMap:
    """|psi_n(x, t)|^2 at each time (recoil units), one slice per time."""
    times = np.asarray(times, dtype=float)
    if times.size > 1 and np.any(np.diff(times) < 0):
        raise InvalidParameterError("density_map times must be sorted ascending")
    packet = gaussian_packet(init, grid)
    x = conjugate_grid(packet.grid)

    def slice_at(t):
        field = to_position(evolve(packet, drive, float(t)))
        return np.abs(field.psi0) ** 2, np.abs(field.psi1) ** 2

    if workers > 1 and times.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            slices = list(pool.map(slice_at, times))
    else:
        slices = [slice_at(t) for t in times]
    d0 = np.array([s[0] for s in slices]).reshape(times.size, x.size)
    d1 = np.array([s[1] for s in slices]).reshape(times.size, x.size)
    return DensityMap(times, x, d0, d1)
