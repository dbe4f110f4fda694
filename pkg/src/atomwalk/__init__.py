"""Exact momentum-space dynamics of a two-level atom wave packet driven by a
traveling-wave light, and the resulting state-dependent walking."""

__version__ = "0.1.0"

from .dynamics import (DressedEigensystem, InitialCondition, MomentumGrid, WavePacket,
                       dressed_eigensystem, evolve, gaussian_packet, propagate_pair, rk4_oracle)
from .errors import (ConfigError, DomainError, GridError, InvalidParameterError,
                     NumericalValidationError)
from .observables import (TrajectoryRecord, closed_form_displacement, closed_form_force,
                          closed_form_momentum, displacement, force_series, kinetic_energy,
                          mean_momentum, mean_position, populations, trajectory)
from .position import DensityMap, PositionField, density_map, to_position
from .spin_orbit import BandPoint, SpinOrbitCoefficients, band_energies, band_scan, so_matrix
from .units import (AtomSpecies, DriveParams, RecoilScales, RegimeReport, classify_regime,
                    derive_recoil, mean_walk_velocity, step_length, strong_coupling_rabi)

__all__ = [
    "AtomSpecies", "BandPoint", "ConfigError", "DensityMap", "DomainError", "DressedEigensystem",
    "DriveParams", "GridError", "InitialCondition", "InvalidParameterError", "MomentumGrid",
    "NumericalValidationError", "PositionField", "RecoilScales", "RegimeReport",
    "SpinOrbitCoefficients", "TrajectoryRecord", "WavePacket", "band_energies", "band_scan",
    "classify_regime", "closed_form_displacement", "closed_form_force", "closed_form_momentum",
    "density_map", "derive_recoil", "displacement", "dressed_eigensystem", "evolve",
    "force_series", "gaussian_packet", "kinetic_energy", "mean_momentum", "mean_position",
    "mean_walk_velocity", "populations", "propagate_pair", "rk4_oracle", "so_matrix",
    "step_length", "strong_coupling_rabi", "to_position", "trajectory",
]
