"""Scenario runner and parameter sweeps.

Nothing in the pipeline is random: a config fully determines every output
byte.  Sweep cells are independent and written back by index, so serial
and parallel runs give identical tables.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import BUILTINS, ScenarioConfig, builtin, parse_frequency, resolve, set_path
from .errors import ConfigError, NumericalValidationError
from .observables import TrajectoryRecord, trajectory
from .output import csv_text, json_text, write_text
from .position import DensityMap, density_map
from .spin_orbit import band_scan
from .units import (DriveParams, RegimeReport, classify_regime, effective_epsilon,
                    mean_walk_velocity, step_length, strong_coupling_rabi)

log = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10
PARSEVAL_TOLERANCE = 1e-8
DEFAULT_MAX_CELLS = 10_000


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trajectory: TrajectoryRecord | None = None
    density: DensityMap | None = None
    regime: RegimeReport | None = None
    table: dict | None = None
    validation: dict = field(default_factory=dict)
    paths: list = field(default_factory=list)

    def reduce(self, name: str) -> float:
        return reduce(self.config, name, self)


def list_scenarios() -> list[tuple[str, str]]:
    return [(name, spec["description"]) for name, spec in BUILTINS.items()]


def _validate_trajectory(traj: TrajectoryRecord) -> dict:
    if len(traj) == 0:
        return {"max_norm_error": 0.0}
    err = float(np.max(np.abs(traj.pop0 + traj.pop1 - 1.0)))
    if not math.isfinite(err) or err > NORM_TOLERANCE:
        raise NumericalValidationError(
            f"norm conservation breached: max |P0 + P1 - 1| = {err:.3e} > {NORM_TOLERANCE:g}")
    return {"max_norm_error": err}


def _validate_density(dmap: DensityMap) -> dict:
    if dmap.times.size == 0:
        return {"max_parseval_error": 0.0}
    err = float(np.max(np.abs(dmap.norms() - 1.0)))
    if not math.isfinite(err) or err > PARSEVAL_TOLERANCE:
        raise NumericalValidationError(
            f"Parseval breached: max |norm(x) - 1| = {err:.3e} > {PARSEVAL_TOLERANCE:g}")
    return {"max_parseval_error": err}


def _bands_table(cfg: ScenarioConfig) -> dict:
    lo, hi, n = cfg.bands
    pts = band_scan((lo, hi), n, cfg.drive_si(), cfg.scales)
    return {
        "p_x[hbar_k]": np.array([b.p_x for b in pts]),
        "e_lower[epsilon_B]": np.array([b.e_lower for b in pts]),
        "e_upper[epsilon_B]": np.array([b.e_upper for b in pts]),
        "e_dirac_lower[epsilon_B]": np.array([b.e_dirac_lower for b in pts]),
        "e_dirac_upper[epsilon_B]": np.array([b.e_dirac_upper for b in pts]),
    }


def _lambda_table(cfg: ScenarioConfig) -> dict:
    scales = cfg.scales
    v = mean_walk_velocity(scales)
    rabis = np.array([f.si(scales) for f in cfg.lambda_rabis])
    lam = np.array([step_length(scales, DriveParams(r)) for r in rabis])
    return {
        "rabi[2pi*MHz]": rabis / (2 * math.pi * 1e6),
        "rabi[rad/s]": rabis,
        "Lambda[nm]": lam * 1e9,
        "T[s]": 2 * math.pi / rabis,
        "v[nm/s]": np.full(rabis.size, v * 1e9),
    }


def _density_summary(dmap: DensityMap) -> dict:
    p0, p1 = dmap.populations()
    return {"t[1/omega_B]": dmap.times, "pop0[1]": p0, "pop1[1]": p1,
            "norm[1]": p0 + p1, "centroid[1/k]": dmap.centroids()}


def _density_long(dmap: DensityMap) -> dict:
    nt, nx = dmap.density0.shape
    return {"t[1/omega_B]": np.repeat(dmap.times, nx), "x[1/k]": np.tile(dmap.x_grid, nt),
            "density0[k]": dmap.density0.ravel(), "density1[k]": dmap.density1.ravel()}


def _metadata(cfg: ScenarioConfig, result: ScenarioResult, columns) -> dict:
    scales = cfg.scales
    drive = cfg.drive_si()
    meta = {
        "atomwalk_version": __version__,
        "scenario": cfg.name,
        "kind": cfg.kind,
        "description": cfg.description,
        "config": cfg.raw,
        "species": {"label": cfg.species.label, "mass_amu": cfg.species.mass_amu,
                    "wavelength[m]": cfg.species.wavelength},
        "scales": {"hbar_k[kg*m/s]": scales.hbar_k, "omega_B[rad/s]": scales.omega_B,
                   "epsilon_B[J]": scales.epsilon_B, "recoil_length[m]": scales.recoil_length,
                   "walk_velocity[m/s]": scales.half_recoil_velocity},
        "drive": {"rabi[rad/s]": drive.rabi, "detuning[rad/s]": drive.detuning,
                  "rabi[omega_B]": drive.rabi / scales.omega_B,
                  "detuning[omega_B]": drive.detuning / scales.omega_B,
                  "dipole_phase[rad]": drive.dipole_phase},
        "columns": list(columns),
        "validation": result.validation,
    }
    if drive.rabi > 0:
        meta["walk"] = {"period[s]": 2 * math.pi / drive.rabi,
                        "period[1/omega_B]": 2 * math.pi * scales.omega_B / drive.rabi,
                        "step_length[m]": step_length(scales, drive)}
    if result.regime is not None:
        r = result.regime
        meta["regime"] = {"ratio": r.ratio, "epsilon_effective": r.epsilon_effective,
                          "verdict": r.verdict, "threshold": cfg.threshold}
    if cfg.kind == "trajectory":
        g = cfg.grid()
        meta["grid"] = {"p_min[hbar_k]": g.p_min, "p_max[hbar_k]": g.p_max,
                        "n_points": g.n_points, "spacing[hbar_k]": g.spacing}
    return meta


def _write(cfg, result, out_dir: Path, formats):
    if result.trajectory is not None:
        columns = result.trajectory.columns(cfg.scales)
    else:
        columns = result.table
    paths = []
    if "csv" in formats:
        paths.append(write_text(out_dir / f"{cfg.name}.csv", csv_text(columns)))
    if "json" in formats:
        paths.append(write_text(out_dir / f"{cfg.name}.data.json", json_text(columns)))
    if result.density is not None:
        dmap = result.density.window(cfg.x_window, cfg.x_stride)
        paths.append(write_text(out_dir / f"{cfg.name}.density.csv", csv_text(_density_long(dmap))))
        header = {"scenario": cfg.name, "times[1/omega_B]": dmap.times,
                  "x_grid[1/k]": {"start": float(dmap.x_grid[0]) if dmap.x_grid.size else None,
                                  "step": float(dmap.dx) if dmap.x_grid.size > 1 else None,
                                  "count": int(dmap.x_grid.size)},
                  "full_x_grid[1/k]": {"start": float(result.density.x_grid[0]),
                                       "step": result.density.dx,
                                       "count": int(result.density.x_grid.size)},
                  "config": cfg.raw}
        paths.append(write_text(out_dir / f"{cfg.name}.density.json", json_text(header)))
        paths.append(write_text(out_dir / f"{cfg.name}.density_summary.csv",
                                csv_text(_density_summary(result.density))))
    meta = _metadata(cfg, result, columns)
    meta["files"] = [p.name for p in paths] + [f"{cfg.name}.meta.json"]
    paths.append(write_text(out_dir / f"{cfg.name}.meta.json", json_text(meta)))
    return paths


def run_scenario(config: ScenarioConfig | str, out_dir: str | Path | None = None,
                 formats=None, workers: int = 1, density: bool | None = None) -> ScenarioResult:
    """Run one scenario and, if ``out_dir`` is given, persist its outputs.

    Raises NumericalValidationError when norm or Parseval checks fail.
    """
    cfg = resolve(config) if isinstance(config, str) else config
    result = ScenarioResult(cfg)
    if cfg.kind == "bands":
        result.table = _bands_table(cfg)
    elif cfg.kind == "lambda-table":
        result.table = _lambda_table(cfg)
    else:
        drive = cfg.drive_recoil()
        result.regime = classify_regime(cfg.scales, cfg.drive_si(), cfg.initial.width,
                                        cfg.initial.p_center, cfg.support_sigmas, cfg.threshold)
        result.trajectory = trajectory(cfg.initial, drive, cfg.times(), cfg.grid())
        result.validation.update(_validate_trajectory(result.trajectory))
        if cfg.density if density is None else density:
            result.density = density_map(cfg.initial, drive, cfg.grid(), cfg.density_times(),
                                         workers=workers)
            result.validation.update(_validate_density(result.density))
        log.info("%s: regime %s (epsilon_eff = %.3g)", cfg.name, result.regime.verdict,
                 result.regime.epsilon_effective)
    if out_dir is not None:
        try:
            result.paths = _write(cfg, result, Path(out_dir), formats or cfg.formats)
        except OSError as exc:
            raise ConfigError(f"cannot write output to {out_dir}: {exc.strerror or exc}",
                              "outputs") from None
    return result


# reductions: name -> (needs a trajectory, function(config, result))

def _gap(cfg, _):
    d = cfg.drive_recoil()
    delta = d.detuning + 2.0 * cfg.initial.p_center + 1.0
    return math.hypot(delta, d.rabi)


def _eps(cfg, _):
    d = cfg.drive_si()
    return effective_epsilon(cfg.scales, d.rabi, cfg.initial.width, d.detuning)


def _ratio(cfg, _):
    return classify_regime(cfg.scales, cfg.drive_si(), cfg.initial.width, cfg.initial.p_center,
                           cfg.support_sigmas, cfg.threshold).ratio


def _strong_rabi(cfg, _):
    d = cfg.drive_si()
    return strong_coupling_rabi(cfg.scales, cfg.threshold, cfg.initial.width,
                                d.detuning) / cfg.scales.omega_B


def _period_amplitude(traj, spp, which):
    if len(traj) < spp + 1:
        raise ConfigError("reduction needs at least one full period of samples", "time.periods")
    sl = slice(0, spp + 1) if which == "first" else slice(len(traj) - spp - 1, len(traj))
    seg = traj.p_mean[sl]
    return float(seg.max() - seg.min())


def _damping(cfg, res):
    spp = cfg.samples_per_period
    return (_period_amplitude(res.trajectory, spp, "last")
            / _period_amplitude(res.trajectory, spp, "first"))


REDUCTIONS = {
    "gap": (False, _gap, "Sigma at p = p_center [omega_B]"),
    "epsilon_effective": (False, _eps, "epsilon solving the strong-coupling criterion [1]"),
    "regime_ratio": (False, _ratio, "max |delta| / Omega over the packet support [1]"),
    "strong_rabi": (False, _strong_rabi, "Omega from the criterion at epsilon = regime.threshold [omega_B]"),
    "damping_ratio": (True, _damping, "<p> oscillation amplitude, last period / first period [1]"),
    "max_pop1": (True, lambda c, r: float(np.max(r.trajectory.pop1)), "max excited population [1]"),
    "p_final": (True, lambda c, r: float(r.trajectory.p_mean[-1]), "<p> at the last sample [hbar_k]"),
    "x_final": (True, lambda c, r: float(r.trajectory.x_mean[-1]), "<x> at the last sample [1/k]"),
}


def reduce(cfg: ScenarioConfig, name: str, result: ScenarioResult | None = None) -> float:
    if name not in REDUCTIONS:
        raise ConfigError(f"unknown reduction {name!r}; valid: {', '.join(REDUCTIONS)}", "reduction")
    needs_traj, fn, _ = REDUCTIONS[name]
    if needs_traj and (result is None or result.trajectory is None):
        result = run_scenario(cfg, density=False)
    return float(fn(cfg, result))


@dataclass(frozen=True)
class Axis:
    field: str
    values: tuple

    def numeric(self, base: ScenarioConfig) -> np.ndarray:
        if self.field in ("drive.rabi", "drive.detuning"):
            return np.array([parse_frequency(v, self.field).si(base.scales) for v in self.values])
        return np.array([float(v) for v in self.values])

    @property
    def unit(self) -> str:
        return "rad/s" if self.field in ("drive.rabi", "drive.detuning") else "config"


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis | None
    reduction: str
    name: str = "sweep"
    max_cells: int = DEFAULT_MAX_CELLS

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.axis1.values), len(self.axis2.values) if self.axis2 else 1


@dataclass(frozen=True, eq=False)
class SweepResult:
    spec: SweepSpec
    values1: np.ndarray
    values2: np.ndarray
    table: np.ndarray  # shape (len(axis1), len(axis2))

    def columns(self) -> dict:
        n1, n2 = self.table.shape
        a2 = self.spec.axis2.field if self.spec.axis2 else "axis2"
        return {
            "i": np.repeat(np.arange(n1), n2),
            "j": np.tile(np.arange(n2), n1),
            f"{self.spec.axis1.field}[{self.spec.axis1.unit}]": np.repeat(self.values1, n2),
            f"{a2}[{self.spec.axis2.unit if self.spec.axis2 else '1'}]": np.tile(self.values2, n1),
            self.spec.reduction: self.table.ravel(),
        }


def _axis_from(raw, where) -> Axis:
    if not isinstance(raw, dict) or "field" not in raw:
        raise ConfigError("axis must be a mapping with 'field'", where)
    fld = str(raw["field"])
    if "values" in raw:
        values = raw["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("axis values must be a non-empty list", f"{where}.values")
        return Axis(fld, tuple(values))
    try:
        start, stop, count = raw["start"], raw["stop"], int(raw["count"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("axis needs 'values' or 'start', 'stop', 'count'", where) from None
    if count < 1:
        raise ConfigError("axis count must be >= 1", f"{where}.count")
    scale = raw.get("scale", "linear")
    freq = fld in ("drive.rabi", "drive.detuning")
    lo = parse_frequency(start, f"{where}.start") if freq else None
    hi = parse_frequency(stop, f"{where}.stop") if freq else None
    if freq and lo.recoil != hi.recoil:
        raise ConfigError("axis start and stop must use the same frequency unit", where)
    a, b = (lo.value, hi.value) if freq else (float(start), float(stop))
    if scale == "log":
        if a <= 0 or b <= 0:
            raise ConfigError("log axis needs positive bounds", where)
        vals = np.geomspace(a, b, count)
    elif scale == "linear":
        vals = np.linspace(a, b, count)
    else:
        raise ConfigError(f"axis scale must be linear or log, got {scale!r}", f"{where}.scale")
    if freq and lo.recoil:
        return Axis(fld, tuple(f"omega_B*{v!r}" for v in vals))
    return Axis(fld, tuple(float(v) for v in vals))


def load_sweep(path: str | Path) -> tuple[SweepSpec, ScenarioConfig]:
    """Read a sweep YAML: ``base`` (built-in name, config path or inline
    mapping), ``axis1``, optional ``axis2``, ``reduction``, ``max_cells``."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read sweep spec {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML syntax error: {exc}") from None
    return sweep_from_dict(data, default_name=path.stem, root=path.parent)


def sweep_from_dict(data: dict, default_name="sweep", root: Path | None = None):
    if not isinstance(data, dict):
        raise ConfigError("sweep spec must be a mapping")
    unknown = set(data) - {"name", "base", "axis1", "axis2", "reduction", "max_cells"}
    if unknown:
        raise ConfigError(f"unknown sweep keys {sorted(unknown)}")
    base = data.get("base", "fig3c")
    if isinstance(base, dict):
        base_cfg = ScenarioConfig.from_dict(base)
    elif isinstance(base, str) and base in BUILTINS:
        base_cfg = builtin(base)
    elif isinstance(base, str):
        p = Path(base)
        if root is not None and not p.is_absolute():
            p = root / p
        base_cfg = resolve(str(p))
    else:
        raise ConfigError("base must be a built-in name, config path or mapping", "base")
    if "axis1" not in data:
        raise ConfigError("sweep needs axis1", "axis1")
    axis1 = _axis_from(data["axis1"], "axis1")
    axis2 = _axis_from(data["axis2"], "axis2") if data.get("axis2") is not None else None
    reduction = data.get("reduction")
    if reduction not in REDUCTIONS:
        raise ConfigError(f"unknown reduction {reduction!r}; valid: {', '.join(REDUCTIONS)}",
                          "reduction")
    spec = SweepSpec(axis1, axis2, reduction, str(data.get("name", default_name)),
                     int(data.get("max_cells", DEFAULT_MAX_CELLS)))
    # fail fast on bad field names
    for ax in (axis1, axis2):
        if ax is not None:
            set_path(base_cfg.raw, ax.field, ax.values[0])
    return spec, base_cfg


def _cell(args):
    raw, overrides, reduction = args
    for key, value in overrides:
        raw = set_path(raw, key, value)
    cfg = ScenarioConfig.from_dict(raw)
    return reduce(cfg, reduction)


def run_sweep(spec: SweepSpec, base: ScenarioConfig, out_dir: str | Path | None = None,
              workers: int = 1) -> SweepResult:
    n1, n2 = spec.shape
    if n1 * n2 > spec.max_cells:
        raise ConfigError(f"sweep has {n1 * n2} cells, budget is {spec.max_cells}", "max_cells")
    values2 = spec.axis2.values if spec.axis2 else (None,)
    jobs = []
    for v1 in spec.axis1.values:
        for v2 in values2:
            overrides = [(spec.axis1.field, v1)]
            if spec.axis2:
                overrides.append((spec.axis2.field, v2))
            jobs.append((base.raw, overrides, spec.reduction))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        flat = [_cell(j) for j in jobs]
    table = np.array(flat, dtype=float).reshape(n1, n2)
    result = SweepResult(spec, spec.axis1.numeric(base),
                         spec.axis2.numeric(base) if spec.axis2 else np.zeros(1), table)
    if out_dir is not None:
        out = Path(out_dir)
        try:
            write_text(out / f"{spec.name}.sweep.csv", csv_text(result.columns()))
            write_text(out / f"{spec.name}.sweep.json", json_text({
                "name": spec.name, "reduction": spec.reduction,
                "reduction_description": REDUCTIONS[spec.reduction][2],
                "axis1": {"field": spec.axis1.field, "values": list(spec.axis1.values),
                          "numeric": result.values1},
                "axis2": None if spec.axis2 is None else {
                    "field": spec.axis2.field, "values": list(spec.axis2.values),
                    "numeric": result.values2},
                "base": base.raw, "table": table}))
        except OSError as exc:
            raise ConfigError(f"cannot write output to {out_dir}: {exc.strerror or exc}",
                              "outputs") from None
    return result
