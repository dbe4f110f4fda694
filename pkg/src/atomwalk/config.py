"""Scenario configuration: YAML schema, frequency strings, built-ins.

A config is a nested mapping::

    name: fig3c
    kind: trajectory            # trajectory | bands | lambda-table
    species: Yb173              # preset name, or {mass_amu, wavelength, label}
    drive: {rabi: "2pi*1MHz", detuning: 0, dipole_phase: 0}
    initial: {c0: 1, c1: 0, p_center: 0, width: 1}     # hbar*k units
    grid: {n_points: 2048, p_min: null, p_max: null}    # hbar*k units
    time: {periods: 3, samples_per_period: 128}         # or times: [0, 0.5, ...] in T
    density: {enabled: false, slices_per_period: 2, x_window: null, x_stride: 1}
    bands: {p_min: -2, p_max: 2, n_points: 401}
    lambda_table: {rabi: ["2pi*0.01MHz", "2pi*0.1MHz", "2pi*1MHz"]}
    regime: {threshold: 0.001, support_sigmas: 3}
    outputs: {formats: [csv]}

Frequencies accept plain numbers (rad/s), "2pi*<x><unit>" with unit in
Hz/kHz/MHz/GHz, and multiples of the recoil frequency "omega_B*<x>",
"<x>*omega_B" or "-omega_B".
"""

from __future__ import annotations

import copy
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .dynamics import DEFAULT_GRID_POINTS, InitialCondition, MomentumGrid
from .errors import ConfigError
from .units import (STRONG_THRESHOLD, SUPPORT_SIGMAS, AtomSpecies, DriveParams,
                    RecoilScales, derive_recoil, get_species)

KINDS = ("trajectory", "bands", "lambda-table")
FORMATS = ("csv", "json")

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_TWO_PI = re.compile(rf"^(?P<sign>[+-]?)\s*2\s*pi\s*\*\s*(?P<num>{_NUM})\s*(?P<unit>[a-zA-Z]*)$")
_OMEGA_B = re.compile(rf"^(?P<sign>[+-]?)\s*omega_B(?:\s*\*\s*(?P<num>{_NUM}))?$")
_OMEGA_B_LEFT = re.compile(rf"^(?P<num>{_NUM})\s*\*\s*omega_B$")


@dataclass(frozen=True)
class Frequency:
    """An angular frequency, either in rad/s or in multiples of omega_B."""

    value: float
    recoil: bool = False

    def si(self, scales: RecoilScales) -> float:
        return self.value * scales.omega_B if self.recoil else self.value

    def __str__(self):
        return f"omega_B*{self.value!r}" if self.recoil else repr(self.value)


def parse_frequency(raw: Any, field: str = "frequency") -> Frequency:
    if isinstance(raw, bool):
        raise ConfigError(f"expected a frequency, got {raw!r}", field)
    if isinstance(raw, (int, float)):
        return Frequency(float(raw))
    if not isinstance(raw, str):
        raise ConfigError(f"expected a frequency, got {raw!r}", field)
    text = raw.strip()
    try:
        return Frequency(float(text))
    except ValueError:
        pass
    m = _TWO_PI.match(text)
    if m:
        unit = m["unit"].lower() or "hz"
        if unit not in _UNITS:
            raise ConfigError(f"unknown frequency unit {m['unit']!r} in {raw!r}", field)
        sign = -1.0 if m["sign"] == "-" else 1.0
        return Frequency(sign * 2.0 * math.pi * float(m["num"]) * _UNITS[unit])
    m = _OMEGA_B.match(text)
    if m:
        sign = -1.0 if m["sign"] == "-" else 1.0
        return Frequency(sign * float(m["num"] or 1.0), recoil=True)
    m = _OMEGA_B_LEFT.match(text)
    if m:
        return Frequency(float(m["num"]), recoil=True)
    raise ConfigError(
        f"cannot parse frequency {raw!r}; use a number (rad/s), '2pi*1MHz' or 'omega_B*5'", field)


DEFAULTS: dict[str, Any] = {
    "name": "scenario",
    "kind": "trajectory",
    "description": "",
    "species": "Yb173",
    "drive": {"rabi": "2pi*1MHz", "detuning": 0.0, "dipole_phase": 0.0},
    "initial": {"c0": 1.0, "c1": 0.0, "p_center": 0.0, "width": 1.0},
    "grid": {"n_points": DEFAULT_GRID_POINTS, "p_min": None, "p_max": None},
    "time": {"periods": 3, "samples_per_period": 128, "times": None},
    "density": {"enabled": False, "slices_per_period": 2, "x_window": None, "x_stride": 1},
    "bands": {"p_min": -2.0, "p_max": 2.0, "n_points": 401},
    "lambda_table": {"rabi": ["2pi*0.01MHz", "2pi*0.1MHz", "2pi*1MHz"]},
    "regime": {"threshold": STRONG_THRESHOLD, "support_sigmas": SUPPORT_SIGMAS},
    "outputs": {"formats": ["csv"]},
}


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {key!r}", where)
        if isinstance(base[key], dict) and key != "species":
            if not isinstance(value, dict):
                raise ConfigError(f"expected a mapping, got {value!r}", where)
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = copy.deepcopy(value)
    return out


def set_path(raw: dict, dotted: str, value) -> dict:
    """Copy of ``raw`` with ``dotted`` (e.g. "drive.rabi") set to ``value``."""
    out = copy.deepcopy(raw)
    keys = dotted.split(".")
    node, ref = out, DEFAULTS
    for k in keys[:-1]:
        if not isinstance(ref, dict) or k not in ref:
            raise ConfigError(f"unknown config field {dotted!r}", dotted)
        node = node.setdefault(k, {})
        ref = ref[k]
    if not isinstance(ref, dict) or keys[-1] not in ref:
        raise ConfigError(f"unknown config field {dotted!r}", dotted)
    node[keys[-1]] = value
    return out


def _number(raw, field, *, integer=False, positive=False, allow_none=False):
    if raw is None and allow_none:
        return None
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        try:
            raw = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"expected a number, got {raw!r}", field) from None
    if integer:
        if int(raw) != raw:
            raise ConfigError(f"expected an integer, got {raw!r}", field)
        raw = int(raw)
    else:
        raw = float(raw)
    if not math.isfinite(raw):
        raise ConfigError(f"expected a finite number, got {raw!r}", field)
    if positive and raw <= 0:
        raise ConfigError(f"must be > 0, got {raw!r}", field)
    return raw


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario.  ``raw`` keeps the merged mapping for overrides."""

    raw: dict
    name: str
    kind: str
    description: str
    species: AtomSpecies
    rabi: Frequency
    detuning: Frequency
    dipole_phase: float
    initial: InitialCondition
    n_points: int
    p_min: float | None
    p_max: float | None
    periods: float
    samples_per_period: int
    times_in_periods: tuple | None
    density: bool
    slices_per_period: int
    x_window: float | None
    x_stride: int
    bands: tuple
    lambda_rabis: tuple
    threshold: float
    support_sigmas: float
    formats: tuple

    @property
    def scales(self) -> RecoilScales:
        return derive_recoil(self.species)

    def drive_si(self) -> DriveParams:
        s = self.scales
        return DriveParams(self.rabi.si(s), self.detuning.si(s), self.dipole_phase)

    def drive_recoil(self) -> DriveParams:
        return self.scales.to_recoil(self.drive_si())

    def grid(self) -> MomentumGrid:
        default = MomentumGrid.around(self.initial.p_center, self.initial.width, self.n_points)
        lo = default.p_min if self.p_min is None else self.p_min
        hi = default.p_max if self.p_max is None else self.p_max
        return MomentumGrid(lo, hi, self.n_points)

    def period(self) -> float:
        """Rabi period in 1/omega_B."""
        rabi = self.drive_recoil().rabi
        if rabi <= 0:
            raise ConfigError("time sampling in periods needs drive.rabi > 0", "drive.rabi")
        return 2.0 * math.pi / rabi

    def times(self) -> np.ndarray:
        """Trajectory sample times in 1/omega_B."""
        if self.times_in_periods is not None:
            if not self.times_in_periods:
                return np.empty(0)
            return np.asarray(self.times_in_periods, dtype=float) * self.period()
        n = round(self.periods * self.samples_per_period)
        if n == 0:
            return np.empty(0)
        return np.arange(n + 1) * (self.period() / self.samples_per_period)

    def density_times(self) -> np.ndarray:
        n = round(self.periods * self.slices_per_period)
        if self.times_in_periods is not None and not self.times_in_periods:
            return np.empty(0)
        return np.arange(n + 1) * (self.period() / self.slices_per_period)

    @classmethod
    def from_dict(cls, data: dict, lines: dict | None = None) -> ScenarioConfig:
        lines = lines or {}
        try:
            return cls._from_dict(data)
        except ConfigError as exc:
            if exc.line is None and exc.field in lines:
                raise ConfigError(exc.message, exc.field, lines[exc.field]) from None
            raise

    @classmethod
    def _from_dict(cls, data: dict) -> ScenarioConfig:
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping at top level")
        raw = _merge(DEFAULTS, data)

        kind = raw["kind"]
        if kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}", "kind")

        sp = raw["species"]
        try:
            if isinstance(sp, str):
                species = get_species(sp)
            elif isinstance(sp, dict):
                extra = set(sp) - {"mass_amu", "wavelength", "label"}
                if extra:
                    raise ConfigError(f"unknown species keys {sorted(extra)}", "species")
                species = AtomSpecies(_number(sp.get("mass_amu"), "species.mass_amu"),
                                      _number(sp.get("wavelength"), "species.wavelength"),
                                      str(sp.get("label", "")))
            else:
                raise ConfigError(f"species must be a preset name or mapping, got {sp!r}", "species")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), "species") from None

        d = raw["drive"]
        rabi = parse_frequency(d["rabi"], "drive.rabi")
        if rabi.value < 0:
            raise ConfigError("Rabi frequency must be >= 0", "drive.rabi")
        detuning = parse_frequency(d["detuning"], "drive.detuning")
        phase = _number(d["dipole_phase"], "drive.dipole_phase")

        i = raw["initial"]
        try:
            initial = InitialCondition(
                c0=_number(i["c0"], "initial.c0"), c1=_number(i["c1"], "initial.c1"),
                p_center=_number(i["p_center"], "initial.p_center"),
                width=_number(i["width"], "initial.width", positive=True))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), "initial.c0") from None

        g = raw["grid"]
        n_points = _number(g["n_points"], "grid.n_points", integer=True)
        if n_points < 5:
            raise ConfigError("grid.n_points must be >= 5", "grid.n_points")
        p_min = _number(g["p_min"], "grid.p_min", allow_none=True)
        p_max = _number(g["p_max"], "grid.p_max", allow_none=True)

        t = raw["time"]
        periods = _number(t["periods"], "time.periods")
        if periods < 0:
            raise ConfigError("time.periods must be >= 0", "time.periods")
        spp = _number(t["samples_per_period"], "time.samples_per_period", integer=True, positive=True)
        times = t["times"]
        if times is not None:
            if not isinstance(times, list):
                raise ConfigError("time.times must be a list of multiples of T", "time.times")
            times = tuple(_number(v, "time.times") for v in times)
            if any(b < a for a, b in zip(times, times[1:])):
                raise ConfigError("time.times must be sorted ascending", "time.times")

        den = raw["density"]
        if not isinstance(den["enabled"], bool):
            raise ConfigError("density.enabled must be true or false", "density.enabled")
        spp_d = _number(den["slices_per_period"], "density.slices_per_period", integer=True, positive=True)
        x_window = _number(den["x_window"], "density.x_window", positive=True, allow_none=True)
        x_stride = _number(den["x_stride"], "density.x_stride", integer=True, positive=True)

        b = raw["bands"]
        bands = (_number(b["p_min"], "bands.p_min"), _number(b["p_max"], "bands.p_max"),
                 _number(b["n_points"], "bands.n_points", integer=True))
        if bands[2] < 2:
            raise ConfigError("bands.n_points must be >= 2", "bands.n_points")
        if bands[1] <= bands[0]:
            raise ConfigError("bands.p_max must exceed bands.p_min", "bands.p_max")

        lt = raw["lambda_table"]["rabi"]
        if not isinstance(lt, list) or not lt:
            raise ConfigError("lambda_table.rabi must be a non-empty list", "lambda_table.rabi")
        lambda_rabis = tuple(parse_frequency(v, "lambda_table.rabi") for v in lt)

        r = raw["regime"]
        threshold = _number(r["threshold"], "regime.threshold", positive=True)
        support = _number(r["support_sigmas"], "regime.support_sigmas", positive=True)

        fmts = raw["outputs"]["formats"]
        if isinstance(fmts, str):
            fmts = [fmts]
        if not isinstance(fmts, list) or any(f not in FORMATS for f in fmts):
            raise ConfigError(f"outputs.formats entries must be in {FORMATS}", "outputs.formats")

        cfg = cls(raw=raw, name=str(raw["name"]), kind=kind, description=str(raw["description"]),
                  species=species, rabi=rabi, detuning=detuning, dipole_phase=phase,
                  initial=initial, n_points=n_points, p_min=p_min, p_max=p_max,
                  periods=periods, samples_per_period=spp, times_in_periods=times,
                  density=den["enabled"], slices_per_period=spp_d, x_window=x_window,
                  x_stride=x_stride, bands=bands, lambda_rabis=lambda_rabis,
                  threshold=threshold, support_sigmas=support, formats=tuple(fmts))
        if kind == "trajectory":
            try:
                cfg.grid()
            except ValueError as exc:
                raise ConfigError(str(exc), "grid") from None
            if cfg.drive_si().rabi == 0 and (times is None or times):
                raise ConfigError("trajectory scenarios need drive.rabi > 0 to define T", "drive.rabi")
        return cfg

    def with_overrides(self, **dotted) -> ScenarioConfig:
        raw = self.raw
        for key, value in dotted.items():
            raw = set_path(raw, key, value)
        return ScenarioConfig.from_dict(raw)


def _line_map(text: str) -> dict:
    """Dotted key path -> 1-based line number of its value."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    out = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = f"{prefix}.{k.value}" if prefix else str(k.value)
                out[path] = v.start_mark.line + 1
                walk(v, path)

    if root is not None:
        walk(root, "")
    return out


def load_config_text(text: str) -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {exc}", line=mark.line + 1 if mark else None) from None
    if data is None:
        data = {}
    return ScenarioConfig.from_dict(data, _line_map(text))


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    cfg = load_config_text(text)
    if "name" not in (yaml.safe_load(text) or {}):
        cfg = cfg.with_overrides(name=path.stem)
    return cfg


_STRONG = {"rabi": "2pi*1MHz", "detuning": 0}

BUILTINS: dict[str, dict] = {
    "fig2": {
        "description": "Weak coupling: Omega = 2pi x 2 kHz (caption value; the text quotes "
                       "2pi x 1 kHz, set drive.rabi to use it), Pi = hbar k, C0 = 1, 10 periods",
        "drive": {"rabi": "2pi*2kHz", "detuning": 0},
        "initial": {"c0": 1, "c1": 0, "p_center": 0, "width": 1},
        "time": {"periods": 10},
    },
    "fig3c": {
        "description": "Strong coupling walk, ground state start: Omega = 2pi x 1 MHz, Pi = hbar k",
        "drive": _STRONG,
        "initial": {"c0": 1, "c1": 0, "p_center": 0, "width": 1},
    },
    "fig3f": {
        "description": "Strong coupling walk, excited state start (reversed direction)",
        "drive": _STRONG,
        "initial": {"c0": 0, "c1": 1, "p_center": 0, "width": 1},
    },
    "fig5": {
        "description": "Position-space walk, ground state start: Pi = 50 hbar k, 5 periods",
        "drive": _STRONG,
        "initial": {"c0": 1, "c1": 0, "p_center": 0, "width": 50},
        "grid": {"n_points": 16384},
        "time": {"periods": 5},
        "density": {"enabled": True, "slices_per_period": 4, "x_window": 40, "x_stride": 4},
    },
    "fig6": {
        "description": "Position-space walk, excited state start: Pi = 50 hbar k, 5 periods",
        "drive": _STRONG,
        "initial": {"c0": 0, "c1": 1, "p_center": 0, "width": 50},
        "grid": {"n_points": 16384},
        "time": {"periods": 5},
        "density": {"enabled": True, "slices_per_period": 4, "x_window": 40, "x_stride": 4},
    },
    "bands": {
        "kind": "bands",
        "description": "Spin-orbit bands and Dirac approximation, Omega = 5 omega_B, Delta = 0",
        "drive": {"rabi": "omega_B*5", "detuning": 0},
    },
    "lambda-table": {
        "kind": "lambda-table",
        "description": "Step length and walking speed for Omega = 2pi x {0.01, 0.1, 1} MHz",
    },
}


def builtin(name: str) -> ScenarioConfig:
    if name not in BUILTINS:
        raise ConfigError(f"unknown scenario {name!r}; valid names: {', '.join(BUILTINS)}")
    return ScenarioConfig.from_dict({"name": name, **BUILTINS[name]})


def resolve(target: str) -> ScenarioConfig:
    """Built-in scenario name or path to a YAML config."""
    if target in BUILTINS:
        return builtin(target)
    path = Path(target)
    if path.suffix in (".yaml", ".yml") or path.exists():
        return load_config(path)
    raise ConfigError(f"unknown scenario {target!r}; valid names: {', '.join(BUILTINS)} "
                      "(or a path to a YAML config)")
