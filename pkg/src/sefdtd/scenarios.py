"""Scenario registry and run orchestration.

A run builds the grid for a validated :class:`ScenarioConfig`, steps the
coupled emitter, fits the trace, runs the modal reference for closed
cavities, evaluates the checks that apply, and writes two files into the
output directory: ``trace.csv`` and ``summary.txt`` (``key = value unit``
lines).
"""

from __future__ import annotations

import difflib
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from sefdtd import analysis, grid as gridmod
from sefdtd.config import GEOMETRIES, ConfigError, ScenarioConfig, validate_config
from sefdtd.constants import DEFAULT_EMITTER
from sefdtd.emitter import PopulationTrace, simulate
from sefdtd.fdtd import NumericalInstability
from sefdtd.oracle import OracleError, closed_forms, integrate_eq1, modes_pec_box_1d, modes_pec_box_2d

LAMBDA0 = DEFAULT_EMITTER.lambda0
SQUARE_SIDES = {"l1": LAMBDA0 / math.sqrt(2), "l2": math.sqrt(2.5) * LAMBDA0}

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_BASE = {"lambda0": LAMBDA0, "d_eg": DEFAULT_EMITTER.d_eg, "coupling": "eq4"}

# name -> (description, raw config defaults)
REGISTRY: dict[str, tuple[str, dict[str, Any]]] = {
    "free-space-1d": (
        "1D emitter in vacuum, Mur edges; exponential decay at the 1D free-space rate",
        {"geometry": "free-space-1d", "geometry.extent": 20 * LAMBDA0, "duration": 2e-12, "decimation": 10},
    ),
    "free-space-2d": (
        "2D line emitter in vacuum, UPML edges; early part of the 2D free-space decay",
        {"geometry": "free-space-2d", "geometry.extent": 6 * LAMBDA0, "duration": 4e-12, "decimation": 20},
    ),
    "pec-cavity-1d": (
        "1D half-wave PEC cavity; vacuum Rabi oscillations against the modal reference",
        {"geometry": "pec-cavity-1d", "geometry.l_x": LAMBDA0 / 2, "resolution": 80, "duration": 5e-13},
    ),
    "square-cavity": (
        "2D square PEC cavity, side l1 (single (1,1) mode) or l2 (degenerate (1,3)/(3,1) pair)",
        {"geometry": "square-cavity-2d", "geometry.l": SQUARE_SIDES["l1"], "resolution": 40,
         "duration": 3.6e-12, "decimation": 4},
    ),
    "bragg": (
        "1D quarter-wave Bragg cavity with N mirror pairs per side; weak to strong coupling",
        {"geometry": "bragg-cavity-1d", "geometry.N": 25, "resolution": 24, "duration": 3e-12, "decimation": 4},
    ),
    "microdisk": (
        "2D dielectric disk (radius 3 um, eps_r 11.56) with the emitter at its center",
        {"geometry": "disk-2d", "geometry.radius": 3e-6, "geometry.eps_r_disk": 11.56, "duration": 5e-13,
         "decimation": 20},
    ),
    "microdisk-vacuum": (
        "the microdisk grid with eps_r = 1; must reproduce free space on the same lattice",
        {"geometry": "disk-2d", "geometry.radius": 3e-6, "geometry.eps_r_disk": 1.0, "resolution": 20,
         "geometry.pad": 1.5e-6, "duration": 2e-13, "decimation": 5},
    ),
}

COUPLINGS = ("eq3", "eq4")


class UnknownScenario(ConfigError):
    pass


def scenario_names() -> list[str]:
    return list(REGISTRY)


def list_scenarios() -> str:
    """One block per scenario: name, description, default parameters."""
    lines = []
    for name, (desc, raw) in REGISTRY.items():
        lines.append(f"{name}\n    {desc}")
        params = ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in raw.items())
        lines.append(f"    defaults: {params}")
        lines.append(f"    couplings: {', '.join(COUPLINGS)}")
    return "\n".join(lines)


def _suggest(name: str) -> str:
    close = difflib.get_close_matches(name, REGISTRY, n=1, cutoff=0.0)
    return f"; did you mean {close[0]!r}?" if close else ""


def scenario_config(name: str, overrides: dict[str, Any] | None = None) -> ScenarioConfig:
    """Validated config for a registered scenario with ``overrides`` applied.

    Overrides use config-file keys (``resolution``, ``geometry.N``, ...).
    ``geometry.l`` also accepts ``l1`` / ``l2``.
    """
    if name not in REGISTRY:
        raise UnknownScenario([f"scenario: unknown scenario {name!r}{_suggest(name)}"])
    raw = {"scenario": name, **_BASE, **REGISTRY[name][1]}
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    if str(raw.get("geometry.l", "")).strip() in SQUARE_SIDES:
        side = str(raw["geometry.l"]).strip()
        raw["geometry.l"] = SQUARE_SIDES[side]
        if name == "square-cavity" and "duration" not in (overrides or {}):
            # about 3.5 population periods of the respective Rabi oscillation
            raw["duration"] = {"l1": 3.6e-12, "l2": 5.7e-12}[side]
    return validate_config(raw)


def build_grid(cfg: ScenarioConfig) -> gridmod.Grid:
    p, em = cfg.params, cfg.emitter
    common = dict(resolution=cfg.resolution, courant=cfg.courant, emitter=em)
    kind = cfg.geometry
    if kind in ("free-space-1d", "free-space-2d"):
        return gridmod.build_free_space(cfg.dimensionality, p["extent"], boundary=cfg.boundary, **common)
    if kind == "pec-cavity-1d":
        return gridmod.build_pec_cavity_1d(p["l_x"], match_dispersion=p["match_dispersion"], **common)
    if kind == "square-cavity-2d":
        return gridmod.build_square_cavity_2d(p["l"], match_dispersion=p["match_dispersion"], **common)
    if kind == "bragg-cavity-1d":
        return gridmod.build_bragg_cavity_1d(p["N"], p["n1"], p["n2"], p["cavity_index"], p["cavity_thickness"],
                                             pad=p["pad"], boundary=cfg.boundary, **common)
    if kind == "disk-2d":
        return gridmod.build_disk_2d(p["radius"], p["eps_r_disk"], p["pad"], boundary=cfg.boundary, **common)
    raise ConfigError([f"geometry: no builder for {kind!r}"])


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    target: float
    tolerance: float
    unit: str
    note: str = ""


@dataclass
class RunSummary:
    scenario: str
    config: ScenarioConfig
    grid_metadata: dict = field(default_factory=dict)
    wall_time: float = 0.0
    quantities: dict = field(default_factory=dict)  # key -> (value, unit)
    checks: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    error: str = ""
    exit_code: int = EXIT_OK
    trace: PopulationTrace | None = None
    oracle_trace: PopulationTrace | None = None

    @property
    def passed(self) -> bool:
        return self.exit_code == EXIT_OK

    def to_text(self) -> str:
        from sefdtd import __version__

        out = [f"scenario = {self.scenario}", f"code_version = {__version__}", f"exit_code = {self.exit_code}"]
        if self.error:
            out.append(f"error = {self.error}")
        out.append(f"wall_time = {self.wall_time:.3f} s")
        for key, value in self.config.to_raw().items():
            out.append(f"config.{key} = {_fmt(value)}{_unit(key, value)}")
        for key, value in self.grid_metadata.items():
            out.append(f"grid.{key} = {_fmt(value)}{_unit(key, value)}")
        for key, (value, unit) in self.quantities.items():
            out.append(f"{key} = {_fmt(value)}" + (f" {unit}" if unit else ""))
        for c in self.checks:
            out.append(f"check.{c.name} = {'pass' if c.passed else 'fail'}")
            out.append(f"check.{c.name}.measured = {_fmt(c.measured)} {c.unit}")
            out.append(f"check.{c.name}.target = {_fmt(c.target)} {c.unit}")
            out.append(f"check.{c.name}.tolerance = {_fmt(c.tolerance)} 1")
            if c.note:
                out.append(f"check.{c.name}.note = {c.note}")
        for key, path in self.files.items():
            out.append(f"files.{key} = {path}")
        return "\n".join(out) + "\n"


_UNITS = {"lambda0": "m", "d_eg": "C*m", "cross_section_A": "m^2", "axial_length_L": "m", "duration": "s",
          "courant": "1", "resolution": "1/lambda", "dx": "m", "dt": "s", "pml_target_reflection": "1"}


def _unit(key: str, value) -> str:
    if key in _UNITS:
        return " " + _UNITS[key]
    if key.endswith("_m") or key.split(".")[-1] in ("extent", "l_x", "l", "radius", "pad", "cavity_thickness"):
        return " m"
    numeric = isinstance(value, (int, float, np.number)) and not isinstance(value, bool)
    if numeric or isinstance(value, tuple) and value and all(isinstance(v, (int, float)) for v in value):
        return " 1"
    return ""


def _fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def read_summary(path) -> dict[str, str]:
    """Parse a summary file back into ``{key: value-with-unit}``."""
    out = {}
    for line in Path(path).read_text().splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            out[k.strip()] = v.strip()
    return out


def _closed_cavity_oracle(cfg: ScenarioConfig, grid: gridmod.Grid, t_end: float):
    em = cfg.emitter
    frac = np.asarray(grid.emitter_node) / grid.nx
    if cfg.geometry == "pec-cavity-1d":
        l_x = cfg.params["l_x"]
        modes = modes_pec_box_1d(l_x, em.cross_section_A, 50, frac[0] * l_x, em.d_eg, em.constants)
    else:
        l = cfg.params["l"]
        modes = modes_pec_box_2d(l, em.axial_length_L, 3 * em.omega0, tuple(frac * l), em.d_eg, em.constants)
    return integrate_eq1(modes, em.omega0, t_end).to_population_trace(), modes


def _rel_check(name, measured, target, tol, unit, note=""):
    ok = bool(np.isfinite(measured) and abs(measured - target) <= tol * abs(target))
    return Check(name, ok, float(measured), float(target), tol, unit, note)


def _rabi_target(cfg: ScenarioConfig, grid: gridmod.Grid) -> tuple[float | None, str]:
    """Closed-form population frequency 2 f_R when the geometry has one."""
    em = cfg.emitter
    if cfg.geometry == "pec-cavity-1d":
        if grid.metadata.get("dispersion_matched_mode") == (1,) or abs(cfg.params["l_x"] - em.lambda0 / 2) < 1e-12:
            return 2 * closed_forms(em, l_x=cfg.params["l_x"])["f_R_1d"], "2 f_R (1D cavity)"
        return None, ""
    l = cfg.params["l"]
    if abs(l - em.lambda0 / math.sqrt(2)) < 1e-3 * l:
        return 2 * closed_forms(em)["f_R_square_11"], "2 f_R ((1,1) mode)"
    if abs(l - math.sqrt(2.5) * em.lambda0) < 1e-3 * l:
        return 2 * closed_forms(em, l_square=l)["f_R_collective"], "2 sqrt(2) f_R ((1,3)+(3,1) pair)"
    return None, ""


def evaluate(cfg: ScenarioConfig, grid: gridmod.Grid, trace: PopulationTrace, summary: RunSummary) -> None:
    """Fit ``trace`` and append quantities and checks for this geometry."""
    q, checks, em = summary.quantities, summary.checks, cfg.emitter
    kind = cfg.geometry

    def decay_fit():
        fit = analysis.fit_exponential_decay(trace, lambda0=em.lambda0)
        q["fit.tau"] = (fit.tau, "s")
        q["fit.r_squared"] = (fit.r_squared, "1")
        q["fit.method"] = (fit.method, "")
        q["fit.window"] = ((fit.window[0], fit.window[1]), "s")
        q["fit.non_exponential"] = (fit.non_exponential, "")
        return fit

    if kind in ("free-space-1d", "free-space-2d"):
        fit = decay_fit()
        cf = closed_forms(em)
        target, tol = (cf["tau_1d"], 0.05) if kind == "free-space-1d" else (cf["tau_2d"], 0.10)
        q["closed_form.tau"] = (target, "s")
        checks.append(_rel_check("lifetime", fit.tau, target, tol, "s"))

    elif kind in ("pec-cavity-1d", "square-cavity-2d"):
        try:
            osc = analysis.extract_oscillation_frequency(trace)
            omega = osc.omega
            q["fit.omega"] = (osc.omega, "rad/s")
            q["fit.omega_uncertainty"] = (osc.uncertainty, "rad/s")
            q["fit.omega_spectral"] = (osc.omega_spectral, "rad/s")
        except analysis.AmbiguousOscillation as exc:
            omega = math.nan
            q["fit.omega_error"] = (str(exc), "")
        oracle, modes = _closed_cavity_oracle(cfg, grid, float(trace.t[-1]))
        summary.oracle_trace = oracle
        q["oracle.modes"] = (len(modes), "1")
        try:
            w_or = analysis.extract_oscillation_frequency(oracle).omega
        except analysis.AmbiguousOscillation:
            w_or = math.nan
        q["oracle.omega"] = (w_or, "rad/s")
        checks.append(_rel_check("omega_vs_oracle", omega, w_or, 0.02, "rad/s"))
        target, label = _rabi_target(cfg, grid)
        if target is not None:
            q["closed_form.omega"] = (target, "rad/s")
            checks.append(_rel_check("omega_vs_closed_form", omega, target, 0.03, "rad/s", label))
        if np.isfinite(w_or):
            window = 3 * 2 * math.pi / w_or
            cmp = analysis.compare_traces(trace, oracle, t_end=window)
            q["oracle.Linf_rel"] = (cmp["Linf_rel"], "1")
            q["oracle.L2_rel"] = (cmp["L2_rel"], "1")
            checks.append(Check("trace_vs_oracle", cmp["Linf_rel"] <= 0.03, cmp["Linf_rel"], 0.0, 0.03, "1",
                                "Linf over 3 Rabi periods"))

    elif kind == "bragg-cavity-1d":
        fit = decay_fit()
        times, heights = analysis.revival_peaks(trace)
        q["revivals"] = (int(times.size), "1")
        if times.size:
            q["revival_heights"] = (tuple(float(h) for h in heights[:10]), "1")
        n = cfg.params["N"]
        if n <= 5:
            checks.append(Check("exponential_like", fit.r_squared >= 0.95, fit.r_squared, 0.95, 0.0, "1",
                                "r_squared >= 0.95"))
        elif n >= 25:
            checks.append(Check("non_exponential", fit.non_exponential, fit.r_squared, 0.95, 0.0, "1",
                                "r_squared < 0.95"))
            checks.append(Check("revivals", times.size >= 3, times.size, 3, 0.0, "1", "at least 3 revivals"))
        elif n >= 10:
            decaying = times.size >= 2 and heights[-1] < heights[0]
            checks.append(Check("decaying_revivals", bool(decaying), times.size, 1, 0.0, "1",
                                "revivals present with a decaying envelope"))

    elif kind == "disk-2d":
        pop = trace.population
        q["max_population"] = (float(pop.max()), "1")
        if cfg.params["eps_r_disk"] == 1.0:
            ref_grid = gridmod.build_free_space(2, grid.metadata["extent_m"], resolution=cfg.resolution,
                                                courant=cfg.courant, emitter=em, boundary=cfg.boundary)
            ref = simulate(ref_grid, em, cfg.coupling, duration=cfg.duration, decimation=cfg.decimation)
            diff = float(np.max(np.abs(ref.population - pop)) / np.max(np.abs(ref.population)))
            q["free_space.Linf_rel"] = (diff, "1")
            checks.append(Check("matches_free_space", diff <= 1e-10, diff, 0.0, 1e-10, "1"))
        else:
            # echoes from the disk rim are small; anything far above round-off counts
            rises = analysis.count_revivals(trace, prominence=1e-7)
            q["revivals"] = (rises, "1")
            checks.append(Check("non_monotone", rises >= 1, rises, 1, 0.0, "1", "at least one population rise"))
            checks.append(Check("bounded", pop.max() <= 1.02, float(pop.max()), 1.0, 0.02, "1", "max |P|^2 <= 1.02"))


def run_config(cfg: ScenarioConfig, out_dir=None, write: bool = True) -> RunSummary:
    """Run one validated config; never raises for simulation failures."""
    summary = RunSummary(cfg.scenario, cfg)
    start = time.perf_counter()
    out = Path(out_dir if out_dir is not None else Path(cfg.out_dir) / cfg.scenario)
    try:
        grid = build_grid(cfg)
        summary.grid_metadata = {"dx": grid.dx, "dt": grid.dt, "nx": grid.nx, "ny": grid.ny,
                                 **{k: v for k, v in grid.metadata.items() if k != "geometry"}}
        trace = simulate(grid, cfg.emitter, cfg.coupling, duration=cfg.duration, decimation=cfg.decimation)
        summary.trace = trace
        evaluate(cfg, grid, trace, summary)
        failed = [c for c in summary.checks if not c.passed]
        summary.exit_code = EXIT_CHECK if failed else EXIT_OK
    except ValueError as exc:  # grid builder rejected the parameters
        summary.error, summary.exit_code = str(exc).replace("\n", " "), EXIT_CONFIG
    except (NumericalInstability, OracleError, FloatingPointError) as exc:
        summary.error, summary.exit_code = str(exc).replace("\n", " "), EXIT_NUMERIC
    summary.wall_time = time.perf_counter() - start
    if write:
        out.mkdir(parents=True, exist_ok=True)
        if summary.trace is not None:
            summary.files["trace"] = str(summary.trace.to_csv(out / "trace.csv"))
        if summary.oracle_trace is not None:
            summary.files["oracle_trace"] = str(summary.oracle_trace.to_csv(out / "oracle_trace.csv"))
        summary.files["summary"] = str(out / "summary.txt")
        (out / "summary.txt").write_text(summary.to_text())
    return summary


def run_scenario(name_or_config, overrides: dict[str, Any] | None = None, out_dir=None,
                 write: bool = True) -> RunSummary:
    """Run a registered scenario by name, or a :class:`ScenarioConfig`."""
    if isinstance(name_or_config, ScenarioConfig):
        cfg = name_or_config
        if overrides:
            cfg = validate_config({**cfg.to_raw(), **overrides})
    else:
        cfg = scenario_config(name_or_config, overrides)
    return run_config(cfg, out_dir, write)


__all__ = [
    "COUPLINGS", "Check", "EXIT_CHECK", "EXIT_CONFIG", "EXIT_NUMERIC", "EXIT_OK", "GEOMETRIES", "REGISTRY",
    "RunSummary", "SQUARE_SIDES", "UnknownScenario", "build_grid", "evaluate", "list_scenarios", "read_summary",
    "run_config", "run_scenario", "scenario_config", "scenario_names",
]
