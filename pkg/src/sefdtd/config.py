"""Scenario configuration: flat ``key = value`` files and their validation.

Example file::

    # 1D emitter between two mirrors
    scenario = my-cavity
    geometry = pec-cavity-1d
    geometry.l_x = 7.5e-7
    lambda0 = 1.5e-6
    d_eg = -1.342e-28
    duration = 5e-13
    coupling = eq4

All values are SI. Keys prefixed ``geometry.`` are geometry parameters; which
ones are accepted depends on ``geometry``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from sefdtd.constants import DEFAULT_EMITTER, EmitterSpec
from sefdtd.grid import BoundarySpec

COUPLING_ALIASES = {
    "eq4": "DipoleCurrent",
    "dipolecurrent": "DipoleCurrent",
    "eq3": "IntegralSource",
    "integralsource": "IntegralSource",
}

# geometry kind -> (dimensionality, {param: (type, default or None if required)}, allowed boundaries)
GEOMETRIES: dict[str, tuple[int, dict[str, tuple[type, Any]], tuple[str, ...]]] = {
    "free-space-1d": (1, {"extent": (float, None)}, ("Mur1D",)),
    "free-space-2d": (2, {"extent": (float, None)}, ("UPML2D",)),
    "pec-cavity-1d": (1, {"l_x": (float, None), "match_dispersion": (bool, True)}, ("PEC",)),
    "square-cavity-2d": (2, {"l": (float, None), "match_dispersion": (bool, True)}, ("PEC",)),
    "bragg-cavity-1d": (
        1,
        {
            "N": (int, None),
            "n1": (float, 2.89),
            "n2": (float, 3.37),
            "cavity_index": (float, 3.37),
            "cavity_thickness": (float, None),
            "pad": (float, 7.5e-7),
        },
        ("Mur1D", "PEC"),
    ),
    "disk-2d": (2, {"radius": (float, None), "eps_r_disk": (float, 11.56), "pad": (float, 1.5e-6)},
                ("UPML2D",)),
}

TOP_KEYS = {
    "scenario", "geometry", "lambda0", "d_eg", "cross_section_A", "axial_length_L",
    "resolution", "courant", "duration", "coupling", "boundary", "pml_cells", "pml_order",
    "pml_target_reflection", "decimation", "out_dir",
}
REQUIRED = ("scenario", "geometry", "lambda0", "d_eg", "duration")


class ConfigError(ValueError):
    """Raised with every problem found; ``errors`` lists ``"key: message"`` strings."""

    def __init__(self, errors: list[str]):
        super().__init__("invalid configuration:\n  " + "\n  ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    geometry: str
    emitter: EmitterSpec
    params: dict = field(default_factory=dict)
    resolution: float = 20.0
    courant: float = 0.9
    duration: float = 1e-12
    coupling: str = "DipoleCurrent"
    boundary: BoundarySpec = BoundarySpec("Mur1D")
    decimation: int = 1
    out_dir: str = "runs"

    @property
    def dimensionality(self) -> int:
        return GEOMETRIES[self.geometry][0]

    def to_raw(self) -> dict[str, Any]:
        raw = {
            "scenario": self.scenario,
            "geometry": self.geometry,
            "lambda0": self.emitter.lambda0,
            "d_eg": self.emitter.d_eg,
            "cross_section_A": self.emitter.cross_section_A,
            "axial_length_L": self.emitter.axial_length_L,
            "resolution": self.resolution,
            "courant": self.courant,
            "duration": self.duration,
            "coupling": self.coupling,
            "boundary": self.boundary.kind,
            "decimation": self.decimation,
            "out_dir": self.out_dir,
        }
        if self.boundary.kind == "UPML2D":
            raw.update(
                pml_cells=self.boundary.pml_cells,
                pml_order=self.boundary.pml_order,
                pml_target_reflection=self.boundary.pml_target_reflection,
            )
        raw.update({f"geometry.{k}": v for k, v in self.params.items()})
        return raw

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_raw().items() if v is not None)


def _coerce(kind: type, value: Any):
    if isinstance(value, str):
        value = value.strip()
        if kind is bool:
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if kind is int:
            f = float(value)
            if f != int(f):
                raise ValueError(f"not an integer: {value!r}")
            return int(f)
        return kind(value)
    if kind is int and isinstance(value, float):
        if value != int(value):
            raise ValueError(f"not an integer: {value!r}")
        return int(value)
    return kind(value)


def validate_config(raw: Mapping[str, Any] | ScenarioConfig) -> ScenarioConfig:
    """Check a flat mapping and return a :class:`ScenarioConfig`.

    Fills defaults (resolution 20 points per wavelength in the densest
    medium; Courant factor 0.9 in 1D and 0.5 in 2D; boundary by geometry).
    Raises :class:`ConfigError` listing every violation.
    """
    if isinstance(raw, ScenarioConfig):
        raw = raw.to_raw()
    errors: list[str] = []
    raw = {str(k).strip(): v for k, v in raw.items() if v is not None}

    for key in raw:
        if key.startswith("geometry."):
            continue
        if key not in TOP_KEYS:
            errors.append(f"{key}: unknown key")
    for key in REQUIRED:
        if key not in raw or raw[key] in (None, ""):
            errors.append(f"{key}: required")

    def num(key, kind=float, default=None, positive=True):
        if key not in raw or raw[key] in (None, ""):
            return default
        try:
            v = _coerce(kind, raw[key])
        except (TypeError, ValueError):
            errors.append(f"{key}: expected {kind.__name__}, got {raw[key]!r}")
            return default
        if kind in (int, float) and not math.isfinite(v):
            errors.append(f"{key}: must be finite")
        elif positive and v <= 0:
            errors.append(f"{key}: must be > 0")
        return v

    geometry = str(raw.get("geometry", "")).strip()
    if geometry and geometry not in GEOMETRIES:
        errors.append(f"geometry: unknown geometry {geometry!r} (known: {', '.join(GEOMETRIES)})")
        geometry = ""
    dim = GEOMETRIES[geometry][0] if geometry else 1

    lambda0 = num("lambda0")
    d_eg = num("d_eg", positive=False)
    if d_eg == 0:
        errors.append("d_eg: must be nonzero")
    area = num("cross_section_A", default=DEFAULT_EMITTER.cross_section_A)
    length = num("axial_length_L", default=DEFAULT_EMITTER.axial_length_L)
    resolution = num("resolution", default=20.0)
    if resolution is not None and resolution < 10:
        errors.append(f"resolution: {resolution} is below 10 points per wavelength")
    courant = num("courant", default=0.9 if dim == 1 else 0.5)
    if courant is not None and courant > 1 / math.sqrt(dim) + 1e-15:
        errors.append(f"courant: {courant} exceeds 1/√{dim}" if dim > 1 else f"courant: {courant} exceeds 1")
    duration = num("duration")
    decimation = num("decimation", int, 1)

    coupling = str(raw.get("coupling", "eq4")).strip()
    if coupling.lower() not in COUPLING_ALIASES:
        errors.append(f"coupling: unknown model {coupling!r} (use eq3 or eq4)")
        coupling = "eq4"
    coupling = COUPLING_ALIASES[coupling.lower()]

    boundary = None
    if geometry:
        allowed = GEOMETRIES[geometry][2]
        kind = str(raw.get("boundary", allowed[0])).strip()
        if kind not in allowed:
            errors.append(f"boundary: {kind!r} not allowed for {geometry} (allowed: {', '.join(allowed)})")
        else:
            pml = {}
            if kind == "UPML2D":
                pml = dict(
                    cells=num("pml_cells", int, 10, positive=False),
                    order=num("pml_order", float, 3.0),
                    reflection=num("pml_target_reflection", float, 1e-8),
                )
                if pml["cells"] is not None and pml["cells"] < 0:
                    errors.append("pml_cells: must be >= 0")
                if pml["reflection"] is not None and not pml["reflection"] < 1:
                    errors.append("pml_target_reflection: must be < 1")
            else:
                for key in ("pml_cells", "pml_order", "pml_target_reflection"):
                    if key in raw:
                        errors.append(f"{key}: only valid with boundary UPML2D")
            try:
                boundary = BoundarySpec.upml(**pml) if kind == "UPML2D" else BoundarySpec(kind)
            except (TypeError, ValueError) as exc:
                errors.append(f"boundary: {exc}")

    params = {}
    if geometry:
        spec = GEOMETRIES[geometry][1]
        for key in raw:
            if key.startswith("geometry.") and key[len("geometry."):] not in spec:
                errors.append(f"{key}: unknown parameter for {geometry}")
        for name, (kind, default) in spec.items():
            key = f"geometry.{name}"
            if key not in raw or raw[key] in (None, ""):
                if default is None and not (geometry == "bragg-cavity-1d" and name == "cavity_thickness"):
                    errors.append(f"{key}: required")
                params[name] = default
                continue
            params[name] = num(key, kind, default, positive=kind is not bool)
        if geometry == "bragg-cavity-1d":
            for name in ("n1", "n2", "cavity_index"):
                if params.get(name) is not None and params[name] <= 1:
                    errors.append(f"geometry.{name}: index must exceed 1")
            if params.get("cavity_thickness") is None and lambda0 and params.get("n2"):
                params["cavity_thickness"] = lambda0 / params["n2"]
        if geometry == "disk-2d" and params.get("eps_r_disk") is not None and params["eps_r_disk"] < 1:
            errors.append("geometry.eps_r_disk: must be >= 1")

    emitter = None
    if lambda0 and d_eg and area and length:
        emitter = EmitterSpec(lambda0=lambda0, d_eg=d_eg, dimensionality=dim, cross_section_A=area,
                              axial_length_L=length)
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        scenario=str(raw["scenario"]).strip(),
        geometry=geometry,
        emitter=emitter,
        params=params,
        resolution=resolution,
        courant=courant,
        duration=duration,
        coupling=coupling,
        boundary=boundary,
        decimation=decimation,
        out_dir=str(raw.get("out_dir", "runs")).strip(),
    )


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw: dict[str, str] = {}
    errors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            errors.append(f"{key}: duplicate key (line {lineno})")
        raw[key] = value
    if errors:
        raise ConfigError(errors)
    return raw


def load_config(path) -> ScenarioConfig:
    return validate_config(parse_config_text(Path(path).read_text()))
