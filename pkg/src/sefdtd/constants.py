"""Physical constants and the emitter parameterization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants used throughout.

    CODATA eps0, hbar and c from scipy; mu0 is taken as ``1/(eps0 c^2)`` so
    the vacuum relation holds to rounding (the measured CODATA mu0 differs
    at the 1e-12 level).
    """

    eps0: float = _sc.epsilon_0
    mu0: float = 1.0 / (_sc.epsilon_0 * _sc.c**2)
    hbar: float = _sc.hbar
    c: float = _sc.c

    def __post_init__(self):
        for name in ("eps0", "mu0", "hbar", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if abs(self.c**2 * self.eps0 * self.mu0 - 1.0) > 1e-12:
            raise ValueError("c**2 * eps0 * mu0 must equal 1")

    @property
    def eta0(self) -> float:
        """Free-space wave impedance in ohms."""
        return math.sqrt(self.mu0 / self.eps0)


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class EmitterSpec:
    """A low-dimensional two-level emitter.

    ``d_eg`` is signed and directed along ``polarization``; only its square
    enters the dynamics. ``cross_section_A`` is used by 1D emitters (sheet of
    area A), ``axial_length_L`` by 2D emitters (line of length L).
    ``position`` is ``None`` to let the grid builder place the emitter.
    """

    lambda0: float = 1.5e-6
    d_eg: float = -1.342e-28
    dimensionality: int = 1
    cross_section_A: float = (4.652e-9) ** 2
    axial_length_L: float = 4.652e-9
    position: tuple[float, ...] | None = None
    polarization: tuple[float, float, float] = (0.0, 0.0, 1.0)
    constants: PhysicalConstants = field(default=CONSTANTS, repr=False)

    def __post_init__(self):
        errors = self.errors()
        if errors:
            raise ValueError("; ".join(errors))
        pol = np.asarray(self.polarization, dtype=float)
        object.__setattr__(self, "polarization", tuple(float(v) for v in pol / np.linalg.norm(pol)))

    def errors(self) -> list[str]:
        out = []
        if not self.lambda0 > 0:
            out.append("lambda0: must be > 0")
        if self.dimensionality not in (1, 2, 3):
            out.append("dimensionality: must be 1, 2 or 3")
        if not self.cross_section_A > 0:
            out.append("cross_section_A: must be > 0")
        if not self.axial_length_L > 0:
            out.append("axial_length_L: must be > 0")
        if not math.isfinite(self.d_eg):
            out.append("d_eg: must be finite")
        if np.linalg.norm(np.asarray(self.polarization, dtype=float)) == 0:
            out.append("polarization: must be a nonzero vector")
        return out

    @property
    def omega0(self) -> float:
        """Transition angular frequency (rad/s)."""
        return 2.0 * math.pi * self.constants.c / self.lambda0

    @property
    def coupling(self) -> float:
        """``d_eg**2 / hbar``, the field-to-oscillator coupling (SI)."""
        return self.d_eg**2 / self.constants.hbar

    def with_dimensionality(self, dim: int) -> EmitterSpec:
        return replace(self, dimensionality=dim)


DEFAULT_EMITTER = EmitterSpec()


def normalization_factor(spec: EmitterSpec) -> float:
    """Return the source normalization ``N_D``: 1/A in 1D, 1/L in 2D, 1 in 3D."""
    if spec.dimensionality == 1:
        return 1.0 / spec.cross_section_A
    if spec.dimensionality == 2:
        return 1.0 / spec.axial_length_L
    return 1.0
