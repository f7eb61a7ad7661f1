"""The complex dipole oscillator and its lockstep coupling to the Yee solver.

Two oscillator models are supported:

``DipoleCurrent``
    ``dP/dt = -i w0 P + i (d_eg^2/hbar) E(r0)`` with injected current
    ``J = N_D delta(r - r0) dP/dt``.
``IntegralSource``
    ``df/dt = -i w0 f - i (d_eg^2/hbar) w0^2 E(r0)`` with injected current
    ``J = N_D delta(r - r0) int_0^t f``.

With these signs a radiating emitter loses energy to the field. The delta
function is spread uniformly over the emitter's Yee cell.

Each step solves the oscillator and the emitter node's field update jointly.
The field sample driving the oscillator is the midpoint
``(E^n + E^{n+1})/2``, and the current is centered at ``n+1/2``. The
coupled update is linear in the two unknowns, so it is solved in closed form.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from sefdtd.constants import DEFAULT_EMITTER, EmitterSpec, normalization_factor
from sefdtd.fdtd import NumericalInstability, YeeSolver
from sefdtd.grid import Grid

CouplingModel = Literal["DipoleCurrent", "IntegralSource"]
MODELS = ("DipoleCurrent", "IntegralSource")


@dataclass
class DipoleState:
    model: CouplingModel = "DipoleCurrent"
    value: complex = 1.0 + 0j
    integral: complex = 0j
    previous: complex = 1.0 + 0j
    previous_integral: complex = 0j
    t: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown coupling model {self.model!r}")


def _rotation(omega0, dt):
    return cmath.exp(-1j * omega0 * dt), cmath.exp(-0.5j * omega0 * dt)


def update_oscillator_p(state: DipoleState, e_mid: complex, dt: float, omega0: float, d_eg: float,
                        hbar: float) -> DipoleState:
    """Advance P by ``dt`` given the time-centered field ``e_mid``.

    Exact free rotation plus midpoint quadrature of the source:
    ``P' = exp(-i w0 dt) P + i (d_eg^2/hbar) dt exp(-i w0 dt/2) e_mid``.
    """
    rot, half = _rotation(omega0, dt)
    new = rot * state.value + 1j * (d_eg**2 / hbar) * dt * half * e_mid
    return _advance(state, new, state.integral, dt)


def update_oscillator_f(state: DipoleState, e_mid: complex, dt: float, omega0: float, d_eg: float,
                        hbar: float) -> DipoleState:
    """Advance f by ``dt``; the running integral uses the trapezoid rule."""
    rot, half = _rotation(omega0, dt)
    new = rot * state.value - 1j * (d_eg**2 / hbar) * omega0**2 * dt * half * e_mid
    integral = state.integral + 0.5 * dt * (state.value + new)
    return _advance(state, new, integral, dt)


def _advance(state, new, integral, dt):
    if not (cmath.isfinite(new) and cmath.isfinite(integral)):
        raise NumericalInstability(int(round(state.t / dt)) + 1, "oscillator")
    return DipoleState(state.model, new, integral, state.value, state.integral, state.t + dt)


def injected_current(state: DipoleState, grid: Grid, n_d: float) -> complex:
    """Current density (A/m^2) at the emitter node for the step just taken.

    DipoleCurrent: ``N_D * delta * (P^{n+1} - P^n)/dt``. IntegralSource:
    ``N_D * delta * (I^n + I^{n+1})/2``. ``delta = 1/cell_volume``.
    """
    delta = 1.0 / grid.cell_volume
    if state.model == "DipoleCurrent":
        source = (state.value - state.previous) / grid.dt
    else:
        source = 0.5 * (state.integral + state.previous_integral)
    return n_d * delta * source


def energy_budget(emitter: EmitterSpec, dimensionality: int, amplitude0: complex = 1.0) -> float:
    """Field energy (per unit transverse size) released by full decay.

    Follows from the oscillator equation: the work done by the source equals
    ``N_D hbar w0 / (2 d_eg^2) * (|P(0)|^2 - |P(t)|^2)``.
    """
    n_d = normalization_factor(emitter.with_dimensionality(dimensionality))
    return n_d * emitter.constants.hbar * emitter.omega0 * abs(amplitude0) ** 2 / (2 * emitter.d_eg**2)


@dataclass
class PopulationTrace:
    """Sampled oscillator amplitude; ``population`` is ``|amplitude|**2``."""

    t: np.ndarray
    amplitude: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.amplitude = np.asarray(self.amplitude, dtype=complex)
        if self.t.shape != self.amplitude.shape:
            raise ValueError("t and amplitude must have equal length")

    def __len__(self):
        return self.t.size

    @property
    def population(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def window(self, t_start: float = -np.inf, t_end: float = np.inf) -> PopulationTrace:
        keep = (self.t >= t_start) & (self.t <= t_end)
        return PopulationTrace(self.t[keep], self.amplitude[keep], dict(self.metadata))

    def to_csv(self, path) -> Path:
        path = Path(path)
        pop = self.population
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_s", "Re_P", "Im_P", "abs_P_sq"])
            for t, a, p in zip(self.t, self.amplitude, pop):
                w.writerow([repr(float(t)), repr(float(a.real)), repr(float(a.imag)), repr(float(p))])
        return path

    @classmethod
    def from_csv(cls, path) -> PopulationTrace:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1] + 1j * data[:, 2])


class CoupledEmitter:
    """Source hook that advances the oscillator jointly with its E-node."""

    def __init__(self, grid: Grid, emitter: EmitterSpec, model: CouplingModel = "DipoleCurrent",
                 initial: complex = 1.0):
        if model not in MODELS:
            raise ValueError(f"unknown coupling model {model!r}")
        self.grid = grid
        self.emitter = emitter.with_dimensionality(grid.dimensionality)
        self.model = model
        self.node = grid.emitter_node
        self.n_d = normalization_factor(self.emitter)
        self.weight = self.n_d / grid.cell_volume
        self.state = DipoleState(model, complex(initial), 0j, complex(initial), 0j, 0.0)
        dt, w0 = grid.dt, self.emitter.omega0
        self.rot, half = _rotation(w0, dt)
        kappa = self.emitter.coupling
        if model == "DipoleCurrent":
            self.b = 1j * kappa * dt * half
        else:
            self.b = -1j * kappa * w0**2 * dt * half
        # the normalized current carries no factor d_eg; a zero dipole is no emitter
        self.active = self.emitter.d_eg != 0
        self.work = 0.0
        self.last_current = 0j

    def current(self, e_now: complex, e_star: complex, kick: float) -> complex:
        s, dt, b = self.state, self.grid.dt, self.b
        if not self.active:
            new = self.rot * s.value
            self.state = _advance(s, new, s.integral + 0.5 * dt * (s.value + new), dt)
            return 0j
        if self.model == "DipoleCurrent":
            a = kick * self.weight / dt
            new = (self.rot * s.value + 0.5 * b * (e_now + e_star + a * s.value)) / (1 + 0.5 * a * b)
            integral = s.integral
            j = self.weight * (new - s.value) / dt
        else:
            c1 = 0.5 * kick * self.weight
            base = e_now + e_star - c1 * (2 * s.integral + 0.5 * dt * s.value)
            new = (self.rot * s.value + 0.5 * b * base) / (1 + 0.25 * b * c1 * dt)
            integral = s.integral + 0.5 * dt * (s.value + new)
            j = 0.5 * self.weight * (s.integral + integral)
        self.state = _advance(s, new, integral, dt)
        e_new = e_star - kick * j
        self.work -= (j * np.conj(0.5 * (e_now + e_new))).real * dt * self.grid.cell_volume
        self.last_current = j
        return j


class Simulation:
    """A grid, a Yee solver and a coupled emitter stepped together."""

    def __init__(self, grid: Grid, emitter: EmitterSpec = DEFAULT_EMITTER, model: CouplingModel = "DipoleCurrent"):
        self.grid = grid
        self.solver = YeeSolver(grid)
        self.hook = CoupledEmitter(grid, emitter, model)

    @property
    def state(self) -> DipoleState:
        return self.hook.state

    def run(self, duration: float | None = None, steps: int | None = None, decimation: int = 1) -> PopulationTrace:
        if steps is None and duration is None:
            raise ValueError("give duration or steps")
        decimation = max(1, int(decimation))
        if steps is None:
            # whole number of records so the last sample reaches the duration
            steps = decimation * int(math.ceil(duration / (self.grid.dt * decimation) - 1e-9))
        n_rec = steps // decimation + 1
        t = np.empty(n_rec)
        amp = np.empty(n_rec, dtype=complex)
        t[0], amp[0] = self.state.t, self.state.value
        k = 1
        for n in range(1, steps + 1):
            self.solver.step(self.hook)
            if n % decimation == 0:
                t[k], amp[k] = n * self.grid.dt, self.state.value
                k += 1
        self.solver.check_finite()
        meta = {
            "model": self.hook.model,
            "dt_s": self.grid.dt,
            "steps": steps,
            "decimation": decimation,
            "dimensionality": self.grid.dimensionality,
        }
        return PopulationTrace(t[:k], amp[:k], meta)


def simulate(grid: Grid, emitter: EmitterSpec = DEFAULT_EMITTER, model: CouplingModel = "DipoleCurrent",
             duration: float | None = None, steps: int | None = None, decimation: int = 1) -> PopulationTrace:
    """Run a fresh emitter in ``grid`` from zero fields and P(0)=1."""
    return Simulation(grid, emitter, model).run(duration, steps, decimation)
