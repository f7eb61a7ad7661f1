"""Leapfrog Yee solver for complex fields in 1D (Ey, Hz) and 2D TM (Ez, Hx, Hy).

Update equations (SI)::

    mu0 dHz/dt = -dEy/dx                         (1D)
    eps0 eps_r dEy/dt = -dHz/dx - J

    mu0 dHx/dt = -dEz/dy                         (2D TM)
    mu0 dHy/dt =  dEz/dx
    eps0 eps_r dEz/dt = dHy/dx - dHx/dy - J

H lives at half steps, E at integer steps. Fields are complex; the update is
real-linear, so real and imaginary parts evolve independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numba
import numpy as np

from sefdtd.constants import CONSTANTS
from sefdtd.grid import Grid

EPS0 = CONSTANTS.eps0
MU0 = CONSTANTS.mu0


class NumericalInstability(RuntimeError):
    """Raised when a field or oscillator value becomes NaN or infinite."""

    def __init__(self, step: int, what: str = "field"):
        super().__init__(f"non-finite {what} at step {step}")
        self.step = step


class SourceHook(Protocol):
    """Anything that injects a current density at a single E-node.

    ``current`` receives the node's field before the update (``e_now``), the
    sourceless updated value (``e_star``) and the kick factor
    ``dt/(eps0*eps_r)``; it returns the current density J (A/m^2) so that the
    final value is ``e_star - kick*J``.
    """

    node: tuple[int, ...]

    def current(self, e_now: complex, e_star: complex, kick: float) -> complex: ...


@dataclass
class FixedCurrent:
    """Prescribed current density at one node, e.g. for pulse tests."""

    node: tuple[int, ...]
    value: complex = 0.0

    def current(self, e_now, e_star, kick):
        return self.value


@dataclass
class FieldState:
    e: np.ndarray
    h: tuple[np.ndarray, ...]
    step: int = 0
    pml: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls, grid: Grid) -> FieldState:
        e = np.zeros(grid.node_shape, dtype=complex)
        if grid.dimensionality == 1:
            h = (np.zeros(grid.nx, dtype=complex),)
        else:
            h = (
                np.zeros((grid.nx + 1, grid.ny), dtype=complex),
                np.zeros((grid.nx, grid.ny + 1), dtype=complex),
            )
        state = cls(e=e, h=h)
        if grid.boundary.kind == "UPML2D" and grid.boundary.pml_cells > 0:
            state.pml = {
                "ihx": np.zeros_like(h[0]),
                "ihy": np.zeros_like(h[1]),
                "dz": np.zeros_like(e),
                "idz": np.zeros_like(e),
            }
        return state

    def copy(self) -> FieldState:
        return FieldState(
            self.e.copy(), tuple(a.copy() for a in self.h), self.step, {k: v.copy() for k, v in self.pml.items()}
        )


# -- kernels -----------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _h_1d(e, hz, ch):
    for i in range(hz.shape[0]):
        hz[i] += ch * (e[i + 1] - e[i])


@numba.njit(cache=True, nogil=True)
def _e_1d(e, hz, ce):
    for i in range(1, e.shape[0] - 1):
        e[i] -= ce[i] * (hz[i] - hz[i - 1])


@numba.njit(cache=True, nogil=True)
def _h_2d(ez, hx, hy, chx, chy):
    nx1, ny1 = ez.shape
    for i in range(nx1):
        for j in range(ny1 - 1):
            hx[i, j] += chx * (ez[i, j + 1] - ez[i, j])
    for i in range(nx1 - 1):
        for j in range(ny1):
            hy[i, j] += chy * (ez[i + 1, j] - ez[i, j])


@numba.njit(cache=True, nogil=True)
def _e_2d(ez, hx, hy, ce, inv_dx, inv_dy):
    nx1, ny1 = ez.shape
    for i in range(1, nx1 - 1):
        for j in range(1, ny1 - 1):
            curl = (hy[i, j] - hy[i - 1, j]) * inv_dx - (hx[i, j] - hx[i, j - 1]) * inv_dy
            ez[i, j] += ce[i, j] * curl


@numba.njit(cache=True, nogil=True)
def _h_2d_pml(ez, hx, hy, ihx, ihy, mx1, mx2, mx3, my1, my2, my3, inv_dx, inv_dy):
    nx1, ny1 = ez.shape
    for i in range(nx1):
        for j in range(ny1 - 1):
            cex = (ez[i, j + 1] - ez[i, j]) * inv_dy
            ihx[i, j] += cex
            hx[i, j] = mx1[i, j] * hx[i, j] + mx2[i, j] * cex + mx3[i, j] * ihx[i, j]
    for i in range(nx1 - 1):
        for j in range(ny1):
            cey = -(ez[i + 1, j] - ez[i, j]) * inv_dx
            ihy[i, j] += cey
            hy[i, j] = my1[i, j] * hy[i, j] + my2[i, j] * cey + my3[i, j] * ihy[i, j]


@numba.njit(cache=True, nogil=True)
def _e_2d_pml(ez, hx, hy, dz, idz, ce, in_pml, md1, md2, md4, inv_eps, inv_dx, inv_dy):
    nx1, ny1 = ez.shape
    for i in range(1, nx1 - 1):
        for j in range(1, ny1 - 1):
            curl = (hy[i, j] - hy[i - 1, j]) * inv_dx - (hx[i, j] - hx[i, j - 1]) * inv_dy
            if in_pml[i, j]:
                idz[i, j] += dz[i, j]
                dz[i, j] = md1[i, j] * dz[i, j] + md2[i, j] * curl + md4[i, j] * idz[i, j]
                ez[i, j] = dz[i, j] * inv_eps[i, j]
            else:
                ez[i, j] += ce[i, j] * curl


# -- boundaries ----------------------------------------------------------------


def apply_mur_1d(fields: FieldState, grid: Grid, prev: tuple, speed: float | None = None) -> FieldState:
    """First-order Mur update of both end nodes.

    ``prev`` holds ``(e[0], e[1], e[-2], e[-1])`` from before the interior
    update. ``speed`` defaults to the local phase velocity at each edge;
    passing ``CONSTANTS.c`` reproduces a vacuum-tuned boundary.
    """
    e = fields.e
    e0, e1, em2, em1 = prev
    for end, (old_edge, old_next, nxt) in (
        (0, (e0, e1, 1)),
        (-1, (em1, em2, -2)),
    ):
        v = speed if speed is not None else CONSTANTS.c / math.sqrt(grid.eps_r[end])
        k = (v * grid.dt - grid.dx) / (v * grid.dt + grid.dx)
        e[end] = old_next + k * (e[nxt] - old_edge)
    return fields


def _pml_profile(depth, thickness, sigma_max, order):
    rho = np.clip(depth / thickness, 0.0, 1.0)
    return sigma_max * rho**order


def pml_coefficients(grid: Grid) -> dict:
    """Update coefficients of the uniaxial PML (Gedney form, TM polarization)."""
    b = grid.boundary
    n = b.pml_cells
    dt, dx, dy = grid.dt, grid.dx, grid.dy
    eps_edge = float(grid.eps_r[n, n])
    sig = {}
    for axis, (d, count) in enumerate(((dx, grid.nx), (dy, grid.ny))):
        thickness = n * d
        sigma_max = -(b.pml_order + 1) * math.log(b.pml_target_reflection) * math.sqrt(eps_edge) / (
            2 * CONSTANTS.eta0 * thickness
        )
        for stagger in (0.0, 0.5):
            pos = (np.arange(count + (1 if stagger == 0 else 0)) + stagger) * d
            depth = np.maximum(n * d - pos, pos - (count - n) * d)
            sig[axis, stagger] = _pml_profile(depth, thickness, sigma_max, b.pml_order) / EPS0

    def outer(ax, ay):
        return np.add.outer(ax, np.zeros_like(ay)), np.add.outer(np.zeros_like(ax), ay)

    # Hx at (i, j+1/2)
    sx, sy = outer(sig[0, 0.0], sig[1, 0.5])
    m0 = 1 / dt + sy / 2
    mx1, mx2, mx3 = (1 / dt - sy / 2) / m0, -1 / (MU0 * m0), -(sx * dt) / (MU0 * m0)
    # Hy at (i+1/2, j)
    sx, sy = outer(sig[0, 0.5], sig[1, 0.0])
    m0 = 1 / dt + sx / 2
    my1, my2, my3 = (1 / dt - sx / 2) / m0, -1 / (MU0 * m0), -(sy * dt) / (MU0 * m0)
    # Dz at (i, j)
    sx, sy = outer(sig[0, 0.0], sig[1, 0.0])
    m0 = 1 / dt + (sx + sy) / 2 + dt * sx * sy / 4
    md1 = (1 / dt - (sx + sy) / 2 - dt * sx * sy / 4) / m0
    md2 = 1 / m0
    md4 = -dt * sx * sy / m0
    shape = grid.node_shape
    i = np.arange(shape[0])[:, None]
    j = np.arange(shape[1])[None, :]
    in_pml = (i <= n) | (i >= shape[0] - 1 - n) | (j <= n) | (j >= shape[1] - 1 - n)
    return dict(
        mx=(mx1, mx2, mx3),
        my=(my1, my2, my3),
        md=(md1, md2, md4),
        in_pml=np.ascontiguousarray(in_pml),
        inv_eps=1.0 / (EPS0 * grid.eps_r),
    )


def apply_upml_2d(fields: FieldState, grid: Grid, coeffs: dict | None = None) -> FieldState:
    """One full leapfrog step with the UPML shell active (no source)."""
    if coeffs is None:
        coeffs = pml_coefficients(grid)
    ez, (hx, hy) = fields.e, fields.h
    p = fields.pml
    _h_2d_pml(ez, hx, hy, p["ihx"], p["ihy"], *coeffs["mx"], *coeffs["my"], 1 / grid.dx, 1 / grid.dy)
    ce = grid.dt / (EPS0 * grid.eps_r) * ~grid.pec_mask
    _e_2d_pml(ez, hx, hy, p["dz"], p["idz"], ce, coeffs["in_pml"], *coeffs["md"], coeffs["inv_eps"],
              1 / grid.dx, 1 / grid.dy)
    fields.step += 1
    return fields


# -- solver --------------------------------------------------------------------


class YeeSolver:
    """Steps a :class:`FieldState` on a fixed :class:`Grid`.

    ``check_every`` sets how often the whole field is scanned for NaN/Inf;
    the emitter node is checked on every step that has a source.
    """

    def __init__(self, grid: Grid, fields: FieldState | None = None, check_every: int = 256):
        self.grid = grid
        self.fields = FieldState.zeros(grid) if fields is None else fields
        self.check_every = check_every
        dt = grid.dt
        self.kick = dt / (EPS0 * grid.eps_r)
        self.ce = np.where(grid.pec_mask, 0.0, self.kick)
        self.use_pml = grid.boundary.kind == "UPML2D" and grid.boundary.pml_cells > 0
        self.mur = grid.boundary.kind == "Mur1D"
        if grid.dimensionality == 1:
            self.ch = -dt / (MU0 * grid.dx)
            self.ce = self.ce / grid.dx
        else:
            self.chx = -dt / (MU0 * grid.dy)
            self.chy = dt / (MU0 * grid.dx)
            if self.use_pml:
                self.pml = pml_coefficients(grid)
                if not self.fields.pml:
                    self.fields.pml = FieldState.zeros(grid).pml

    @property
    def time(self) -> float:
        return self.fields.step * self.grid.dt

    def update_h(self, fields: FieldState | None = None) -> None:
        f = self.fields if fields is None else fields
        g = self.grid
        if g.dimensionality == 1:
            _h_1d(f.e, f.h[0], self.ch)
        elif self.use_pml:
            p = f.pml
            _h_2d_pml(f.e, f.h[0], f.h[1], p["ihx"], p["ihy"], *self.pml["mx"], *self.pml["my"],
                      1 / g.dx, 1 / g.dy)
        else:
            _h_2d(f.e, f.h[0], f.h[1], self.chx, self.chy)

    def update_e(self) -> None:
        f, g = self.fields, self.grid
        if g.dimensionality == 1:
            prev = (f.e[0], f.e[1], f.e[-2], f.e[-1]) if self.mur else None
            _e_1d(f.e, f.h[0], self.ce)
            if self.mur:
                apply_mur_1d(f, g, prev)
        elif self.use_pml:
            p = f.pml
            _e_2d_pml(f.e, f.h[0], f.h[1], p["dz"], p["idz"], self.ce, self.pml["in_pml"], *self.pml["md"],
                      self.pml["inv_eps"], 1 / g.dx, 1 / g.dy)
        else:
            _e_2d(f.e, f.h[0], f.h[1], self.ce, 1 / g.dx, 1 / g.dy)

    def step(self, hook: SourceHook | None = None) -> FieldState:
        """Advance H by a half step and E by a full step, then inject."""
        f = self.fields
        self.update_h()
        if hook is not None:
            node = hook.node
            e_now = f.e[node]
        self.update_e()
        f.step += 1
        if hook is not None:
            kick = self.kick[node]
            j = hook.current(e_now, f.e[node], kick)
            f.e[node] = f.e[node] - kick * j
            if not np.isfinite(f.e[node]):
                raise NumericalInstability(f.step)
        if self.check_every and f.step % self.check_every == 0:
            self.check_finite()
        return f

    def run(self, steps: int, hook: SourceHook | None = None) -> FieldState:
        for _ in range(steps):
            self.step(hook)
        return self.fields

    def check_finite(self) -> None:
        f = self.fields
        if not (np.isfinite(f.e).all() and all(np.isfinite(h).all() for h in f.h)):
            raise NumericalInstability(f.step)

    def energy(self) -> float:
        """Discrete electromagnetic energy (J per unit transverse size).

        Uses the leapfrog invariant
        ``sum(eps |E^n|^2)/2 + Re sum(mu H^{n-1/2} conj(H^{n+1/2}))/2``,
        which is exactly conserved by a lossless closed Yee grid.
        """
        f, g = self.fields, self.grid
        ahead = FieldState(f.e, tuple(h.copy() for h in f.h), f.step,
                           {k: v.copy() for k, v in f.pml.items()})
        self.update_h(ahead)
        we = 0.5 * EPS0 * np.sum(g.eps_r * np.abs(f.e) ** 2)
        wh = 0.5 * MU0 * sum(np.sum((a * np.conj(b)).real) for a, b in zip(f.h, ahead.h))
        return float((we + wh) * g.cell_volume)

    def emitter_field(self) -> complex:
        return complex(self.fields.e[self.grid.emitter_node])


def step(fields: FieldState, grid: Grid, source_hook: SourceHook | None = None) -> FieldState:
    """Advance ``fields`` by one time step in place and return it."""
    return YeeSolver(grid, fields, check_every=1).step(source_hook)
