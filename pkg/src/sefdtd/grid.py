"""Yee lattices and permittivity maps for the supported geometries.

Conventions
-----------
E-nodes sit at integer positions ``x_i = i*dx`` (``i = 0..nx``), and in 2D
at ``(x_i, y_j)``. ``eps_r`` and ``pec_mask`` are sampled on E-nodes, so their
shapes are ``(nx+1,)`` or ``(nx+1, ny+1)``. H components live half a cell
away. The outermost E-nodes carry the boundary condition: PEC walls, Mur
nodes, or the PEC backing of a UPML shell ``pml_cells`` thick.

Material interfaces are placed on E-nodes; a node on an interface gets the
mean of the two permittivities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from sefdtd.constants import CONSTANTS, DEFAULT_EMITTER, EmitterSpec

BoundaryKind = Literal["PEC", "Mur1D", "UPML2D"]


@dataclass(frozen=True)
class BoundarySpec:
    kind: BoundaryKind = "PEC"
    pml_cells: int = 0
    pml_order: float = 3.0
    pml_target_reflection: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("PEC", "Mur1D", "UPML2D"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind != "UPML2D" and self.pml_cells != 0:
            raise ValueError("pml_cells is only meaningful for UPML2D")
        if self.pml_cells < 0:
            raise ValueError("pml_cells must be >= 0")
        if not 0 < self.pml_target_reflection < 1:
            raise ValueError("pml_target_reflection must lie in (0, 1)")

    @classmethod
    def upml(cls, cells: int = 10, order: float = 3.0, reflection: float = 1e-8):
        return cls("UPML2D", cells, order, reflection)


@dataclass(eq=False)
class Grid:
    """A 1D or 2D-TM Yee lattice plus everything needed to step it."""

    dimensionality: int
    dx: float
    dy: float
    dt: float
    nx: int
    ny: int
    eps_r: np.ndarray
    pec_mask: np.ndarray
    boundary: BoundarySpec
    emitter_node: tuple[int, ...]
    lambda0: float
    courant_factor: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = self.node_shape
        self.eps_r = np.array(self.eps_r, dtype=float).reshape(shape)
        self.pec_mask = np.array(self.pec_mask, dtype=bool).reshape(shape)
        if np.any(self.eps_r < 1.0):
            raise ValueError("eps_r must be >= 1 everywhere")
        self.eps_r.flags.writeable = False
        self.pec_mask.flags.writeable = False
        self.emitter_node = tuple(int(i) for i in self.emitter_node)
        if len(self.emitter_node) != self.dimensionality:
            raise ValueError("emitter_node rank does not match dimensionality")
        if not self._is_interior(self.emitter_node):
            raise ValueError("emitter node must be interior and non-PEC")
        bound = self.courant_factor / (CONSTANTS.c * math.sqrt(sum(1 / d**2 for d in self.spacings)))
        if self.dt > bound * (1 + 1e-12):
            raise ValueError("dt violates the Courant bound")

    def _is_interior(self, node) -> bool:
        margin = max(1, self.boundary.pml_cells + 1)
        for i, n in zip(node, self.node_shape):
            if not margin <= i <= n - 1 - margin:
                return False
        return not self.pec_mask[node]

    @property
    def spacings(self) -> tuple[float, ...]:
        return (self.dx,) if self.dimensionality == 1 else (self.dx, self.dy)

    @property
    def node_shape(self) -> tuple[int, ...]:
        if self.dimensionality == 1:
            return (self.nx + 1,)
        return (self.nx + 1, self.ny + 1)

    @property
    def cell_volume(self) -> float:
        """Length (1D) or area (2D) owned by one E-node."""
        return self.dx if self.dimensionality == 1 else self.dx * self.dy

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.dx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny + 1) * self.dy

    @property
    def emitter_position(self) -> tuple[float, ...]:
        return tuple(i * d for i, d in zip(self.emitter_node, self.spacings))

    @property
    def emitter_eps(self) -> float:
        return float(self.eps_r[self.emitter_node])

    def same_operators(self, other: Grid) -> bool:
        """True if both grids define the identical discrete problem."""
        return (
            self.dimensionality == other.dimensionality
            and self.node_shape == other.node_shape
            and self.spacings == other.spacings
            and self.dt == other.dt
            and self.boundary == other.boundary
            and self.emitter_node == other.emitter_node
            and np.array_equal(self.eps_r, other.eps_r)
            and np.array_equal(self.pec_mask, other.pec_mask)
        )


def courant_dt(spacings: Grid | float | Sequence[float], factor: float, c: float = CONSTANTS.c) -> float:
    """Time step ``factor / (c * sqrt(sum(1/d_i**2)))``.

    ``factor`` must lie in ``(0, 1/sqrt(D)]`` for D spatial dimensions.
    """
    if isinstance(spacings, Grid):
        spacings = spacings.spacings
    spacings = np.atleast_1d(np.asarray(spacings, dtype=float))
    dim = spacings.size
    if not 0 < factor <= 1 / math.sqrt(dim) + 1e-15:
        raise ValueError(f"Courant factor {factor} outside (0, 1/sqrt({dim})]")
    return factor / (c * math.sqrt(np.sum(1.0 / spacings**2)))


def _default_courant(dim: int) -> float:
    return 0.9 if dim == 1 else 0.5


def _pec_walls(shape) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    mask[0] = mask[-1] = True
    if len(shape) == 2:
        mask[:, 0] = mask[:, -1] = True
    return mask


def _matched_spacing(cells: int, indices: Sequence[int], omega: float, factor: float) -> float:
    """Spacing of an ``cells``-wide PEC box whose discrete mode ``indices``
    oscillates at exactly ``omega``.

    Inverts the Yee dispersion relation
    ``sin(w dt/2) = (factor/sqrt(D)) * sqrt(sum sin^2(n pi / 2N))``
    with ``dt = factor * dx / (c sqrt(D))``.
    """
    dim = len(indices)
    s = math.sqrt(sum(math.sin(n * math.pi / (2 * cells)) ** 2 for n in indices))
    arg = factor / math.sqrt(dim) * s
    return 2 * math.sqrt(dim) * CONSTANTS.c / (omega * factor) * math.asin(arg)


def _nearest_resonance(length: float, dim: int, omega0: float, nmax: int = 8) -> tuple[int, ...]:
    best = None
    for n in range(1, nmax + 1):
        for m in range(1, nmax + 1) if dim == 2 else [None]:
            idx = (n,) if m is None else (n, m)
            w = math.pi * CONSTANTS.c / length * math.sqrt(sum(i * i for i in idx))
            if best is None or abs(w - omega0) < best[0] - 1e-9 * omega0:
                best = (abs(w - omega0), idx)
    return best[1]


def build_free_space(
    dimensionality: int,
    extent: float | Sequence[float],
    resolution: float = 20,
    courant: float | None = None,
    emitter: EmitterSpec = DEFAULT_EMITTER,
    boundary: BoundarySpec | None = None,
) -> Grid:
    """Uniform vacuum with absorbing edges and the emitter at the center.

    ``extent`` is the physical size of the region outside any PML. Mur (1D)
    or a 10-cell UPML (2D) is used unless ``boundary`` says otherwise.
    """
    eps = lambda shape: np.ones(shape)
    return _open_grid(dimensionality, extent, resolution, courant, emitter, boundary, eps, 1.0, "free-space")


def build_disk_2d(
    radius: float,
    eps_r_disk: float = 11.56,
    pad: float | None = None,
    resolution: float = 20,
    courant: float | None = None,
    emitter: EmitterSpec = DEFAULT_EMITTER,
    boundary: BoundarySpec | None = None,
) -> Grid:
    """A staircased dielectric disk in vacuum, emitter at its center."""
    if not radius > 0:
        raise ValueError("disk radius must be > 0")
    if eps_r_disk < 1:
        raise ValueError("eps_r_disk must be >= 1")
    pad = emitter.lambda0 if pad is None else pad
    extent = 2 * (radius + pad)
    dx = emitter.lambda0 / (math.sqrt(eps_r_disk) * resolution)
    if pad < dx:
        raise ValueError("PML overlaps the disk: pad must exceed one cell")

    def eps(shape):
        n = shape[0] - 1
        c = n // 2
        i = np.arange(shape[0])[:, None] - c
        j = np.arange(shape[1])[None, :] - (shape[1] - 1) // 2
        out = np.ones(shape)
        out[(i * dx) ** 2 + (j * dx) ** 2 <= radius**2] = eps_r_disk
        return out

    grid = _open_grid(2, extent, resolution, courant, emitter, boundary, eps, eps_r_disk, "disk")
    grid.metadata.update(radius=radius, eps_r_disk=eps_r_disk, pad=pad)
    return grid


def _open_grid(dim, extent, resolution, courant, emitter, boundary, eps_fn, eps_max, kind) -> Grid:
    if dim not in (1, 2):
        raise ValueError("only 1D and 2D grids are simulated")
    if resolution < 10:
        raise ValueError("resolution must be >= 10 points per wavelength")
    lam = emitter.lambda0
    extent = np.broadcast_to(np.asarray(extent, dtype=float), (dim,))
    if np.any(extent / 2 < lam):
        raise ValueError("extent too small: emitter must be >= 1 wavelength from the absorbing boundary")
    if boundary is None:
        boundary = BoundarySpec("Mur1D") if dim == 1 else BoundarySpec.upml()
    if dim == 1 and boundary.kind == "UPML2D" or dim == 2 and boundary.kind == "Mur1D":
        raise ValueError(f"{boundary.kind} boundary is not available in {dim}D")
    dx = lam / (math.sqrt(eps_max) * resolution)
    interior = [2 * int(round(e / dx / 2)) for e in extent]
    npml = boundary.pml_cells
    counts = [n + 2 * npml for n in interior]
    shape = tuple(n + 1 for n in counts)
    eps_r = eps_fn(shape)
    courant = _default_courant(dim) if courant is None else courant
    dt = courant_dt([dx] * dim, courant)
    node = tuple(n // 2 for n in counts)
    pec = np.zeros(shape, dtype=bool)
    if boundary.kind != "Mur1D":
        pec = _pec_walls(shape)
    return Grid(
        dimensionality=dim,
        dx=dx,
        dy=dx if dim == 2 else 0.0,
        dt=dt,
        nx=counts[0],
        ny=counts[1] if dim == 2 else 0,
        eps_r=eps_r,
        pec_mask=pec,
        boundary=boundary,
        emitter_node=node,
        lambda0=lam,
        courant_factor=courant,
        metadata={"geometry": kind, "extent_m": tuple(float(e) for e in extent), "resolution": resolution},
    )


def build_pec_cavity_1d(
    l_x: float,
    resolution: float = 20,
    courant: float | None = None,
    emitter: EmitterSpec = DEFAULT_EMITTER,
    match_dispersion: bool = True,
) -> Grid:
    """Vacuum gap of length ``l_x`` between two PEC nodes, emitter centered.

    With ``match_dispersion`` the spacing is nudged (by well under 1% at
    sensible resolutions) so that the discrete mode closest to the emitter
    frequency oscillates at its continuum frequency; the resulting effective
    length is recorded in ``metadata['length_m']``.
    """
    return _pec_box(1, l_x, resolution, courant, emitter, match_dispersion)


def build_square_cavity_2d(
    l: float,
    resolution: float = 20,
    courant: float | None = None,
    emitter: EmitterSpec = DEFAULT_EMITTER,
    match_dispersion: bool = True,
) -> Grid:
    """Square PEC box of side ``l`` (TM polarization), emitter centered."""
    return _pec_box(2, l, resolution, courant, emitter, match_dispersion)


def _pec_box(dim, length, resolution, courant, emitter, match_dispersion) -> Grid:
    if not length > 0:
        raise ValueError("cavity length must be > 0")
    lam = emitter.lambda0
    cells = int(round(length / (lam / resolution)))
    cells += cells % 2
    if cells < 10:
        raise ValueError(f"cavity resolves to {cells} cells; need >= 10")
    courant = _default_courant(dim) if courant is None else courant
    dx = length / cells
    matched = None
    if match_dispersion:
        matched = _nearest_resonance(length, dim, emitter.omega0)
        w = math.pi * CONSTANTS.c / length * math.sqrt(sum(i * i for i in matched))
        dx = _matched_spacing(cells, matched, w, courant)
    dt = courant_dt([dx] * dim, courant)
    shape = (cells + 1,) * dim
    return Grid(
        dimensionality=dim,
        dx=dx,
        dy=dx if dim == 2 else 0.0,
        dt=dt,
        nx=cells,
        ny=cells if dim == 2 else 0,
        eps_r=np.ones(shape),
        pec_mask=_pec_walls(shape),
        boundary=BoundarySpec("PEC"),
        emitter_node=(cells // 2,) * dim,
        lambda0=lam,
        courant_factor=courant,
        metadata={
            "geometry": "pec-cavity-1d" if dim == 1 else "square-cavity-2d",
            "nominal_length_m": length,
            "length_m": cells * dx,
            "cells": cells,
            "dispersion_matched_mode": matched,
        },
    )


def build_bragg_cavity_1d(
    N: int,
    n1: float = 2.89,
    n2: float = 3.37,
    cavity_index: float = 3.37,
    cavity_thickness: float | None = None,
    resolution: float = 24,
    pad: float | None = None,
    courant: float | None = None,
    emitter: EmitterSpec = DEFAULT_EMITTER,
    boundary: BoundarySpec | None = None,
) -> Grid:
    """Symmetric quarter-wave Bragg cavity with vacuum pads and Mur edges.

    Layout: ``[pad][N x (outer, inner)][cavity][N x (inner, outer)][pad]``.
    The ``inner`` layer touching the cavity is the mirror material whose
    index differs most from ``cavity_index``, which puts a field antinode at
    the cavity center for a full-wave cavity. Every layer is snapped to a
    whole number of cells; snapped thicknesses land in ``metadata``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if min(n1, n2, cavity_index) <= 1:
        raise ValueError("layer indices must exceed 1")
    lam = emitter.lambda0
    if cavity_thickness is None:
        cavity_thickness = lam / n2
    pad = lam / 2 if pad is None else pad
    nmax = max(n1, n2, cavity_index)
    dx = lam / (nmax * resolution)
    inner, outer = (n1, n2) if abs(n1 - cavity_index) >= abs(n2 - cavity_index) else (n2, n1)

    def cells(thickness, what):
        k = int(round(thickness / dx))
        if k < 4:
            raise ValueError(f"{what} layer resolves to {k} cells; need >= 4")
        return k

    q_in, q_out = cells(lam / (4 * inner), "inner mirror"), cells(lam / (4 * outer), "outer mirror")
    q_cav = cells(cavity_thickness, "cavity")
    q_pad = max(4, int(round(pad / dx)))
    layers = [(1.0, q_pad)]
    layers += [(outer, q_out), (inner, q_in)] * N
    layers += [(cavity_index, q_cav)]
    layers += [(inner, q_in), (outer, q_out)] * N
    layers += [(1.0, q_pad)]

    nx = sum(q for _, q in layers)
    eps = np.empty(nx + 1)
    edges = np.cumsum([0] + [q for _, q in layers])
    for (n, _), a, b in zip(layers, edges[:-1], edges[1:]):
        eps[a : b + 1] = n * n
    for k, e in enumerate(edges[1:-1], start=1):
        eps[e] = 0.5 * (layers[k - 1][0] ** 2 + layers[k][0] ** 2)
    cav_start = edges[1 + 2 * N]
    node = cav_start + q_cav // 2

    courant = _default_courant(1) if courant is None else courant
    boundary = BoundarySpec("Mur1D") if boundary is None else boundary
    pec = np.zeros(nx + 1, dtype=bool)
    if boundary.kind == "PEC":
        pec = _pec_walls((nx + 1,))
    return Grid(
        dimensionality=1,
        dx=dx,
        dy=0.0,
        dt=courant_dt(dx, courant),
        nx=nx,
        ny=0,
        eps_r=eps,
        pec_mask=pec,
        boundary=boundary,
        emitter_node=(node,),
        lambda0=lam,
        courant_factor=courant,
        metadata={
            "geometry": "bragg-cavity-1d",
            "mirror_cells": N,
            "n_inner": inner,
            "n_outer": outer,
            "cavity_index": cavity_index,
            "inner_layer_m": q_in * dx,
            "outer_layer_m": q_out * dx,
            "cavity_m": q_cav * dx,
            "stack_m": (nx - 2 * q_pad) * dx,
            "nominal_stack_m": 2 * N * (lam / (4 * inner) + lam / (4 * outer)) + cavity_thickness,
            "resolution": resolution,
        },
    )


def dump_eps(grid: Grid, path) -> None:
    """Write the permittivity map as a whitespace-separated text matrix."""
    header = f"dimensionality={grid.dimensionality} dx={grid.dx!r} dy={grid.dy!r} shape={grid.node_shape}"
    np.savetxt(path, np.atleast_2d(grid.eps_r), fmt="%.6g", header=header)
