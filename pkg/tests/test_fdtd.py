import math

import numpy as np
import pytest

from sefdtd.constants import CONSTANTS, DEFAULT_EMITTER
from sefdtd import fdtd
from sefdtd.fdtd import FieldState, FixedCurrent, NumericalInstability, YeeSolver, apply_mur_1d, apply_upml_2d
from sefdtd.grid import BoundarySpec, Grid, build_free_space, build_pec_cavity_1d, build_square_cavity_2d

LAM = DEFAULT_EMITTER.lambda0
W0 = DEFAULT_EMITTER.omega0
C = CONSTANTS.c


class Pulse:
    """Gaussian current pulse, optionally on a carrier."""

    def __init__(self, node, dt, t0=20e-15, width=5e-15, omega=0.0):
        self.node, self.dt, self.t0, self.width, self.omega = node, dt, t0, width, omega
        self.n = 0

    def current(self, e_now, e_star, kick):
        t = (self.n + 0.5) * self.dt
        self.n += 1
        env = math.exp(-(((t - self.t0) / self.width) ** 2))
        return env * (math.sin(self.omega * t) if self.omega else 1.0)


def peak_time(t, y):
    i = int(np.argmax(y))
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    return t[i] + 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2) * (t[1] - t[0])


def test_null_evolution():
    g = build_square_cavity_2d(LAM / math.sqrt(2))
    s = YeeSolver(g)
    s.run(50)
    assert not np.any(s.fields.e) and not any(np.any(h) for h in s.fields.h)
    g1 = build_free_space(1, 4 * LAM)
    s1 = YeeSolver(g1)
    s1.run(50, FixedCurrent(g1.emitter_node, 0.0))
    assert not np.any(s1.fields.e)


def test_pulse_speed_1d():
    g = build_free_space(1, 30 * LAM)
    s = YeeSolver(g)
    src = Pulse(g.emitter_node, g.dt)
    p1, p2 = g.emitter_node[0] + 40, g.emitter_node[0] + 240  # 2 and 12 wavelengths away
    steps = int(120e-15 / g.dt)
    rec = np.empty((steps, 2))
    for n in range(steps):
        s.step(src)
        rec[n] = np.abs(s.fields.e[[p1, p2]])
    t = (np.arange(steps) + 1) * g.dt
    speed = 10 * LAM / (peak_time(t, rec[:, 1]) - peak_time(t, rec[:, 0]))
    assert speed == pytest.approx(C, rel=0.01)


def _mur_reflection(eps, tuned_speed=None):
    base = build_free_space(1, 24 * LAM)
    g = Grid(1, base.dx, 0.0, base.dt, base.nx, 0, np.full(base.nx + 1, eps), base.pec_mask, base.boundary,
             base.emitter_node, LAM, base.courant_factor)
    s = YeeSolver(g)
    src = Pulse(g.emitter_node, g.dt)
    probe = g.nx - 120
    v = C / math.sqrt(eps)
    t_inc = src.t0 + (probe - g.emitter_node[0]) * g.dx / v
    t_ref = t_inc + 2 * 120 * g.dx / v
    steps = int((t_ref + 4 * src.width) / g.dt) + 1
    trace = np.empty(steps)
    f = s.fields
    for n in range(steps):
        if tuned_speed is None:
            s.step(src)
        else:
            s.update_h()
            prev = (f.e[0], f.e[1], f.e[-2], f.e[-1])
            fdtd._e_1d(f.e, f.h[0], s.ce)
            apply_mur_1d(f, g, prev, speed=tuned_speed)
            f.step += 1
            node = src.node
            f.e[node] -= s.kick[node] * src.current(0, 0, 0)
        trace[n] = abs(f.e[probe])
    t = (np.arange(steps) + 1) * g.dt
    mid = 0.5 * (t_inc + t_ref)
    return trace[t > mid].max() / trace[t <= mid].max()


def test_mur_vacuum_reflection_below_1_percent():
    assert _mur_reflection(1.0) < 0.01


def test_mur_matched_in_dielectric():
    assert _mur_reflection(3.37**2) < 0.01


def test_vacuum_tuned_mur_reflects_in_dielectric():
    r = _mur_reflection(3.37**2, tuned_speed=C)
    assert r > 0.1  # documented limitation: Mur must use the local phase velocity


def test_mur_zero_fields():
    g = build_free_space(1, 4 * LAM)
    f = FieldState.zeros(g)
    apply_mur_1d(f, g, (0, 0, 0, 0))
    assert not np.any(f.e)


def _interior_energy(s, g):
    n = g.boundary.pml_cells
    e = s.fields.e[n + 1 : -n - 1, n + 1 : -n - 1] if n else s.fields.e
    return 0.5 * CONSTANTS.eps0 * np.sum(np.abs(e) ** 2)


def _pml_residual(cells, t_end=80e-15):
    g = build_free_space(2, 6 * LAM, boundary=BoundarySpec.upml(cells))
    s = YeeSolver(g)
    src = Pulse(g.emitter_node, g.dt, t0=12e-15, width=4e-15, omega=W0)
    peak = 0.0
    for n in range(int(t_end / g.dt)):
        s.step(src)
        if n * g.dt < 30e-15:
            peak = max(peak, _interior_energy(s, g))
    return _interior_energy(s, g) / peak


def test_upml_absorbs():
    assert _pml_residual(10) < 1e-4


def _pml_reflection(cells, t_end=60e-15):
    """Interior field error against a domain large enough to be reflection-free."""
    fields, peak = [], 0.0
    for extent, b in ((6 * LAM, BoundarySpec.upml(cells)), (16 * LAM, BoundarySpec("PEC"))):
        g = build_free_space(2, extent, boundary=b)
        s = YeeSolver(g)
        src = Pulse(g.emitter_node, g.dt, t0=12e-15, width=4e-15, omega=W0)
        i, j = g.emitter_node
        for n in range(int(t_end / g.dt)):
            s.step(src)
            window = s.fields.e[i - 58 : i + 59, j - 58 : j + 59]
            if b.kind == "PEC":
                peak = max(peak, np.sum(np.abs(window) ** 2))
        fields.append(window)
    return np.sum(np.abs(fields[0] - fields[1]) ** 2) / peak


def test_upml_thicker_reflects_less():
    r = [_pml_reflection(n) for n in (4, 8, 16)]
    assert r[0] > r[1] > r[2]
    assert r[1] < 1e-4


def test_upml_zero_cells_is_pec():
    a = build_free_space(2, 3 * LAM, boundary=BoundarySpec.upml(0))
    b = build_free_space(2, 3 * LAM, boundary=BoundarySpec("PEC"))
    sa, sb = YeeSolver(a), YeeSolver(b)
    for s, g in ((sa, a), (sb, b)):
        src = Pulse(g.emitter_node, g.dt, omega=W0)
        s.run(int(60e-15 / g.dt), src)
    assert np.array_equal(sa.fields.e, sb.fields.e)


def test_apply_upml_matches_solver_step():
    g = build_free_space(2, 3 * LAM)
    s = YeeSolver(g)
    rng = np.random.default_rng(1)
    s.fields.e[g.emitter_node] = 1.0
    s.run(40)
    ref = s.fields.copy()
    s.step()
    apply_upml_2d(ref, g)
    assert np.array_equal(ref.e, s.fields.e)
    assert rng is not None


def _seeded_cavity():
    g = build_square_cavity_2d(LAM / math.sqrt(2), resolution=20)
    s = YeeSolver(g)
    x, y = g.x / (g.nx * g.dx), g.y / (g.ny * g.dy)
    s.fields.e[:] = np.outer(np.sin(np.pi * x), np.sin(np.pi * y))
    s.fields.e[g.pec_mask] = 0
    return g, s


def test_energy_conserved_sourceless_pec():
    g, s = _seeded_cavity()
    e0 = s.energy()
    drift = 0.0
    for _ in range(10):
        s.run(1000)
        drift = max(drift, abs(s.energy() / e0 - 1))
    assert drift < 1e-10


def test_linearity():
    g = build_square_cavity_2d(LAM / math.sqrt(2), resolution=20)
    rng = np.random.default_rng(7)
    e0 = (rng.normal(size=g.node_shape) + 1j * rng.normal(size=g.node_shape)) * ~g.pec_mask
    alpha = 0.3 - 1.7j
    runs = []
    for scale in (1.0, alpha):
        s = YeeSolver(g)
        s.fields.e[:] = scale * e0
        s.run(300, FixedCurrent(g.emitter_node, scale * 1e3))
        runs.append(s.fields.e)
    err = np.max(np.abs(alpha * runs[0] - runs[1])) / np.max(np.abs(runs[1]))
    assert err < 1e-12


def test_deterministic():
    out = []
    for _ in range(2):
        g = build_free_space(2, 3 * LAM)
        s = YeeSolver(g)
        s.run(200, Pulse(g.emitter_node, g.dt, omega=W0))
        out.append(s.fields.e.tobytes() + s.fields.h[0].tobytes())
    assert out[0] == out[1]


def test_phase_velocity_error_at_20_ppw():
    g = build_pec_cavity_1d(5 * LAM, resolution=20, match_dispersion=False)
    s = YeeSolver(g)
    k = 2 * math.pi / LAM
    s.fields.e[:] = np.sin(k * g.x)
    s.fields.e[g.pec_mask] = 0
    probe = 5  # quarter wavelength: antinode
    steps = 3000
    y = np.empty(steps)
    for n in range(steps):
        s.step()
        y[n] = s.fields.e[probe].real
    idx = np.where(np.sign(y[:-1]) != np.sign(y[1:]))[0]
    tz = (idx + y[idx] / (y[idx] - y[idx + 1])) * g.dt
    omega = math.pi / np.mean(np.diff(tz))
    err = omega / (C * k) - 1
    assert abs(err) < 0.005
    expected = 2 / g.dt * math.asin(C * g.dt / g.dx * math.sin(k * g.dx / 2)) / (C * k) - 1
    assert err == pytest.approx(expected, abs=2e-4)


def test_non_finite_aborts_with_step():
    g = build_free_space(1, 4 * LAM)
    s = YeeSolver(g, check_every=1)
    s.fields.e[10] = np.nan
    with pytest.raises(NumericalInstability) as exc:
        s.step()
    assert exc.value.step == 1


def test_module_step_matches_solver():
    g = build_free_space(1, 4 * LAM)
    a = YeeSolver(g)
    a.fields.e[g.emitter_node] = 1.0
    b = a.fields.copy()
    a.step()
    fdtd.step(b, g)
    assert np.array_equal(a.fields.e, b.e) and b.step == 1
