"""Modal reference: three-level amplitude equations over known cavity modes.

The emitter (ground ``g``, excited ``e1``, auxiliary ``e2``) couples to a
discrete set of modes with strengths ``gamma_k``. Starting from ``a(0)=1``::

    i da/dt   = w_a a + sum_k gamma_k b_k + sum_k gamma_k c_k
    i db_k/dt = w_k b_k + conj(gamma_k) a
    i dc_k/dt = (2 w0 + w_k) c_k + conj(gamma_k) a

The generator is Hermitian, so the norm ``|a|^2 + sum|b|^2 + sum|c|^2`` is
conserved. The system is integrated with classic fourth-order Runge-Kutta.

Off-resonant modes shift the excited level, and dilute its weight, by
amounts that grow without bound as modes are added. By default both are
renormalized on shell at second order: the bare frequency ``w_a`` is offset
by minus the level shift so the dressed level sits at ``w0``, and the resonant
couplings are scaled by ``sqrt(1 + zeta)`` (``zeta`` the weight lost to
off-resonant admixture) so the dressed coupling equals the bare one. With
this, truncation converges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sefdtd.constants import CONSTANTS, DEFAULT_EMITTER, EmitterSpec, PhysicalConstants
from sefdtd.emitter import PopulationTrace


class OracleError(RuntimeError):
    pass


@dataclass
class ModeSet:
    omega: np.ndarray
    gamma: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=complex)
        order = np.argsort(self.omega, kind="stable")
        self.omega, self.gamma = self.omega[order], self.gamma[order]
        if self.labels:
            self.labels = [self.labels[i] for i in order]
        if np.any(self.omega <= 0) or not np.all(np.isfinite(self.gamma)):
            raise ValueError("mode frequencies must be > 0 and couplings finite")

    def __len__(self):
        return self.omega.size

    def resonant(self, omega0: float, rel_tol: float = 0.1) -> np.ndarray:
        return np.abs(self.omega - omega0) <= rel_tol * omega0


def modes_pec_box_1d(l_x: float, A: float, K: int, emitter_pos: float, d_eg: float = DEFAULT_EMITTER.d_eg,
                     constants: PhysicalConstants = CONSTANTS) -> ModeSet:
    """First ``K`` standing waves of a PEC slab of length ``l_x``.

    Mode functions ``sqrt(2/l_x) sin(n pi x/l_x)`` per unit area, quantization
    volume ``l_x * A``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0 < emitter_pos < l_x:
        raise ValueError("emitter must lie inside the cavity")
    n = np.arange(1, K + 1)
    omega = n * math.pi * constants.c / l_x
    shape = math.sqrt(2.0) * np.sin(n * math.pi * emitter_pos / l_x)
    gamma = -np.sqrt(omega / (2 * constants.eps0 * constants.hbar * l_x * A)) * shape * d_eg
    return ModeSet(omega, gamma, [int(k) for k in n])


def modes_pec_box_2d(l: float, L: float, omega_max: float, emitter_pos: tuple[float, float],
                     d_eg: float = DEFAULT_EMITTER.d_eg, constants: PhysicalConstants = CONSTANTS,
                     K_max: int | None = None) -> ModeSet:
    """TM modes ``(n, m)`` of a square PEC box with ``w_nm <= omega_max``.

    Mode functions ``(2/l) sin(n pi x/l) sin(m pi y/l)`` per unit length,
    quantization volume ``l**2 * L``.
    """
    x0, y0 = emitter_pos
    nmax = int(omega_max * l / (math.pi * constants.c)) + 1
    if K_max is not None:
        nmax = min(nmax, K_max)
    omega, gamma, labels = [], [], []
    for n in range(1, nmax + 1):
        for m in range(1, nmax + 1):
            w = math.pi * constants.c / l * math.hypot(n, m)
            if w > omega_max * (1 + 1e-12):
                continue
            shape = 2.0 * math.sin(n * math.pi * x0 / l) * math.sin(m * math.pi * y0 / l)
            omega.append(w)
            gamma.append(-math.sqrt(w / (2 * constants.eps0 * constants.hbar * l * l * L)) * shape * d_eg)
            labels.append((n, m))
    if not omega:
        raise ValueError("no modes below omega_max")
    return ModeSet(omega, gamma, labels)


def lamb_shift(modes: ModeSet, omega0: float, include_counter_rotating: bool = True) -> float:
    """Second-order level shift from all couplings except resonant rotating terms."""
    g2 = np.abs(modes.gamma) ** 2
    off = ~modes.resonant(omega0)
    shift = np.sum(g2[off] / (omega0 - modes.omega[off]))
    if include_counter_rotating:
        shift -= np.sum(g2 / (omega0 + modes.omega))
    return float(shift)


def weight_loss(modes: ModeSet, omega0: float, include_counter_rotating: bool = True) -> float:
    """Second-order admixture ``zeta`` of off-resonant states into the dressed level."""
    g2 = np.abs(modes.gamma) ** 2
    off = ~modes.resonant(omega0)
    zeta = np.sum(g2[off] / (omega0 - modes.omega[off]) ** 2)
    if include_counter_rotating:
        zeta += np.sum(g2 / (omega0 + modes.omega) ** 2)
    return float(zeta)


@dataclass
class ThreeLevelTrace:
    t: np.ndarray
    a: np.ndarray
    norm: np.ndarray
    b: np.ndarray
    c: np.ndarray | None
    omega_bare: float
    dt_ode: float

    @property
    def population(self) -> np.ndarray:
        return np.abs(self.a) ** 2

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))

    def to_population_trace(self) -> PopulationTrace:
        return PopulationTrace(self.t, self.a, {"source": "modal-oracle", "dt_ode_s": self.dt_ode})


def _hamiltonian(modes, omega0, include_cr, renormalize):
    k = len(modes)
    dim = 1 + k * (2 if include_cr else 1)
    h = np.zeros((dim, dim), dtype=complex)
    gamma = modes.gamma.copy()
    omega_a = omega0
    if renormalize:
        omega_a -= lamb_shift(modes, omega0, include_cr)
        gamma[modes.resonant(omega0)] *= math.sqrt(1 + weight_loss(modes, omega0, include_cr))
    h[0, 0] = omega_a
    idx = np.arange(1, k + 1)
    h[0, idx] = gamma
    h[idx, 0] = np.conj(gamma)
    h[idx, idx] = modes.omega
    if include_cr:
        idx = idx + k
        h[0, idx] = gamma
        h[idx, 0] = np.conj(gamma)
        h[idx, idx] = 2 * omega0 + modes.omega
    return h, omega_a


def _rk4_propagator(h, dt):
    x = -1j * dt * h
    m = np.eye(h.shape[0], dtype=complex)
    term = m.copy()
    for order in range(1, 5):
        term = term @ x / order
        m = m + term
    return m


def integrate_eq1(modes: ModeSet, omega0: float, t_end: float, dt_ode: float | None = None,
                  include_counter_rotating: bool = True, renormalize: bool = True,
                  samples: int = 4000, steps_per_period: int = 250) -> ThreeLevelTrace:
    """Integrate the amplitude equations from ``a(0)=1`` with classic RK4.

    The system is linear and autonomous, so one RK4 step is the fixed matrix
    ``sum_{j<=4} (-i H dt)^j / j!``; it is applied as a matrix power between
    recorded samples. The step must resolve the fastest frequency with at
    least 20 steps per period. A norm drift above 1e-6 triggers one retry at
    half the step before giving up.
    """
    h, omega_a = _hamiltonian(modes, omega0, include_counter_rotating, renormalize)
    w_max = float(np.max(np.abs(np.diag(h).real)))
    limit = 2 * math.pi / (20 * w_max)
    if dt_ode is None:
        dt_ode = 2 * math.pi / (steps_per_period * w_max)
    elif dt_ode > limit * (1 + 1e-12):
        raise ValueError(f"dt_ode={dt_ode:g} resolves the fastest mode with < 20 steps per period")

    for attempt in range(2):
        stride = max(1, int(round(t_end / (dt_ode * samples))))
        n_samples = int(math.ceil(t_end / (dt_ode * stride))) + 1
        prop = np.linalg.matrix_power(_rk4_propagator(h, dt_ode), stride)
        y = np.zeros(h.shape[0], dtype=complex)
        y[0] = 1.0
        a = np.empty(n_samples, dtype=complex)
        norm = np.empty(n_samples)
        a[0], norm[0] = 1.0, 1.0
        for s in range(1, n_samples):
            y = prop @ y
            a[s] = y[0]
            norm[s] = np.vdot(y, y).real
        t = np.arange(n_samples) * stride * dt_ode
        drift = np.max(np.abs(norm - 1.0))
        if drift <= 1e-6:
            break
        dt_ode /= 2
    else:
        raise OracleError(f"norm drift {drift:.2e} exceeds 1e-6 after refinement")
    k = len(modes)
    c = y[1 + k:] if include_counter_rotating else None
    return ThreeLevelTrace(t, a, norm, y[1:1 + k], c, omega_a, dt_ode)


def omega_nm(l: float, n: int, m: int, c: float = CONSTANTS.c) -> float:
    """Eigenfrequency ``(pi c / l) sqrt(n^2 + m^2)`` of a square PEC box."""
    return math.pi * c / l * math.hypot(n, m)


def closed_forms(spec: EmitterSpec = DEFAULT_EMITTER, l_x: float | None = None, l_square: float | None = None) -> dict:
    """Lifetimes and Jaynes-Cummings couplings for ``spec``.

    ``f_R_1d`` is the single-mode coupling of a 1D cavity of length ``l_x``
    (default ``lambda0/2``). ``f_R_degenerate`` is the single-mode coupling
    of one of the (1,3)/(3,1) modes of a square box of side ``l_square``
    (default ``sqrt(5/2) lambda0``); the emitter sees both, so its
    population oscillates with the collective coupling
    ``f_R_collective = sqrt(2) * f_R_degenerate``. ``f_R_square_11`` is the
    single (1,1) coupling of a box of side ``lambda0/sqrt(2)``.
    """
    k = spec.constants
    w0, d2 = spec.omega0, spec.d_eg**2
    A, L = spec.cross_section_A, spec.axial_length_L
    l_x = spec.lambda0 / 2 if l_x is None else l_x
    l_square = math.sqrt(2.5) * spec.lambda0 if l_square is None else l_square
    l1 = spec.lambda0 / math.sqrt(2)
    w13 = omega_nm(l_square, 1, 3, k.c)
    f_deg = math.sqrt(2 * w13 * d2 / (k.hbar * k.eps0 * l_square**2 * L))
    return {
        "tau_1d": k.eps0 * k.hbar * k.c * A / (d2 * w0),
        "tau_2d": 2 * k.eps0 * k.hbar * k.c**2 * L / (d2 * w0**2),
        "f_R_1d": math.sqrt(w0 * d2 / (k.hbar * k.eps0 * l_x * A)),
        "f_R_degenerate": f_deg,
        "f_R_collective": math.sqrt(2) * f_deg,
        "f_R_square_11": math.sqrt(2 * omega_nm(l1, 1, 1, k.c) * d2 / (k.hbar * k.eps0 * l1**2 * L)),
        "omega_nm": {(n, m): omega_nm(l_square, n, m, k.c) for n in range(0, 5) for m in range(0, 5) if n or m},
    }
