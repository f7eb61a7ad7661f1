import math

import numpy as np
import pytest

from sefdtd.analysis import compare_traces, extract_oscillation_frequency
from sefdtd.constants import CONSTANTS, DEFAULT_EMITTER
from sefdtd.emitter import PopulationTrace, simulate
from sefdtd.grid import build_pec_cavity_1d
from sefdtd.oracle import (
    ModeSet,
    OracleError,
    closed_forms,
    integrate_eq1,
    lamb_shift,
    modes_pec_box_1d,
    modes_pec_box_2d,
    weight_loss,
)

E = DEFAULT_EMITTER
W0 = E.omega0
LX = E.lambda0 / 2
L2 = math.sqrt(2.5) * E.lambda0
L1 = E.lambda0 / math.sqrt(2)
K = CONSTANTS


def f_r_closed_form(l_x):
    return math.sqrt(W0 * E.d_eg**2 / (K.hbar * K.eps0 * l_x * E.cross_section_A))


def test_gamma1_equals_closed_form_f_r():
    m = modes_pec_box_1d(LX, E.cross_section_A, 4, LX / 2)
    assert m.omega[0] == pytest.approx(W0, rel=1e-12)
    assert abs(m.gamma[0]) == pytest.approx(f_r_closed_form(LX), rel=1e-12)
    assert abs(m.gamma[1]) < 1e-12 * abs(m.gamma[0])
    assert m.labels == [1, 2, 3, 4]


def test_modeset_validation_and_sorting():
    m = ModeSet([3.0, 1.0, 2.0], [0.3, 0.1, 0.2], ["c", "a", "b"])
    assert list(m.omega) == [1, 2, 3] and m.labels == ["a", "b", "c"]
    with pytest.raises(ValueError):
        ModeSet([-1.0], [0.0])
    with pytest.raises(ValueError):
        modes_pec_box_1d(LX, 1.0, 0, LX / 2)
    with pytest.raises(ValueError):
        modes_pec_box_1d(LX, 1.0, 3, 2 * LX)


def test_square_l2_degenerate_pair():
    m = modes_pec_box_2d(L2, E.axial_length_L, 3 * W0, (L2 / 2, L2 / 2))
    lab = {lab: i for i, lab in enumerate(m.labels)}
    g13, g31 = m.gamma[lab[(1, 3)]], m.gamma[lab[(3, 1)]]
    assert abs(g13) == pytest.approx(abs(g31), rel=1e-12)
    assert m.omega[lab[(1, 3)]] == pytest.approx(W0, rel=1e-12)
    single = math.sqrt(2 * W0 * E.d_eg**2 / (K.hbar * K.eps0 * L2**2 * E.axial_length_L))
    assert abs(g13) == pytest.approx(single, rel=1e-12)
    for (n, mm), i in lab.items():
        if n % 2 == 0 or mm % 2 == 0:
            assert abs(m.gamma[i]) < 1e-12 * abs(g13)


def test_square_l1_only_11_resonant():
    m = modes_pec_box_2d(L1, E.axial_length_L, 3 * W0, (L1 / 2, L1 / 2))
    res = m.resonant(W0)
    assert [m.labels[i] for i in np.flatnonzero(res)] == [(1, 1)]
    assert m.omega.max() <= 3 * W0


def test_zero_coupling_free_rotation():
    m = ModeSet([W0, 2 * W0], [0.0, 0.0])
    tr = integrate_eq1(m, W0, 50e-15)
    assert np.max(np.abs(tr.a - np.exp(-1j * W0 * tr.t))) < 1e-6
    assert np.max(np.abs(tr.population - 1)) < 1e-9


def test_rwa_single_mode_cos_squared():
    g = 3e13
    m = ModeSet([W0], [g])
    t_end = 5 * math.pi / g
    tr = integrate_eq1(m, W0, t_end, include_counter_rotating=False, renormalize=False)
    assert np.max(np.abs(tr.population - np.cos(g * tr.t) ** 2)) < 1e-4


def test_norm_conserved():
    m = modes_pec_box_1d(LX, E.cross_section_A, 50, LX / 2)
    tr = integrate_eq1(m, W0, 3 * math.pi / f_r_closed_form(LX))
    assert tr.norm_drift < 1e-8


def test_dt_ode_must_resolve_fastest_mode():
    m = modes_pec_box_1d(LX, E.cross_section_A, 5, LX / 2)
    with pytest.raises(ValueError):
        integrate_eq1(m, W0, 1e-13, dt_ode=1e-15)


def test_norm_failure_raises():
    m = ModeSet([W0], [1e15])
    with pytest.raises(OracleError):
        integrate_eq1(m, W0, 1e-12, steps_per_period=20, include_counter_rotating=False)


def _pop(K_modes, t_end):
    m = modes_pec_box_1d(LX, E.cross_section_A, K_modes, LX / 2)
    return integrate_eq1(m, W0, t_end).to_population_trace()


def test_truncation_convergence():
    t_end = 3 * math.pi / f_r_closed_form(LX)
    p1, p50, p100 = (_pop(k, t_end) for k in (1, 50, 100))
    assert compare_traces(p1, p50)["Linf_rel"] < 0.02
    assert compare_traces(p50, p100)["Linf_rel"] < 0.01


def test_renormalization_terms():
    m = modes_pec_box_1d(LX, E.cross_section_A, 50, LX / 2)
    assert lamb_shift(m, W0) < 0  # higher modes push the level down
    assert weight_loss(m, W0) > 0
    assert lamb_shift(ModeSet([W0], [1e12]), W0, include_counter_rotating=False) == 0


def test_degenerate_enhancement_sqrt2():
    m = modes_pec_box_2d(L2, E.axial_length_L, 3 * W0, (L2 / 2, L2 / 2))
    single = abs(m.gamma[m.labels.index((1, 3))])
    tr = integrate_eq1(m, W0, 4 * math.pi / single)
    omega = extract_oscillation_frequency(tr.to_population_trace()).omega
    assert omega == pytest.approx(math.sqrt(2) * 2 * single, rel=0.01)


def test_closed_forms_reference_values():
    cf = closed_forms(E)
    assert cf["tau_1d"] == pytest.approx(0.267e-12, rel=0.005)
    assert cf["tau_2d"] == pytest.approx(27.45e-12, rel=0.005)
    assert cf["f_R_1d"] == pytest.approx(3.87e13, rel=0.005)
    assert cf["f_R_collective"] == pytest.approx(math.sqrt(2) * cf["f_R_degenerate"])
    assert cf["omega_nm"][(1, 3)] == pytest.approx(W0, rel=1e-12)
    # independent re-evaluation of the lifetime formulas
    assert cf["tau_1d"] == pytest.approx(K.eps0 * K.hbar * K.c * E.cross_section_A / (E.d_eg**2 * W0), rel=1e-14)


def test_oracle_matches_fdtd_1d_cavity():
    t_end = 3 * math.pi / f_r_closed_form(LX)
    oracle = _pop(50, t_end)
    fdtd = simulate(build_pec_cavity_1d(LX, resolution=80), duration=t_end)
    assert compare_traces(fdtd, oracle)["Linf_rel"] < 0.03


def test_oracle_trace_csv(tmp_path):
    tr = _pop(5, 20e-15)
    tr.to_csv(tmp_path / "o.csv")
    assert (tmp_path / "o.csv").read_text().startswith("t_s,Re_P,Im_P,abs_P_sq\n")
    assert isinstance(tr, PopulationTrace)
