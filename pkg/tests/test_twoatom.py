import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqlab import twoatom as ta
from dqlab.errors import ValidationError
from dqlab.matcore import expm_generator, unitarity_error

UNCOUPLED = [m for m in range(16) if m not in ta.COUPLED_INDICES]


def test_index_round_trip():
    for m in range(16):
        idx = ta.ProductBasisIndex.from_flat(m)
        assert idx.m == m and idx == (m // 4, m % 4)
    with pytest.raises(ValidationError):
        ta.ProductBasisIndex.from_flat(16)


def test_interaction_matrix():
    v = ta.build_vab_interaction(ta.TwoAtomModel(h=1.0))
    expected = np.zeros((16, 16))
    for a, b in [(2, 8), (3, 9), (6, 12), (7, 13)]:
        expected[a, b] = expected[b, a] = 1
    np.testing.assert_array_equal(v, expected)
    assert not np.any(ta.build_vab_interaction(ta.TwoAtomModel(h=0.0)))
    vc = ta.build_vab_interaction(ta.TwoAtomModel(h=0.3 + 0.4j))
    assert np.max(np.abs(vc - vc.conj().T)) == 0


def test_energy_bookkeeping():
    model = ta.TwoAtomModel(omega=10.0, h=0.2)
    diag = np.real(np.diag(ta.two_atom_hamiltonian(model)))
    for m in (0, 1, 4, 5):
        assert diag[m] == pytest.approx(5.0)
    for m in (10, 11, 14, 15):
        assert diag[m] == pytest.approx(-5.0)
    for m in ta.COUPLED_INDICES:
        assert diag[m] == 0.0
    np.testing.assert_allclose(ta.interaction_part(model), ta.build_vab_interaction(model), atol=1e-14)


def test_u_ab_closed_matches_exponential(rng):
    for _ in range(50):
        h = rng.uniform(0.1, 3) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        t = rng.uniform(0, 10)
        model = ta.TwoAtomModel(h=h)
        u = ta.u_ab_closed(t, model)
        assert np.linalg.norm(u - expm_generator(ta.build_vab_interaction(model), t)) <= 1e-10
        assert unitarity_error(u) < 1e-12
        np.testing.assert_array_equal(u[UNCOUPLED][:, UNCOUPLED], np.eye(8))
        assert not np.any(u[UNCOUPLED][:, list(ta.COUPLED_INDICES)])


def test_u_ab_closed_template():
    h = 0.7 * np.exp(0.9j)
    model = ta.TwoAtomModel(h=h)
    t = 1.3
    c, d = ta.extract_cd(ta.u_ab_closed(t, model))
    assert c == pytest.approx(math.cos(0.7 * t), abs=1e-15)
    assert d == pytest.approx(-1j * np.exp(0.9j) * math.sin(0.7 * t), abs=1e-15)
    swap = ta.u_ab_closed(math.pi / 2 / 0.7, model)
    assert abs(swap[8, 8]) < 1e-15
    assert swap[2, 8] == pytest.approx(-1j * np.exp(0.9j), abs=1e-14)
    np.testing.assert_array_equal(ta.u_ab_closed(0.0, model), np.eye(16))
    np.testing.assert_array_equal(ta.u_ab_closed(2.0, ta.TwoAtomModel(h=0.0)), np.eye(16))


def test_local_gate_library():
    g = ta.local_gate_library(1.0, 0.0)
    for name in ("P1", "P2", "P3", "P4"):
        np.testing.assert_array_equal(getattr(g, name), np.eye(4))
    assert g.theta == 0.0
    s = 1 / math.sqrt(2)
    g = ta.local_gate_library(s, -1j * s)
    assert g.theta == pytest.approx(math.pi / 4)
    assert g.P6[2, 2] == pytest.approx(1j)
    with pytest.raises(ValidationError):
        ta.local_gate_library(1.0, 0.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_local_gates_unitary(angle, pc, pd):
    c = math.cos(angle) * np.exp(1j * pc)
    d = math.sin(angle) * np.exp(1j * pd)
    for gate in ta.local_gate_library(c, d).as_dict().values():
        assert unitarity_error(gate) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 20), st.floats(0.1, 3), st.floats(0, 2 * np.pi))
def test_cz_sequence_structure(t, wp, phase):
    model = ta.TwoAtomModel(h=wp * np.exp(1j * phase))
    u5, diag = ta.cz_sequence(ta.u_ab_closed(t, model))
    assert diag.offdiag_max < 1e-10
    np.testing.assert_allclose(np.abs(np.diag(u5)), 1, atol=1e-12)
    np.testing.assert_allclose(u5, ta.expected_u5(diag.theta), atol=1e-10)
    assert abs(abs(diag.c) ** 2 + abs(diag.d) ** 2 - 1) < 1e-12
    for block in ta.LOGICAL_BLOCKS:
        sub = u5[np.ix_(block, block)]
        np.testing.assert_allclose(sub, np.diag([1, 1, 1, np.exp(4j * diag.theta)]), atol=1e-10)


def test_cz_examples():
    model = ta.TwoAtomModel(h=1.0)
    _, diag = ta.cz_sequence(ta.u_ab_closed(math.pi / 4, model))
    assert diag.phase == pytest.approx(-1.0, abs=1e-10)
    u5, _ = ta.cz_sequence(ta.u_ab_closed(0.0, model))
    np.testing.assert_allclose(u5, np.eye(16), atol=1e-12)
    _, diag = ta.cz_sequence(ta.u_ab_closed(math.pi / 6, model))
    assert diag.theta == pytest.approx(math.pi / 6)
    assert diag.phase == pytest.approx(np.exp(2j * math.pi / 3), abs=1e-10)
    with pytest.raises(ValidationError):
        ta.cz_sequence(np.eye(4))


def test_cz_timing():
    t1 = ta.solve_cz_time(ta.TwoAtomModel(h=1.0))
    assert t1.t_equal == pytest.approx(math.pi / 4, abs=1e-12)
    assert t1.t_literal == pytest.approx(math.pi / 4, abs=1e-12)
    t2 = ta.solve_cz_time(ta.TwoAtomModel(h=2.0))
    assert t2.t_equal == pytest.approx(math.pi / 8, abs=1e-12)
    assert t2.t_literal == pytest.approx(math.atan(2) / 2, abs=1e-12)
    assert t2.discrepancy == pytest.approx(math.atan(2) / 2 - math.pi / 8, abs=1e-12)
    for h in (0.5, 2.0, 3.0j):
        model = ta.TwoAtomModel(h=h)
        _, diag = ta.cz_sequence(ta.u_ab_closed(ta.solve_cz_time(model).t_equal, model))
        assert diag.phase == pytest.approx(-1.0, abs=1e-10)
