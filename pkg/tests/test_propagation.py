import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotorqec.errors import ErrorLabel, heaviside, make_error
from rotorqec.fock import residual_on_safe_subspace
from rotorqec.gates import GateSpec, make_gate
from rotorqec.propagation import (
    QUBIT_GATES,
    QUBIT_IDENTITY_GATES,
    compare_qubit_restriction,
    conjugate,
    crot_two_error_phase,
    materialize,
    predict,
    propagation_sweep,
    verify,
    verify_appendixA,
    verify_linear_modification,
    verify_qubit,
    write_sweep_csv,
)

import oracles

TOL = 1e-9


def test_z_phase_example():
    pred = predict(GateSpec("Z", (2,)), ErrorLabel(3, 0.2))
    assert pred.global_phase == pytest.approx(-1j)
    assert pred.terms[0].labels[0] == ErrorLabel(3, 0.2)


def test_s_rotation_shift():
    N, k = 2, 3
    pred = predict(GateSpec("S", (N,)), ErrorLabel(k, 0.1))
    assert pred.terms[0].labels[0].theta == pytest.approx(0.1 + np.pi * k / N**2)
    assert pred.global_phase == pytest.approx(np.exp(1j * np.pi * k**2 / N**2 / 2))


def test_crot_single_error_spawns_rotation():
    pred = predict(GateSpec("CROT", (2, 3)), ErrorLabel(2, 0.0))
    a, b = pred.terms[0].labels
    assert a == ErrorLabel(2, 0.0)
    assert b == ErrorLabel(0, np.pi * 2 / 6)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("k", [-3, -1, 0, 2, 3])
def test_conjugation_matches_oracle_for_diagonal_gates(N, k):
    # for unitary diagonal gates E' = G E G^dagger, built from loop oracles
    d, th = 40, 0.37
    E = oracles.error(k, th, d)
    for spec in (GateSpec("Z", (N,)), GateSpec("S", (N,)), GateSpec("T", (N,)), GateSpec("RlPrime", (N,), ell=2)):
        G = make_gate(spec, d)
        E_prime, extra = materialize(predict(spec, ErrorLabel(k, th), d), N, d)
        assert extra is None
        assert residual_on_safe_subspace(conjugate(G, E), E_prime, abs(k) + 2) < TOL


@pytest.mark.parametrize("kind", ["X", "XPrime", "TPrime", "Rl", "P"])
@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("k", [-3, -2, 0, 1, 3])
def test_single_mode_rules(kind, N, k):
    extra = {"Rl": {"ell": 3}, "P": {"phi": 0.7}}.get(kind, {})
    spec = GateSpec(kind, (N,), **extra)
    assert verify(spec, ErrorLabel(k, -1.1), 40) < TOL


@pytest.mark.parametrize("k1,k2", [(1, 2), (-2, 1), (-1, -3), (3, 0)])
def test_crot_two_error_rule(k1, k2):
    spec = GateSpec("CROT", (2, 3))
    assert verify(spec, (ErrorLabel(k1, 0.3), ErrorLabel(k2, -0.8)), (14, 14)) < TOL


def _two_error_residual(k1, k2, phase, N=2, M=2, d=10):
    G = make_gate(GateSpec("CROT", (N, M)), (d, d))
    lhs = G @ np.kron(oracles.error(k1, 0, d), oracles.error(k2, 0, d))
    E_out = np.kron(oracles.error(k1, np.pi * k2 / (N * M), d), oracles.error(k2, np.pi * k1 / (N * M), d))
    diff = lhs - phase * E_out @ G
    n1, n2 = np.divmod(np.arange(d * d), d)
    pad = 4
    safe = (n1 < d - pad) & (n2 < d - pad)
    return float(np.max(np.abs(diff[:, safe])))


def test_crot_two_error_phase_sign():
    pairs = [(a, b) for a in (-2, -1, 1, 2) for b in (-2, -1, 1, 2)]
    printed_fail = set()
    for k1, k2 in pairs:
        assert _two_error_residual(k1, k2, crot_two_error_phase(k1, k2, 2, 2)) < TOL
        printed = np.exp(-1j * np.pi * k1 * k2 * (heaviside(-k1) + heaviside(k2)) / 4)
        if _two_error_residual(k1, k2, printed) > 1e-6:
            printed_fail.add((k1, k2))
    assert printed_fail == {(-2, 1), (-1, 1), (-1, 2), (1, 1), (1, 2), (2, 1)}


def test_crot_output_errors_commute_with_gate_structure():
    # the propagated two-mode errors are a product, so they commute with the other mode's rotation
    pred = predict(GateSpec("CROT", (2, 2)), (ErrorLabel(1, 0.0), ErrorLabel(-1, 0.0)), (8, 8))
    a, b = pred.terms[0].labels
    A = np.kron(make_error(a, 8), np.eye(8))
    B = np.kron(np.eye(8), make_error(b, 8))
    assert np.max(np.abs(A @ B - B @ A)) == 0


@pytest.mark.parametrize("k", [-2, 1, 3])
def test_ccrot_single_error(k):
    assert verify(GateSpec("CCROT", (2, 2, 2)), ErrorLabel(k, 0.4), (10, 10, 10)) < TOL
    assert verify(GateSpec("CCROT", (1, 2, 1)), (None, ErrorLabel(k, 0.4), None), (10, 10, 10)) < TOL


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=1, max_size=4),
    st.integers(-4, 4),
    st.floats(-np.pi, np.pi),
)
def test_function_of_n_lemma(coeffs, k, theta):
    assert verify_appendixA(coeffs, ErrorLabel(k, theta), 24, abs(k) + 1) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(-np.pi, np.pi), st.integers(-4, 4), st.floats(-np.pi, np.pi))
def test_linear_modification(phi, k, theta):
    assert verify_linear_modification(phi, ErrorLabel(k, theta), 20) < 1e-10


@pytest.mark.parametrize("gate", QUBIT_IDENTITY_GATES)
@pytest.mark.parametrize("k", [-1, 0, 1])
def test_qubit_identities(gate, k):
    assert verify_qubit(gate, k, 0.6) < 1e-12


def test_shift_gate_has_no_two_level_identity():
    with pytest.raises(ValueError):
        verify_qubit("Xshift", 1, 0.0)
    assert "Xshift" in QUBIT_GATES


@pytest.mark.parametrize("kind", ["Z", "S", "T", "X", "XPrime", "CROT", "CCROT"])
@pytest.mark.parametrize("k", [-1, 0, 1])
def test_bosonic_restricts_to_qubit_rule(kind, k):
    assert compare_qubit_restriction(kind, k, 0.6) < 1e-12


def test_sweep_rows_and_csv(tmp_path):
    rows = propagation_sweep(kinds=("Z", "S", "CROT"), Ns=(1, 2), ks=(-1, 2), thetas=(0.0, 0.5), threads=2)
    assert len(rows) == 3 * 2 * 2 * 2
    assert max(r.residual for r in rows) < TOL
    path = write_sweep_csv(rows, tmp_path / "p.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "# rotorqec propagation v1"
    assert lines[1] == "gate,N,k,theta,d,pad,residual"
    assert len(lines) == 2 + len(rows)
