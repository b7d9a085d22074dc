from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotorqec.codes import make_binomial_profile, make_cat_profile, make_code, make_ideal_profile
from rotorqec.distance import (
    GRID_COLUMNS,
    PAULIS,
    contrived_code_check,
    detectability_grid,
    hermiticity_check,
    kl_block,
    max_correctable_deviation,
    nshift_form,
    nshift_law_residual,
    tradeoff_row,
    verify_tradeoff,
    write_grid_csv,
    write_tradeoff,
)
from rotorqec.errors import ErrorLabel


def ideal(N=2, M=13, k0=0):
    return make_code(make_ideal_profile(N, M), k0=k0)


def cat(N=2, alpha=2.0):
    return make_code(make_cat_profile(N, alpha, 80))


def test_kl_block_examples():
    code = ideal()
    blk = kl_block(code, ErrorLabel(0, 0.0), ErrorLabel(0, 0.0))
    assert np.allclose(blk.matrix, np.eye(2)) and blk.proportionality_deviation < 1e-14
    blk = kl_block(code, ErrorLabel(0, 0.0), ErrorLabel(1, 0.0))
    assert blk.norm < 1e-14
    blk = kl_block(code, ErrorLabel(0, 0.0), ErrorLabel(2, 0.0))
    c = blk.matrix[0, 1]
    assert np.allclose(blk.matrix, c * PAULIS["X"], atol=0.1)
    assert blk.proportionality_deviation > 0.5


@pytest.mark.parametrize("code", [ideal(2), ideal(3, 14), cat(2), cat(3, 2.5),
                                  make_code(make_binomial_profile(2, 4))], ids=["ideal2", "ideal3", "cat2", "cat3", "binom"])
def test_kl_zero_law(code):
    N = code.N
    for j in range(-N, N + 1):
        for k in range(-N, N + 1):
            if (j - k) % N == 0:
                continue
            blk = kl_block(code, ErrorLabel(j, 0.3), ErrorLabel(k, -0.8))
            assert blk.norm < 1e-10 and blk.proportionality_deviation < 1e-10


def test_hermiticity():
    labels = [ErrorLabel(0, 0.1), ErrorLabel(0, 0.3), ErrorLabel(1, -0.2), ErrorLabel(1, 0.4)]
    assert hermiticity_check(ideal(), labels) < 1e-12
    assert hermiticity_check(cat(), labels) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(-2, 2), st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2))
def test_same_shift_block_depends_on_difference(k, theta, phi, shift):
    code = ideal(2, 12, k0=1)
    a = kl_block(code, ErrorLabel(k, theta), ErrorLabel(k, phi)).proportionality_deviation
    b = kl_block(code, ErrorLabel(k, theta + shift), ErrorLabel(k, phi + shift)).proportionality_deviation
    assert abs(a - b) < 1e-9


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("j", [0, 1, 2])
def test_nshift_law_odd_M(N, j):
    code = ideal(N, 13, k0=1)
    for theta, phi in ((0.0, 0.0), (0.2, -0.5), (1.1, 0.4)):
        res, _ = nshift_law_residual(code, j + N, theta, phi)
        assert res < 1e-8


def test_nshift_form_is_x_at_zero():
    assert np.allclose(nshift_form(0, 2, 0.0), PAULIS["X"])


def test_nshift_law_even_M_residual_does_not_shrink():
    res = [nshift_law_residual(ideal(2, M, k0=1), 3, 0.2, -0.5)[0] for M in (12, 24, 48)]
    assert min(res) > 0.1


def test_detectability_grid():
    N = 3
    grid = detectability_grid(ideal(N, 14), threads=2)
    assert list(grid.ks) == list(range(-N, N + 1))
    assert grid.thetas[0] == pytest.approx(-np.pi / N)
    assert np.all(grid.thetas < np.pi / N)
    i0 = list(grid.ks).index(0)
    t0 = int(np.argmin(np.abs(grid.thetas)))
    for k in (1, 2):
        i = list(grid.ks).index(k)
        assert grid.deviation[i, t0] < 1e-12 and grid.status[i, t0] == "zero"
    iN = list(grid.ks).index(N)
    assert grid.deviation[iN, t0] > 0.5 and grid.boundary[iN, t0]
    assert grid.status[i0, t0] == "compatible"
    # -pi/N is the same angle as pi/N on the grid
    assert grid.status[i0, 0] == "logical:Z"
    assert grid.deviation[i0, 0] == pytest.approx(np.sqrt(2))


def test_grid_serial_parallel_identical(tmp_path):
    code = cat(2)
    a = detectability_grid(code, threads=1)
    b = detectability_grid(code, threads=3)
    pa = write_grid_csv(a, tmp_path / "a.csv")
    pb = write_grid_csv(b, tmp_path / "b.csv")
    assert pa.read_bytes() == pb.read_bytes()
    assert pa.read_text().splitlines()[1] == ",".join(GRID_COLUMNS)


def test_finite_M_convergence():
    devs = [max_correctable_deviation(ideal(2, M, k0=1), [0, 1]) for M in (6, 10, 14, 18)]
    assert all(x >= y for x, y in zip(devs, devs[1:]))
    assert devs[-1] < devs[0]


def test_tradeoff_exact_for_ideal_codes(tmp_path):
    rows = verify_tradeoff((1, 2, 3, 4))
    for r in rows:
        assert r.d_n == r.N
        assert r.d_theta_over_pi == Fraction(1, r.N)
        assert r.d_n * r.d_theta_over_pi == 1
        assert r.product == pytest.approx(np.pi, abs=1e-15)
    paths = write_tradeoff(rows, tmp_path / "t.csv", tmp_path / "t.json")
    assert len(paths[0].read_text().splitlines()) == 2 + len(rows)


def test_cat_tradeoff_deviation_decreases_with_alpha():
    devs = [tradeoff_row(make_code(make_cat_profile(2, a, 120))).phase_deviation for a in (1.5, 2.5, 3.5)]
    assert devs[0] > devs[1] > devs[2]


def test_contrived_code():
    rep = contrived_code_check()
    assert rep.x_overlap < 1e-10
    assert all(dev < 1e-10 for dev in rep.shift_pairs.values())
    assert rep.x_logical_deviation > 1
    assert len(list(rep.lines())) == 2 + len(rep.shift_pairs)
