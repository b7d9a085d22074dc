import numpy as np
import pytest

from rotorqec.codes import logical_state, make_cat_profile, make_code, make_codewords, make_ideal_profile
from rotorqec.errors import ErrorLabel, make_error
from rotorqec.qec import (
    DEFAULT_STATE,
    PRIOR_KINDS,
    ChannelPrior,
    InformationDestroyed,
    RecoveryPlan,
    TruncationError,
    corrupt,
    correctable_shifts,
    direct_round,
    estimate_phase,
    estimate_shift,
    extract_syndrome,
    logical_X,
    make_plan,
    make_recovery,
    measure_modular_number,
    measure_modular_phase,
    modular_number_distribution,
    modular_phase_distribution,
    monte_carlo,
    phase_grid_size,
    run_direct,
    run_teleport,
    write_monte_carlo,
)


def direct_code(N=2, M=10):
    return make_code(make_ideal_profile(N, M), k0=3, headroom=2 * N)


def test_prior_aliases_and_validation():
    assert ChannelPrior("loss").kind == "LossOnly"
    with pytest.raises(ValueError):
        ChannelPrior("lossy")
    with pytest.raises(ValueError):
        ChannelPrior("Symmetric", gamma=-1)


def test_corrupt():
    code = direct_code()
    psi = logical_state(code, *DEFAULT_STATE)
    assert np.allclose(corrupt(code, ErrorLabel(0, 0.0)).state, psi)
    out = corrupt(code, ErrorLabel(1, 0.0)).state
    support = np.flatnonzero(np.abs(out) > 1e-12)
    assert np.all(support % 2 == 1)
    assert corrupt(code, ErrorLabel(-1, 0.4)).phase == pytest.approx(np.exp(-0.4j))
    # the lowest grid level is k0 N = 6; a loss of k0 N + 1 empties it
    lowest = np.zeros(code.dim, complex)
    lowest[6] = 1
    with pytest.raises(InformationDestroyed):
        corrupt(code, ErrorLabel(-3 * 2 - 1, 0.0), psi=lowest)
    with pytest.raises(TruncationError):
        corrupt(code, ErrorLabel(code.dim, 0.0))


def test_syndrome_examples():
    code = direct_code(N=3)
    assert extract_syndrome(code, corrupt(code, ErrorLabel(1, 0.0)).state).lambda_Z == pytest.approx(np.exp(2j * np.pi / 3))
    assert extract_syndrome(code, corrupt(code, ErrorLabel(-1, 0.0)).state).lambda_Z == pytest.approx(np.exp(-2j * np.pi / 3))
    code = direct_code(N=2)
    syn = extract_syndrome(code, corrupt(code, ErrorLabel(0, 0.1)).state)
    assert syn.lambda_X == pytest.approx(np.exp(0.4j))
    assert syn.eigness_Z == pytest.approx(1)


def test_estimator_examples():
    lz = np.exp(-2j * np.pi / 3)
    assert estimate_shift(lz, "LossOnly", 3) == -1
    assert estimate_shift(lz, "GainOnly", 3) == 2
    assert estimate_shift(1.0, "Symmetric", 3) == 0
    assert estimate_phase(np.exp(0.4j), "Symmetric", 2) == pytest.approx(0.1)
    assert estimate_phase(1.0, "Symmetric", 2) == 0
    assert estimate_phase(np.exp(4j * (np.pi / 2 - 0.05)), "Symmetric", 2) == pytest.approx(-0.05)


@pytest.mark.parametrize("prior", PRIOR_KINDS)
@pytest.mark.parametrize("N", [2, 3])
def test_estimator_consistency(prior, N):
    code = direct_code(N, 12)
    for m in correctable_shifts(prior, N):
        for th in (-0.3 / N, 0.0, 0.7 / N):
            syn = extract_syndrome(code, corrupt(code, ErrorLabel(m, th)).state)
            plan = make_plan(syn, prior, N)
            assert plan.m_est == m
            assert plan.theta_est == pytest.approx(th, abs=1e-12)
            if prior == "PhaseCodeAny":
                assert plan.m_est - 2 * N >= -3 * N


def test_make_recovery():
    d = 30
    assert np.array_equal(make_recovery(RecoveryPlan(-1, 0.1), 3, d), make_error(ErrorLabel(7, -0.1), d))
    assert np.array_equal(make_recovery(RecoveryPlan(4, 0.0), 2, d), np.eye(d))


@pytest.mark.parametrize("prior", PRIOR_KINDS)
@pytest.mark.parametrize("N", [2, 3])
def test_direct_round_trip_exact(prior, N):
    code = direct_code(N, 12)
    for m in correctable_shifts(prior, N):
        for th in (-0.4 / N, 0.0, 0.25 / N):
            assert run_direct(code, ErrorLabel(m, th), prior=prior) > 1 - 1e-12


def test_direct_examples():
    code = direct_code()
    assert run_direct(code, ErrorLabel(0, 0.0)) == pytest.approx(1)
    assert run_direct(code, ErrorLabel(1, 0.2)) >= 1 - 1e-6
    with pytest.raises(ValueError):
        run_direct(make_code(make_ideal_profile(2, 6), k0=1), ErrorLabel(0, 0.0))


def test_n_shift_is_undetected_logical_error():
    # m = N reads as no shift; the output approaches X psi as M grows
    gaps, overlaps = [], []
    for M in (10, 20, 40, 80):
        code = direct_code(2, M)
        psi = logical_state(code, *DEFAULT_STATE)
        res = direct_round(code, ErrorLabel(2, 0.0))
        X = logical_X(code)
        assert res.plan.m_est == 0
        gaps.append(abs(res.fidelity - abs(np.vdot(psi, X @ psi)) ** 2))
        overlaps.append(abs(np.vdot(X @ psi, res.state)) ** 2)
    assert gaps == sorted(gaps, reverse=True) and gaps[-1] < 0.02
    assert overlaps == sorted(overlaps) and overlaps[-1] > 0.96


def test_rotation_by_pi_over_n_is_logical_z():
    code = direct_code(2, 12)
    psi = logical_state(code, *DEFAULT_STATE)
    res = direct_round(code, ErrorLabel(0, np.pi / 2))
    Z = np.exp(1j * np.pi * np.arange(code.dim) / 2)
    assert abs(np.vdot(Z * psi, res.state)) ** 2 == pytest.approx(1, abs=1e-12)


def test_teleport_error_shrinks_with_M():
    eps = {}
    for M in (6, 10):
        code = make_code(make_ideal_profile(2, M), k0=1, dim=24 if M == 6 else None, headroom=2)
        eps[M] = [1 - run_teleport(code, ErrorLabel(*lab)) for lab in ((0, 0.0), (-1, 0.0))]
    assert all(0 <= e < 0.1 for e in eps[6] + eps[10])
    assert max(eps[10]) < min(eps[6])


def test_teleport_boundary_is_degraded():
    code = make_code(make_ideal_profile(2, 6), k0=1, dim=24)
    assert run_teleport(code, ErrorLabel(0, np.pi / 4)) < run_teleport(code, ErrorLabel(0, 0.0))


def sector_oracle(psi, N):
    w = np.zeros(N)
    for n, a in enumerate(psi):
        w[n % N] += abs(a) ** 2
    return w / w.sum()


def test_modular_number_measurement():
    rng = np.random.default_rng(1)
    d, N = 12, 3
    ket = np.zeros(d, complex)
    ket[[1, 4, 7]] = [0.6, 0.0, 0.8]
    j, post, p = measure_modular_number(ket, (d,), 0, N, rng)
    assert (j, p) == (1, pytest.approx(1))
    assert np.allclose(post, ket)
    ket = np.zeros(d, complex)
    ket[[0, 2]] = 1 / np.sqrt(2)
    assert np.allclose(modular_number_distribution(ket, (d,), 0, N), [0.5, 0, 0.5])
    code = make_code(make_cat_profile(2, 2.0, 50))
    psi = logical_state(code, 1, 0)
    lossy = make_error(ErrorLabel(-1, 0.0), code.dim) @ psi + 0.5 * psi
    assert np.allclose(modular_number_distribution(lossy, (code.dim,), 0, 2), sector_oracle(lossy, 2))
    two = np.kron(ket, lossy / np.linalg.norm(lossy))
    assert np.allclose(modular_number_distribution(two, (d, code.dim), 1, 2), sector_oracle(lossy, 2))


def test_modular_phase_measurement():
    N, G = 2, 64
    code = make_code(make_ideal_profile(N, 12), k0=1)
    plus = make_codewords(code)[2]
    d = code.dim
    phis, p = modular_phase_distribution(plus, (d,), 0, N, G)
    assert p.sum() == pytest.approx(1, abs=1e-9)
    assert np.all(np.diff(phis) > 0) and phis[0] == pytest.approx(-np.pi / N)
    assert phis[np.argmax(p)] == pytest.approx(0, abs=1e-12)
    D = phase_grid_size(N, d, G)
    j = 5
    rotated = np.exp(2j * np.pi * j / D * np.arange(d)) * plus
    _, p_rot = modular_phase_distribution(rotated, (d,), 0, N, G)
    assert np.allclose(p_rot, np.roll(p, j))
    fock = np.zeros(d, complex)
    fock[7] = 1
    _, p_flat = modular_phase_distribution(fock, (d,), 0, N, G)
    assert np.allclose(p_flat, 1 / len(p_flat))
    phi, post, pm = measure_modular_phase(plus, (d,), 0, N, G, np.random.default_rng(3))
    assert -np.pi / N <= phi < np.pi / N
    assert np.linalg.norm(post) == pytest.approx(1)
    assert pm == pytest.approx(p[np.argmin(np.abs(phis - phi))])


def test_monte_carlo_zero_rate():
    res = monte_carlo(direct_code(), ChannelPrior("Symmetric"), trials=5, seed=1)
    assert all(r.fidelity == pytest.approx(1) for r in res.records)
    assert res.summary["logical_error_rate"] == 0
    empty = monte_carlo(direct_code(), ChannelPrior("Symmetric"), trials=0)
    assert empty.summary["mean_fidelity"] is None


def test_monte_carlo_deterministic_serial_vs_threads(tmp_path):
    code = direct_code(2, 12)
    prior = ChannelPrior("LossOnly", gamma=0.4, sigma=0.2)
    a = monte_carlo(code, prior, trials=40, seed=9, threads=1)
    b = monte_carlo(code, prior, trials=40, seed=9, threads=4)
    write_monte_carlo(a, tmp_path / "a.csv", tmp_path / "a.json")
    write_monte_carlo(b, tmp_path / "b.csv", tmp_path / "b.json")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    c = monte_carlo(code, prior, trials=40, seed=10, threads=1)
    assert [r.theta for r in c.records] != [r.theta for r in a.records]


def test_monte_carlo_noise_monotone():
    code = direct_code(2, 12)
    low = monte_carlo(code, ChannelPrior("LossOnly", gamma=0.1, sigma=0.05), trials=200, seed=2)
    high = monte_carlo(code, ChannelPrior("LossOnly", gamma=0.1, sigma=0.3), trials=200, seed=2)
    assert low.summary["logical_error_rate"] < high.summary["logical_error_rate"]
