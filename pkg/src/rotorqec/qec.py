"""Stabilizer-based correction of shift and rotation errors.

Two schemes are simulated on kets:

* direct (grid offset ``k0 = 3``): corrupt, read the number and phase
  syndromes, estimate ``(m, theta)`` and apply ``E_{2N - m_est}(-theta_est)``;
* teleportation (``k0 = 1``): the corrupted data mode is entangled with two
  ``|+_N>`` ancillas by CROT gates, the first two modes are read out by a
  discretized canonical-phase measurement and the last mode gets a logical
  Pauli frame. The fidelity is averaged over all measurement outcomes.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _backend
from .codes import RotationCode, logical_state, make_codewords
from .errors import ErrorLabel, canonical_angle, make_error
from .fock import DimensionError
from .gates import MAX_AMPLITUDES

PRIOR_KINDS = ("GainOnly", "LossOnly", "Symmetric", "PhaseCodeAny")
PRIOR_ALIASES = {"gain": "GainOnly", "loss": "LossOnly", "symmetric": "Symmetric", "any": "PhaseCodeAny"}
DEFAULT_STATE = (math.cos(0.3), np.exp(0.7j) * math.sin(0.3))
DEFAULT_PHASE_GRID = 64
LOGICAL_ERROR_THRESHOLD = 0.9
MEASUREMENT_MODELS = {
    "direct": "stabilizer operators applied, eigenphases read out",
    "teleport": f"discretized canonical-phase POVM, {DEFAULT_PHASE_GRID} points per pi/N (model choice)",
}


class InformationDestroyed(RuntimeError):
    """The error annihilated the state (zero norm)."""


class TruncationError(DimensionError):
    """An upward shift pushed amplitude past the truncation."""


@dataclass(frozen=True)
class Syndrome:
    lambda_Z: complex
    lambda_X: complex
    eigness_Z: float
    eigness_X: float


@dataclass(frozen=True)
class ChannelPrior:
    kind: str = "Symmetric"
    gamma: float = 0.0  # mean number of shift events per trial
    sigma: float = 0.0  # width of the wrapped-normal rotation

    def __post_init__(self):
        kind = PRIOR_ALIASES.get(self.kind, self.kind)
        if kind not in PRIOR_KINDS:
            raise ValueError(f"unknown prior {self.kind!r}; expected one of {PRIOR_KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.gamma < 0 or self.sigma < 0:
            raise ValueError("prior rates must be non-negative")


@dataclass(frozen=True)
class RecoveryPlan:
    m_est: int
    theta_est: float


def _prior(prior) -> ChannelPrior:
    return prior if isinstance(prior, ChannelPrior) else ChannelPrior(prior)


def _arg(z: complex) -> float:
    """Argument on the branch ``(-pi, pi]``."""
    a = float(np.angle(z))
    return math.pi if a <= -math.pi else a


# --- single-shot pieces -------------------------------------------------------

@dataclass
class Corrupted:
    state: np.ndarray
    phase: complex  # exp(i theta m Theta(-m)), the analytic global phase of the error
    norm: float


def corrupt(code: RotationCode, label: ErrorLabel, psi: np.ndarray | None = None) -> Corrupted:
    """Normalized ``E_m(theta) psi``; ``psi`` defaults to the fixed test state."""
    if psi is None:
        psi = logical_state(code, *DEFAULT_STATE)
    out = _backend.apply_error_ket(psi, label.k, label.theta)
    nrm = float(np.linalg.norm(out))
    if label.k > 0 and not math.isclose(nrm, np.linalg.norm(psi), rel_tol=1e-12):
        raise TruncationError(f"shift by {label.k} leaves dimension {len(psi)}")
    if nrm < 1e-14:
        raise InformationDestroyed(f"error {label} annihilates the state")
    phase = np.exp(1j * label.theta * label.k) if label.k < 0 else 1.0 + 0j
    return Corrupted(out / nrm, complex(phase), nrm)


def _eigen_readout(psi: np.ndarray, s_psi: np.ndarray):
    ev = np.vdot(psi, s_psi)
    denom = np.linalg.norm(psi) * np.linalg.norm(s_psi)
    if abs(ev) == 0 or denom == 0:
        return 1.0 + 0j, 0.0
    return complex(ev / abs(ev)), float(min(abs(ev) / denom, 1.0))


def stabilizer_Z(N: int, d: int) -> np.ndarray:
    """Diagonal of ``exp(2 pi i n / N)``, exact in ``n mod N``."""
    return np.exp(2j * np.pi * (np.arange(d) % N) / N)


def extract_syndrome(code: RotationCode, state: np.ndarray) -> Syndrome:
    """Normalized expectation phases of the number and phase stabilizers."""
    N = code.N
    lz, ez = _eigen_readout(state, stabilizer_Z(N, len(state)) * state)
    lx, ex = _eigen_readout(state, _backend.apply_error_ket(state, -2 * N, 0.0))
    return Syndrome(lz, lx, ez, ex)


def estimate_shift(lambda_Z: complex, prior, N: int, k0: int = 3) -> int:
    """Shift estimate ``m_bar + l N`` with ``l`` picked by the channel prior."""
    kind = _prior(prior).kind
    m_bar = round(N * _arg(lambda_Z) / (2 * math.pi))
    r = m_bar % N
    if kind == "GainOnly":
        return r
    if kind == "LossOnly":
        return r - N if r > 0 else 0
    if kind == "Symmetric":
        # m_bar already lies in [-N/2, N/2]; the branch cut sends ties to +N/2
        return r if r <= N / 2 else r - N
    lo = (2 - k0) * N
    return lo + (r - lo) % N


def estimate_phase(lambda_X: complex, prior, N: int) -> float:
    """Rotation estimate from ``{theta_bar, theta_bar - pi/N}`` of smallest magnitude."""
    _prior(prior)
    theta_bar = _arg(lambda_X) / (2 * N)
    cands = (theta_bar, theta_bar - math.pi / N)
    return min(cands, key=abs)


def make_plan(syndrome: Syndrome, prior, N: int, k0: int = 3) -> RecoveryPlan:
    plan = RecoveryPlan(estimate_shift(syndrome.lambda_Z, prior, N, k0), estimate_phase(syndrome.lambda_X, prior, N))
    if _prior(prior).kind == "PhaseCodeAny":
        assert plan.m_est - 2 * N >= -k0 * N
    return plan


def recovery_label(plan: RecoveryPlan, N: int) -> ErrorLabel:
    return ErrorLabel(2 * N - plan.m_est, -plan.theta_est)


def make_recovery(plan: RecoveryPlan, N: int, d: int) -> np.ndarray:
    """``E_{2N - m_est}(-theta_est)`` as a matrix."""
    lab = recovery_label(plan, N)
    if lab.k < -(d - 1):
        raise DimensionError(f"recovery shift {lab.k} does not fit in dimension {d}")
    return make_error(lab, d)


# --- direct scheme ------------------------------------------------------------

@dataclass
class DirectResult:
    fidelity: float
    syndrome: Syndrome
    plan: RecoveryPlan
    state: np.ndarray = field(repr=False)
    reference: np.ndarray = field(repr=False)


def direct_round(code: RotationCode, label: ErrorLabel, psi: np.ndarray | None = None, prior="Symmetric") -> DirectResult:
    if code.k0 != 3:
        raise ValueError(f"the direct scheme needs grid offset k0 = 3, got {code.k0}")
    N = code.N
    if psi is None:
        psi = logical_state(code, *DEFAULT_STATE)
    psi1 = corrupt(code, label, psi).state
    syn = extract_syndrome(code, psi1)
    # S_Z only multiplies by a phase; S_X lowers by 2N which the recovery undoes
    psi2 = stabilizer_Z(N, len(psi1)) * psi1
    psi3 = _backend.apply_error_ket(psi2, -2 * N, 0.0)
    if np.linalg.norm(psi3) < 1e-14:
        raise InformationDestroyed("phase-stabilizer shift annihilated the state")
    plan = make_plan(syn, prior, N, code.k0)
    lab = recovery_label(plan, N)
    out = _backend.apply_error_ket(psi3, lab.k, lab.theta)
    if lab.k > 0 and not math.isclose(np.linalg.norm(out), np.linalg.norm(psi3), rel_tol=1e-12):
        raise TruncationError(f"recovery shift {lab.k} leaves dimension {len(psi)}")
    out = out / np.linalg.norm(out)
    fid = float(abs(np.vdot(psi, out)) ** 2)
    return DirectResult(min(fid, 1.0), syn, plan, out, psi)


def run_direct(code: RotationCode, label: ErrorLabel, psi=None, prior="Symmetric") -> float:
    return direct_round(code, label, psi, prior).fidelity


def correctable_shifts(prior, N: int, k0: int = 3) -> list:
    """Shifts the estimator maps back to themselves."""
    kind = _prior(prior).kind
    if kind == "GainOnly":
        return list(range(N))
    if kind == "LossOnly":
        return list(range(-N + 1, 1))
    if kind == "Symmetric":
        return [m for m in range(-N, N + 1) if -N / 2 < m <= N / 2]
    lo = (2 - k0) * N
    return list(range(lo, lo + N))


# --- logical Paulis -----------------------------------------------------------

def logical_Z_diag(N: int, d: int) -> np.ndarray:
    return np.exp(1j * np.pi * (np.arange(d) % (2 * N)) / N)


def logical_X(code: RotationCode) -> np.ndarray:
    """Codeword swap, identity off the code space."""
    zero, one, _, _ = make_codewords(code)
    P = np.outer(zero, zero.conj()) + np.outer(one, one.conj())
    return np.outer(zero, one.conj()) + np.outer(one, zero.conj()) + np.eye(code.dim) - P


# --- measurement models -------------------------------------------------------

def _as_tensor(state: np.ndarray, dims) -> np.ndarray:
    dims = tuple(dims)
    if math.prod(dims) != state.size:
        raise DimensionError(f"state of size {state.size} does not match dims {dims}")
    return np.asarray(state, dtype=complex).reshape(dims)


def modular_number_distribution(state: np.ndarray, dims, mode: int, N: int) -> np.ndarray:
    """Probabilities of ``n = j (mod N)`` on ``mode``, j = 0..N-1."""
    T = _as_tensor(state, dims)
    marg = np.sum(np.abs(np.moveaxis(T, mode, 0).reshape(T.shape[mode], -1)) ** 2, axis=1)
    w = _backend.modular_sector_weights(marg, N)
    return w / w.sum()


def measure_modular_number(state: np.ndarray, dims, mode: int, N: int, rng=None):
    """Sample ``j`` by the Born rule; return ``(j, normalized post-state, probability)``."""
    rng = np.random.default_rng() if rng is None else rng
    p = modular_number_distribution(state, dims, mode, N)
    j = int(rng.choice(N, p=p))
    T = _as_tensor(state, dims).copy()
    keep = (np.arange(T.shape[mode]) % N == j)
    shape = [1] * T.ndim
    shape[mode] = -1
    T = T * keep.reshape(shape)
    return j, (T / np.linalg.norm(T)).ravel(), float(p[j])


def phase_grid_size(N: int, d: int, G: int = DEFAULT_PHASE_GRID) -> int:
    """Fine grid ``D = 2 G N r`` with the smallest ``r`` such that ``D >= d``.

    With ``D >= d`` the elements ``|phi_q><phi_q| / D`` sum to the identity.
    """
    base = 2 * G * N
    return base * max(1, -(-d // base))


def _phase_amplitudes(T: np.ndarray, mode: int, D: int) -> np.ndarray:
    # <phi_q| psi> = sum_n exp(-i phi_q n) psi_n with phi_q = 2 pi q / D
    return np.fft.fft(T, n=D, axis=mode) / math.sqrt(D)


def modular_phase_distribution(state: np.ndarray, dims, mode: int, N: int, G: int = DEFAULT_PHASE_GRID):
    """Outcomes ``phi`` in ``[-pi/N, pi/N)`` (ascending) and their probabilities."""
    T = _as_tensor(state, dims)
    D = phase_grid_size(N, T.shape[mode], G)
    A = _phase_amplitudes(T, mode, D)
    fine = np.sum(np.abs(np.moveaxis(A, mode, 0).reshape(D, -1)) ** 2, axis=1)
    W = D // N
    probs = fine.reshape(N, W).sum(axis=0)
    phis = 2 * np.pi * np.arange(W) / D
    phis = np.where(phis >= np.pi / N, phis - 2 * np.pi / N, phis)
    order = np.argsort(phis)
    return phis[order], probs[order]


def measure_modular_phase(state: np.ndarray, dims, mode: int, N: int, G: int = DEFAULT_PHASE_GRID, rng=None):
    """Discretized canonical-phase readout of ``mode`` modulo ``2 pi / N``.

    Samples a fine outcome ``q``; returns ``(phi_hat, post-state, probability of phi_hat)``.
    The post-state carries the normalized truncated phase state ``|phi_q>`` on ``mode``.
    """
    rng = np.random.default_rng() if rng is None else rng
    T = _as_tensor(state, dims)
    d = T.shape[mode]
    D = phase_grid_size(N, d, G)
    A = np.moveaxis(_phase_amplitudes(T, mode, D), mode, 0)
    fine = np.sum(np.abs(A.reshape(D, -1)) ** 2, axis=1)
    fine = fine / fine.sum()
    q = int(rng.choice(D, p=fine))
    W = D // N
    p_mod = float(fine.reshape(N, W).sum(axis=0)[q % W])
    phi = 2 * np.pi * (q % W) / D
    if phi >= np.pi / N:
        phi -= 2 * np.pi / N
    cond = A[q]
    cond = cond / np.linalg.norm(cond)
    ket = np.exp(2j * np.pi * q * np.arange(d) / D) / math.sqrt(d)
    post = np.moveaxis(np.multiply.outer(ket, cond), 0, mode)
    return phi, post.ravel(), p_mod


# --- teleportation scheme -----------------------------------------------------

@dataclass
class TeleportResult:
    fidelity: float
    dim: int
    phase_points: int


def _crot_phase(N: int, d: int) -> np.ndarray:
    n = np.arange(d, dtype=np.int64)
    prod = np.multiply.outer(n, n) % (2 * N * N)
    return np.exp(1j * np.pi * prod / (N * N))


def teleport_round(
    code: RotationCode, label: ErrorLabel, psi: np.ndarray | None = None, prior="LossOnly", G: int = DEFAULT_PHASE_GRID
) -> TeleportResult:
    """Outcome-averaged fidelity of the teleportation scheme."""
    if code.k0 != 1:
        raise ValueError(f"the teleportation scheme needs grid offset k0 = 1, got {code.k0}")
    N, d = code.N, code.dim
    if d**3 > MAX_AMPLITUDES:
        raise DimensionError(f"three modes of dimension {d} exceed {MAX_AMPLITUDES} amplitudes")
    if psi is None:
        psi = logical_state(code, *DEFAULT_STATE)
    _, _, plus, _ = make_codewords(code)
    psi1 = corrupt(code, label, psi).state
    C = _crot_phase(N, d)
    Psi = psi1[:, None, None] * plus[None, :, None] * plus[None, None, :]
    Psi = Psi * C[:, :, None] * C[None, :, :]
    D = phase_grid_size(N, d, G)
    chi = _phase_amplitudes(_phase_amplitudes(Psi, 0, D), 1, D)  # chi[q1, q2, n3]
    phi = 2 * np.pi * np.arange(D) / D

    # mode 1: rotation estimate, then the X-basis bit
    theta_est = np.array([estimate_phase(np.exp(2j * N * f), prior, N) for f in phi])
    s1 = np.rint((phi - theta_est) * N / np.pi).astype(np.int64) % 2
    # mode 2: rotation pi k / N^2 inherited from the CROT plus the X-basis bit
    v = phi * N * N / np.pi
    k_est = np.array([estimate_shift(np.exp(2j * np.pi * x / N), prior, N, code.k0) for x in v])
    s2 = np.rint((v - k_est) / N).astype(np.int64) % 2

    Zd = logical_Z_diag(N, d)
    X = logical_X(code)
    total = np.sum(np.abs(chi) ** 2)
    fid = 0.0
    for a in (0, 1):
        for b in (0, 1):
            # frame Z^a X^b; overlap <psi| Z^a X^b chi> = <(Z^a X^b)^dagger psi | chi>
            ref = X.conj().T @ (np.conj(Zd) ** a * psi) if b else np.conj(Zd) ** a * psi
            ov = np.abs(np.tensordot(chi, ref.conj(), axes=([2], [0]))) ** 2
            mask = (s1[:, None] == a) & (s2[None, :] == b)
            fid += float(np.sum(ov[mask]))
    return TeleportResult(min(fid / float(total), 1.0), d, D)


def run_teleport(code: RotationCode, label: ErrorLabel, psi=None, prior="LossOnly", G: int = DEFAULT_PHASE_GRID) -> float:
    return teleport_round(code, label, psi, prior, G).fidelity


# --- Monte Carlo --------------------------------------------------------------

@dataclass
class TrialRecord:
    trial: int
    k: int
    theta: float
    syndrome: str
    m_est: int | str
    theta_est: float | str
    fidelity: float


TRIAL_COLUMNS = ("trial", "k", "theta", "syndrome", "m_est", "theta_est", "fidelity")


def sample_label(prior: ChannelPrior, rng: np.random.Generator) -> ErrorLabel:
    """Shift from the prior's Poisson shape, rotation from a wrapped normal."""
    g = prior.gamma
    if prior.kind == "LossOnly":
        k = -int(rng.poisson(g))
    elif prior.kind == "GainOnly":
        k = int(rng.poisson(g))
    else:
        k = int(rng.poisson(g / 2)) - int(rng.poisson(g / 2))
    theta = canonical_angle(float(rng.normal(0.0, prior.sigma))) if prior.sigma > 0 else 0.0
    return ErrorLabel(k, theta)


def _thread_count(threads: int | None) -> int:
    if threads:
        return max(1, int(threads))
    env = os.environ.get("ROTORQEC_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _run_trial(code, prior, scheme, seed, trial, psi) -> TrialRecord:
    rng = np.random.default_rng([seed, trial])
    lab = sample_label(prior, rng)
    try:
        if scheme == "direct":
            res = direct_round(code, lab, psi, prior)
            syn = f"{_arg(res.syndrome.lambda_Z)!r}|{_arg(res.syndrome.lambda_X)!r}"
            return TrialRecord(trial, lab.k, lab.theta, syn, res.plan.m_est, res.plan.theta_est, res.fidelity)
        res = teleport_round(code, lab, psi, prior)
        return TrialRecord(trial, lab.k, lab.theta, "outcome-averaged", "", "", res.fidelity)
    except InformationDestroyed:
        return TrialRecord(trial, lab.k, lab.theta, "destroyed", "", "", 0.0)
    except TruncationError:
        return TrialRecord(trial, lab.k, lab.theta, "truncated", "", "", 0.0)


@dataclass
class MonteCarloResult:
    records: list
    summary: dict


def monte_carlo(
    code: RotationCode,
    prior: ChannelPrior,
    scheme: str = "direct",
    trials: int = 100,
    seed: int = 0,
    threads: int | None = None,
    psi: np.ndarray | None = None,
    threshold: float = LOGICAL_ERROR_THRESHOLD,
) -> MonteCarloResult:
    """Seeded fidelity sweep; trial ``t`` draws from ``default_rng([seed, t])``."""
    if scheme not in ("direct", "teleport"):
        raise ValueError(f"unknown scheme {scheme!r}")
    prior = _prior(prior)
    if psi is None:
        psi = logical_state(code, *DEFAULT_STATE)
    n_threads = _thread_count(threads)
    run = lambda t: _run_trial(code, prior, scheme, seed, t, psi)  # noqa: E731
    if n_threads == 1:
        records = [run(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(n_threads) as pool:
            records = list(pool.map(run, range(trials)))
    fid = np.array([r.fidelity for r in records])
    summary = {
        "scheme": scheme,
        # the destructive phase readouts of the teleportation circuit need a back-action model
        "measurement_model": MEASUREMENT_MODELS[scheme],
        "prior": asdict(prior),
        "N": code.N,
        "k0": code.k0,
        "dim": code.dim,
        "trials": trials,
        "seed": seed,
        # empty runs report null statistics
        "mean_fidelity": float(fid.mean()) if trials else None,
        "fidelity_quantiles": {str(q): float(np.quantile(fid, q)) if trials else None for q in (0.05, 0.5, 0.95)},
        "logical_error_threshold": threshold,
        "logical_error_rate": float(np.mean(fid < threshold)) if trials else None,
    }
    return MonteCarloResult(records, summary)


def write_monte_carlo(result: MonteCarloResult, csv_path, json_path=None):
    from .io import write_csv, write_json

    rows = [tuple(getattr(r, c) for c in TRIAL_COLUMNS) for r in result.records]
    out = [write_csv(csv_path, "montecarlo", TRIAL_COLUMNS, rows)]
    if json_path is not None:
        out.append(write_json(json_path, result.summary))
    return out
