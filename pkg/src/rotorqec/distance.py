"""Knill-Laflamme blocks, detectability maps and the number-phase distance trade-off."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _backend
from .codes import RotationCode, make_code, make_codewords, make_contrived_profile, make_ideal_profile
from .errors import ErrorLabel
from .fock import make_sigma
from .gates import GateSpec, verify_logical_action
from .qec import _thread_count

DEFAULT_KL_TOL = 1e-8
PAULIS = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass
class KLBlock:
    matrix: np.ndarray
    alpha: complex
    proportionality_deviation: float

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


def _error_on_basis(code: RotationCode, label: ErrorLabel):
    zero, one, _, _ = make_codewords(code)
    return np.stack([_backend.apply_error_ket(v, label.k, label.theta) for v in (zero, one)], axis=1)


def kl_block(code: RotationCode, a: ErrorLabel, b: ErrorLabel) -> KLBlock:
    """Logical 2x2 block of ``E_a^dagger E_b`` with its trace-fit ``alpha I``."""
    B = _error_on_basis(code, a).conj().T @ _error_on_basis(code, b)
    alpha = complex(np.trace(B) / 2)
    return KLBlock(B, alpha, float(np.linalg.norm(B - alpha * np.eye(2))))


def hermiticity_check(code: RotationCode, labels) -> float:
    """Max ``|alpha_ab - conj(alpha_ba)|`` entrywise over same-shift pairs."""
    worst = 0.0
    for i, a in enumerate(labels):
        for b in labels[i:]:
            if a.k != b.k:
                continue
            ab = kl_block(code, a, b).matrix
            ba = kl_block(code, b, a).matrix
            worst = max(worst, float(np.max(np.abs(ab - ba.conj().T))))
    return worst


def pauli_fit(B: np.ndarray):
    """Closest ``c P`` over the non-identity Paulis: ``(name, c, relative residual)``."""
    best = None
    nrm = np.linalg.norm(B)
    for name, P in PAULIS.items():
        c = np.trace(P.conj().T @ B) / 2
        res = float(np.linalg.norm(B - c * P) / nrm) if nrm > 0 else 0.0
        if best is None or res < best[2]:
            best = (name, complex(c), res)
    return best


def nshift_form(j: int, N: int, phi_rel: float) -> np.ndarray:
    """``exp(i phi' (j + N/2)) [cos(phi' N/2) X - sin(phi' N/2) Y]``."""
    ph = np.exp(1j * phi_rel * (j + N / 2))
    return ph * (math.cos(phi_rel * N / 2) * PAULIS["X"] - math.sin(phi_rel * N / 2) * PAULIS["Y"])


def nshift_law_residual(code: RotationCode, j: int, theta: float, phi: float):
    """Relative residual of the ``(j, theta)`` vs ``(j - N, phi)`` block against the closed form.

    The daggered error carries the larger shift. The closed form holds up to a
    scalar that diverges for an infinite code, so the scalar is fitted:
    returns ``(relative residual, fitted scalar)``.
    """
    N = code.N
    B = kl_block(code, ErrorLabel(j, theta), ErrorLabel(j - N, phi)).matrix
    T = nshift_form(j, N, phi - theta)
    c = np.vdot(T, B) / np.vdot(T, T)
    return float(np.linalg.norm(B - c * T) / np.linalg.norm(B)), complex(c)


# --- detectability grid -------------------------------------------------------

@dataclass
class DetectabilityGrid:
    code_id: str
    ks: np.ndarray
    thetas: np.ndarray
    deviation: np.ndarray
    block_norm: np.ndarray
    status: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)
    tol: float = DEFAULT_KL_TOL

    def rows(self):
        for i, k in enumerate(self.ks):
            for j, t in enumerate(self.thetas):
                yield (int(k), float(t), float(self.deviation[i, j]), float(self.block_norm[i, j]),
                       str(self.status[i, j]), bool(self.boundary[i, j]))


GRID_COLUMNS = ("k", "theta", "deviation", "block_norm", "status", "boundary")


def classify_block(block: KLBlock, tol: float = DEFAULT_KL_TOL, logical_tol: float = 1e-6) -> str:
    """``zero`` | ``compatible`` (proportional to identity) | ``logical:<P>`` | ``uncorrectable``."""
    if block.norm < tol:
        return "zero"
    if block.proportionality_deviation < tol:
        return "compatible"
    name, _, res = pauli_fit(block.matrix)
    if res < logical_tol:
        return f"logical:{name}"
    return "uncorrectable"


def default_theta_grid(N: int, points_per_window: int = 8) -> np.ndarray:
    """Uniform grid on ``[-pi/N, pi/N)`` that contains ``0``, ``+-pi/2N`` and ``-pi/N``."""
    n = 4 * points_per_window
    return -np.pi / N + 2 * np.pi / N * np.arange(n) / n


def detectability_grid(
    code: RotationCode,
    k_range=None,
    theta_grid=None,
    tol: float = DEFAULT_KL_TOL,
    threads: int | None = None,
    code_id: str | None = None,
) -> DetectabilityGrid:
    """KL deviation of every ``(k, theta)`` cell against the reference error ``(0, 0)``."""
    N = code.N
    ks = np.arange(-N, N + 1) if k_range is None else np.asarray(list(k_range))
    thetas = default_theta_grid(N) if theta_grid is None else np.asarray(theta_grid, dtype=float)
    ref = ErrorLabel(0, 0.0)
    cells = [(int(k), float(t)) for k in ks for t in thetas]

    def run(cell):
        blk = kl_block(code, ref, ErrorLabel(*cell))
        return blk.proportionality_deviation, blk.norm, classify_block(blk, tol)

    n_threads = _thread_count(threads)
    if n_threads == 1:
        out = [run(c) for c in cells]
    else:
        with ThreadPoolExecutor(n_threads) as pool:
            out = list(pool.map(run, cells))
    shape = (len(ks), len(thetas))
    dev = np.array([o[0] for o in out]).reshape(shape)
    nrm = np.array([o[1] for o in out]).reshape(shape)
    status = np.array([o[2] for o in out], dtype=object).reshape(shape)
    edge = np.isclose(np.abs(thetas), np.pi / (2 * N), atol=1e-12)
    boundary = (np.abs(ks)[:, None] == N) | edge[None, :]
    return DetectabilityGrid(code_id or code.profile.source, ks, thetas, dev, nrm, status, boundary, tol)


def max_correctable_deviation(code: RotationCode, shifts, n_theta: int = 9) -> float:
    """Largest KL deviation over pairs of errors drawn from ``shifts`` x open rotation window."""
    N = code.N
    thetas = np.linspace(-np.pi / (2 * N), np.pi / (2 * N), n_theta + 2)[1:-1]
    labels = [ErrorLabel(k, t) for k in shifts for t in thetas]
    worst = 0.0
    for i, a in enumerate(labels):
        for b in labels[i:]:
            worst = max(worst, kl_block(code, a, b).proportionality_deviation)
    return worst


# --- trade-off ----------------------------------------------------------------

@dataclass
class TradeoffRow:
    code: str
    N: int
    d_n: int
    d_theta_over_pi: Fraction
    phase_deviation: float

    @property
    def d_theta(self) -> float:
        return float(self.d_theta_over_pi) * math.pi

    @property
    def product(self) -> float:
        return float(self.d_n * self.d_theta_over_pi) * math.pi


TRADEOFF_COLUMNS = ("code", "N", "d_n", "d_theta", "product", "phase_deviation")


def shift_distance(code: RotationCode, tol: float = DEFAULT_KL_TOL) -> int:
    """Smallest ``k > 0`` whose shift is not mutually detectable with no error."""
    ref = ErrorLabel(0, 0.0)
    for k in range(1, code.guard + 1):
        blk = kl_block(code, ref, ErrorLabel(k, 0.0))
        if blk.proportionality_deviation > tol:
            return k
    return code.guard + 1


def phase_expectation_grid(code: RotationCode, phis: np.ndarray) -> np.ndarray:
    from .codes import profile_weights

    x = np.asarray(phis, dtype=float) * code.N + np.pi
    return _backend.phase_expectation_sum(profile_weights(code), code.grid.astype(float), x)


def rotation_distance(code: RotationCode, resolution: int = 64, tol: float = 1e-12):
    """Smallest grid angle ``j pi / (resolution N)`` where ``|phase expectation| = 1``.

    Returns ``(d_theta / pi as a Fraction, max |expectation| inside |phi| <= pi/2N)``.
    """
    N = code.N
    j = np.arange(1, 2 * resolution * N + 1)
    E = np.abs(phase_expectation_grid(code, j * np.pi / (resolution * N)))
    hits = np.flatnonzero(E >= 1 - tol)
    if hits.size == 0:
        raise ValueError("no full-revival angle on the grid")
    window = np.arange(-resolution // 2, resolution // 2 + 1)
    dev = float(np.max(np.abs(phase_expectation_grid(code, window * np.pi / (resolution * N)))))
    return Fraction(int(j[hits[0]]), resolution * N), dev


def tradeoff_row(code: RotationCode, resolution: int = 64, tol: float = DEFAULT_KL_TOL, name: str | None = None):
    d_th, dev = rotation_distance(code, resolution)
    return TradeoffRow(name or code.profile.source, code.N, shift_distance(code, tol), d_th, dev)


def verify_tradeoff(Ns=(1, 2, 3, 4), M: int = 14, resolution: int = 64, tol: float = DEFAULT_KL_TOL):
    """Trade-off rows for ideal codes of order ``N`` with ``M`` grid points."""
    rows = []
    for N in Ns:
        code = make_code(make_ideal_profile(N, M))
        rows.append(tradeoff_row(code, resolution, tol))
    return rows


# --- contrived code -----------------------------------------------------------

@dataclass
class ContrivedReport:
    N: int
    x_overlap: float
    shift_pairs: dict
    x_logical_deviation: float

    def lines(self):
        yield f"contrived code N={self.N}: |<0|X_N|1>| = {self.x_overlap:.3e}"
        for k, dev in self.shift_pairs.items():
            yield f"  KL deviation (k={k}) vs (k+N): {dev:.3e}"
        yield f"  X_N logical deviation from X: {self.x_logical_deviation:.3f}"


def contrived_code_check(N: int = 2, periods: int = 1) -> ContrivedReport:
    code = make_code(make_contrived_profile(N, periods))
    zero, one, _, _ = make_codewords(code)
    x = abs(np.vdot(zero, make_sigma(-N, code.dim) @ one))
    pairs = {}
    for k in range(N):
        pairs[k] = kl_block(code, ErrorLabel(k, 0.0), ErrorLabel(k + N, 0.0)).proportionality_deviation
    act = verify_logical_action(GateSpec("X", (N,)), code)
    return ContrivedReport(N, float(x), pairs, act.deviation)


def write_grid_csv(grid: DetectabilityGrid, path):
    from .io import write_csv

    return write_csv(path, "detectability", GRID_COLUMNS, list(grid.rows()))


def write_tradeoff(rows, csv_path, json_path=None):
    from .io import write_csv, write_json

    table = [(r.code, r.N, r.d_n, r.d_theta, r.product, r.phase_deviation) for r in rows]
    out = [write_csv(csv_path, "tradeoff", TRADEOFF_COLUMNS, table)]
    if json_path is not None:
        out.append(write_json(json_path, [dict(zip(TRADEOFF_COLUMNS, t)) for t in table]))
    return out
