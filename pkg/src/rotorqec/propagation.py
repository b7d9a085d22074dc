"""Error propagation through gates: closed-form predictions checked against brute force.

For a gate ``G`` and input error ``E`` the prediction is an operator ``E'``
(plus, for the non-unitary shift gate, an extra term ``A``) such that
``G E = E' G + A``. :func:`verify` materializes both sides and compares them
on the safe subspace.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ErrorLabel, heaviside, make_error, make_qubit_error
from .fock import pi_phases, projector_first, residual_on_safe_subspace, safe_columns
from .gates import (
    GateSpec,
    GateSpecError,
    apply_gate,
    gate_diagonal,
    make_gate,
    phase_poly,
    poly_eval,
    poly_shift_difference,
)


@dataclass
class Term:
    """``weight * (E(labels[0]) x E(labels[1]) x ...)``, optionally projected on mode 0.

    ``sector`` selects output Fock states ``n = sector (mod 2N)`` on the first mode.
    """

    weight: complex
    labels: tuple
    sector: int | None = None


@dataclass
class PropagationPrediction:
    global_phase: complex
    terms: list
    residual_factor: np.ndarray | None = field(default=None, repr=False)  # diagonal, flattened over modes
    extra_term: tuple | None = None  # (weight, ErrorLabel, k): weight * P_k E(label), single mode only
    modes: int = 1

    @property
    def out_labels(self):
        return [(t.weight, t.labels) for t in self.terms]


def conjugate(G: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Brute-force ``G E G^dagger``."""
    return G @ E @ G.conj().T


# --- predictions ---------------------------------------------------------------

def _poly_prediction(q, k: int, theta: float, d: int) -> PropagationPrediction:
    """Prediction for ``exp(i pi q(n))`` from ``q(n) - q(n-k)``.

    The constant and linear parts become a global phase and a rotation of the
    error; the remaining powers form the nonlinear residual factor.
    """
    diff = poly_shift_difference(q, k)
    c0 = diff[0]
    c1 = diff[1] if len(diff) > 1 else Fraction(0)
    phase = np.exp(1j * np.pi * float((c0 + c1 * k * heaviside(k)) % 2))
    label = ErrorLabel(k, theta + np.pi * float(c1))
    rest = (Fraction(0), Fraction(0)) + tuple(diff[2:])
    factor = None
    if any(c != 0 for c in rest):
        factor = pi_phases([poly_eval(rest, n) for n in range(d)])
    return PropagationPrediction(phase, [Term(1.0, (label,))], factor)


def predict_polynomial(spec: GateSpec, label: ErrorLabel, d: int) -> PropagationPrediction:
    q = phase_poly(spec)
    if q is None:
        raise GateSpecError(f"{spec.kind} is not a polynomial phase gate")
    return _poly_prediction(q, label.k, label.theta, d)


def xprime_offsets(k: int, N: int):
    """Per-sector ``(x_l, p_plus, p_minus)`` for the bin-swap gate; ``%`` is the non-negative remainder."""
    r = k % (2 * N)
    out = []
    for ell in range(N):
        x = 2 * N if max(r - N, 0) <= ell < min(r, N) else 0
        p_plus = N - k * heaviside(k) + (k - x) * heaviside(k - x)
        p_minus = -N - k * heaviside(k) + (k + x) * heaviside(k + x)
        out.append((x, p_plus, p_minus))
    return out


def _single_prediction(spec: GateSpec, label: ErrorLabel, d: int) -> PropagationPrediction:
    N, k, th = spec.N, label.k, label.theta
    kind = spec.kind
    if kind == "Z":
        return PropagationPrediction(np.exp(1j * np.pi * k / N), [Term(1.0, (label,))])
    if kind == "X":
        extra = None
        if k > 0:
            extra = (np.exp(1j * th * (N - k) * heaviside(N - k)), ErrorLabel(k - N, th), k)
        return PropagationPrediction(np.exp(1j * th * N), [Term(1.0, (label,))], extra_term=extra)
    if kind == "XPrime":
        terms = []
        for ell, (x, pp, pm) in enumerate(xprime_offsets(k, N)):
            terms.append(Term(np.exp(1j * th * pp), (ErrorLabel(k - x, th),), ell))
            terms.append(Term(np.exp(1j * th * pm), (ErrorLabel(k + x, th),), ell + N))
        return PropagationPrediction(1.0, terms)
    if kind == "S":
        phase = np.pi * k**2 / N**2 * (heaviside(k) - 0.5)
        return PropagationPrediction(np.exp(1j * phase), [Term(1.0, (ErrorLabel(k, th + np.pi * k / N**2),))])
    if kind == "T":
        phase = np.pi * k**4 / N**4 * (heaviside(k) - 0.25)
        q = (0, 0, Fraction(-6 * k**2, 4 * N**4), Fraction(4 * k, 4 * N**4))
        factor = pi_phases([poly_eval(q, n) for n in range(d)])
        return PropagationPrediction(
            np.exp(1j * phase), [Term(1.0, (ErrorLabel(k, th + np.pi * k**3 / N**4),))], factor
        )
    if kind == "TPrime":
        phase = np.pi / 4 * (
            2 * k**3 / N**3 - k**2 / N**2 - 2 * k / N + (2 * k**2 / N**2 - 6 * k**3 / N**3) * heaviside(k)
        )
        shift = np.pi * k / (2 * N**2) - 3 * np.pi * k**2 / (2 * N**3)
        factor = pi_phases([Fraction(3 * k * n * n, 2 * N**3) for n in range(d)])
        return PropagationPrediction(np.exp(1j * phase), [Term(1.0, (ErrorLabel(k, th + shift),))], factor)
    if kind in ("Rl", "RlPrime"):
        return predict_polynomial(spec, label, d)
    if kind == "P":
        z = np.exp(1j * np.pi * np.arange(d) / N)
        factor = np.exp(1j * spec.phi / 2 * (np.exp(-1j * np.pi * k / N) - 1) * z)
        return PropagationPrediction(1.0, [Term(1.0, (label,))], factor)
    raise GateSpecError(f"no propagation rule for {kind}")


def _rotation(theta: float) -> ErrorLabel:
    return ErrorLabel(0, theta)


def crot_two_error_phase(k1: int, k2: int, N: int, M: int) -> complex:
    """Global phase when both CROT inputs carry shift errors.

    Moving the mode-2 rotation past ``E_{k1}`` costs ``exp(-i pi k1 k2 Theta(-k1)/NM)``
    and merging the mode-1 rotation into ``E_{k2}`` costs ``exp(+i pi k1 k2 Theta(k2)/NM)``.
    """
    return np.exp(1j * np.pi * k1 * k2 * (heaviside(k2) - heaviside(-k1)) / (N * M))


def _multi_prediction(spec: GateSpec, labels: Sequence, dims) -> PropagationPrediction:
    orders = spec.orders
    m = len(orders)
    hit = [i for i, lab in enumerate(labels) if lab is not None]
    denom = math.prod(orders)
    if spec.kind == "CROT":
        if len(hit) == 1:
            i = hit[0]
            lab = labels[i]
            out = [None, None]
            out[i] = lab
            out[1 - i] = _rotation(np.pi * lab.k / denom)
            return PropagationPrediction(1.0, [Term(1.0, tuple(out))], modes=2)
        (a, b) = labels
        phase = crot_two_error_phase(a.k, b.k, *orders)
        out = (ErrorLabel(a.k, a.theta + np.pi * b.k / denom), ErrorLabel(b.k, b.theta + np.pi * a.k / denom))
        return PropagationPrediction(phase, [Term(1.0, out)], modes=2)
    # CCROT: a single corrupted mode i spawns V_k on the other two
    if len(hit) != 1:
        raise GateSpecError("CCROT predictions take exactly one corrupted mode")
    i = hit[0]
    k = labels[i].k
    grids = np.meshgrid(*[np.arange(x, dtype=np.int64) for x in dims], indexing="ij")
    others = [g for j, g in enumerate(grids) if j != i]
    prod = k * others[0] * others[1]
    factor = np.exp(1j * np.pi * (prod % (2 * denom)) / denom).ravel()
    out = [None] * m
    out[i] = labels[i]
    return PropagationPrediction(1.0, [Term(1.0, tuple(out))], factor, modes=3)


def _as_labels(spec: GateSpec, label):
    if isinstance(label, ErrorLabel):
        labels = (label,) + (None,) * (spec.n_modes - 1)
    else:
        labels = tuple(label)
    if len(labels) != spec.n_modes:
        raise GateSpecError(f"{spec.kind} needs {spec.n_modes} per-mode labels, got {len(labels)}")
    if all(lab is None for lab in labels):
        raise GateSpecError("at least one mode must carry an error")
    return labels


def _dims(spec: GateSpec, d):
    return tuple(d) if isinstance(d, Sequence) else (int(d),) * spec.n_modes


def predict(spec: GateSpec, label, d=48) -> PropagationPrediction:
    """Closed-form propagated error for ``spec`` and input error(s) ``label``.

    ``label`` is an :class:`ErrorLabel` (first mode) or a per-mode tuple with
    ``None`` for clean modes. ``d`` only sets the length of residual-factor diagonals.
    """
    labels = _as_labels(spec, label)
    dims = _dims(spec, d)
    if spec.n_modes == 1:
        return _single_prediction(spec, labels[0], dims[0])
    return _multi_prediction(spec, labels, dims)


# --- materialization ----------------------------------------------------------

def apply_local(op: np.ndarray, mode: int, dims, X: np.ndarray) -> np.ndarray:
    """Apply a single-mode operator to ``mode`` of columns ``X`` (shape ``(prod(dims), ncols)``)."""
    ncols = X.shape[1]
    T = X.reshape(tuple(dims) + (ncols,))
    T = np.moveaxis(np.tensordot(op, T, axes=([1], [mode])), 0, mode)
    return T.reshape(-1, ncols)


def _term_apply(term: Term, N: int, dims, X: np.ndarray) -> np.ndarray:
    out = X
    for mode, lab in enumerate(term.labels):
        if lab is None:
            continue
        out = apply_local(make_error(lab, dims[mode]), mode, dims, out)
    if term.sector is not None:
        n = np.arange(dims[0])
        mask = (n % (2 * N) == term.sector).astype(complex)
        out = apply_local(np.diag(mask), 0, dims, out)
    return term.weight * out


def prediction_apply(pred: PropagationPrediction, N: int, dims, X: np.ndarray) -> np.ndarray:
    """``E' X`` for the propagated error ``E'`` (without the extra term)."""
    acc = sum(_term_apply(t, N, dims, X) for t in pred.terms)
    if pred.residual_factor is not None:
        acc = pred.residual_factor[:, None] * acc
    return pred.global_phase * acc


def materialize(pred: PropagationPrediction, N: int, d) -> tuple:
    """Dense ``(E', A)`` with ``G E = E' G + A``; ``A`` is ``None`` when absent."""
    dims = (d,) if np.isscalar(d) else tuple(d)
    D = math.prod(dims)
    E_prime = prediction_apply(pred, N, dims, np.eye(D, dtype=complex))
    extra = None
    if pred.extra_term is not None:
        w, lab, k = pred.extra_term
        extra = w * projector_first(min(k, dims[0]), dims[0]) @ make_error(lab, dims[0])
    return E_prime, extra


def default_pad(spec: GateSpec, k: int) -> int:
    shifts = {"X": 1, "XPrime": 2}.get(spec.kind, 0)
    return abs(k) + spec.N * shifts + 2


def verify(spec: GateSpec, label, d, pad=None) -> float:
    """Safe-subspace residual ``|| G E - (E' G + A) ||`` of the closed-form prediction."""
    labels = _as_labels(spec, label)
    dims = _dims(spec, d)
    if pad is None:
        pads = tuple(default_pad(spec, lab.k) if lab is not None else 0 for lab in labels)
    elif np.isscalar(pad):
        pads = (int(pad),) * len(dims)
    else:
        pads = tuple(pad)
    pred = predict(spec, labels, dims)
    if spec.n_modes == 1:
        d1 = dims[0]
        G = make_gate(spec, d1)
        lhs = G @ make_error(labels[0], d1)
        E_prime, extra = materialize(pred, spec.N, d1)
        rhs = E_prime @ G
        if extra is not None:
            rhs = rhs + extra
        return residual_on_safe_subspace(lhs, rhs, pads[0])
    cols = safe_columns(dims, pads)
    D = math.prod(dims)
    X = np.zeros((D, len(cols)), dtype=complex)
    X[cols, np.arange(len(cols))] = 1.0
    g = gate_diagonal(spec, dims)
    lhs = X
    for mode, lab in enumerate(labels):
        if lab is not None:
            lhs = apply_local(make_error(lab, dims[mode]), mode, dims, lhs)
    lhs = g[:, None] * lhs
    rhs = prediction_apply(pred, spec.N, dims, g[:, None] * X)
    return float(np.max(np.linalg.norm(lhs - rhs, axis=0)))


# --- function-of-n lemmas -----------------------------------------------------

def verify_appendixA(f_coeffs, label: ErrorLabel, d: int, pad: int) -> float:
    """Residual of ``e^{if(n)} E = e^{i[f(n) - f(n-k)]} E e^{if(n)}`` for real polynomial ``f``.

    ``f_coeffs[j]`` multiplies ``n**j``.
    """
    n = np.arange(d, dtype=float)
    coeffs = np.asarray(f_coeffs, dtype=float)[::-1]
    f = np.polyval(coeffs, n)
    f_shift = np.polyval(coeffs, n - label.k)
    E = make_error(label, d)
    lhs = np.exp(1j * f)[:, None] * E
    rhs = (np.exp(1j * (f - f_shift))[:, None] * E) * np.exp(1j * f)[None, :]
    return residual_on_safe_subspace(lhs, rhs, pad)


def verify_linear_modification(phi: float, label: ErrorLabel, d: int, pad: int = 0) -> float:
    """Residual of ``e^{i phi n} E_k(theta) = e^{i phi k Theta(k)} E_k(theta + phi)``."""
    lhs = np.exp(1j * phi * np.arange(d))[:, None] * make_error(label, d)
    rhs = np.exp(1j * phi * label.k * heaviside(label.k)) * make_error(ErrorLabel(label.k, label.theta + phi), d)
    return residual_on_safe_subspace(lhs, rhs, pad)


# --- qubit analogs ------------------------------------------------------------

QUBIT_GATES = {
    "Z": np.diag([1, -1]).astype(complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Xshift": np.array([[0, 1], [0, 0]], dtype=complex),
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CCZ": np.diag([1, 1, 1, 1, 1, 1, 1, -1]).astype(complex),
}
_NUM = np.diag([0.0, 1.0])


def qubit_prediction(gate: str, k: int, theta: float) -> np.ndarray:
    """Right-hand side ``E' G`` of the qubit propagation rule (input error on qubit 0)."""
    Q = make_qubit_error(k, theta)
    G = QUBIT_GATES[gate]
    if gate == "Z":
        return np.exp(1j * k * np.pi) * Q @ G
    if gate == "X":
        return np.exp(1j * theta * (k == 0)) * make_qubit_error(-k, -theta) @ G
    if gate == "S":
        return np.exp(1j * k * np.pi / 2) * Q @ G
    if gate == "T":
        return np.exp(1j * k * np.pi / 4) * Q @ G
    if gate == "Xshift":
        out = np.exp(1j * theta) * Q @ G
        if k > 0:
            P = np.diag([1.0, 0.0])
            out = out + np.exp(1j * theta * (1 - k) * heaviside(1 - k)) * P @ make_qubit_error(k - 1, theta)
        return out
    if gate == "CZ":
        return np.kron(Q, make_qubit_error(0, k * np.pi)) @ G
    if gate == "CCZ":
        V = np.diag(np.exp(-1j * k * np.pi * np.diag(np.kron(_NUM, _NUM))))
        return np.kron(Q, V) @ G
    raise ValueError(f"unknown qubit gate {gate!r}")


QUBIT_IDENTITY_GATES = ("Z", "X", "S", "T", "CZ", "CCZ")


def verify_qubit(gate: str, k: int, theta: float) -> float:
    """Exact residual of a two-level propagation identity.

    ``Xshift`` is excluded: on two levels ``sigma_+ |1> = 0`` so the shift-gate
    rule only holds as a restriction of the bosonic one, see
    :func:`compare_qubit_restriction`.
    """
    if gate not in QUBIT_IDENTITY_GATES:
        raise ValueError(f"no two-level identity for {gate!r}; expected one of {QUBIT_IDENTITY_GATES}")
    G = QUBIT_GATES[gate]
    n_q = int(round(math.log2(G.shape[0])))
    E = make_qubit_error(k, theta)
    for _ in range(n_q - 1):
        E = np.kron(E, np.eye(2))
    return float(np.max(np.abs(G @ E - qubit_prediction(gate, k, theta))))


_QUBIT_OF_KIND = {"Z": "Z", "S": "S", "T": "T", "X": "Xshift", "XPrime": "X", "CROT": "CZ", "CCROT": "CCZ"}


def compare_qubit_restriction(kind: str, k: int, theta: float, d: int = 8) -> float:
    """Bosonic prediction at ``N = 1`` restricted to ``{|0>, |1>}`` per mode versus the qubit rule."""
    qgate = _QUBIT_OF_KIND[kind]
    n_modes = {"CROT": 2, "CCROT": 3}.get(kind, 1)
    spec = GateSpec(kind, (1,) * n_modes)
    dims = (d,) * n_modes
    label = ErrorLabel(k, theta)
    pred = predict(spec, label, dims)
    E_prime, extra = materialize(pred, 1, dims)
    rhs = apply_gate(spec, dims, E_prime, side="right")
    if extra is not None:
        rhs = rhs + extra
    block = np.flatnonzero(np.all(np.stack(np.unravel_index(np.arange(d**n_modes), dims)) < 2, axis=0))
    restricted = rhs[np.ix_(block, block)]
    return float(np.max(np.abs(restricted - qubit_prediction(qgate, k, theta))))


# --- sweeps -------------------------------------------------------------------

def gate_variants(kind: str, N: int):
    """Concrete specs swept for ``kind``; rotation gates are swept over several angles."""
    if kind in ("Rl", "RlPrime"):
        return [GateSpec(kind, (N,), ell=ell) for ell in range(4)]
    if kind == "P":
        return [GateSpec(kind, (N,), phi=phi) for phi in (0.7, np.pi / 3)]
    if kind == "CROT":
        return [GateSpec(kind, (N, N))]
    if kind == "CCROT":
        return [GateSpec(kind, (N, N, N))]
    return [GateSpec(kind, (N,))]


def spec_name(spec: GateSpec) -> str:
    if spec.ell is not None:
        return f"{spec.kind}[ell={spec.ell}]"
    if spec.phi is not None:
        return f"{spec.kind}[phi={spec.phi:.6g}]"
    return spec.kind


# irrational multiples of pi avoid accidental phase coincidences
DEFAULT_THETAS = tuple(
    float(t) for t in (0.0, 0.1 * np.sqrt(2), -0.37, np.pi / np.e, -1.1 * np.sqrt(3), 2.3, -2.9, np.pi * (np.sqrt(5) - 2))
)


@dataclass
class SweepRow:
    gate: str
    N: int
    k: int
    theta: float
    d: str
    pad: int
    residual: float


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ROTORQEC_THREADS", "0")) or (os.cpu_count() or 1))
    except ValueError:
        return 1


def propagation_sweep(
    kinds=None,
    Ns=(1, 2, 3, 4),
    ks=range(-3, 4),
    thetas=DEFAULT_THETAS,
    d: int = 48,
    crot_dim: int = 16,
    ccrot_dim: int = 12,
    threads: int | None = None,
    pad: int | None = None,
):
    """Residual of every closed-form rule over ``(gate, N, k, theta)``; rows in input order.

    ``pad`` overrides the per-error default pad on every mode.
    """
    from .gates import PROPAGATION_KINDS

    kinds = PROPAGATION_KINDS if kinds is None else tuple(kinds)
    tasks = []
    for kind in kinds:
        for N in Ns:
            for spec in gate_variants(kind, N):
                for k in ks:
                    for th in thetas:
                        tasks.append((spec, k, th))

    def run(task):
        spec, k, th = task
        if spec.kind == "CROT":
            dims = (crot_dim,) * 2
        elif spec.kind == "CCROT":
            dims = (ccrot_dim,) * 3
        else:
            dims = (d,)
        used = default_pad(spec, k) if pad is None else pad
        res = verify(spec, ErrorLabel(k, th), dims if len(dims) > 1 else dims[0], pad)
        return SweepRow(spec_name(spec), spec.N, k, ErrorLabel(k, th).theta, "x".join(map(str, dims)), used, res)

    n_threads = threads or _threads()
    if n_threads == 1:
        return [run(t) for t in tasks]
    with ThreadPoolExecutor(n_threads) as pool:
        return list(pool.map(run, tasks))


SWEEP_COLUMNS = ("gate", "N", "k", "theta", "d", "pad", "residual")


def write_sweep_csv(rows, path):
    from .io import write_csv

    return write_csv(path, "propagation", SWEEP_COLUMNS, [
        (r.gate, r.N, r.k, r.theta, r.d, r.pad, r.residual) for r in rows
    ])
