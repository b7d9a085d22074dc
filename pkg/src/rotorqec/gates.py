"""Logical gates and stabilizers of order-N rotation codes.

Diagonal gates are ``exp(i*pi*q(n))`` for a polynomial ``q`` with rational
coefficients (``Poly``: tuple indexed by power). Phases are reduced exactly
before conversion to floating point, see :func:`rotorqec.fock.pi_phases`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fock import DimensionError, _check_dim, make_sigma, pi_phases

Poly = tuple  # tuple[Fraction, ...], coefficient of n**j at index j

SINGLE_MODE = ("Z", "X", "XPrime", "S", "T", "TPrime", "Rl", "RlPrime", "P", "StabZ", "StabX")
MULTI_MODE = ("CROT", "CCROT")
KINDS = SINGLE_MODE + MULTI_MODE
# the eleven gates whose error propagation is tabulated
PROPAGATION_KINDS = ("Z", "X", "XPrime", "S", "T", "TPrime", "Rl", "RlPrime", "P", "CROT", "CCROT")
MAX_AMPLITUDES = 10**6


class GateSpecError(ValueError):
    pass


@dataclass(frozen=True)
class GateSpec:
    kind: str
    orders: tuple = (1,)
    ell: int | None = None
    phi: float | None = None

    def __post_init__(self):
        orders = tuple(int(o) for o in (self.orders if isinstance(self.orders, Sequence) else (self.orders,)))
        object.__setattr__(self, "orders", orders)
        if self.kind not in KINDS:
            raise GateSpecError(f"unknown gate kind {self.kind!r}; expected one of {KINDS}")
        if any(o < 1 for o in orders):
            raise GateSpecError(f"orders must be positive, got {orders}")
        need = {"CROT": 2, "CCROT": 3}.get(self.kind, 1)
        if len(orders) != need:
            raise GateSpecError(f"{self.kind} needs {need} order(s), got {orders}")
        if self.kind in ("Rl", "RlPrime") and (self.ell is None or self.ell < 0):
            raise GateSpecError(f"{self.kind} needs a non-negative ell")
        if self.kind == "P" and self.phi is None:
            raise GateSpecError("P needs a rotation angle phi")

    @property
    def N(self) -> int:
        return self.orders[0]

    @property
    def n_modes(self) -> int:
        return len(self.orders)


# --- exact polynomials -------------------------------------------------------

def poly_eval(p: Poly, n: int) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * n + c
    return acc


def poly_shift_difference(p: Poly, k: int) -> Poly:
    """Coefficients of ``p(n) - p(n - k)``."""
    deg = len(p) - 1
    out = [Fraction(0)] * (deg + 1)
    for j, c in enumerate(p):
        if c == 0:
            continue
        out[j] += c
        # (n - k)**j = sum_i C(j,i) n**i (-k)**(j-i)
        for i in range(j + 1):
            out[i] -= c * math.comb(j, i) * (-k) ** (j - i)
    return tuple(out)


def binomial_poly(i: int) -> Poly:
    """``C(x, i) = x(x-1)...(x-i+1)/i!`` as an exact polynomial in ``x``."""
    coeffs = [Fraction(1)]
    for r in range(i):
        # multiply by (x - r)
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for j, c in enumerate(coeffs):
            nxt[j + 1] += c
            nxt[j] -= r * c
        coeffs = nxt
    f = math.factorial(i)
    return tuple(c / f for c in coeffs)


@dataclass(frozen=True)
class PolynomialSpec:
    """Degree ``ell + 1`` integer-valued polynomial ``f'(k)`` for the optimal discrete rotation.

    ``coefficients[j]`` multiplies ``k**j``. The gate phase is
    ``pi * sum_j gate_coefficients[j] * (n/N)**j``.
    """

    ell: int
    coefficients: Poly = field(repr=False)

    @property
    def degree(self) -> int:
        return max(j for j, c in enumerate(self.coefficients) if c != 0)

    @property
    def gate_coefficients(self) -> Poly:
        """Coefficients of ``f_ell(x)/pi`` in ``x = n/N``."""
        return tuple(c / 2**self.ell for c in self.coefficients)

    def __call__(self, k: int) -> Fraction:
        return poly_eval(self.coefficients, k)


def appendixB_polynomial(ell: int) -> PolynomialSpec:
    """``f'(k) = sum_{i=1}^{ell+1} (-2)**(i-1) C(k, i)``, expanded in powers of ``k``."""
    if ell < 0:
        raise GateSpecError(f"ell must be non-negative, got {ell}")
    total = [Fraction(0)] * (ell + 2)
    for i in range(1, ell + 2):
        for j, c in enumerate(binomial_poly(i)):
            total[j] += (-2) ** (i - 1) * c
    return PolynomialSpec(ell, tuple(total))


def _in_units_of_n(p_x: Poly, N: int) -> Poly:
    """Rescale a polynomial in ``x = n/N`` to a polynomial in ``n``."""
    return tuple(Fraction(c) / Fraction(N) ** j for j, c in enumerate(p_x))


def phase_poly(spec: GateSpec) -> Poly | None:
    """``q`` with gate ``exp(i pi q(n))`` for single-mode polynomial gates, else ``None``."""
    N = spec.N
    F = Fraction
    if spec.kind == "Z":
        return (F(0), F(1, N))
    if spec.kind == "StabZ":
        return (F(0), F(2, N))
    if spec.kind == "S":
        return (F(0), F(0), F(1, 2 * N**2))
    if spec.kind == "T":
        return (F(0), F(0), F(0), F(0), F(1, 4 * N**4))
    if spec.kind == "TPrime":
        return _in_units_of_n((F(0), F(-1, 2), F(1, 4), F(1, 2)), N)
    if spec.kind == "Rl":
        p = 2**spec.ell
        coeffs = [F(0)] * (p + 1)
        coeffs[p] = F(1, 2**spec.ell * N**p)
        return tuple(coeffs)
    if spec.kind == "RlPrime":
        return _in_units_of_n(appendixB_polynomial(spec.ell).gate_coefficients, N)
    return None


def poly_phases(p: Poly, d: int) -> np.ndarray:
    return pi_phases([poly_eval(p, n) for n in range(d)])


# --- materialization ---------------------------------------------------------

def _dims_for(spec: GateSpec, d) -> tuple:
    if isinstance(d, Sequence):
        dims = tuple(int(x) for x in d)
    else:
        dims = (int(d),) * spec.n_modes
    if len(dims) != spec.n_modes:
        raise GateSpecError(f"{spec.kind} acts on {spec.n_modes} mode(s), got dims {dims}")
    for x in dims:
        _check_dim(x)
    total = math.prod(dims)
    if total > MAX_AMPLITUDES:
        raise DimensionError(f"{spec.kind} on dims {dims} needs {total} amplitudes (> {MAX_AMPLITUDES})")
    return dims


def gate_diagonal(spec: GateSpec, d) -> np.ndarray | None:
    """Diagonal of a diagonal gate (flattened over modes), or ``None`` for shift gates."""
    dims = _dims_for(spec, d)
    if spec.kind in ("X", "XPrime", "StabX"):
        return None
    if spec.kind == "P":
        n = np.arange(dims[0])
        z = np.exp(1j * np.pi * n / spec.N)
        return np.exp(1j * spec.phi / 2 * (1 - z))
    if spec.kind in MULTI_MODE:
        denom = math.prod(spec.orders)
        grids = np.meshgrid(*[np.arange(x, dtype=np.int64) for x in dims], indexing="ij")
        prod = np.ones_like(grids[0])
        for g in grids:
            prod = prod * g
        # exp(i pi prod / denom), reduced exactly modulo 2*denom
        return np.exp(1j * np.pi * (prod % (2 * denom)) / denom).ravel()
    return poly_phases(phase_poly(spec), dims[0])


def bin_swap(N: int, d: int) -> np.ndarray:
    """Swap Fock bins ``[2jN, 2jN+N)`` and ``[(2j+1)N, (2j+2)N)``.

    Levels whose partner bin would reach past the truncation are left fixed.
    """
    d = _check_dim(d)
    perm = np.arange(d)
    n = np.arange(d)
    q = n // N
    even = q % 2 == 0
    partner = np.where(even, n + N, n - N)
    ok = ~even | (partner < d)
    perm[ok] = partner[ok]
    G = np.zeros((d, d), dtype=complex)
    G[perm, n] = 1.0
    return G


def make_gate(spec: GateSpec, d) -> np.ndarray:
    """Dense matrix of the gate; multimode gates act on the Kronecker product space."""
    dims = _dims_for(spec, d)
    if spec.kind == "X":
        return make_sigma(-spec.N, dims[0])
    if spec.kind == "StabX":
        return make_sigma(-2 * spec.N, dims[0])
    if spec.kind == "XPrime":
        return bin_swap(spec.N, dims[0])
    return np.diag(gate_diagonal(spec, dims))


def apply_gate(spec: GateSpec, d, op: np.ndarray, side: str = "left") -> np.ndarray:
    """``G @ op`` (or ``op @ G``) using the diagonal when the gate has one."""
    diag = gate_diagonal(spec, d)
    if diag is None:
        G = make_gate(spec, d)
        return G @ op if side == "left" else op @ G
    return diag[:, None] * op if side == "left" else op * diag[None, :]


# --- logical action ----------------------------------------------------------

def expected_logical(spec: GateSpec) -> np.ndarray:
    k = spec.kind
    if k == "Z":
        return np.diag([1, -1]).astype(complex)
    if k in ("X", "XPrime"):
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k == "S":
        return np.diag([1, 1j])
    if k in ("T", "TPrime"):
        return np.diag([1, np.exp(1j * np.pi / 4)])
    if k in ("Rl", "RlPrime"):
        return np.diag([1, np.exp(1j * np.pi / 2**spec.ell)])
    if k == "P":
        return np.diag([1, np.exp(1j * spec.phi)])
    if k in ("StabZ", "StabX"):
        return np.eye(2, dtype=complex)
    n = spec.n_modes
    diag = np.ones(2**n, dtype=complex)
    diag[-1] = -1
    return np.diag(diag)


@dataclass
class LogicalAction:
    matrix: np.ndarray
    expected: np.ndarray
    deviation: float
    leakage: float
    isometry_defect: float


def verify_logical_action(spec: GateSpec, code) -> LogicalAction:
    """Logical matrix ``<a_L|G|b_L>``, leakage ``||(1-P_L) G P_L||`` and deviation from the ideal gate.

    Multimode gates use the same code on every mode.
    """
    from .codes import make_codewords

    if any(o != code.N for o in spec.orders):
        raise GateSpecError(f"gate orders {spec.orders} do not match code order {code.N}")
    zero, one, _, _ = make_codewords(code)
    basis1 = np.stack([zero, one], axis=1)
    basis = basis1
    for _ in range(spec.n_modes - 1):
        basis = np.kron(basis, basis1)
    G_basis = apply_gate(spec, code.dim, basis)
    L = basis.conj().T @ G_basis
    leak = G_basis - basis @ L
    expected = expected_logical(spec)
    gram = G_basis.conj().T @ G_basis
    return LogicalAction(
        matrix=L,
        expected=expected,
        deviation=float(np.linalg.norm(L - expected)),
        leakage=float(np.linalg.norm(leak, 2)),
        isometry_defect=float(np.linalg.norm(gram - np.eye(gram.shape[0]))),
    )
