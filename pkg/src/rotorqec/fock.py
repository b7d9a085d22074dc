"""Truncated Fock-space primitives.

Operators are dense ``complex128`` arrays of shape ``(d, d)`` and kets are
``complex128`` vectors of length ``d``; basis state ``|n>`` is index ``n``.
Every identity that holds in infinite dimension is compared with
:func:`residual_on_safe_subspace`, which ignores the columns close to the
truncation edge.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when an operator cannot be represented at the requested dimension."""


def _check_dim(d: int) -> int:
    d = int(d)
    if d < 2:
        raise DimensionError(f"truncation dimension must be >= 2, got {d}")
    return d


def make_number_op(d: int) -> np.ndarray:
    d = _check_dim(d)
    return np.diag(np.arange(d, dtype=complex))


def make_sigma(k: int, d: int) -> np.ndarray:
    """Susskind-Glogower shift: ``k < 0`` lowers by ``|k|``, ``k > 0`` raises by ``k``.

    No ``sqrt(n)`` factors; ``make_sigma(-1, d) @ make_sigma(1, d)`` is the
    identity, the reverse product misses ``|0><0|``.
    """
    d = _check_dim(d)
    if abs(k) >= d:
        raise DimensionError(f"shift |k|={abs(k)} does not fit in dimension {d}")
    # np.eye(d, k=j) puts ones at (n, n + j), i.e. |n><n+j|
    return np.eye(d, k=-k, dtype=complex)


def rotation_phases(theta: float, d: int) -> np.ndarray:
    return np.exp(1j * theta * np.arange(d))


def make_rotation(theta: float, d: int) -> np.ndarray:
    d = _check_dim(d)
    return np.diag(rotation_phases(theta, d))


def projector_first(k: int, d: int) -> np.ndarray:
    """Projector onto ``|0>..|k-1>``; ``k <= 0`` gives the zero matrix."""
    d = _check_dim(d)
    if k > d:
        raise DimensionError(f"cannot project onto {k} states in dimension {d}")
    diag = np.zeros(d, dtype=complex)
    diag[: max(k, 0)] = 1.0
    return np.diag(diag)


def pi_phases(values: Sequence[Fraction]) -> np.ndarray:
    """``exp(i*pi*q)`` for exact rationals ``q``, reduced mod 2 before rounding.

    Large polynomial exponents (``n**8`` at ``n ~ 50``) lose all phase precision
    in floating point; reducing exactly keeps every entry at machine precision.
    """
    reduced = np.array([float(Fraction(q) % 2) for q in values])
    return np.exp(1j * np.pi * reduced)


def residual_on_safe_subspace(A: np.ndarray, B: np.ndarray, pad: int) -> float:
    """Max column norm of ``A - B`` over basis kets ``|n>`` with ``n < d - pad``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    d = A.shape[1]
    if pad < 0 or pad >= d:
        raise DimensionError(f"pad must satisfy 0 <= pad < d={d}, got {pad}")
    diff = (A - B)[:, : d - pad]
    return float(np.max(np.linalg.norm(diff, axis=0)))


def safe_columns(dims: Sequence[int], pads: Sequence[int]) -> np.ndarray:
    """Flat indices of product basis states with every mode below its edge.

    Used for multimode residuals: the safe subspace is the product of the
    per-mode safe subspaces.
    """
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    mask = np.ones(grids[0].shape, dtype=bool)
    for g, d, p in zip(grids, dims, pads):
        mask &= g < d - p
    return np.flatnonzero(mask.ravel())


def residual_on_columns(A: np.ndarray, B: np.ndarray, cols: np.ndarray) -> float:
    diff = np.asarray(A)[:, cols] - np.asarray(B)[:, cols]
    return float(np.max(np.linalg.norm(diff, axis=0)))


def basis_ket(n: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[n] = 1.0
    return v


def normalize(psi: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / nrm


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out
