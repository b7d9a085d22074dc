"""Pure numpy versions of the hot ket-level kernels (fallback for the compiled module)."""
from __future__ import annotations

import numpy as np


def apply_error_ket(psi: np.ndarray, k: int, theta: float) -> np.ndarray:
    """``E_k(theta) psi`` in O(d); amplitudes shifted past the edge are dropped."""
    psi = np.asarray(psi, dtype=np.complex128)
    d = psi.shape[0]
    out = np.zeros(d, dtype=np.complex128)
    s = abs(k)
    if s >= d:
        return out
    n = np.arange(d - s)
    if k < 0:
        out[: d - s] = np.exp(1j * theta * n) * psi[s:]
    else:
        out[s:] = np.exp(1j * theta * n) * psi[: d - s]
    return out


def modular_sector_weights(probs: np.ndarray, modulus: int) -> np.ndarray:
    """``w[j] = sum_{n = j mod modulus} probs[n]``."""
    probs = np.asarray(probs, dtype=np.float64)
    idx = np.arange(probs.shape[0]) % modulus
    return np.bincount(idx, weights=probs, minlength=modulus)


def phase_expectation_sum(p: np.ndarray, a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``out[j] = sum_i p[i] exp(1j * x[j] * a[i])``."""
    p = np.asarray(p, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return np.exp(1j * np.multiply.outer(x, a)) @ p
