"""Shift-and-rotate error basis ``E_k(theta)`` and its qubit and modular variants."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DimensionError, _check_dim, make_sigma, rotation_phases


def heaviside(x: float) -> int:
    """Step function with ``heaviside(0) == 1``."""
    return 1 if x >= 0 else 0


def canonical_angle(theta: float) -> float:
    """Wrap an angle into ``[-pi, pi)``."""
    t = math.fmod(theta + math.pi, 2 * math.pi)
    if t < 0:
        t += 2 * math.pi
    return t - math.pi


@dataclass(frozen=True)
class ErrorLabel:
    """Index ``(k, theta)`` of a basis error; ``theta`` is wrapped on construction."""

    k: int
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "theta", canonical_angle(float(self.theta)))


def make_error(label: ErrorLabel, d: int) -> np.ndarray:
    """``exp(i theta n) Sigma_|k|^-`` for ``k < 0``, ``Sigma_k^+ exp(i theta n)`` otherwise."""
    d = _check_dim(d)
    k, theta = label.k, label.theta
    if abs(k) >= d:
        raise DimensionError(f"shift |k|={abs(k)} does not fit in dimension {d}")
    phases = rotation_phases(theta, d)
    shift = make_sigma(k, d)
    if k < 0:
        return phases[:, None] * shift
    return shift * phases[None, :]


def make_qubit_error(k: int, theta: float = 0.0) -> np.ndarray:
    if k == -1:
        return np.array([[0, 1], [0, 0]], dtype=complex)
    if k == 1:
        return np.array([[0, 0], [1, 0]], dtype=complex)
    if k == 0:
        return np.diag([1.0, np.exp(1j * theta)])
    raise ValueError(f"qubit errors exist only for k in {{-1, 0, 1}}, got {k}")


def modular_projector(m: int, N: int, d: int) -> np.ndarray:
    """Diagonal 0/1 vector selecting Fock states ``n = m (mod 2N)``."""
    return (np.arange(d) % (2 * N) == m).astype(complex)


def make_modular_error(label: ErrorLabel, m: int, N: int, d: int, fourier: bool = False) -> np.ndarray:
    """Error projected onto the ``n = m (mod 2N)`` output sector.

    ``fourier=True`` builds the same operator as a weighted sum of rotated basis
    errors instead of projecting; both constructions agree on the safe subspace.
    """
    if not 0 <= m < 2 * N:
        raise ValueError(f"sector index m must lie in [0, {2 * N}), got {m}")
    if not fourier:
        return modular_projector(m, N, d)[:, None] * make_error(label, d)
    k, theta = label.k, label.theta
    out = np.zeros((d, d), dtype=complex)
    for j in range(2 * N):
        w = np.exp(-1j * np.pi * j / N * (m - k * heaviside(k)))
        out += w * make_error(ErrorLabel(k, theta + np.pi * j / N), d)
    return out / (2 * N)


def basis_span_rank(theta_grid_size: int, k_max: int, d: int, tol: float = 1e-9) -> int:
    """Numerical rank of ``{vec E_k(theta_j)}`` for ``|k| <= k_max`` on a uniform grid."""
    d = _check_dim(d)
    thetas = -np.pi + 2 * np.pi * np.arange(theta_grid_size) / theta_grid_size
    rows = [
        make_error(ErrorLabel(k, t), d).ravel()
        for k in range(-k_max, k_max + 1)
        if abs(k) < d
        for t in thetas
    ]
    return int(np.linalg.matrix_rank(np.array(rows), tol=tol))
