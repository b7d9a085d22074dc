"""Rotation-code codewords built from grid amplitude profiles.

A profile lists the amplitude on consecutive Fock-grid points. A code places
profile entry ``i`` on the absolute grid point ``a = k0 + i`` (Fock state
``|aN>``); even ``a`` belongs to ``|0_N>`` and odd ``a`` to ``|1_N>``, each
normalized separately. Keeping the parity absolute means ``Z_N`` acts as
logical Z and ``CROT`` as logical CZ for every offset.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fock import DimensionError, make_sigma

PROFILE_CSV_HEADER = "# rotorqec profile v1"


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class AmplitudeProfile:
    N: int
    values: np.ndarray = field(repr=False)
    source: str = "custom"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).ravel()
        if self.N < 1:
            raise ProfileError(f"order N must be positive, got {self.N}")
        if not np.all(np.isfinite(vals)):
            raise ProfileError("profile amplitudes must be finite")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class RotationCode:
    profile: AmplitudeProfile
    dim: int
    k0: int = 0

    @property
    def N(self) -> int:
        return self.profile.N

    @property
    def guard(self) -> int:
        return 2 * self.N

    @property
    def grid(self) -> np.ndarray:
        """Absolute grid indices ``a`` carrying profile entries."""
        return self.k0 + np.arange(len(self.profile))

    @property
    def top(self) -> int:
        return int(self.grid[-1]) * self.N

    def normalized_amplitudes(self) -> np.ndarray:
        """Profile amplitudes with each parity class scaled to unit norm."""
        f = self.profile.values.copy()
        parity = self.grid % 2
        for p in (0, 1):
            sel = parity == p
            nrm = np.linalg.norm(f[sel])
            if nrm == 0:
                raise ProfileError(f"codeword |{p}_N> has no support on the grid")
            f[sel] /= nrm
        return f


def required_dim(N: int, n_points: int, k0: int = 0, headroom: int = 0) -> int:
    """Smallest truncation that keeps the guard band (and extra headroom) empty."""
    return (k0 + n_points - 1) * N + 2 * N + headroom + 1


def make_code(profile: AmplitudeProfile, dim: int | None = None, k0: int = 0, headroom: int = 0) -> RotationCode:
    if k0 < 0:
        raise ProfileError(f"grid offset k0 must be non-negative, got {k0}")
    if dim is None:
        dim = required_dim(profile.N, len(profile), k0, headroom)
    return RotationCode(profile, int(dim), int(k0))


def make_codewords(code: RotationCode):
    """Return ``(zero, one, plus, minus)`` kets of length ``code.dim``."""
    if code.top + code.guard > code.dim - 1:
        raise DimensionError(
            f"codeword support reaches |{code.top}> but dimension {code.dim} "
            f"needs a guard band of {code.guard} empty levels above it"
        )
    f = code.normalized_amplitudes()
    zero = np.zeros(code.dim, dtype=complex)
    one = np.zeros(code.dim, dtype=complex)
    idx = code.grid * code.N
    even = code.grid % 2 == 0
    zero[idx[even]] = f[even]
    one[idx[~even]] = f[~even]
    plus = (zero + one) / math.sqrt(2)
    minus = (zero - one) / math.sqrt(2)
    return zero, one, plus, minus


def logical_state(code: RotationCode, alpha: complex, beta: complex) -> np.ndarray:
    """``alpha|+_N> + beta|-_N>``, normalized."""
    _, _, plus, minus = make_codewords(code)
    psi = alpha * plus + beta * minus
    return psi / np.linalg.norm(psi)


def make_ideal_profile(N: int, M: int) -> AmplitudeProfile:
    """Constant amplitudes on ``M`` grid points (finite stand-in for an ideal phase code)."""
    if M < 2:
        raise ProfileError(f"an ideal profile needs M >= 2 grid points, got {M}")
    return AmplitudeProfile(N, np.ones(M), source=f"ideal(M={M})")


def make_cat_profile(N: int, alpha: complex, d: int, k0: int = 0, tail_tol: float = 1e-8) -> AmplitudeProfile:
    """Grid amplitudes ``alpha**(aN) / sqrt((aN)!)`` of the 2N-legged cat code.

    The grid is cut where the code (with its guard band) still fits in ``d``;
    the discarded tail must carry less than ``tail_tol`` of either codeword.
    """
    n_fit = (d - 1 - 2 * N) // N - k0 + 1
    if n_fit < 2:
        raise DimensionError(f"dimension {d} too small for an order-{N} cat code")
    r = abs(alpha)
    ph = np.angle(alpha) if r > 0 else 0.0
    # compute far past the cut to measure the tail
    n_all = n_fit + 64
    n = np.arange(n_all) * N
    with np.errstate(divide="ignore"):
        logmag = np.where(n == 0, 0.0, n * np.log(r) if r > 0 else -np.inf) - 0.5 * np.array(
            [math.lgamma(x + 1) for x in n]
        )
    mag = np.exp(logmag - np.max(logmag))
    vals = mag * np.exp(1j * ph * n)
    for p in (0, 1):
        sel = np.arange(n_all) % 2 == p
        total = np.sum(np.abs(vals[sel]) ** 2)
        kept = np.sum(np.abs(vals[:n_fit][sel[:n_fit]]) ** 2)
        if total > 0 and 1 - kept / total > tail_tol:
            raise DimensionError(
                f"dimension {d} keeps only {kept / total:.3e} of the |{p}_N> weight for alpha={alpha}"
            )
    vals = vals[:n_fit]
    # drop negligible trailing points so the code does not claim the whole space
    weights = np.abs(vals) ** 2 / np.max(np.abs(vals) ** 2)
    last = int(np.max(np.flatnonzero(weights > 1e-32))) + 1
    last = max(last, 2)
    return AmplitudeProfile(N, vals[:last], source=f"cat(alpha={alpha})")


def make_binomial_profile(N: int, K: int, d: int | None = None, k0: int = 0) -> AmplitudeProfile:
    """Grid amplitudes ``sqrt(binom(K, i))``, i = 0..K (the usual binomial-code pattern)."""
    if K < 1:
        raise ProfileError(f"binomial profile needs K >= 1, got {K}")
    if d is not None and required_dim(N, K + 1, k0) > d:
        raise DimensionError(f"binomial profile K={K} needs dimension {required_dim(N, K + 1, k0)}, got {d}")
    vals = np.sqrt([math.comb(K, i) for i in range(K + 1)])
    return AmplitudeProfile(N, vals, source=f"binomial(K={K}) [literature amplitudes]")


def make_contrived_profile(N: int, periods: int = 1) -> AmplitudeProfile:
    """Period-8 profile ``1, i, i, 1, -1, i, i, -1`` closed with a trailing ``1``.

    For this code ``<0_N|X_N|1_N> = 0`` so the N-shift errors are detectable.
    """
    base = np.array([1, 1j, 1j, 1, -1, 1j, 1j, -1], dtype=complex)
    return AmplitudeProfile(N, np.concatenate([np.tile(base, periods), [1.0]]), source="contrived-period-8")


def codespace_projector(code: RotationCode) -> np.ndarray:
    zero, one, _, _ = make_codewords(code)
    return np.outer(zero, zero.conj()) + np.outer(one, one.conj())


def codespace_projector_grid_form(code: RotationCode) -> np.ndarray:
    """Projector assembled entry by entry from grid amplitudes and parity."""
    f = code.normalized_amplitudes()
    a = code.grid
    same = (1 + (-1.0) ** (a[:, None] + a[None, :])) / 2
    P = np.zeros((code.dim, code.dim), dtype=complex)
    idx = a * code.N
    P[np.ix_(idx, idx)] = same * np.outer(f, f.conj())
    return P


def grid_weights(code: RotationCode) -> np.ndarray:
    """Probability of each grid point in ``|+_N>``."""
    w = np.abs(code.normalized_amplitudes()) ** 2
    return w / w.sum()


def profile_weights(code: RotationCode) -> np.ndarray:
    """``|f_a|^2`` of the raw profile, normalized jointly over both parities."""
    w = np.abs(code.profile.values) ** 2
    return w / w.sum()


def phase_expectation(code: RotationCode, phi: float | np.ndarray):
    """``sum_a |f_a|^2 exp(i (phi N + pi) a)`` over the jointly normalized profile.

    Vanishes in the ideal limit except at ``phi = (2j+1) pi / N`` where it has
    unit modulus for every code.
    """
    p = profile_weights(code)
    a = code.grid
    phi = np.asarray(phi, dtype=float)
    return np.exp(1j * (phi[..., None] * code.N + np.pi) * a) @ p


def modular_phase_variance(code: RotationCode) -> float:
    """Holevo variance of ``Sigma_N^-`` in ``|+_N>``: ``1/|<Sigma_N^->|^2 - 1``."""
    _, _, plus, _ = make_codewords(code)
    mean = plus.conj() @ make_sigma(-code.N, code.dim) @ plus
    return float(1 / abs(mean) ** 2 - 1)


def write_profile_csv(profile: AmplitudeProfile, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"{PROFILE_CSV_HEADER} N={profile.N} source={profile.source}\n")
        w = csv.writer(fh)
        w.writerow(["k", "re", "im"])
        for i, v in enumerate(profile.values):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def read_profile_csv(path) -> AmplitudeProfile:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith(PROFILE_CSV_HEADER):
        raise ProfileError(f"{path}: missing '{PROFILE_CSV_HEADER}' header")
    head = lines[0][len(PROFILE_CSV_HEADER):].strip()
    n_part, _, source = head.partition(" source=")
    if not n_part.startswith("N="):
        raise ProfileError(f"{path}: header lacks N=")
    rows = list(csv.DictReader(lines[1:]))
    vals = np.zeros(len(rows), dtype=complex)
    for r in rows:
        vals[int(r["k"])] = float(r["re"]) + 1j * float(r["im"])
    return AmplitudeProfile(int(n_part[2:]), vals, source=source or "csv")
