"""Dense transform-matrix builders shared by the rest of the toolkit.

Everything here returns plain complex128 ndarrays. Block sizes stay at desk
scale (N up to a few thousand), so O(N^2) storage is acceptable and the
contracts are entrywise values rather than FFT call speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ZeroPhase:
    """Cyclic-prefix phase rule that is identically zero (plain CP copy)."""

    def __call__(self, n_prime):
        return np.zeros_like(np.asarray(n_prime, dtype=float))


@dataclass(frozen=True)
class AfdmChirpPhase:
    """Chirp-periodic prefix phase, phi(n') = c1 * (N^2 + 2*N*n') in cycles."""

    c1: float
    N: int

    def __call__(self, n_prime):
        n_prime = np.asarray(n_prime, dtype=float)
        return self.c1 * (self.N**2 + 2.0 * self.N * n_prime)


def dft_matrix(N: int) -> np.ndarray:
    """Unitary N-point DFT matrix, entry (m, n) = exp(-j2pi*m*n/N)/sqrt(N)."""
    if N < 1:
        raise ValueError(f"DFT size must be >= 1, got {N}")
    n = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(n, n) / N) / np.sqrt(N)


def chirp_phases(N: int, c: float) -> np.ndarray:
    """Diagonal of the chirp matrix: exp(-j2pi*c*n^2) for n = 0..N-1."""
    if N < 1:
        raise ValueError(f"chirp size must be >= 1, got {N}")
    n = np.arange(N)
    return np.exp(-2j * np.pi * c * n.astype(float) ** 2)


def chirp_matrix(N: int, c: float) -> np.ndarray:
    """Diagonal chirp matrix diag(exp(-j2pi*c*n^2)); unitary by construction."""
    return np.diag(chirp_phases(N, c))


def daft_matrix(N: int, c1: float, c2: float) -> np.ndarray:
    """Forward N-point DAFT matrix A = Lambda_c2 . F_N . Lambda_c1 (unitary).

    A is a DFT twisted by two diagonal chirps; its inverse is the conjugate
    transpose. c1 = c2 = 0 reduces A to the plain DFT matrix.
    """
    F = dft_matrix(N)
    return chirp_phases(N, c2)[:, None] * F * chirp_phases(N, c1)[None, :]


def cyclic_shift_matrix(N: int, k: int) -> np.ndarray:
    """Forward cyclic shift permutation Pi^k: (Pi^k s)[n] = s[(n-k) mod N].

    k is interpreted modulo N; negative values shift the other way.
    """
    if N < 1:
        raise ValueError(f"shift size must be >= 1, got {N}")
    return np.roll(np.eye(N), -int(k), axis=1)


def doppler_phases(N: int, f: float) -> np.ndarray:
    """Diagonal of the Doppler matrix: exp(+j2pi*f*n/N) for n = 0..N-1.

    The + sign follows the time-domain sample relation r[n] ~ e^{+j2pi f n/N};
    all support-shift rules downstream inherit this convention.
    """
    if N < 1:
        raise ValueError(f"size must be >= 1, got {N}")
    n = np.arange(N)
    return np.exp(2j * np.pi * f * n / N)


def doppler_diagonal(N: int, f: float) -> np.ndarray:
    """Doppler modulation as a diagonal matrix (fractional f allowed)."""
    return np.diag(doppler_phases(N, f))


def cp_phase_entries(N: int, ell: int, phase) -> np.ndarray:
    """Diagonal of the delayed-CP phase matrix for a path delay ell.

    Entries 0..ell-1 are exp(-j2pi * phi(ell - n)) and the remaining N - ell
    entries are 1; phase maps an integer offset to cycles (ZeroPhase or
    AfdmChirpPhase).
    """
    if not 0 <= ell < N:
        raise ValueError(f"delay must satisfy 0 <= ell < N, got ell={ell}, N={N}")
    d = np.ones(N, dtype=complex)
    if ell > 0:
        offsets = ell - np.arange(ell)  # ell, ell-1, ..., 1
        d[:ell] = np.exp(-2j * np.pi * np.asarray(phase(offsets), dtype=float))
    return d


def cp_phase_matrix(N: int, ell: int, phase) -> np.ndarray:
    """Delayed-CP phase correction Phi as a diagonal matrix."""
    return np.diag(cp_phase_entries(N, ell, phase))
