"""The three waveform chains: OFDM, OTFS and AFDM.

Each spec owns its (unitary) modulation and demodulation operators plus the
cyclic-prefix phase rule. On top of those sit the effective-channel builder,
chirp tuning for AFDM, per-waveform orthogonality predicates, and exact
support-pattern prediction for integer-Doppler paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import ChannelRealization, channel_matrix
from .core import AfdmChirpPhase, ZeroPhase, chirp_phases, dft_matrix


@dataclass(frozen=True)
class OfdmSpec:
    """Plain multicarrier spec: IDFT transmit, DFT receive."""

    n: int
    cp_len: int = 0

    @cached_property
    def tx_matrix(self) -> np.ndarray:
        return dft_matrix(self.n).conj().T

    @cached_property
    def rx_matrix(self) -> np.ndarray:
        return dft_matrix(self.n)

    def cp_phase(self):
        return ZeroPhase()


@dataclass(frozen=True)
class OtfsSpec:
    """Delay-Doppler grid spec, transmit operator (F_L^H kron P_tx).

    The symbol grid X is K x L and is sent column-stacked, so the delay
    axis (size K, paired with the pulse) is the fast index and the Doppler
    axis (size L, paired with F_L) is the slow one. Pulses are diagonal
    K x K, given as length-K vectors; None means rectangular (identity).
    """

    k: int
    l: int
    cp_len: int = 0
    pulse_tx: tuple[complex, ...] | None = None
    pulse_rx: tuple[complex, ...] | None = None

    def __post_init__(self):
        if self.k < 1 or self.l < 1:
            raise ValueError(f"grid sizes must be >= 1, got K={self.k}, L={self.l}")
        for name, p in (("pulse_tx", self.pulse_tx), ("pulse_rx", self.pulse_rx)):
            if p is not None and len(p) != self.k:
                raise ValueError(f"{name} must have length K={self.k}, got {len(p)}")

    @property
    def n(self) -> int:
        return self.k * self.l

    @cached_property
    def tx_matrix(self) -> np.ndarray:
        P = np.eye(self.k, dtype=complex) if self.pulse_tx is None else np.diag(self.pulse_tx)
        return np.kron(dft_matrix(self.l).conj().T, P)

    @cached_property
    def rx_matrix(self) -> np.ndarray:
        P = np.eye(self.k, dtype=complex) if self.pulse_rx is None else np.diag(self.pulse_rx)
        return np.kron(dft_matrix(self.l), P)

    def cp_phase(self):
        return ZeroPhase()


@dataclass(frozen=True)
class AfdmSpec:
    """Chirp-twisted spec: transmit A^H with A = Lambda_c2 . F_N . Lambda_c1."""

    n: int
    c1: float
    c2: float
    xi: int = 0
    cp_len: int = 0

    def __post_init__(self):
        if self.xi < 0:
            raise ValueError(f"guard width must be >= 0, got {self.xi}")
        if not (np.isfinite(self.c1) and np.isfinite(self.c2)):
            raise ValueError("chirp rates must be finite")

    @cached_property
    def forward(self) -> np.ndarray:
        F = dft_matrix(self.n)
        return chirp_phases(self.n, self.c2)[:, None] * F * chirp_phases(self.n, self.c1)[None, :]

    @cached_property
    def tx_matrix(self) -> np.ndarray:
        return self.forward.conj().T

    @cached_property
    def rx_matrix(self) -> np.ndarray:
        return self.forward

    def cp_phase(self):
        return AfdmChirpPhase(c1=self.c1, N=self.n)

    @property
    def delay_stride(self) -> int:
        """Diagonal shift contributed per unit delay: 2*N*c1, an integer for tuned c1."""
        stride = 2.0 * self.n * self.c1
        if abs(stride - round(stride)) > 1e-9:
            raise ValueError(
                f"support prediction needs 2*N*c1 integral, got 2*N*c1 = {stride}"
            )
        return int(round(stride))


WaveformSpec = OfdmSpec | OtfsSpec | AfdmSpec


def modulate(spec: WaveformSpec, x: np.ndarray) -> np.ndarray:
    """Map one block of N symbols to N time-domain samples (unitary)."""
    x = np.asarray(x)
    if x.shape != (spec.n,):
        raise ValueError(f"symbol block must have length {spec.n}, got {x.shape}")
    return spec.tx_matrix @ x


def demodulate(spec: WaveformSpec, r: np.ndarray) -> np.ndarray:
    """Map N received samples (CP already stripped) back to the symbol domain."""
    r = np.asarray(r)
    if r.shape != (spec.n,):
        raise ValueError(f"received block must have length {spec.n}, got {r.shape}")
    return spec.rx_matrix @ r


def prepend_cp(spec: WaveformSpec, s: np.ndarray) -> np.ndarray:
    """Prepend the cyclic prefix, applying the waveform's phase rule.

    Prefix sample at index n' in {-cp_len..-1} equals s[N+n'] * e^{j2pi phi(n')};
    phi is zero for OFDM/OTFS and the chirp-periodic rule for AFDM, which
    makes the prefix the exact chirp-periodic continuation of the block.
    """
    s = np.asarray(s)
    if s.shape != (spec.n,):
        raise ValueError(f"block must have length {spec.n}, got {s.shape}")
    if spec.cp_len == 0:
        return s.astype(complex)
    phase = spec.cp_phase()
    n_prime = np.arange(-spec.cp_len, 0)
    prefix = s[spec.n + n_prime] * np.exp(2j * np.pi * np.asarray(phase(n_prime), dtype=float))
    return np.concatenate([prefix, s])


def effective_channel(spec: WaveformSpec, chan: ChannelRealization) -> np.ndarray:
    """Symbol-domain channel G = T_rx . H . T_tx.

    Noiselessly, demodulate(strip_cp(apply(chan, prepend_cp(modulate(x))))) equals
    G @ x; H is reduced with this waveform's own prefix phase rule.
    """
    if chan.config.N != spec.n:
        raise ValueError(f"channel block size {chan.config.N} != waveform size {spec.n}")
    H = channel_matrix(chan, spec.cp_phase())
    return spec.rx_matrix @ H @ spec.tx_matrix


def afdm_orthogonality_ok(ell_max: int, f_max: int, xi: int, N: int) -> bool:
    """True iff every (delay, integer Doppler) pair maps to a distinct diagonal.

    The tuned chirp walks the diagonal by 2(f_max+xi)+1 per delay tap and by
    -1 per Doppler bin, so all shifts are distinct exactly when the full span
    (2(f_max+xi)+1)*ell_max + 2*f_max + 1 fits into one period N.
    """
    _check_nonneg(ell_max=ell_max, f_max=f_max, xi=xi, N=N)
    return (2 * (f_max + xi) + 1) * ell_max + 2 * f_max + 1 <= N


def otfs_orthogonality_ok(ell_max: int, f_max: int, K: int, L: int) -> bool:
    """True iff delays are identifiable mod K and Dopplers mod L.

    Delay shifts the size-K (pulse) axis and Doppler the size-L (DFT) axis,
    so the support map is injective exactly when ell_max <= K-1 and the
    Doppler window {-f_max..f_max} has at most L distinct values.
    """
    _check_nonneg(ell_max=ell_max, f_max=f_max, K=K, L=L)
    return ell_max <= K - 1 and 2 * f_max + 1 <= L


def _check_nonneg(**kwargs):
    for name, v in kwargs.items():
        if v < 0:
            raise ValueError(f"{name} must be nonnegative, got {v}")


def afdm_tune(ell_max: int, f_max: int, xi: int, N: int) -> tuple[float, float]:
    """Chirp rates that make integer-Doppler paths land on disjoint diagonals.

    c1 = (2(f_max+xi)+1) / (2N); c2 defaults to 1/(2N^2), well below the 1/N
    scale that matters, and deterministic so runs reproduce.
    """
    if not afdm_orthogonality_ok(ell_max, f_max, xi, N):
        raise ValueError(
            f"tuning infeasible: (2({f_max}+{xi})+1)*{ell_max} + 2*{f_max}+1 > {N}"
        )
    c1 = (2 * (f_max + xi) + 1) / (2 * N)
    c2 = 1.0 / (2 * N * N)
    return c1, c2


def predict_support(spec: WaveformSpec, ell: int, f_int: int) -> frozenset[tuple[int, int]]:
    """Exact nonzero positions of a single integer-Doppler path in G.

    AFDM: the cyclic diagonal at col - row = (ell * 2*N*c1 - f_int) mod N.
    OTFS: block (a, (a - f_int) mod L) for every block-row a, each block a
    K x K sub-matrix populated on its cyclic diagonal col - row = -ell mod K.

    Callers are responsible for staying inside the orthogonality region;
    beyond it the patterns still wrap (and collide), which is what the
    boundary tests look for. Structural bounds are still enforced.
    """
    if isinstance(spec, OfdmSpec):
        raise ValueError("no support predictor for OFDM (Doppler spreads into a band)")
    if not 0 <= ell < spec.n:
        raise ValueError(f"delay must satisfy 0 <= ell < N, got {ell}")
    if abs(f_int) > spec.n // 2:
        raise ValueError(f"integer Doppler {f_int} outside +-N/2")
    if isinstance(spec, AfdmSpec):
        N = spec.n
        shift = (ell * spec.delay_stride - f_int) % N
        rows = np.arange(N)
        return frozenset(zip(rows.tolist(), ((rows + shift) % N).tolist()))
    K, L = spec.k, spec.l
    pairs = []
    for a in range(L):
        a_col = (a - f_int) % L
        for b in range(K):
            pairs.append((a * K + b, a_col * K + (b - ell) % K))
    return frozenset(pairs)


def afdm_shift(spec: AfdmSpec, ell: int, f_int: int) -> int:
    """Diagonal index (col - row, mod N) occupied by an integer path."""
    return (ell * spec.delay_stride - f_int) % spec.n


def measure_papr(s: np.ndarray) -> float:
    """Peak-to-average power ratio of a sequence, in dB."""
    s = np.asarray(s)
    if s.size == 0:
        raise ValueError("PAPR of an empty sequence is undefined")
    power = np.abs(s) ** 2
    mean = power.mean()
    if mean == 0:
        raise ValueError("PAPR of an all-zero sequence is undefined")
    return float(10.0 * np.log10(power.max() / mean))
