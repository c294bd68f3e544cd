"""Communication-side measurement: constellations, AWGN, equalizers, BER."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, sample_paths, time_domain_apply
from .modem import WaveformSpec, demodulate, effective_channel, measure_papr, modulate, prepend_cp


class SingularChannelError(ValueError):
    """Zero-forcing asked to invert a numerically singular channel."""


# Gray-coded PAM-4 levels indexed by the 2-bit label value
_PAM4_GRAY = {0b00: -3.0, 0b01: -1.0, 0b11: 1.0, 0b10: 3.0}


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy symbol set with a Gray bit labelling."""

    name: str
    points: tuple[complex, ...]  # indexed by the integer value of the bit label
    bits_per_symbol: int

    @staticmethod
    def qpsk() -> "Constellation":
        pts = []
        for label in range(4):
            b0, b1 = (label >> 1) & 1, label & 1
            pts.append(((1 - 2 * b0) + 1j * (1 - 2 * b1)) / np.sqrt(2.0))
        return Constellation("QPSK", tuple(pts), 2)

    @staticmethod
    def qam16() -> "Constellation":
        pts = []
        for label in range(16):
            i_bits, q_bits = (label >> 2) & 0b11, label & 0b11
            pts.append((_PAM4_GRAY[i_bits] + 1j * _PAM4_GRAY[q_bits]) / np.sqrt(10.0))
        return Constellation("16QAM", tuple(pts), 4)

    @staticmethod
    def by_name(name: str) -> "Constellation":
        key = name.strip().lower()
        if key == "qpsk":
            return Constellation.qpsk()
        if key in ("16qam", "qam16"):
            return Constellation.qam16()
        raise ValueError(f"unknown constellation {name!r}")


def map_bits(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Pack bits (MSB first per symbol) into constellation points."""
    bits = np.asarray(bits, dtype=int)
    bps = constellation.bits_per_symbol
    if bits.size % bps != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {bps}")
    weights = 1 << np.arange(bps - 1, -1, -1)
    labels = bits.reshape(-1, bps) @ weights
    return np.asarray(constellation.points)[labels]


def demap_symbols(x_hat: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Hard nearest-point demapping back to bits."""
    x_hat = np.asarray(x_hat)
    pts = np.asarray(constellation.points)
    labels = np.argmin(np.abs(x_hat[:, None] - pts[None, :]), axis=1)
    bps = constellation.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).reshape(-1)


def add_awgn(r: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise at variance 10^(-snr/10) per sample.

    snr_db = inf means no noise (signal power is unit by the unitary chain).
    """
    r = np.asarray(r)
    if np.isinf(snr_db):
        return r.copy()
    sigma2 = 10.0 ** (-snr_db / 10.0)
    w = rng.standard_normal((r.size, 2)) @ np.array([1.0, 1.0j]) * np.sqrt(sigma2 / 2.0)
    return r + w.reshape(r.shape)


def equalize_zf(G: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Zero-forcing: x_hat = G^{-1} y. Refuses ill-conditioned channels."""
    G = np.asarray(G)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularChannelError(f"channel condition number {cond:.3e} exceeds 1e12")
    return np.linalg.solve(G, y)


def equalize_lmmse(G: np.ndarray, y: np.ndarray, noise_var: float) -> np.ndarray:
    """LMMSE: x_hat = G^H (G G^H + sigma^2 I)^{-1} y."""
    G = np.asarray(G)
    A = G @ G.conj().T + noise_var * np.eye(G.shape[0])
    return G.conj().T @ np.linalg.solve(A, y)


@dataclass(frozen=True)
class LinkResult:
    snr_db: float
    frames: int
    bit_errors: int
    ber: float
    papr_db_p99: float


def _run_frame(
    spec: WaveformSpec,
    chan_config: ChannelConfig,
    constellation: Constellation,
    snr_db: float,
    detector: str,
    doppler_mode: str,
    seed: int,
    frame_idx: int,
) -> tuple[int, float]:
    """One Monte Carlo frame; returns (bit errors, papr_db)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(frame_idx,)))
    chan = sample_paths(chan_config, doppler_mode, rng)
    bits = rng.integers(0, 2, size=spec.n * constellation.bits_per_symbol)
    x = map_bits(bits, constellation)
    s = modulate(spec, x)
    s_cp = prepend_cp(spec, s)
    r = time_domain_apply(s_cp, chan)
    r = add_awgn(r, snr_db, rng)
    y = demodulate(spec, r)
    G = effective_channel(spec, chan)
    if detector == "zf":
        x_hat = equalize_zf(G, y)
    elif detector == "lmmse":
        noise_var = 0.0 if np.isinf(snr_db) else 10.0 ** (-snr_db / 10.0)
        x_hat = equalize_lmmse(G, y, noise_var)
    else:
        raise ValueError(f"unknown detector {detector!r}")
    bits_hat = demap_symbols(x_hat, constellation)
    return int(np.sum(bits_hat != bits)), measure_papr(s_cp)


def run_ber_point(
    spec: WaveformSpec,
    chan_config: ChannelConfig,
    constellation: Constellation,
    snr_db: float,
    frames: int,
    detector: str = "lmmse",
    seed: int = 0,
    doppler_mode: str = "fractional",
    threads: int = 1,
) -> LinkResult:
    """Monte Carlo BER at one SNR point.

    Each frame draws a fresh channel and bit block from an RNG substream
    derived from (seed, frame index), so the result is independent of the
    thread count and reproducible to the byte.
    """
    if frames < 1:
        raise ValueError("frames must be >= 1")
    args = [
        (spec, chan_config, constellation, snr_db, detector, doppler_mode, seed, i)
        for i in range(frames)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: _run_frame(*a), args))
    else:
        results = [_run_frame(*a) for a in args]
    errors = sum(e for e, _ in results)
    paprs = [p for _, p in results]
    total_bits = frames * spec.n * constellation.bits_per_symbol
    return LinkResult(
        snr_db=snr_db,
        frames=frames,
        bit_errors=errors,
        ber=errors / total_bits,
        papr_db_p99=float(np.percentile(paprs, 99)),
    )
