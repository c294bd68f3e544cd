"""Doubly-dispersive channel model.

A channel realization is a finite set of propagation paths, each with a
complex gain, an integer normalized delay (samples) and a real normalized
digital Doppler f = N*nu/f_s. The sample-level time-domain application is
the ground-truth oracle; the matrix form must reproduce it exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import cp_phase_entries, doppler_phases

_LIGHT_SPEED = 2.99792458e8  # m/s, exact


@dataclass(frozen=True)
class PathParams:
    """One propagation path."""

    gain: complex
    delay_norm: int        # ell, integer delay in samples
    doppler_norm: float    # f = N*nu/f_s, fractional allowed
    aod: float | None = None  # departure angle [rad], only used by the MIMO model
    aoa: float | None = None  # arrival angle [rad]


@dataclass(frozen=True)
class ChannelConfig:
    """System constants shared by every realization of a scenario."""

    N: int            # block size in samples
    f_s: float        # sampling rate [Hz]
    f_c: float        # carrier frequency [Hz]
    ell_max: int      # largest integer delay
    f_max: int        # largest integer part of the normalized Doppler
    P: int            # number of paths
    cp_len: int       # cyclic prefix length [samples]

    def __post_init__(self):
        if self.cp_len < self.ell_max:
            raise ValueError(f"cp_len must be >= ell_max, got {self.cp_len} < {self.ell_max}")
        if not 0 <= self.ell_max < self.N:
            raise ValueError(f"ell_max must satisfy 0 <= ell_max < N, got {self.ell_max}")
        if not 0 <= self.f_max <= self.N // 2:
            raise ValueError(f"f_max must satisfy 0 <= f_max <= N/2, got {self.f_max}")
        # underspread sanity: tau_max*nu_max = ell_max*f_max/N should be small
        if self.ell_max * self.f_max / self.N >= 0.5:
            warnings.warn(
                f"channel is not underspread: ell_max*f_max/N = "
                f"{self.ell_max * self.f_max / self.N:.2f}",
                stacklevel=2,
            )


@dataclass(frozen=True)
class ChannelRealization:
    """A drawn set of paths plus the owning config."""

    config: ChannelConfig
    paths: tuple[PathParams, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) != self.config.P:
            raise ValueError(
                f"expected {self.config.P} paths, got {len(self.paths)}"
            )
        for p in self.paths:
            if not 0 <= p.delay_norm <= self.config.ell_max:
                raise ValueError(f"path delay {p.delay_norm} outside 0..{self.config.ell_max}")
            # f_max bounds the integer part; fractional draws reach f_max + 0.5
            if abs(p.doppler_norm) > self.config.f_max + 0.5:
                raise ValueError(
                    f"path Doppler {p.doppler_norm} outside +-{self.config.f_max + 0.5}"
                )


def sample_paths(config: ChannelConfig, doppler_mode: str, rng: np.random.Generator) -> ChannelRealization:
    """Draw a random channel realization.

    Gains are i.i.d. circularly-symmetric complex Gaussian with variance 1/P
    (unit mean total power). Delays are uniform over {0..ell_max}, without
    replacement while P allows it. Dopplers are uniform over the integers
    {-f_max..f_max} in "integer" mode, or uniform reals over
    [-f_max-0.5, f_max+0.5) in "fractional" mode.
    """
    if config.P < 1:
        raise ValueError("cannot sample an empty channel (P must be >= 1)")
    if doppler_mode not in ("integer", "fractional"):
        raise ValueError(f"unknown doppler_mode {doppler_mode!r}")
    P = config.P
    g = rng.standard_normal((P, 2)) @ np.array([1.0, 1.0j]) * np.sqrt(1.0 / (2 * P))
    replace = P > config.ell_max + 1
    delays = rng.choice(config.ell_max + 1, size=P, replace=replace)
    if doppler_mode == "integer":
        dopplers = rng.integers(-config.f_max, config.f_max + 1, size=P).astype(float)
    else:
        dopplers = rng.uniform(-config.f_max - 0.5, config.f_max + 0.5, size=P)
    paths = tuple(
        PathParams(gain=complex(g[p]), delay_norm=int(delays[p]), doppler_norm=float(dopplers[p]))
        for p in range(P)
    )
    return ChannelRealization(config=config, paths=paths)


def time_domain_apply(s_cp: np.ndarray, chan: ChannelRealization) -> np.ndarray:
    """Apply the channel at sample level. This is the ground-truth oracle.

    Parameters
    ----------
    s_cp : array, length N + cp_len
        CP-prepended transmit sequence; index 0 is the first prefix sample.
    chan : ChannelRealization

    Returns
    -------
    array, length N
        r[n] = sum_p h_p * e^{j2pi f_p n / N} * s_cp[n - ell_p], with the
        prefix supplying the samples at n - ell_p < 0. Noiseless.
    """
    N = chan.config.N
    s_cp = np.asarray(s_cp)
    cp_len = s_cp.shape[0] - N
    if cp_len < 0:
        raise ValueError(f"input length {s_cp.shape[0]} shorter than block size {N}")
    n = np.arange(N)
    r = np.zeros(N, dtype=complex)
    for p in chan.paths:
        if p.delay_norm > cp_len:
            raise ValueError(
                f"path delay {p.delay_norm} exceeds prefix length {cp_len}"
            )
        r += p.gain * np.exp(2j * np.pi * p.doppler_norm * n / N) * s_cp[cp_len + n - p.delay_norm]
    return r


def single_path_matrix(N: int, ell: int, f: float, phase) -> np.ndarray:
    """N x N operator of one unit-gain path: Phi(ell) . D(f) . Pi^ell.

    All three factors are diagonal or a permutation, so the result has one
    populated cyclic diagonal: entry (n, (n - ell) mod N) holds
    phi[n] * e^{j2pi f n/N}.
    """
    vals = cp_phase_entries(N, ell, phase) * doppler_phases(N, f)
    H = np.zeros((N, N), dtype=complex)
    rows = np.arange(N)
    H[rows, (rows - ell) % N] = vals
    return H


def channel_matrix(chan: ChannelRealization, phase) -> np.ndarray:
    """Matrix form H = sum_p h_p . Phi_p . D(f_p) . Pi^{ell_p}.

    `phase` is the CP phase rule in force (ZeroPhase, or AfdmChirpPhase for
    the chirp-periodic prefix); it must match what prepend_cp used for the
    time-domain oracle to agree.
    """
    N = chan.config.N
    H = np.zeros((N, N), dtype=complex)
    for p in chan.paths:
        H += p.gain * single_path_matrix(N, p.delay_norm, p.doppler_norm, phase)
    return H


def tvtf(chan: ChannelRealization, t, f):
    """Time-variant transfer function sum_p h_p e^{j2pi nu_p t} e^{-j2pi tau_p f}.

    t is in seconds, f in Hz; both broadcast, so grids come out directly.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    out = np.zeros(np.broadcast(t, f).shape, dtype=complex)
    cfg = chan.config
    for p in chan.paths:
        nu = p.doppler_norm * cfg.f_s / cfg.N
        tau = p.delay_norm / cfg.f_s
        out += p.gain * np.exp(2j * np.pi * nu * t) * np.exp(-2j * np.pi * tau * f)
    if out.ndim == 0:
        return complex(out)
    return out


def dvirf_points(chan: ChannelRealization) -> list[tuple[float, float, complex]]:
    """Delay-Doppler impulse representation: one (tau_s, nu_hz, gain) per path."""
    cfg = chan.config
    return [
        (p.delay_norm / cfg.f_s, p.doppler_norm * cfg.f_s / cfg.N, p.gain)
        for p in chan.paths
    ]


def realization_from_points(config: ChannelConfig, points) -> ChannelRealization:
    """Rebuild a realization from (tau_s, nu_hz, gain) triples.

    Delays must land on integer sample positions (tau * f_s integral).
    """
    paths = []
    for tau, nu, gain in points:
        ell = tau * config.f_s
        if abs(ell - round(ell)) > 1e-9:
            raise ValueError(f"delay {tau} s is not an integer number of samples")
        paths.append(
            PathParams(gain=gain, delay_norm=int(round(ell)), doppler_norm=nu * config.N / config.f_s)
        )
    return ChannelRealization(config=config, paths=tuple(paths))


def mimo_channel(
    base: ChannelRealization,
    gains: np.ndarray,
    tx_gain=None,
    rx_gain=None,
    phase=None,
) -> np.ndarray:
    """Per-antenna-pair channel matrices with shared path geometry.

    Parameters
    ----------
    base : ChannelRealization
        Supplies the shared (ell_p, f_p) and any angles; its own gains are
        ignored in favour of `gains`.
    gains : array, shape (P, Nt, Nr)
        Complex small-scale gain of path p between transmit antenna n_t and
        receive antenna n_r.
    tx_gain, rx_gain : callable or None
        Beam gain as a function of angle [rad]. None means constant 1; a
        callable requires the matching angle on every path.
    phase : CP phase rule, ZeroPhase if None.

    Returns
    -------
    array, shape (Nt, Nr, N, N)
    """
    from .core import ZeroPhase

    if phase is None:
        phase = ZeroPhase()
    gains = np.asarray(gains)
    P, Nt, Nr = gains.shape
    if P != len(base.paths):
        raise ValueError(f"gain tensor has {P} paths, realization has {len(base.paths)}")
    N = base.config.N
    out = np.zeros((Nt, Nr, N, N), dtype=complex)
    for p_idx, p in enumerate(base.paths):
        if tx_gain is not None and p.aod is None:
            raise ValueError(f"path {p_idx} lacks a departure angle for the tx beam gain")
        if rx_gain is not None and p.aoa is None:
            raise ValueError(f"path {p_idx} lacks an arrival angle for the rx beam gain")
        beam = 1.0
        if tx_gain is not None:
            beam *= float(tx_gain(p.aod))
        if rx_gain is not None:
            beam *= float(rx_gain(p.aoa))
        op = single_path_matrix(N, p.delay_norm, p.doppler_norm, phase)
        out += beam * gains[p_idx, :, :, None, None] * op[None, None, :, :]
    return out
