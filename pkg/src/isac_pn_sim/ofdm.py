"""OFDM frame construction, modulation and communication metrics.

Frames use unitary DFT scaling in both directions, so the time-domain
payload energy of a symbol equals its frequency-domain energy and the
radar processing gain bookkeeping stays explicit. Subcarriers are stored
in natural FFT order along axis 0, symbols along axis 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["WaveformConfig", "FreqFrame", "TimeFrame", "alphabet",
           "random_frame", "modulate", "demodulate", "evm", "subcarrier_sir",
           "dump_constellation_csv", "MODULATIONS"]

MODULATIONS = ("qpsk", "qam16", "qam64", "qam256")
_ORDER = {"qpsk": 4, "qam16": 16, "qam64": 64, "qam256": 256}

EVM_FLOOR_DB = -250.0  # sentinel for distortion below numerical precision


@dataclass(frozen=True)
class WaveformConfig:
    fc_hz: float
    bandwidth_hz: float
    n_subcarriers: int
    cp_len: int
    n_symbols: int
    modulation: str = "qpsk"

    def __post_init__(self):
        if self.fc_hz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("carrier frequency and bandwidth must be positive")
        if self.n_subcarriers < 2 or self.n_symbols < 1:
            raise ValueError("need at least 2 subcarriers and 1 symbol")
        if not 0 <= self.cp_len <= self.n_subcarriers:
            raise ValueError("cp_len must be in [0, n_subcarriers]")
        if self.modulation not in _ORDER:
            raise ValueError(f"unknown modulation {self.modulation!r}")

    @property
    def subcarrier_spacing_hz(self) -> float:
        return self.bandwidth_hz / self.n_subcarriers

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def frame_len(self) -> int:
        return self.n_symbols * self.symbol_len

    @property
    def sample_rate_hz(self) -> float:
        # baseband simulated directly at rate B
        return self.bandwidth_hz


@dataclass(frozen=True)
class FreqFrame:
    grid: np.ndarray  # (n_subcarriers, n_symbols) complex
    config: WaveformConfig

    def __post_init__(self):
        expected = (self.config.n_subcarriers, self.config.n_symbols)
        if self.grid.shape != expected:
            raise ValueError(f"grid shape {self.grid.shape} != {expected}")


@dataclass(frozen=True)
class TimeFrame:
    samples: np.ndarray  # serialized CP+payload samples at rate B
    config: WaveformConfig

    def __post_init__(self):
        if self.samples.shape != (self.config.frame_len,):
            raise ValueError(
                f"expected {self.config.frame_len} samples, got {self.samples.shape}"
            )


def _gray(k: np.ndarray) -> np.ndarray:
    return k ^ (k >> 1)


@lru_cache(maxsize=None)
def alphabet(modulation: str) -> np.ndarray:
    """Gray-coded square-QAM constellation, unit average power, indexed by label."""
    order = _ORDER[modulation]
    bits_per_axis = order.bit_length() // 2  # order = 4^bits_per_axis
    n_levels = 1 << bits_per_axis
    levels = np.zeros(n_levels)
    k = np.arange(n_levels)
    levels[_gray(k)] = 2 * k - (n_levels - 1)  # label -> amplitude, Gray along axis
    i_label, q_label = np.divmod(np.arange(order), n_levels)
    points = levels[i_label] + 1j * levels[q_label]
    norm = np.sqrt(2.0 * (n_levels**2 - 1) / 3.0)
    return (points / norm).astype(complex)


def random_frame(config: WaveformConfig, seed: int) -> FreqFrame:
    """Uniform i.i.d. draws from the configured alphabet, deterministic per seed."""
    rng = np.random.default_rng(seed)
    points = alphabet(config.modulation)
    labels = rng.integers(0, len(points), size=(config.n_subcarriers, config.n_symbols))
    return FreqFrame(points[labels], config)


def modulate(frame: FreqFrame) -> TimeFrame:
    """Per-symbol unitary IDFT, CP prepended, symbols concatenated."""
    cfg = frame.config
    payload = np.fft.ifft(frame.grid, axis=0, norm="ortho")
    if cfg.cp_len:
        sym = np.concatenate([payload[-cfg.cp_len:, :], payload], axis=0)
    else:
        sym = payload
    return TimeFrame(sym.reshape(-1, order="F"), cfg)


def demodulate(t: TimeFrame) -> FreqFrame:
    """CP stripped per symbol, unitary forward DFT."""
    cfg = t.config
    sym = t.samples.reshape(cfg.symbol_len, cfg.n_symbols, order="F")
    payload = sym[cfg.cp_len:, :]
    return FreqFrame(np.fft.fft(payload, axis=0, norm="ortho"), cfg)


def _ls_scalar(received: np.ndarray, reference: np.ndarray) -> complex:
    denom = np.vdot(received, received).real
    if denom == 0.0:
        return 1.0
    return np.vdot(received, reference) / denom


def evm(received: FreqFrame, reference: FreqFrame, equalize: bool = True) -> float:
    """RMS error vector magnitude in dB.

    A single least-squares complex scalar per frame removes the overall
    path gain/rotation before the error is measured; per-symbol
    equalization is deliberately not applied, so common phase error
    stays visible.
    """
    if received.grid.shape != reference.grid.shape:
        raise ValueError("frame dimensions differ")
    ref_power = np.mean(np.abs(reference.grid) ** 2)
    if ref_power == 0.0:
        raise ValueError("reference frame has zero power")
    y = received.grid
    if equalize:
        y = _ls_scalar(y, reference.grid) * y
    err_power = np.mean(np.abs(y - reference.grid) ** 2) / ref_power
    if err_power < 1e-25:
        return EVM_FLOOR_DB
    return float(10.0 * np.log10(err_power))


def subcarrier_sir(received: FreqFrame, reference: FreqFrame) -> float:
    """Signal-to-interference ratio in dB; exactly -evm under the shared equalizer."""
    return -evm(received, reference)


def dump_constellation_csv(frame: FreqFrame, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "q", "symbol_index", "subcarrier_index"])
        n, m = frame.grid.shape
        for sym in range(m):
            col = frame.grid[:, sym]
            for k in range(n):
                writer.writerow([f"{col[k].real:.9g}", f"{col[k].imag:.9g}", sym, k])
