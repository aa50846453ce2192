"""Common-phase-error analysis, estimation and correction.

The per-symbol mean of the combined tx/rx phase difference rotates every
subcarrier of that symbol by the same angle (the CPE); the remaining
leakage across bins is the ICI. Estimation uses either the full known
frame or the phase of a windowed channel-impulse-response peak.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .channel import Path, PnPair
from .ofdm import FreqFrame, WaveformConfig
from .radar import WindowSpec, make_window

__all__ = ["CpeEstimationError", "decompose", "per_symbol_mean_phase",
           "estimate_cpe", "correct_cpe", "estimate_cpe_from_reference",
           "dump_cpe_csv"]


class CpeEstimationError(ValueError):
    pass


def _payload_phase_matrix(pn_tx_slice: np.ndarray, pn_rx_slice: np.ndarray,
                          config: WaveformConfig) -> np.ndarray:
    """Combined phase difference at the payload samples, shape (N, M).

    Slices cover the serialized frame; the tx slice is the delayed read
    (as seen through the path), the rx slice the undelayed one.
    """
    m, cp = config.n_symbols, config.cp_len
    tx = pn_tx_slice.reshape(config.symbol_len, m, order="F")[cp:, :]
    rx = pn_rx_slice.reshape(config.symbol_len, m, order="F")[cp:, :]
    return tx - rx


def per_symbol_mean_phase(pn: PnPair, path: Path, config: WaveformConfig) -> np.ndarray:
    """True CPE series: mean combined phase over each symbol's N payload samples."""
    dtheta = pn.difference(path.delay_samples, config.frame_len)
    if dtheta is None:
        return np.zeros(config.n_symbols)
    mat = dtheta.reshape(config.symbol_len, config.n_symbols, order="F")
    return mat[config.cp_len:, :].mean(axis=0)


def decompose(pn_tx_slice: np.ndarray, pn_rx_slice: np.ndarray,
              ideal_frame: FreqFrame,
              config: WaveformConfig) -> tuple[FreqFrame, FreqFrame]:
    """Split the small-angle PN distortion of a single-path frame into its
    subcarrier-common rotation and the cross-bin leakage.

    ``ideal_frame`` is the PN-free received frame; the returned terms sum
    to the total small-angle distortion exactly.
    """
    n = config.n_subcarriers
    dtheta = _payload_phase_matrix(pn_tx_slice, pn_rx_slice, config)
    y = ideal_frame.grid
    phi = dtheta.mean(axis=0)  # per-symbol mean phase
    cpe = 1j * y * phi[None, :]
    # leakage kernel T_l = sum_n dtheta_n e^{+j 2 pi l n / N} = N * ifft(dtheta)
    kernel = n * np.fft.ifft(dtheta, axis=0)
    # total distortion: eta[k] = (j/N) sum_kappa y[kappa] T[(kappa - k) mod N]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n  # (kappa, k)
    total = np.empty_like(y)
    for m in range(config.n_symbols):
        total[:, m] = (1j / n) * (y[:, m] @ kernel[idx, m])
    ici = total - cpe
    return FreqFrame(cpe, config), FreqFrame(ici, config)


def estimate_cpe(received: FreqFrame, known: FreqFrame) -> np.ndarray:
    """Per-symbol phase estimate arg(sum_k Y_k X_k*), all subcarriers known."""
    if received.grid.shape != known.grid.shape:
        raise ValueError("frame dimensions differ")
    col_power = np.sum(np.abs(known.grid) ** 2, axis=0)
    if np.any(col_power == 0.0):
        raise CpeEstimationError("known frame has an all-zero symbol column")
    corr = np.sum(received.grid * np.conj(known.grid), axis=0)
    return np.angle(corr)


def correct_cpe(received: FreqFrame, cpe: np.ndarray) -> FreqFrame:
    if len(cpe) != received.config.n_symbols:
        raise ValueError("CPE series length differs from symbol count")
    return FreqFrame(received.grid * np.exp(-1j * cpe)[None, :], received.config)


def estimate_cpe_from_reference(received: FreqFrame, known: FreqFrame,
                                window: WindowSpec, ref_bin: int = 0,
                                dominance_db: float | None = 20.0) -> np.ndarray:
    """Per-symbol phase of the CIR peak at ``ref_bin``.

    The windowed per-symbol channel estimate Y/X is inverse transformed
    across subcarriers; the phase at the requested delay bin is read off
    (nearest bin, no interpolation). With ``dominance_db`` set, the
    reference peak must exceed every bin outside its immediate
    neighborhood by that margin.
    """
    if received.grid.shape != known.grid.shape:
        raise ValueError("frame dimensions differ")
    if np.any(known.grid == 0):
        raise ValueError("known frame must have no zero entries")
    cfg = received.config
    w = make_window(window, cfg.n_subcarriers)
    cir = np.fft.ifft(w[:, None] * received.grid / known.grid, axis=0)
    if dominance_db is not None:
        mags = np.abs(cir)
        guard = 3  # window mainlobe half-width, bins
        dist = np.abs((np.arange(cfg.n_subcarriers) - ref_bin + cfg.n_subcarriers // 2)
                      % cfg.n_subcarriers - cfg.n_subcarriers // 2)
        outside = dist > guard
        peak = mags[ref_bin, :]
        rest = mags[outside, :].max(axis=0)
        margin = 10.0 ** (dominance_db / 20.0)
        if np.any(peak < margin * rest):
            raise CpeEstimationError(
                f"reference peak not {dominance_db:.0f} dB above the next CIR peak")
    return np.angle(cir[ref_bin, :])


def dump_cpe_csv(series: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["symbol_index", "phase_rad"])
        for m, value in enumerate(series):
            writer.writerow([m, f"{value:.9g}"])
