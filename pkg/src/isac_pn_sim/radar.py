"""Range-Doppler image formation with physical axis scaling.

The per-subcarrier channel estimate Y/X is windowed along both axes,
inverse transformed across subcarriers (range) and forward transformed
across symbols (Doppler). Scaling is chosen so a unit-gain static target
at delay bin 0 under rectangular windows peaks at magnitude 1; peak
power therefore carries the full N*M coherent processing gain relative
to the per-sample level.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0
from scipy.signal.windows import chebwin

from .ofdm import FreqFrame, WaveformConfig

__all__ = ["WindowSpec", "RadarImage", "make_window", "form_image", "axes",
           "range_bin_width", "dump_image_csv", "save_image_png"]


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "rectangular"  # rectangular | chebyshev
    attenuation_db: float = 100.0

    def __post_init__(self):
        if self.kind not in ("rectangular", "chebyshev"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.attenuation_db <= 0.0:
            raise ValueError("sidelobe attenuation must be positive")


RECTANGULAR = WindowSpec("rectangular")
CHEB100 = WindowSpec("chebyshev", 100.0)


def make_window(spec: WindowSpec, length: int) -> np.ndarray:
    """Weight vector normalized to unit coherent gain (mean weight = 1)."""
    if length < 2:
        raise ValueError("window length must be >= 2")
    if spec.kind == "rectangular":
        return np.ones(length)
    w = chebwin(length, at=spec.attenuation_db)
    return w / w.mean()


def range_bin_width(config: WaveformConfig, architecture: str) -> float:
    if architecture == "monostatic":
        return C0 / (2.0 * config.bandwidth_hz)
    if architecture == "bistatic":
        return C0 / config.bandwidth_hz
    raise ValueError(f"unknown architecture {architecture!r}")


def axes(config: WaveformConfig, architecture: str):
    """(range axis m, centered Doppler axis Hz, max unambiguous range m)."""
    dr = range_bin_width(config, architecture)
    range_axis = np.arange(config.n_subcarriers) * dr
    doppler_axis = np.fft.fftshift(np.fft.fftfreq(
        config.n_symbols, d=config.symbol_len / config.sample_rate_hz))
    return range_axis, doppler_axis, config.n_subcarriers * dr


@dataclass(frozen=True)
class RadarImage:
    grid: np.ndarray  # (range bin, Doppler bin), Doppler axis centered
    range_axis: np.ndarray
    doppler_axis: np.ndarray
    win_range: WindowSpec
    win_doppler: WindowSpec
    architecture: str
    config: WaveformConfig

    @property
    def n_range(self) -> int:
        return self.grid.shape[0]

    @property
    def n_doppler(self) -> int:
        return self.grid.shape[1]

    def doppler_bin(self, doppler_hz: float) -> int:
        """Centered-axis column index nearest the given Doppler shift
        (aliases beyond +-B/(2(N+N_CP)) fold back)."""
        rate = self.config.sample_rate_hz / self.config.symbol_len
        m = self.config.n_symbols
        k = int(np.round(doppler_hz / rate * m)) % m
        return (k + m // 2) % m

    def target_bin(self, delay_samples: int, doppler_hz: float = 0.0):
        return delay_samples % self.n_range, self.doppler_bin(doppler_hz)


def form_image(received: FreqFrame, known: FreqFrame,
               win_range: WindowSpec = RECTANGULAR,
               win_doppler: WindowSpec = RECTANGULAR,
               architecture: str = "bistatic") -> RadarImage:
    if received.grid.shape != known.grid.shape:
        raise ValueError("frame dimensions differ")
    if np.any(known.grid == 0):
        raise ValueError("known frame must have no zero entries")
    cfg = received.config
    d = received.grid / known.grid
    wr = make_window(win_range, cfg.n_subcarriers)
    wd = make_window(win_doppler, cfg.n_symbols)
    d = d * wr[:, None] * wd[None, :]
    profiles = np.fft.ifft(d, axis=0, norm="ortho")      # range
    grid = np.fft.fft(profiles, axis=1, norm="ortho")    # Doppler
    grid = np.fft.fftshift(grid, axes=1) / np.sqrt(cfg.n_subcarriers * cfg.n_symbols)
    range_axis, doppler_axis, _ = axes(cfg, architecture)
    return RadarImage(grid, range_axis, doppler_axis, win_range, win_doppler,
                      architecture, cfg)


def dump_image_csv(image: RadarImage, path, floor_db: float = -200.0) -> None:
    mag = np.abs(image.grid)
    mag_db = 20.0 * np.log10(np.maximum(mag, 10.0 ** (floor_db / 20.0)))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["range_m", "doppler_hz", "magnitude_db"])
        for i, r in enumerate(image.range_axis):
            for j, fd in enumerate(image.doppler_axis):
                writer.writerow([f"{r:.6g}", f"{fd:.6g}", f"{mag_db[i, j]:.3f}"])


def save_image_png(image: RadarImage, path, dynamic_range_db: float = 60.0,
                   normalize: bool = True) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    mag = np.abs(image.grid)
    ref = mag.max() if normalize and mag.max() > 0 else 1.0
    mag_db = 20.0 * np.log10(np.maximum(mag / ref, 1e-30))
    fig, ax = plt.subplots(figsize=(6, 4))
    extent = [image.doppler_axis[0], image.doppler_axis[-1],
              image.range_axis[0], image.range_axis[-1]]
    im = ax.imshow(mag_db, origin="lower", aspect="auto", extent=extent,
                   vmin=-dynamic_range_db, vmax=0.0, cmap="viridis")
    ax.set_xlabel("Doppler shift (Hz)")
    ax.set_ylabel("Range (m)")
    fig.colorbar(im, ax=ax, label="Normalized magnitude (dB)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
