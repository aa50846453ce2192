"""Phase-noise time-series synthesis and spectral verification.

Series are generated by frequency-domain shaping: a Hermitian-symmetric
complex Gaussian spectrum is scaled bin-by-bin to the model PSD and
inverse transformed to a real sequence. The DC bin is zeroed (phase
noise has no defined DC), so the lowest synthesized frequency is
sample_rate / n_total.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .pn_model import PnPsdModel, ScaledPsd

__all__ = ["PnRealization", "synthesize", "delayed_view", "estimate_psd_welch",
           "expected_variance", "save_realization", "load_realization"]


@dataclass(frozen=True)
class PnRealization:
    """Real phase series (rad) at a given rate.

    The array holds pad + n_samples values; the pad is a pre-history
    extension so that delayed reads theta[s - d] stay in range for
    d <= pad. Logical sample index s lives at array position pad + s.
    """

    samples: np.ndarray
    sample_rate: float
    seed: int
    model: PnPsdModel
    pad: int = 0

    def __post_init__(self):
        if self.samples.ndim != 1 or len(self.samples) <= self.pad:
            raise ValueError("empty realization")
        if self.sample_rate <= 0.0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite phase samples")

    @property
    def n_samples(self) -> int:
        return len(self.samples) - self.pad


def synthesize(model: PnPsdModel, sample_rate: float, n_samples: int, seed: int,
               pad: int = 0) -> PnRealization:
    """Draw one realization whose expected periodogram matches the model PSD."""
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    if sample_rate <= 0.0:
        raise ValueError("sample_rate must be positive")
    if pad < 0:
        raise ValueError("pad must be nonnegative")
    n_total = n_samples + pad
    rng = np.random.default_rng(seed)
    if isinstance(model, ScaledPsd) and model.gain == 0.0:
        # keep the RNG stream layout identical to the generic path
        rng.standard_normal((2, n_total // 2 + 1))
        return PnRealization(np.zeros(n_total), sample_rate, seed, model, pad)
    freqs = np.fft.rfftfreq(n_total, d=1.0 / sample_rate)
    g = rng.standard_normal((2, len(freqs)))
    amp = np.zeros(len(freqs))
    # E|A_i|^2 = S(f_i) * Fs * n_total makes Var(x) = sum_i 2 S_i df
    amp[1:] = np.sqrt(model.psd(freqs[1:]) * sample_rate * n_total)
    spec = amp * (g[0] + 1j * g[1]) / np.sqrt(2.0)
    spec[0] = 0.0
    if n_total % 2 == 0:
        spec[-1] = amp[-1] * g[0, -1]
    x = np.fft.irfft(spec, n=n_total)
    return PnRealization(x, sample_rate, seed, model, pad)


def expected_variance(model: PnPsdModel, sample_rate: float, n_total: int) -> float:
    """Variance (rad^2) a length-n_total realization carries in expectation.

    This is the model level band-limited to the synthesis grid
    [sample_rate/n_total, sample_rate/2]; with the DC bin zeroed it is
    the exact ensemble variance of ``synthesize`` output.
    """
    if isinstance(model, ScaledPsd) and model.gain == 0.0:
        return 0.0
    freqs = np.fft.rfftfreq(n_total, d=1.0 / sample_rate)[1:]
    return 2.0 * float(np.sum(model.psd(freqs))) * sample_rate / n_total


def delayed_view(r: PnRealization, delay_samples: int, offset: int = 0,
                 length: int | None = None) -> np.ndarray:
    """Slice theta[offset - delay : offset - delay + length] in logical indices."""
    if delay_samples < 0:
        raise ValueError("delay must be nonnegative")
    if length is None:
        length = r.n_samples - offset
    start = r.pad + offset - delay_samples
    stop = start + length
    if start < 0 or stop > len(r.samples) or length < 0:
        raise IndexError(
            f"delayed view [{start}, {stop}) outside realization of "
            f"length {len(r.samples)} (pad {r.pad})"
        )
    return r.samples[start:stop]


def estimate_psd_welch(r: PnRealization, segment_length: int,
                       overlap_fraction: float = 0.5):
    """Averaged-periodogram estimate of the double-sided PSD.

    Returns (frequency grid, estimate) over (0, sample_rate/2]; the
    one-sided scipy estimate is halved so values compare directly with
    the analytic double-sided models.
    """
    x = r.samples[r.pad:]
    if segment_length < 8 or segment_length > len(x):
        raise ValueError("segment_length must be in [8, series length]")
    noverlap = int(segment_length * overlap_fraction)
    if not 0 <= noverlap < segment_length:
        raise ValueError("overlap_fraction must be in [0, 1)")
    f, pxx = signal.welch(x, fs=r.sample_rate, window="hann",
                          nperseg=segment_length, noverlap=noverlap,
                          detrend=False)
    return f[1:], pxx[1:] / 2.0


def save_realization(r: PnRealization, path) -> None:
    """Flat little-endian float64 dump plus a sidecar text header."""
    path = Path(path)
    r.samples.astype("<f8").tofile(path)
    header = (
        f"sample_rate_hz: {r.sample_rate!r}\n"
        f"seed: {r.seed}\n"
        f"pad: {r.pad}\n"
        f"n_total: {len(r.samples)}\n"
        f"model: {r.model!r}\n"
    )
    path.with_suffix(path.suffix + ".hdr").write_text(header)


def load_realization(path, model: PnPsdModel | None = None) -> PnRealization:
    path = Path(path)
    meta = {}
    for line in path.with_suffix(path.suffix + ".hdr").read_text().splitlines():
        key, _, value = line.partition(":")
        meta[key.strip()] = value.strip()
    samples = np.fromfile(path, dtype="<f8")
    return PnRealization(samples, float(meta["sample_rate_hz"]),
                         int(meta["seed"]), model, int(meta["pad"]))
