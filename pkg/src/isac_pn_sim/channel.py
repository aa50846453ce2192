"""Multipath / Doppler / phase-noise channel for serialized OFDM frames.

Each output sample s (global index, CP included) is the sum over paths of

    gain * x[s - delay] * exp(j psi) * exp(j 2 pi f_D s / B)
         * g(theta_tx[s - delay] - theta_rx[s])

with g either the exact exponential (default) or the small-angle form
1 + j(.). Delays act linearly on the serialized frame with zero
pre-history; a delay within the CP leaves symbols ISI-free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .ofdm import TimeFrame
from .pn_model import PnPsdModel
from .pn_synth import PnRealization, delayed_view, synthesize

__all__ = ["Path", "PathSet", "PnMode", "PnPair", "derive_psi", "draw_pn",
           "apply_channel"]


@dataclass(frozen=True)
class Path:
    gain: float | complex
    delay_samples: int
    doppler_hz: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        if self.delay_samples < 0:
            raise ValueError("delay_samples must be nonnegative")


@dataclass(frozen=True)
class PathSet:
    paths: tuple
    architecture: str = "bistatic"  # monostatic | bistatic

    def __post_init__(self):
        if not self.paths:
            raise ValueError("need at least one path")
        if self.architecture not in ("monostatic", "bistatic"):
            raise ValueError(f"unknown architecture {self.architecture!r}")

    @property
    def max_delay(self) -> int:
        return max(p.delay_samples for p in self.paths)


@dataclass(frozen=True)
class PnMode:
    """Oscillator arrangement: shared LO (monostatic), independent LOs
    (bistatic) or no phase noise."""

    kind: str
    model_tx: PnPsdModel | None = None
    model_rx: PnPsdModel | None = None

    @classmethod
    def none(cls) -> "PnMode":
        return cls("none")

    @classmethod
    def monostatic(cls, model: PnPsdModel) -> "PnMode":
        return cls("monostatic", model, model)

    @classmethod
    def bistatic(cls, model_tx: PnPsdModel, model_rx: PnPsdModel) -> "PnMode":
        return cls("bistatic", model_tx, model_rx)


@dataclass(frozen=True)
class PnPair:
    """Tx/Rx phase realizations backing one channel application.

    Monostatic mode shares a single realization between the roles; the
    delayed transmit read then cancels exactly against the receive read
    at zero delay.
    """

    tx: PnRealization | None
    rx: PnRealization | None

    def difference(self, delay: int, length: int) -> np.ndarray | None:
        if self.tx is None:
            return None
        return (delayed_view(self.tx, delay, 0, length)
                - delayed_view(self.rx, 0, 0, length))


def derive_psi(psi_tx: float, psi_rx: float, fc_hz: float, tau_s: float) -> float:
    """Aggregate path phase psi_tx - psi_rx - 2 pi fc tau, wrapped to (-pi, pi]."""
    raw = psi_tx - psi_rx - 2.0 * np.pi * fc_hz * tau_s
    wrapped = np.remainder(raw + np.pi, 2.0 * np.pi) - np.pi
    if wrapped == -np.pi:
        wrapped = np.pi
    return float(wrapped)


def draw_pn(mode: PnMode, n_samples: int, max_delay: int, sample_rate: float,
            seed: int) -> PnPair:
    """Synthesize the realizations one frame needs (pre-extended by max_delay)."""
    if mode.kind == "none":
        return PnPair(None, None)
    if mode.kind == "monostatic":
        shared = synthesize(mode.model_tx, sample_rate, n_samples, seed,
                            pad=max_delay)
        return PnPair(shared, shared)
    seeds = np.random.SeedSequence(seed).spawn(2)
    tx = synthesize(mode.model_tx, sample_rate, n_samples,
                    seeds[0].generate_state(1)[0], pad=max_delay)
    rx = synthesize(mode.model_rx, sample_rate, n_samples,
                    seeds[1].generate_state(1)[0], pad=0)
    return PnPair(tx, rx)


def _shift(x: np.ndarray, delay: int) -> np.ndarray:
    if delay == 0:
        return x
    out = np.zeros_like(x)
    out[delay:] = x[:-delay]
    return out


def apply_channel(t: TimeFrame, paths: PathSet, pn: PnMode | PnPair | None = None,
                  seed: int | None = None, small_angle: bool = False) -> TimeFrame:
    """Propagate a serialized frame through the path set under the PN mode.

    ``pn`` may be a PnMode (realizations drawn here from ``seed``), an
    already drawn PnPair, or None.
    """
    cfg = t.config
    n = len(t.samples)
    if isinstance(pn, PnMode):
        if pn.kind != "none" and seed is None:
            raise ValueError("seed required to draw phase-noise realizations")
        pn = draw_pn(pn, n, paths.max_delay, cfg.sample_rate_hz, seed or 0)
    if pn is None:
        pn = PnPair(None, None)

    for p in paths.paths:
        if p.delay_samples > cfg.cp_len:
            warnings.warn(
                f"path delay {p.delay_samples} exceeds CP length {cfg.cp_len}; "
                "inter-symbol interference will occur", stacklevel=2)
        if abs(p.doppler_hz) > cfg.bandwidth_hz / 2:
            raise ValueError("Doppler shift beyond +-B/2")
        if pn.tx is not None and p.delay_samples > pn.tx.pad:
            raise IndexError("path delay exceeds the phase-noise pre-extension")

    s = np.arange(n)
    out = np.zeros(n, dtype=complex)
    for p in paths.paths:
        term = _shift(t.samples, p.delay_samples) * (
            complex(p.gain) * np.exp(1j * p.psi))
        if p.doppler_hz != 0.0:
            term = term * np.exp(2j * np.pi * p.doppler_hz * s / cfg.sample_rate_hz)
        dtheta = pn.difference(p.delay_samples, n)
        if dtheta is not None:
            term = term * ((1.0 + 1j * dtheta) if small_angle else np.exp(1j * dtheta))
        out += term
    return TimeFrame(out, cfg)
