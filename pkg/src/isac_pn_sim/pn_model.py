"""Oscillator phase-noise PSD models.

A model maps frequency offset (Hz) to a double-sided PSD in rad^2/Hz.
Three variants are supported: a PLL-shaped analytic profile, a generic
multi pole/zero profile (used for the shipped gNB/UE datasets), and a
linear power scaling wrapper. Integrated levels are reported in dBc,
i.e. 10*log10 of phase variance in rad^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PllPsdParams",
    "PoleZeroPsdParams",
    "PnPsdModel",
    "PllPsd",
    "PoleZeroPsd",
    "ScaledPsd",
    "eval_psd",
    "integrate_psd",
    "combined_level",
    "db",
    "from_db",
    "psd_model_from_dict",
]

# default integration limits; the flicker term diverges at DC so a low
# cutoff is required
F_MIN_DEFAULT = 1.0
POINTS_PER_DECADE = 256


def db(x):
    """Linear power (rad^2) to dB."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def from_db(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


@dataclass(frozen=True)
class PllPsdParams:
    """PLL-based LO profile: -10 dB/dec flicker up to the corner, flat
    in-band level up to the loop bandwidth, -20 dB/dec beyond, plus a
    white floor. Levels are linear (rad^2/Hz)."""

    level_inband: float
    level_floor: float
    f_corner_hz: float
    loop_bw_hz: float

    def __post_init__(self):
        for name in ("level_inband", "level_floor", "f_corner_hz", "loop_bw_hz"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.level_floor < self.level_inband:
            raise ValueError("level_floor must be below level_inband")


@dataclass(frozen=True)
class PoleZeroPsdParams:
    """Multi pole/zero profile: psd0 * prod(1+(f/fz)^az) / prod(1+(f/fp)^ap)."""

    psd0: float
    zeros: tuple = field(default_factory=tuple)  # (frequency_hz, exponent)
    poles: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.psd0 <= 0.0:
            raise ValueError("psd0 must be strictly positive")
        if not self.zeros or not self.poles:
            raise ValueError("pole/zero lists must be nonempty")
        for f, _ in tuple(self.zeros) + tuple(self.poles):
            if f <= 0.0:
                raise ValueError("pole/zero frequencies must be strictly positive")


class PnPsdModel:
    """Base class; subclasses implement psd(f) for f > 0."""

    def psd(self, f):
        raise NotImplementedError

    def scaled(self, gain_db: float) -> "ScaledPsd":
        return ScaledPsd(self, from_db(gain_db))


@dataclass(frozen=True)
class PllPsd(PnPsdModel):
    params: PllPsdParams

    def psd(self, f):
        p = self.params
        f = np.asarray(f, dtype=float)
        lorentz = p.loop_bw_hz**2 * p.level_inband / (p.loop_bw_hz**2 + f**2)
        return lorentz * (1.0 + p.f_corner_hz / f) + p.level_floor


@dataclass(frozen=True)
class PoleZeroPsd(PnPsdModel):
    params: PoleZeroPsdParams

    def psd(self, f):
        f = np.asarray(f, dtype=float)
        num = np.ones_like(f)
        for fz, az in self.params.zeros:
            num = num * (1.0 + (f / fz) ** az)
        den = np.ones_like(f)
        for fp, ap in self.params.poles:
            den = den * (1.0 + (f / fp) ** ap)
        return self.params.psd0 * num / den


@dataclass(frozen=True)
class ScaledPsd(PnPsdModel):
    inner: PnPsdModel
    gain: float  # linear power factor, >= 0

    def __post_init__(self):
        if self.gain < 0.0:
            raise ValueError("scaling gain must be >= 0")

    def psd(self, f):
        return self.gain * self.inner.psd(f)


def eval_psd(model: PnPsdModel, f):
    """Double-sided PSD value (rad^2/Hz) at frequency offset f > 0."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0.0):
        raise ValueError("frequency offset must be strictly positive")
    return model.psd(f)


def _log_grid(f_min: float, f_max: float) -> np.ndarray:
    n = max(int(np.ceil(np.log10(f_max / f_min) * POINTS_PER_DECADE)), 8)
    return np.logspace(np.log10(f_min), np.log10(f_max), n)


def integrate_psd(model: PnPsdModel, f_max: float, f_min: float = F_MIN_DEFAULT) -> float:
    """Integrated double-sided level 2*int_{f_min}^{f_max} S(f) df in rad^2."""
    if f_max <= f_min:
        raise ValueError("f_max must exceed f_min")
    if isinstance(model, ScaledPsd) and model.gain == 0.0:
        return 0.0
    f = _log_grid(f_min, f_max)
    return 2.0 * float(np.trapezoid(model.psd(f), f))


def _same_model(a: PnPsdModel, b: PnPsdModel) -> bool:
    return a == b


def combined_level(
    model_tx: PnPsdModel,
    model_rx: PnPsdModel,
    f_max: float,
    tau: float | None = None,
    f_min: float = F_MIN_DEFAULT,
) -> float:
    """Combined transmit+receive PN level in rad^2.

    With independent oscillators (tau is None) the two integrated levels
    simply add. With a shared oscillator read at a round-trip delay tau,
    the variance of theta(t-tau)-theta(t) is 2*int S(f)*2*(1-cos(2 pi f tau)) df,
    which vanishes at tau=0 and doubles the single-oscillator level as
    the delay exceeds the coherence time.
    """
    if tau is None:
        return integrate_psd(model_tx, f_max, f_min) + integrate_psd(model_rx, f_max, f_min)
    if tau < 0.0:
        raise ValueError("delay must be nonnegative")
    if not _same_model(model_tx, model_rx):
        raise ValueError("shared-oscillator mode requires identical tx/rx models")
    if tau == 0.0:
        return 0.0
    if isinstance(model_tx, ScaledPsd) and model_tx.gain == 0.0:
        return 0.0
    f = _log_grid(f_min, f_max)
    # the decorrelation factor oscillates with period 1/tau; refine the grid
    # so plain trapezoidal quadrature does not alias it
    step = 1.0 / (32.0 * tau)
    if step < f_max - f_min:
        f = np.union1d(f, np.arange(f_min, f_max, step))
        f = np.append(f, f_max)
    weight = 2.0 * (1.0 - np.cos(2.0 * np.pi * f * tau))
    return 2.0 * float(np.trapezoid(model_tx.psd(f) * weight, f))


def psd_model_from_dict(spec: dict) -> PnPsdModel:
    """Build a model from a configuration mapping.

    Keys: variant (pll | pole_zero | scaled); PLL uses l0_dbchz,
    l_floor_dbchz, f_corner_hz, b_pll_hz; pole_zero uses psd0_dbchz and
    zeros/poles as [frequency_hz, exponent] pairs; scaled wraps an inner
    model spec with gamma_db.
    """
    variant = spec["variant"]
    if variant == "pll":
        params = PllPsdParams(
            level_inband=float(from_db(spec["l0_dbchz"])),
            level_floor=float(from_db(spec["l_floor_dbchz"])),
            f_corner_hz=float(spec["f_corner_hz"]),
            loop_bw_hz=float(spec["b_pll_hz"]),
        )
        return PllPsd(params)
    if variant == "pole_zero":
        params = PoleZeroPsdParams(
            psd0=float(from_db(spec["psd0_dbchz"])),
            zeros=tuple((float(f), float(a)) for f, a in spec["zeros"]),
            poles=tuple((float(f), float(a)) for f, a in spec["poles"]),
        )
        return PoleZeroPsd(params)
    if variant == "scaled":
        inner = psd_model_from_dict(spec["inner"])
        return ScaledPsd(inner, float(from_db(spec["gamma_db"])))
    raise ValueError(f"unknown PSD model variant: {variant!r}")
