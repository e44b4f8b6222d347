"""Photon budget and slot-count sampling for the shot-noise limited downlink."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modulation import bits_per_symbol

PLANCK = 6.62607015e-34  # J s
LIGHT_SPEED = 2.99792458e8  # m/s

__all__ = [
    "PLANCK",
    "LIGHT_SPEED",
    "ChannelParams",
    "photon_rate",
    "photon_budget",
    "superpose",
    "sample_poisson",
    "sample_gaussian",
]


@dataclass(frozen=True)
class ChannelParams:
    """Physical link parameters.

    p0_w: peak received signal power (W); pb_w: background power (W);
    eta: detector quantum efficiency; wavelength_m: central wavelength;
    bitrate_bps: target bit rate; Q: slots per symbol; M: constellation size.
    """

    p0_w: float = 0.1e-6
    pb_w: float = 0.1e-6
    eta: float = 0.8
    wavelength_m: float = 650e-9
    bitrate_bps: float = 200e6
    Q: int = 1
    M: int = 2

    def __post_init__(self):
        for name in ("p0_w", "eta", "wavelength_m", "bitrate_bps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.pb_w < 0:
            raise ValueError(f"pb_w must be nonnegative, got {self.pb_w}")
        if self.eta > 1:
            raise ValueError(f"eta must not exceed 1, got {self.eta}")
        if self.Q < 1:
            raise ValueError(f"Q must be positive, got {self.Q}")
        bits_per_symbol(self.M)  # rejects M < 2

    @property
    def symbol_time(self) -> float:
        return bits_per_symbol(self.M) / self.bitrate_bps


def photon_rate(power_w: float, eta: float, wavelength_m: float) -> float:
    """Detected photoelectrons per second, eta P / (h nu)."""
    nu = LIGHT_SPEED / wavelength_m
    return eta * power_w / (PLANCK * nu)


def photon_budget(params: ChannelParams) -> tuple[float, float]:
    """Mean signal and background photoelectron counts per slot (chip)."""
    chip = params.symbol_time / params.Q
    lam0 = photon_rate(params.p0_w, params.eta, params.wavelength_m) * chip
    lamb = photon_rate(params.pb_w, params.eta, params.wavelength_m) * chip
    return lam0, lamb


def superpose(symbols) -> np.ndarray:
    """Slot-wise sum of the users' intensity vectors.

    Accepts a sequence of equal-length vectors or a (..., users, Q) array;
    the user axis is the second to last.
    """
    arr = np.asarray(symbols)
    if arr.dtype == object:
        raise ValueError("symbols must share one length")
    if arr.ndim < 2:
        raise ValueError("need at least one symbol vector per user")
    return arr.sum(axis=-2)


def _means(intensity, lam0: float, lamb: float) -> np.ndarray:
    x = np.asarray(intensity, dtype=float)
    if lam0 < 0 or lamb < 0:
        raise ValueError("photon means must be nonnegative")
    if (x < 0).any():
        raise ValueError("intensity must be nonnegative")
    return lam0 * x + lamb


def sample_poisson(intensity, lam0: float, lamb: float, rng: np.random.Generator) -> np.ndarray:
    """Independent Poisson counts with mean ``lam0 * intensity + lamb`` per slot."""
    return rng.poisson(_means(intensity, lam0, lamb))


def sample_gaussian(intensity, lam0: float, lamb: float, rng: np.random.Generator) -> np.ndarray:
    """Moment-matched normal counts (mean = variance = Poisson mean); not clipped."""
    mean = _means(intensity, lam0, lamb)
    return mean + np.sqrt(mean) * rng.standard_normal(mean.shape)
