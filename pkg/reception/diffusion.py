"""
Free-diffusion channel between a point transmitter and the receiver.

All functions are pure and accept scalars or numpy arrays for the spatial
and temporal arguments. The impulse response takes time first: h(t, r).
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from reception.params import SystemParams
from utils.errors import DomainError


@dataclass(frozen=True)
class TransmissionProfile:
    """Constant-amplitude pulse stream: Q molecules during each slot of length Ts."""

    Q: float
    Ts: float

    def __post_init__(self):
        if not self.Q > 0:
            raise DomainError(f"pulse amplitude Q must be positive, got {self.Q}")
        if not self.Ts > 0:
            raise DomainError(f"pulse duration Ts must be positive, got {self.Ts}")


@dataclass(frozen=True)
class ConcentrationSample:
    r: float
    t: float
    value: float


def transmission_profile(t: float, profile: TransmissionProfile) -> float:
    """Amplitude Q inside every open slot (j*Ts, (j+1)*Ts), 0 on slot boundaries."""
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}")
    slots = t / profile.Ts
    # boundaries like 3 * 0.1 / 0.1 do not land on an exact integer
    if math.isclose(slots, round(slots), rel_tol=1e-9, abs_tol=1e-12):
        return 0.0
    return profile.Q


def erfc(x):
    """Complementary error function (absolute error well below 1e-12 on |x| <= 6)."""
    return special.erfc(x)


def impulse_response(t, r, params: SystemParams):
    """Q / (4 pi D t)^(3/2) * exp(-r^2 / (4 D t))."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(t <= 0):
        raise DomainError("impulse response is defined for t > 0 only")
    if np.any(r < 0):
        raise DomainError("distance must be non-negative")
    four_dt = 4.0 * params.D * t
    value = params.Q / (math.pi * four_dt) ** 1.5 * np.exp(-(r ** 2) / four_dt)
    return float(value) if value.ndim == 0 else value


def concentration(r, t, params: SystemParams):
    """Concentration under continuous release: Q/(dt 4 pi D r) * erfc(r / sqrt(4 D t))."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(r <= 0) or np.any(t <= 0):
        raise DomainError("concentration is defined for r > 0 and t > 0 only")
    value = steady_concentration(r, params) * erfc(r / np.sqrt(4.0 * params.D * t))
    return float(value) if np.ndim(value) == 0 else value


def sample_concentration(r: float, t: float, params: SystemParams) -> ConcentrationSample:
    return ConcentrationSample(r=r, t=t, value=float(concentration(r, t, params)))


def steady_concentration(r, params: SystemParams):
    """Long-time limit Q / (4 pi D r dt)."""
    return params.Q / (params.dt * 4.0 * math.pi * params.D * r)


def time_to_steady(r: float, params: SystemParams, rel_tol: float = 1e-6) -> float:
    """Earliest t at which concentration(r, t) is within rel_tol of its limit."""
    if r <= 0:
        raise DomainError(f"distance must be positive, got {r}")
    if not 0 < rel_tol < 1:
        raise DomainError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    x = float(special.erfcinv(1.0 - rel_tol))
    return r * r / (4.0 * params.D * x * x)


def _enter_rate(Q: float, D: float, R: float, dt: float) -> float:
    return Q / (4.0 * math.pi * D * R * dt)


def enter_rate(params: SystemParams) -> float:
    """Arrival rate lambda = Q / (4 pi D R dt) of molecules into the reception space."""
    return _enter_rate(params.Q, params.D, params.R, params.dt)
