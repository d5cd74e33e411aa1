"""Time-dependent flux programs phi(t) = Phi(t)/Phi_0.

Times are in units of 1/omega unless a caller states otherwise.  Each program
is a vectorised callable and also exposes its time derivative, from which the
Faraday EMF around the ring follows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from chiral_qubit.errors import DomainError
from chiral_qubit.units import CODATA, PhysicalConstants


@dataclass(frozen=True)
class Constant:
    phi: float
    duration: float = 1.0

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.phi)

    def rate(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class LinearRamp:
    phi_start: float
    phi_end: float
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise DomainError("ramp duration must be positive")

    def __call__(self, t):
        s = np.clip(np.asarray(t, dtype=float) / self.duration, 0.0, 1.0)
        return self.phi_start + (self.phi_end - self.phi_start) * s

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0) & (t <= self.duration)
        return np.where(inside, (self.phi_end - self.phi_start) / self.duration, 0.0)


@dataclass(frozen=True)
class Sinusoid:
    phi_dc: float
    amplitude: float
    frequency: float
    duration: float = 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.phi_dc + self.amplitude * np.sin(2 * math.pi * self.frequency * t)

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        w = 2 * math.pi * self.frequency
        return self.amplitude * w * np.cos(w * t)


@dataclass(frozen=True)
class PiecewiseLinear:
    knots: tuple  # ((t0, phi0), (t1, phi1), ...)

    def __post_init__(self):
        knots = tuple((float(t), float(p)) for t, p in self.knots)
        if len(knots) < 2:
            raise DomainError("piecewise-linear program needs at least two knots")
        ts = [t for t, _ in knots]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise DomainError("piecewise-linear knot times must be strictly increasing")
        object.__setattr__(self, "knots", knots)

    @property
    def duration(self) -> float:
        return self.knots[-1][0] - self.knots[0][0]

    def __call__(self, t):
        ts, ps = zip(*self.knots)
        return np.interp(np.asarray(t, dtype=float), ts, ps)

    def rate(self, t):
        ts = np.array([k[0] for k in self.knots])
        ps = np.array([k[1] for k in self.knots])
        slopes = np.diff(ps) / np.diff(ts)
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(slopes) - 1)
        inside = (t >= ts[0]) & (t <= ts[-1])
        return np.where(inside, slopes[idx], 0.0)


def faraday_emf(
    program,
    t,
    time_unit: float = 1.0,
    constants: PhysicalConstants = CODATA,
):
    """EMF around the ring, -dPhi/dt, in volts.

    ``time_unit`` is the SI duration (s) of one program time unit, e.g. 1/omega.
    """
    return -program.rate(t) * constants.flux_quantum / time_unit


def wilson_phase(phi):
    """Phase exp(2 pi i phi) of the Wilson line around the ring."""
    return np.exp(2j * math.pi * np.asarray(phi, dtype=float))
