"""Physical constants, ring geometry and the natural-unit convention.

Internally every quantity is expressed in ring units: hbar = 1, energies in
units of hbar*omega, times in units of 1/omega and magnetic flux in units of
the single-charge flux quantum h/e.  SI values only appear at I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import scipy.constants as sc

from chiral_qubit.errors import DomainError

#: Default Fermi velocity (m/s), a typical Dirac-semimetal scale.
DEFAULT_FERMI_VELOCITY = 1.0e6
#: Default ring radius (m).
DEFAULT_RADIUS = 1.0e-6

#: Flux quantum in natural units (hbar = e = 1, so h/e = 2*pi).
FLUX_QUANTUM_NATURAL = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    """Elementary charge and Planck constant; everything else is derived.

    Defaults are the exact SI values (identical in CODATA 2018 and later).
    """

    elementary_charge: float = sc.e
    planck: float = sc.h

    def __post_init__(self):
        if not (self.elementary_charge > 0 and self.planck > 0):
            raise DomainError("physical constants must be positive")

    @property
    def reduced_planck(self) -> float:
        return self.planck / (2.0 * math.pi)

    @property
    def flux_quantum(self) -> float:
        # single-charge quantum h/e, not the superconducting h/2e
        return self.planck / self.elementary_charge

    def as_dict(self) -> dict:
        return {
            "elementary_charge": self.elementary_charge,
            "reduced_planck": self.reduced_planck,
            "planck": self.planck,
            "flux_quantum": self.flux_quantum,
        }


CODATA = PhysicalConstants()


def omega_from_geometry(radius: float, fermi_velocity: float) -> float:
    """Angular frequency v_F / R of a chiral mode circulating the ring (rad/s)."""
    if not (radius > 0 and fermi_velocity > 0):
        raise DomainError(
            f"radius and Fermi velocity must be positive, got R={radius!r}, v_F={fermi_velocity!r}"
        )
    return fermi_velocity / radius


@dataclass(frozen=True)
class RingParams:
    """Ring radius (m) and Fermi velocity (m/s)."""

    radius: float = DEFAULT_RADIUS
    fermi_velocity: float = DEFAULT_FERMI_VELOCITY

    def __post_init__(self):
        omega_from_geometry(self.radius, self.fermi_velocity)

    @property
    def omega(self) -> float:
        return omega_from_geometry(self.radius, self.fermi_velocity)

    def as_dict(self) -> dict:
        return {
            "radius": self.radius,
            "fermi_velocity": self.fermi_velocity,
            "omega": self.omega,
        }


def flux_ratio(flux: float, constants: PhysicalConstants = CODATA) -> float:
    """Return Phi / Phi_0 for a flux given in webers."""
    return flux / constants.flux_quantum


@dataclass(frozen=True)
class UnitSystem:
    """Conversion between ring units and SI for one ring and set of constants.

    ``mode`` names the system that user-facing values are expressed in;
    :meth:`to_si` and :meth:`from_si` always convert natural <-> SI.
    """

    mode: str = "natural"
    ring: RingParams = field(default_factory=RingParams)
    constants: PhysicalConstants = CODATA

    def __post_init__(self):
        if self.mode not in ("natural", "si"):
            raise DomainError(f"unknown unit mode {self.mode!r}")

    def scale(self, quantity: str) -> float:
        """SI value of one natural unit of ``quantity``."""
        w = self.ring.omega
        c = self.constants
        scales = {
            "energy": c.reduced_planck * w,  # J
            "time": 1.0 / w,  # s
            "angular_frequency": w,  # rad/s
            "flux": c.flux_quantum,  # Wb
            "current": c.elementary_charge * w,  # A
            "charge": c.elementary_charge,  # C
        }
        try:
            return scales[quantity]
        except KeyError:
            raise DomainError(f"no unit defined for {quantity!r}") from None

    def to_si(self, quantity: str, value):
        return value * self.scale(quantity)

    def from_si(self, quantity: str, value):
        return value / self.scale(quantity)

    def to_user(self, quantity: str, natural_value):
        return natural_value if self.mode == "natural" else self.to_si(quantity, natural_value)
