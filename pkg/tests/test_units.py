import math

import pytest
import scipy.constants as sc
from hypothesis import given
from hypothesis import strategies as st

from chiral_qubit.errors import DomainError
from chiral_qubit.units import (
    CODATA,
    DEFAULT_FERMI_VELOCITY,
    FLUX_QUANTUM_NATURAL,
    PhysicalConstants,
    RingParams,
    UnitSystem,
    flux_ratio,
    omega_from_geometry,
)


@pytest.mark.parametrize(
    "radius, vf, expected",
    [(1e-6, 1e-6, 1.0), (1e-6, 1e6, 1e12), (2e-6, 1e6, 5e11)],
)
def test_omega_from_geometry(radius, vf, expected):
    assert omega_from_geometry(radius, vf) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("radius, vf", [(0.0, 1e6), (-1e-6, 1e6), (1e-6, 0.0), (1e-6, -3.0)])
def test_omega_rejects_non_positive(radius, vf):
    with pytest.raises(DomainError):
        omega_from_geometry(radius, vf)
    with pytest.raises(DomainError):
        RingParams(radius, vf)


def test_flux_quantum_is_single_charge():
    c = PhysicalConstants()
    # check h/e independently against scipy before trusting the examples
    assert c.flux_quantum == pytest.approx(sc.h / sc.e, rel=1e-15)
    assert c.flux_quantum == pytest.approx(4.1357e-15, rel=1e-4)
    assert c.flux_quantum / (c.planck / (2 * c.elementary_charge)) == 2.0
    assert c.planck == 2 * math.pi * c.reduced_planck


def test_flux_ratio_examples():
    assert flux_ratio(0.0) == 0.0
    assert flux_ratio(CODATA.flux_quantum) == 1.0
    assert flux_ratio(2.0678e-15) == pytest.approx(0.5, rel=1e-4)


def test_natural_flux_quantum():
    assert FLUX_QUANTUM_NATURAL == pytest.approx(2 * math.pi)


def test_ring_defaults():
    ring = RingParams()
    assert ring.fermi_velocity == DEFAULT_FERMI_VELOCITY
    assert ring.omega == ring.fermi_velocity / ring.radius
    assert ring.as_dict()["omega"] == ring.omega


def test_unit_system_scales():
    units = UnitSystem(ring=RingParams(1e-6, 1e6))
    assert units.scale("energy") == pytest.approx(sc.hbar * 1e12, rel=1e-12)
    assert units.scale("time") == pytest.approx(1e-12)
    assert units.scale("flux") == CODATA.flux_quantum
    assert units.to_user("energy", 3.0) == 3.0
    assert UnitSystem("si").to_user("time", 2.0) == pytest.approx(2e-12)
    with pytest.raises(DomainError):
        units.scale("temperature")
    with pytest.raises(DomainError):
        UnitSystem("cgs")


@given(
    radius=st.floats(1e-9, 1e-3),
    vf=st.floats(1e3, 1e7),
    quantity=st.sampled_from(["energy", "time", "angular_frequency", "flux", "current", "charge"]),
    value=st.floats(-1e6, 1e6).filter(lambda v: abs(v) > 1e-9),
)
def test_round_trip_natural_si(radius, vf, quantity, value):
    units = UnitSystem(ring=RingParams(radius, vf))
    back = units.from_si(quantity, units.to_si(quantity, value))
    assert back == pytest.approx(value, rel=1e-12)


@given(radius=st.floats(1e-9, 1e-3), vf=st.floats(1e3, 1e7))
def test_energy_unit_round_trip(radius, vf):
    units = UnitSystem(ring=RingParams(radius, vf))
    joules = sc.hbar * vf / radius
    assert units.from_si("energy", joules) == pytest.approx(1.0, rel=1e-12)
