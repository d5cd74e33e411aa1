import numpy as np
import pytest

from chiral_qubit.errors import DomainError
from chiral_qubit.flux import Constant, LinearRamp, PiecewiseLinear, Sinusoid, faraday_emf, wilson_phase
from chiral_qubit.units import CODATA


def test_linear_ramp_values_and_clip():
    ramp = LinearRamp(0.2, 1.2, 4.0)
    assert ramp(0.0) == 0.2
    assert ramp(2.0) == pytest.approx(0.7)
    assert ramp(9.0) == 1.2
    with pytest.raises(DomainError):
        LinearRamp(0, 1, 0.0)


def test_faraday_emf_constant_for_ramp():
    ramp = LinearRamp(0.1, 2.6, 5.0)
    t_unit = 1e-12  # 1/omega for R = 1 um, v_F = 1e6 m/s
    emf = faraday_emf(ramp, np.linspace(0, 5, 101), time_unit=t_unit)
    expected = -(2.6 - 0.1) * CODATA.flux_quantum / (5.0 * t_unit)
    assert np.ptp(emf) == 0.0
    np.testing.assert_allclose(emf, expected, rtol=1e-10)


def test_sinusoid_rate_matches_numerical_derivative():
    prog = Sinusoid(0.5, 0.2, 0.3)
    t = np.linspace(0, 3, 7)
    h = 1e-6
    np.testing.assert_allclose(prog.rate(t), (prog(t + h) - prog(t - h)) / (2 * h), rtol=1e-6, atol=1e-9)


def test_piecewise_linear():
    prog = PiecewiseLinear([(0, 0.0), (1, 1.0), (3, 0.0)])
    assert prog.duration == 3.0
    assert prog(0.5) == 0.5 and prog(2.0) == 0.5
    np.testing.assert_allclose(prog.rate([0.5, 2.0]), [1.0, -0.5])
    with pytest.raises(DomainError):
        PiecewiseLinear([(0, 0.0), (0, 1.0)])
    with pytest.raises(DomainError):
        PiecewiseLinear([(1, 0.0), (0.5, 1.0)])


def test_constant_program():
    prog = Constant(0.3)
    assert np.all(prog(np.arange(4.0)) == 0.3)
    assert np.all(prog.rate(np.arange(4.0)) == 0.0)


def test_wilson_phase_is_flux_periodic():
    phi = np.linspace(-2, 2, 17)
    np.testing.assert_allclose(wilson_phase(phi + 1), wilson_phase(phi), atol=1e-12)
    assert wilson_phase(0.5) == pytest.approx(-1)
