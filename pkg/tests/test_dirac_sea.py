import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiral_qubit import dirac_sea as sea
from chiral_qubit.errors import DomainError, WindowOverflowError
from chiral_qubit.flux import LinearRamp, PiecewiseLinear, Sinusoid
from chiral_qubit.spectrum import Branch, enumerate_window, level_energy


def closed_form_sea(phi, eps):
    # sum_{m>=0} (m+a) exp(-eps (m+a)) = -d/deps [exp(-eps a) / (1 - exp(-eps))]
    def branch(a):
        q = math.exp(-eps)
        return a * math.exp(-eps * a) / (1 - q) + math.exp(-eps * (a + 1)) / (1 - q) ** 2

    return -(branch(1 - phi) + branch(phi))


def zeta_finite_part(phi):
    # eps -> 0 constant of the sea sum: -zeta(-1, 1-phi) - zeta(-1, phi)
    return float(-mpmath.zeta(-1, 1 - phi) - mpmath.zeta(-1, phi))


PHIS = [0.1, 0.25, 0.4, 0.6, 0.75, 0.9]


@pytest.mark.parametrize("phi", [0.1, 0.3, 0.5, 0.77])
@pytest.mark.parametrize("eps", [0.5, 0.1, 0.0125])
def test_sea_sum_matches_closed_form(phi, eps):
    assert sea.sea_sum(phi, eps) == pytest.approx(closed_form_sea(phi, eps), rel=1e-13)


@pytest.mark.parametrize("phi", PHIS)
def test_zeta_oracle_is_bernoulli(phi):
    # validates the oracle itself against (phi - 1/2)^2 - 1/12
    assert zeta_finite_part(phi) == pytest.approx((phi - 0.5) ** 2 - 1 / 12, abs=1e-14)


@pytest.mark.parametrize("phi", PHIS + [0.5])
def test_heat_kernel_finite_part_against_zeta(phi):
    fit = sea.vacuum_energy_regularized(phi)
    assert fit.converged
    assert fit.finite_part == pytest.approx(zeta_finite_part(phi), abs=1e-4)
    assert fit.divergence_coeff == pytest.approx(-2.0, rel=1e-6)


@pytest.mark.parametrize("phi, expected", [(0.5, 0.0), (0.25, 0.0625), (0.75, 0.0625)])
def test_heat_kernel_examples(phi, expected):
    b = sea.vacuum_energy_regularized(phi).finite_part
    b_half = sea.vacuum_energy_regularized(0.5).finite_part
    assert b - b_half == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("phi", [0.1, 0.25, 0.4])
def test_scheme_independence(phi):
    hk = sea.vacuum_energy_regularized(phi).finite_part - sea.vacuum_energy_regularized(0.5).finite_part
    sharp = sea.sharp_cutoff_finite_part(phi) - sea.sharp_cutoff_finite_part(0.5)
    assert hk == pytest.approx(sharp, abs=1e-3)


@pytest.mark.parametrize("phi", PHIS)
@pytest.mark.parametrize("cutoff", [20, 50, 51, 200])
def test_sharp_cutoff_against_zeta(phi, cutoff):
    assert sea.sharp_cutoff_finite_part(phi, cutoff) == pytest.approx(zeta_finite_part(phi), abs=1e-9)


def test_unconverged_fit_is_flagged():
    fit = sea.vacuum_energy_regularized(0.3, (0.5, 0.4, 0.3, 0.2), residual_threshold=1e-12)
    assert not fit.converged


@pytest.mark.parametrize(
    "kwargs",
    [
        {"phi": 0.0},
        {"phi": 1.0},
        {"phi": 1.3},
        {"phi": 0.3, "epsilons": (0.1, 0.05)},
        {"phi": 0.3, "epsilons": (0.6, 0.1, 0.05)},
        {"phi": 0.3, "epsilons": (0.05, 0.1, 0.2)},
        {"phi": 0.3, "epsilons": (0.1, 0.05, 0.0)},
    ],
)
def test_vacuum_energy_preconditions(kwargs):
    with pytest.raises(DomainError):
        sea.vacuum_energy_regularized(**kwargs)


# -- potentials


@pytest.mark.parametrize("phi, expected", [(0.5, 0.0), (1.5, 0.0), (0.0, 0.25), (0.25, 0.0625), (-0.5, 0.0)])
def test_washboard_examples(phi, expected):
    assert sea.washboard_potential(phi) == pytest.approx(expected, abs=1e-15)


def test_washboard_matches_quadratic_on_unit_interval():
    phi = np.linspace(0.0, 1.0, 101, endpoint=False)
    np.testing.assert_allclose(sea.washboard_potential(phi), (phi - 0.5) ** 2, atol=1e-15)


def test_washboard_periodicity(rng):
    phi = rng.uniform(-3, 3, 200)
    base = sea.washboard_potential(phi)
    for k in range(-3, 4):
        np.testing.assert_allclose(sea.washboard_potential(phi + k), base, atol=1e-12, rtol=0)


def test_washboard_reflection(rng):
    phi = rng.uniform(0, 1, 200)
    np.testing.assert_allclose(sea.washboard_potential(1 - phi), sea.washboard_potential(phi), atol=1e-12, rtol=0)


@given(st.floats(-100, 100))
def test_washboard_range(phi):
    assert 0.0 <= sea.washboard_potential(phi) <= 0.25


@pytest.mark.parametrize(
    "phi, u0, beta, expected",
    [(0.5, 1.0, 0.0, 0.0), (0.5, 1.0, 1.0, -math.cos(0.5)), (0.0, 2.0, 0.0, 0.5)],
)
def test_total_potential_examples(phi, u0, beta, expected):
    assert sea.total_potential(phi, u0, beta) == pytest.approx(expected, abs=1e-12)


def test_total_potential_cosine_conventions():
    phi = np.linspace(-2, 2, 41)
    lit = sea.total_potential(phi, 1.0, 0.3, "literal")
    two_pi = sea.total_potential(phi, 1.0, 0.3, "two_pi")
    np.testing.assert_allclose(two_pi, sea.total_potential(phi + 1, 1.0, 0.3, "two_pi"), atol=1e-12)
    assert not np.allclose(lit, sea.total_potential(phi + 1, 1.0, 0.3, "literal"))
    with pytest.raises(DomainError):
        sea.total_potential(0.1, 1.0, 0.3, "degrees")
    with pytest.raises(DomainError):
        sea.total_potential(0.1, 0.0)


# -- chiral magnetic effect


def test_cme_examples():
    assert sea.cme_current_1d(0.0) == 0.0
    assert sea.cme_current_1d(math.pi) == pytest.approx(-1.0)
    assert sea.cme_current_3d(1.7, 0.0) == 0.0
    assert sea.cme_current_3d(2 * math.pi**2, 1.0) == pytest.approx(-1.0)


def test_cme_3d_linear_in_field(rng):
    for mu5 in rng.normal(0, 3, 20):
        assert sea.cme_current_3d(mu5, 2.0) == 2 * sea.cme_current_3d(mu5, 1.0)
        assert sea.cme_current_3d(mu5, 0.7) == sea.cme_current_1d(mu5) * 0.7 / (2 * math.pi)


def test_occupation_mu5_two():
    occ = sea.ChiralOccupation.from_mu5(2.0)
    assert occ.mu5 == 2.0
    j = sea.occupation_sum_current(occ, cutoff=10_000)
    assert j == pytest.approx(-2 / math.pi, abs=1e-6)
    assert sea.cme_current_1d(occ.mu5) == pytest.approx(-2 / math.pi)


def test_occupation_fields_consistent():
    occ = sea.ChiralOccupation(3, -5, phi=0.2)
    assert occ.fermi_energy_right == 3.2
    assert occ.fermi_energy_left == pytest.approx(4.8)
    assert abs(occ.mu5 - 0.5 * (occ.fermi_energy_right - occ.fermi_energy_left)) < 1e-12


def brute_occupation_current(n_right, n_left, phi, cutoff):
    # plain counting: occupied modes with |E| <= Lambda, averaged over Lambda in [M, M+1]
    total = 0.0
    lambdas = cutoff + (np.arange(400) + 0.5) / 400
    r = np.arange(-3 * cutoff, n_right + 1) + phi
    l = -(np.arange(n_left, 3 * cutoff) + phi)
    for lam in lambdas:
        total += (np.count_nonzero(np.abs(l) <= lam) - np.count_nonzero(np.abs(r) <= lam)) / (2 * math.pi)
    return total / lambdas.size


@pytest.mark.parametrize("n_right, n_left, phi", [(0, 0, 0.0), (3, -2, 0.0), (-4, 5, 0.3), (7, 7, 0.5)])
def test_occupation_sum_brute_force(n_right, n_left, phi):
    occ = sea.ChiralOccupation(n_right, n_left, phi)
    fast = sea.occupation_sum_current(occ, cutoff=200)
    assert fast == pytest.approx(brute_occupation_current(n_right, n_left, phi, 200), abs=2e-3)
    assert fast == pytest.approx(sea.cme_current_1d(occ.mu5), abs=1e-6)


def test_cme_equivalence_grid():
    worst = 0.0
    for nr in range(-20, 21):
        for nl in range(-20, 21):
            occ = sea.ChiralOccupation(nr, nl)
            worst = max(worst, abs(sea.occupation_sum_current(occ) - sea.cme_current_1d(occ.mu5)))
    assert worst < 1e-6


# -- spectral flow


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_integer_flux_pumps_even_charge(k):
    res = sea.spectral_flow(LinearRamp(0.0, float(k), 1.0), window=(-10, 10), steps=51)
    assert res.delta_q_axial[-1] == pytest.approx(2 * k, abs=1e-10)
    assert res.crossings_axial[-1] == 2 * k


@pytest.mark.parametrize("phi0", [0.2, 0.5, 0.9])
def test_level_crossing_oracle_one_quantum(phi0):
    # occupations stay on their mode labels; count labels that end on the other side of E_F
    before = enumerate_window(phi0, -10, 10)
    e_f = 0.01
    change = 0
    for lv in before.levels:
        was_filled = lv.energy <= e_f
        now_filled_side = level_energy(lv.n, lv.branch, phi0 + 1) <= e_f
        # a filled level rising above E_F adds a particle over the new vacuum, and vice versa
        step = int(was_filled and not now_filled_side) - int(not was_filled and now_filled_side)
        change += lv.branch.chirality * step
    assert change == 2
    res = sea.spectral_flow(LinearRamp(phi0, phi0 + 1, 1.0), steps=11, e_fermi=e_f)
    assert res.crossings_axial[-1] == change
    assert res.delta_q_axial[-1] == pytest.approx(change, abs=1e-10)


@pytest.mark.parametrize("dphi", [0.5, 0.37, -0.8, 1.25])
def test_fractional_flow(dphi):
    res = sea.spectral_flow(LinearRamp(0.1, 0.1 + dphi, 2.0), steps=41)
    np.testing.assert_allclose(res.delta_q_axial, 2 * (res.phi - res.phi[0]), atol=1e-10)
    assert res.delta_q_axial[-1] == pytest.approx(sea.anomaly_prediction(dphi), abs=1e-10)


def test_zero_flux_change():
    res = sea.spectral_flow(LinearRamp(0.3, 0.3, 1.0), steps=5)
    assert np.all(res.delta_q_axial == 0)


def test_anomaly_prediction_factor_two():
    assert sea.anomaly_prediction(1.0) == pytest.approx(2.0)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(-3, 3))
def test_spectral_flow_additivity(a, b, c):
    whole = sea.spectral_flow(LinearRamp(a, c, 1.0), window=(-12, 12), steps=3).delta_q_axial[-1]
    first = sea.spectral_flow(LinearRamp(a, b, 1.0), window=(-12, 12), steps=3).delta_q_axial[-1]
    second = sea.spectral_flow(LinearRamp(b, c, 1.0), window=(-12, 12), steps=3).delta_q_axial[-1]
    assert whole == pytest.approx(first + second, abs=1e-10)


def test_piecewise_program_composes():
    prog = PiecewiseLinear([(0, 0.0), (1, 1.5), (2, 0.7)])
    res = sea.spectral_flow(prog, steps=201)
    assert res.delta_q_axial[-1] == pytest.approx(1.4, abs=1e-10)
    assert res.delta_q_axial.max() == pytest.approx(3.0, abs=1e-10)


def test_sinusoidal_program_returns_to_zero():
    prog = Sinusoid(0.2, 0.4, 1.0, duration=1.0)
    res = sea.spectral_flow(prog, steps=101)
    assert res.delta_q_axial[-1] == pytest.approx(0.0, abs=1e-10)


def test_window_overflow_names_level():
    with pytest.raises(WindowOverflowError) as info:
        sea.spectral_flow(LinearRamp(0.0, 5.0, 1.0), window=(-2, 2), steps=11)
    assert "n=" in str(info.value)
    assert info.value.level.branch in (Branch.RIGHT, Branch.LEFT)


def test_spectral_flow_preconditions():
    with pytest.raises(DomainError):
        sea.spectral_flow(LinearRamp(0, 1, 1.0), steps=1)
    with pytest.raises(DomainError):
        sea.spectral_flow(LinearRamp(0, 1, 1.0), window=(1, 5))
