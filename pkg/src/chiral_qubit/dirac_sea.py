"""Filled Dirac sea on the ring: vacuum energy, potentials, currents, pumping.

Energies are in units of hbar*omega, currents in units of e*omega and flux as
phi = Phi/Phi_0.  Only differences of the regularised vacuum energy are
reported as physical; the divergent term and the additive constant depend on
the scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from chiral_qubit.errors import DomainError, WindowOverflowError
from chiral_qubit.spectrum import Branch, Level, enumerate_window, level_energy
from chiral_qubit.units import FLUX_QUANTUM_NATURAL

DEFAULT_EPSILONS = (0.05, 0.025, 0.0125, 0.00625)
DEFAULT_RESIDUAL_THRESHOLD = 1e-5
# sea sums stop once exp(-eps*|E|) drops below this
_TRUNCATION = 1e-18


# -- occupations and chiral magnetic currents ---------------------------------


@dataclass(frozen=True)
class ChiralOccupation:
    """Fermi levels of both branches at flux ratio ``phi``.

    Right-handed modes n <= n_right are filled.  Left-handed energies fall with
    n, so the filled left-handed modes are n >= n_left; in both cases the mode
    at the given index sits at the Fermi energy.
    """

    n_right: int
    n_left: int
    phi: float = 0.0
    mu5: float = float("nan")

    def __post_init__(self):
        mu5 = 0.5 * (self.fermi_energy_right - self.fermi_energy_left)
        object.__setattr__(self, "mu5", mu5)

    @property
    def fermi_energy_right(self) -> float:
        return level_energy(self.n_right, Branch.RIGHT, self.phi)

    @property
    def fermi_energy_left(self) -> float:
        return level_energy(self.n_left, Branch.LEFT, self.phi)

    @classmethod
    def from_mu5(cls, mu5: float, phi: float = 0.0):
        """Symmetric occupation with the requested mu5 (2*(mu5 - phi) must be an even integer)."""
        total = 2.0 * mu5 - 2.0 * phi  # n_right + n_left
        if abs(total - round(total)) > 1e-9 or round(total) % 2:
            raise DomainError(f"mu5={mu5} is not reachable by a symmetric filling at phi={phi}")
        n = round(total) // 2
        return cls(n, n, phi)


def cme_current_1d(mu5):
    """Chiral magnetic current on the ring, -mu5/pi (units of e*omega)."""
    return -np.asarray(mu5) / math.pi if np.ndim(mu5) else -mu5 / math.pi


def cme_current_3d(mu5, field):
    """CME current density -e^2 mu5 B / (2 pi^2), with e = hbar = 1.

    Equal to the ring current times the transverse density of states eB/(2 pi).
    """
    return cme_current_1d(mu5) * field / (2.0 * math.pi)


def occupation_sum_current(occ: ChiralOccupation, cutoff: int = 10_000) -> float:
    """Sum the per-mode persistent currents over all occupied modes.

    Each branch alone diverges.  Modes are kept with |E| <= Lambda, and the
    count is averaged over the cutoff position Lambda in [cutoff, cutoff + 1]
    so that the result does not depend on where the cutoff falls between two
    levels.  A mode at |E| then carries weight clip(cutoff + 1 - |E|, 0, 1).
    """
    if cutoff <= abs(occ.fermi_energy_right) + 1 or cutoff <= abs(occ.fermi_energy_left) + 1:
        raise DomainError("cutoff must lie well above both Fermi energies")

    def weight(energies):
        return np.clip(cutoff + 1.0 - np.abs(energies), 0.0, 1.0)

    span = cutoff + 2
    phi = occ.phi
    n_r = np.arange(occ.n_right - 2 * span - abs(math.ceil(phi)), occ.n_right + 1)
    n_l = np.arange(occ.n_left, occ.n_left + 2 * span + abs(math.ceil(phi)) + 1)
    count_r = math.fsum(weight(n_r + phi))
    count_l = math.fsum(weight(-(n_l + phi)))
    return (count_l - count_r) / (2.0 * math.pi)


# -- regularised vacuum energy -------------------------------------------------


def _sea_offsets(phi: float):
    # |E| of sea levels is m + (1 - phi) for R (n = -1 - m) and m + phi for L (n = m)
    return (1.0 - phi, phi)


def sea_sum(phi: float, eps: float) -> float:
    """Sum of E * exp(-eps |E|) over every negative-energy level of both branches."""
    if not 0.0 < phi < 1.0:
        raise DomainError(f"phi must lie in (0, 1), got {phi}")
    if not eps > 0:
        raise DomainError("regulator must be positive")
    parts = []
    for offset in _sea_offsets(phi):
        m_max = math.ceil(-math.log(_TRUNCATION) / eps - offset) + 1
        x = np.arange(m_max + 1, dtype=float) + offset
        parts.append(-math.fsum(x * np.exp(-eps * x)))
    return math.fsum(parts)


@dataclass(frozen=True)
class HeatKernelFit:
    """Least-squares fit S(eps) = a/eps^2 + b + c*eps of the regulated sea sum."""

    phi: float
    epsilons: tuple
    raw_sums: tuple
    divergence_coeff: float
    finite_part: float
    linear_coeff: float
    fit_residual: float
    residual_threshold: float

    @property
    def converged(self) -> bool:
        return self.fit_residual <= self.residual_threshold


def vacuum_energy_regularized(
    phi: float,
    epsilons=DEFAULT_EPSILONS,
    residual_threshold: float = DEFAULT_RESIDUAL_THRESHOLD,
) -> HeatKernelFit:
    """Heat-kernel regularised Dirac-sea energy at flux ratio ``phi`` in (0, 1).

    ``finite_part`` is the eps-independent term.  Only differences between two
    fluxes are meaningful; ``finite_part(phi) - finite_part(1/2)`` approaches
    (phi - 1/2)^2.  Check ``converged`` before trusting the result.
    """
    if not 0.0 < phi < 1.0:
        raise DomainError(f"phi must lie in (0, 1); reduce by periodicity first (got {phi})")
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or eps.size < 3:
        raise DomainError("need at least three regulator values")
    if np.any(eps <= 0) or np.any(eps > 0.5):
        raise DomainError("regulators must lie in (0, 0.5]")
    if np.any(np.diff(eps) >= 0):
        raise DomainError("regulators must be strictly decreasing")

    sums = np.array([sea_sum(phi, e) for e in eps])
    basis = np.column_stack([eps**-2, np.ones_like(eps), eps])
    # scale columns so the normal equations stay well conditioned
    norms = np.linalg.norm(basis, axis=0)
    coef, *_ = np.linalg.lstsq(basis / norms, sums, rcond=None)
    coef = coef / norms
    resid = float(np.sqrt(np.mean((basis @ coef - sums) ** 2)))
    return HeatKernelFit(
        phi=phi,
        epsilons=tuple(eps.tolist()),
        raw_sums=tuple(sums.tolist()),
        divergence_coeff=float(coef[0]),
        finite_part=float(coef[1]),
        linear_coeff=float(coef[2]),
        fit_residual=resid,
        residual_threshold=residual_threshold,
    )


def sharp_cutoff_finite_part(phi: float, cutoff: int = 50) -> float:
    """Finite part of the sea energy with a sharp energy cutoff |E| <= Lambda.

    The sharp sum is -Lambda^2 + (terms periodic in Lambda) + finite part.
    Averaging over Lambda in [cutoff, cutoff + 2] with a triangular weight
    removes the periodic terms, including the one that grows like Lambda.
    """
    if not 0.0 < phi < 1.0:
        raise DomainError(f"phi must lie in (0, 1), got {phi}")
    n = float(cutoff)

    def weight(x):
        # integral of the triangular kernel over Lambda >= x
        return np.select(
            [x <= n, x <= n + 1, x <= n + 2],
            [1.0, 1.0 - 0.5 * (x - n) ** 2, 0.5 * (n + 2 - x) ** 2],
            default=0.0,
        )

    parts = []
    for offset in _sea_offsets(phi):
        x = np.arange(cutoff + 3, dtype=float) + offset
        parts.append(-math.fsum(x * weight(x)))
    # mean of Lambda^2 under the triangular kernel
    parts.append((n + 1) ** 2 + 1.0 / 6.0)
    return math.fsum(parts)


# -- potentials ----------------------------------------------------------------


def washboard_potential(phi):
    """Phi_0-periodic vacuum energy (hbar*omega): (phi - 1/2)^2 on [0, 1), extended periodically.

    Values lie in [0, 1/4] with minima at half-integer flux.
    """
    phi = np.asarray(phi, dtype=float)
    u = (phi - np.floor(phi) - 0.5) ** 2
    return u if u.ndim else float(u)


def total_potential(phi, u0: float = 1.0, beta: float = 0.0, cosine_argument: str = "literal"):
    """SQUID-like potential u0 * [washboard(phi) - beta * cos(arg)].

    ``cosine_argument`` selects arg = phi ("literal") or 2*pi*phi ("two_pi").
    Only the latter makes the total Phi_0-periodic.
    """
    if not u0 > 0:
        raise DomainError("u0 must be positive")
    if cosine_argument == "literal":
        arg = np.asarray(phi, dtype=float)
    elif cosine_argument == "two_pi":
        arg = 2.0 * math.pi * np.asarray(phi, dtype=float)
    else:
        raise DomainError(f"cosine_argument must be 'literal' or 'two_pi', got {cosine_argument!r}")
    u = u0 * (washboard_potential(phi) - beta * np.cos(arg))
    return u if np.ndim(u) else float(u)


# -- spectral flow -------------------------------------------------------------


def anomaly_prediction(delta_phi):
    """Delta(N_R - N_L) = (e/pi) Delta Phi with hbar = e = 1."""
    return np.asarray(delta_phi) * FLUX_QUANTUM_NATURAL / math.pi


@dataclass(frozen=True)
class SpectralFlowResult:
    t: np.ndarray
    phi: np.ndarray
    delta_n_right: np.ndarray  # continuous (expectation-value) convention
    delta_n_left: np.ndarray
    crossings_right: np.ndarray  # integer level crossings of the Fermi energy
    crossings_left: np.ndarray

    @property
    def delta_q_axial(self) -> np.ndarray:
        return self.delta_n_right - self.delta_n_left

    @property
    def crossings_axial(self) -> np.ndarray:
        return self.crossings_right - self.crossings_left


def _fermi_label(energies, labels, e_fermi):
    order = np.argsort(energies)
    return np.interp(e_fermi, energies[order], labels[order])


def spectral_flow(
    program,
    window=(-10.0, 10.0),
    steps: int = 101,
    e_fermi: float = 0.0,
    times=None,
) -> SpectralFlowResult:
    """Track levels adiabatically through a flux program and count chiral charge.

    The sea is filled up to ``e_fermi`` at t = 0 and occupations stay attached
    to their levels.  ``delta_n_*`` measure how far the Fermi energy has moved
    through each branch's level ladder (fractional in general);
    ``crossings_*`` count whole levels that crossed it.

    Raises WindowOverflowError if a level needed to locate the Fermi energy
    is absent from the initial window or leaves it during the program.
    """
    e_min, e_max = window
    if not e_min < e_fermi < e_max:
        raise DomainError("Fermi energy must lie strictly inside the tracking window")
    if times is None:
        if steps < 2:
            raise DomainError("need at least two time steps")
        times = np.linspace(0.0, program.duration, steps)
    times = np.asarray(times, dtype=float)
    phis = np.asarray(program(times), dtype=float)
    win = enumerate_window(float(phis[0]), e_min, e_max)

    results = {}
    for branch in (Branch.RIGHT, Branch.LEFT):
        chi = branch.chirality
        labels = np.array([lv.n for lv in win.branch_levels(branch)], dtype=float)
        if labels.size < 2:
            raise DomainError("tracking window holds fewer than two levels per branch")
        energies = chi * (labels[None, :] + phis[:, None])  # (time, level)

        # continuous Fermi label: energy is linear in n, so interpolation is exact
        lam = chi * e_fermi - phis
        needed = np.arange(math.floor(lam.min()), math.ceil(lam.max()) + 1)
        for n in needed:
            hits = np.nonzero(labels == n)[0]
            if hits.size == 0:
                lv = Level(int(n), branch, level_energy(int(n), branch, float(phis[0])))
                raise WindowOverflowError(lv, float(times[0]), window)
            e_n = energies[:, hits[0]]
            out = np.nonzero((e_n < e_min - 1e-12) | (e_n > e_max + 1e-12))[0]
            if out.size:
                k = out[0]
                raise WindowOverflowError(Level(int(n), branch, float(e_n[k])), float(times[k]), window)

        lam_tracked = np.array([_fermi_label(energies[k], labels, e_fermi) for k in range(len(times))])
        delta = chi * (lam_tracked[0] - lam_tracked)

        below0 = energies[0] <= e_fermi
        above = energies > e_fermi
        crossings = (below0 & above).sum(axis=1) - (~below0 & ~above).sum(axis=1)
        results[branch] = (delta, crossings)

    return SpectralFlowResult(
        t=times,
        phi=phis,
        delta_n_right=results[Branch.RIGHT][0],
        delta_n_left=results[Branch.LEFT][0],
        crossings_right=results[Branch.RIGHT][1].astype(int),
        crossings_left=results[Branch.LEFT][1].astype(int),
    )
