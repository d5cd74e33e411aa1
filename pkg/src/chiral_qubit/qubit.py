"""The reduced two-level chiral qubit and its time evolution.

Basis ordering is (|R>, |L>).  The static Hamiltonian is

    H = (eps/2) sigma_z - Delta sigma_x,

so at the degeneracy point the symmetric state |0> = (|R> + |L>)/sqrt(2) is
the ground state and |1> = (|R> - |L>)/sqrt(2) lies 2*Delta above it.  A drive
modulates the flux, adding r(t) cos(2 pi f_d t + phase) sigma_z; on resonance
this rotates the qubit at angular Rabi frequency r(t).

Units are whatever the caller uses consistently with hbar = 1: energies are
angular frequencies in inverse time units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from chiral_qubit.errors import AccuracyError, DomainError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

KET_R = np.array([1, 0], dtype=complex)
KET_L = np.array([0, 1], dtype=complex)
KET_0 = (KET_R + KET_L) / math.sqrt(2)
KET_1 = (KET_R - KET_L) / math.sqrt(2)

DEFAULT_TOL = 1e-10

# Gauss-Legendre nodes for the fourth-order Magnus step
_C1 = 0.5 - math.sqrt(3) / 6
_C2 = 0.5 + math.sqrt(3) / 6
_MAGNUS_COMM = math.sqrt(3) / 12


@dataclass(frozen=True)
class TwoLevelSystem:
    epsilon: float
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise DomainError("tunneling amplitude must be non-negative")

    def hamiltonian(self) -> np.ndarray:
        return 0.5 * self.epsilon * SIGMA_Z - self.delta * SIGMA_X

    @property
    def splitting(self) -> float:
        return 2.0 * math.hypot(0.5 * self.epsilon, self.delta)


def reduce_to_two_level(phi: float, delta: float) -> TwoLevelSystem:
    """Two-level model near half flux: eps(phi) = 2 (phi - 1/2) in hbar*omega."""
    return TwoLevelSystem(2.0 * (phi - 0.5), delta)


def eigensystem(system: TwoLevelSystem):
    """Energies (ascending) and eigenvectors (as columns) of the static Hamiltonian."""
    energies, vecs = np.linalg.eigh(system.hamiltonian())
    # fix the global phase so the first nonzero component is real and positive
    for k in range(2):
        j = np.argmax(np.abs(vecs[:, k]) > 1e-12)
        vecs[:, k] *= np.exp(-1j * np.angle(vecs[j, k]))
    return energies, vecs


# -- noise and drives ------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """Chirality-flip rate and optional pure dephasing (both in 1/time).

    The flip channel has jump operator sqrt(gamma_flip) sigma_x, which relaxes
    R/L populations toward 1/2 at rate 2*gamma_flip.  Dephasing uses
    sqrt(gamma_phi/2) sigma_z, damping R/L coherence at rate gamma_phi.
    """

    gamma_flip: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        if self.gamma_flip < 0 or self.gamma_phi < 0:
            raise DomainError("noise rates must be non-negative")

    def jump_operators(self):
        ops = []
        if self.gamma_flip > 0:
            ops.append(math.sqrt(self.gamma_flip) * SIGMA_X)
        if self.gamma_phi > 0:
            ops.append(math.sqrt(0.5 * self.gamma_phi) * SIGMA_Z)
        return ops


@dataclass(frozen=True)
class ConstantEnvelope:
    def __call__(self, t):
        return np.ones_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class GaussianPulse:
    """Gaussian envelope of unit-area shape scaled to the given pulse area.

    With drive amplitude 1 the rotation angle on resonance equals ``area``.
    """

    t0: float
    sigma: float
    area: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("pulse width must be positive")

    def __call__(self, t):
        x = (np.asarray(t, dtype=float) - self.t0) / self.sigma
        return self.area * np.exp(-0.5 * x * x) / (self.sigma * math.sqrt(2 * math.pi))


@dataclass(frozen=True)
class FluxCoupled:
    """Detuning follows a flux program: eps(t) = 2 (phi(t) - 1/2)."""

    program: object

    def __call__(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def epsilon(self, t):
        return 2.0 * (np.asarray(self.program(t), dtype=float) - 0.5)


@dataclass(frozen=True)
class DriveProgram:
    """Carrier at ``frequency`` (cycles per time unit) with Rabi-rate envelope.

    The instantaneous angular Rabi rate is ``amplitude * envelope(t)``.
    """

    frequency: float
    amplitude: float = 1.0
    phase: float = 0.0
    envelope: object = field(default_factory=ConstantEnvelope)

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * self.frequency

    def rabi_rate(self, t):
        return self.amplitude * self.envelope(t)


def _is_static(drive) -> bool:
    if drive is None:
        return True
    return drive.amplitude == 0 and not isinstance(drive.envelope, FluxCoupled)


def hamiltonian_series(system: TwoLevelSystem, drive, t) -> np.ndarray:
    """Lab-frame Hamiltonian at each time in ``t``; shape (len(t), 2, 2)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if drive is not None and isinstance(drive.envelope, FluxCoupled):
        eps = drive.envelope.epsilon(t)
    else:
        eps = np.full_like(t, system.epsilon)
    hz = 0.5 * eps
    if drive is not None and drive.amplitude != 0:
        hz = hz + drive.rabi_rate(t) * np.cos(drive.angular_frequency * t + drive.phase)
    h = np.empty((t.size, 2, 2), dtype=complex)
    h[:, 0, 0] = hz
    h[:, 1, 1] = -hz
    h[:, 0, 1] = -system.delta
    h[:, 1, 0] = -system.delta
    return h


# -- propagation machinery ---------------------------------------------------------


def _expm_su2(k: np.ndarray) -> np.ndarray:
    """exp(-i K) for a stack of Hermitian 2x2 matrices K, exactly unitary."""
    k0 = 0.5 * (k[:, 0, 0] + k[:, 1, 1]).real
    kx = 0.5 * (k[:, 0, 1] + k[:, 1, 0]).real
    ky = 0.5 * (k[:, 1, 0] - k[:, 0, 1]).imag
    kz = 0.5 * (k[:, 0, 0] - k[:, 1, 1]).real
    norm = np.sqrt(kx * kx + ky * ky + kz * kz)
    c = np.cos(norm)
    s = np.sinc(norm / math.pi)  # sin(|k|)/|k|
    u = np.empty_like(k)
    u[:, 0, 0] = c - 1j * s * kz
    u[:, 1, 1] = c + 1j * s * kz
    u[:, 0, 1] = -1j * s * (kx - 1j * ky)
    u[:, 1, 0] = -1j * s * (kx + 1j * ky)
    return u * np.exp(-1j * k0)[:, None, None]


def _liouvillian(h: np.ndarray, jumps) -> np.ndarray:
    """Column-stacked Lindblad generator for a stack of Hamiltonians."""
    eye = np.eye(2)
    gen = -1j * (np.einsum("ij,nkl->nikjl", eye, h) - np.einsum("nji,kl->nikjl", h, eye))
    gen = gen.reshape(h.shape[0], 4, 4)
    for op in jumps:
        ldl = op.conj().T @ op
        diss = np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)
        gen = gen + diss[None]
    return gen


def _cumulative(steps: np.ndarray) -> np.ndarray:
    """Prefix products P_k ... P_1 P_0 of a stack of matrices (log-depth scan)."""
    acc = steps.copy()
    d = 1
    while d < acc.shape[0]:
        acc[d:] = acc[d:] @ acc[:-d]
        d *= 2
    return acc


def _tree_product(mats: np.ndarray) -> np.ndarray:
    """Ordered product along axis 1 (later factors on the left)."""
    while mats.shape[1] > 1:
        if mats.shape[1] % 2:
            pad = np.broadcast_to(np.eye(mats.shape[-1], dtype=mats.dtype), (mats.shape[0], 1) + mats.shape[2:])
            mats = np.concatenate([mats, pad], axis=1)
        mats = mats[:, 1::2] @ mats[:, 0::2]
    return mats[:, 0]


def _substep_grid(t_grid: np.ndarray, max_step: float):
    dt = np.diff(t_grid)
    nsub = max(1, int(math.ceil(dt.max() / max_step - 1e-12)))
    h = dt / nsub
    starts = t_grid[:-1, None] + h[:, None] * np.arange(nsub)[None, :]
    return starts, np.broadcast_to(h[:, None], starts.shape), nsub


def _magnus_interval_maps(hfunc, t_grid, max_step, jumps=None):
    """Fourth-order Magnus maps for each interval of ``t_grid``.

    Returns 2x2 unitaries when ``jumps`` is None, else 4x4 superoperators.
    """
    starts, h, nsub = _substep_grid(t_grid, max_step)
    flat_t, flat_h = starts.ravel(), h.ravel()
    h1 = hfunc(flat_t + _C1 * flat_h)
    h2 = hfunc(flat_t + _C2 * flat_h)
    hh = flat_h[:, None, None]
    if jumps is None:
        comm = h2 @ h1 - h1 @ h2
        # Omega = -i K with K Hermitian
        k = 0.5 * hh * (h1 + h2) - 1j * _MAGNUS_COMM * hh**2 * comm
        maps = _expm_su2(k)
    else:
        g1 = _liouvillian(h1, jumps)
        g2 = _liouvillian(h2, jumps)
        omega = 0.5 * hh * (g1 + g2) + _MAGNUS_COMM * hh**2 * (g2 @ g1 - g1 @ g2)
        maps = expm(omega)
    dim = maps.shape[-1]
    return _tree_product(maps.reshape(len(t_grid) - 1, nsub, dim, dim))


def _static_interval_maps(generator: np.ndarray, t_grid: np.ndarray, unitary: bool):
    dt = np.diff(t_grid)
    uniq, inverse = np.unique(dt, return_inverse=True)
    if unitary:
        maps = _expm_su2(uniq[:, None, None] * generator[None])
    else:
        maps = expm(uniq[:, None, None] * generator[None])
    return maps[inverse]


def _apply(maps: np.ndarray, v0: np.ndarray) -> np.ndarray:
    if maps.shape[0] == 0:
        return v0[None]
    cum = _cumulative(maps)
    return np.concatenate([v0[None], cum @ v0], axis=0)


def _default_step(hfunc, t_grid, drive) -> float:
    probe = np.linspace(t_grid[0], t_grid[-1], 257)
    scale = np.abs(np.linalg.eigvalsh(hfunc(probe))).max()
    if drive is not None:
        scale = max(scale, drive.angular_frequency)
    return 0.25 / max(scale, 1e-12)


def _controlled(run, t_grid, tol, max_step, first_step):
    """Run with step h and h/2; refine until the Richardson estimate meets tol."""
    allowed = tol * max(1.0, t_grid[-1] - t_grid[0])
    h = max_step if max_step is not None else first_step
    for _ in range(12):
        coarse = run(h)
        fine = run(0.5 * h)
        err = float(np.max(np.abs(fine - coarse))) * 16.0 / 15.0
        if err <= allowed:
            return fine
        suggestion = 0.5 * h * 0.8 * (allowed / err) ** 0.25
        if max_step is not None:
            raise AccuracyError(f"estimated error {err:.2e} exceeds {allowed:.2e}", suggested_step=suggestion)
        h = min(0.5 * h, suggestion * 2.0)
    raise AccuracyError(f"could not reach tolerance {tol:g}", suggested_step=h)


def _rk45(fun, y0, t_grid, tol, max_step):
    sol = solve_ivp(
        fun,
        (t_grid[0], t_grid[-1]),
        y0,
        method="RK45",
        t_eval=t_grid,
        rtol=tol,
        atol=tol * 1e-2,
        max_step=max_step if max_step is not None else np.inf,
    )
    if not sol.success:
        raise AccuracyError(f"RK45 integration failed: {sol.message}")
    return sol.y.T


def _check_grid(t_grid):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise DomainError("time grid must be a non-empty 1-D array")
    if np.any(np.diff(t_grid) <= 0):
        raise DomainError("time grid must be strictly increasing")
    return t_grid


# -- states and trajectories ---------------------------------------------------------


def check_state(state, tol: float = 1e-10) -> np.ndarray:
    """Validate a ket (shape (2,)) or density matrix (shape (2, 2))."""
    state = np.asarray(state, dtype=complex)
    if state.shape == (2,):
        if abs(np.vdot(state, state).real - 1.0) > tol:
            raise DomainError("state vector is not normalized")
    elif state.shape == (2, 2):
        if np.max(np.abs(state - state.conj().T)) > tol:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(state).real - 1.0) > tol:
            raise DomainError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(state).min() < -1e-12:
            raise DomainError("density matrix is not positive")
    else:
        raise DomainError(f"unexpected state shape {state.shape}")
    return state


def density_matrix(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


@dataclass(frozen=True)
class Trajectory:
    """Sampled states: kets of shape (N, 2) or density matrices (N, 2, 2)."""

    t: np.ndarray
    states: np.ndarray

    @property
    def is_pure(self) -> bool:
        return self.states.ndim == 2

    def density_matrices(self) -> np.ndarray:
        if self.is_pure:
            return np.einsum("ni,nj->nij", self.states, self.states.conj())
        return self.states

    def populations(self) -> np.ndarray:
        """(N, 2) array of p_R, p_L."""
        if self.is_pure:
            return np.abs(self.states) ** 2
        return np.stack([self.states[:, 0, 0].real, self.states[:, 1, 1].real], axis=1)

    def qubit_populations(self) -> np.ndarray:
        """(N, 2) array of p_0, p_1 in the symmetric/antisymmetric basis."""
        basis = np.stack([KET_0, KET_1], axis=1)
        rho = self.density_matrices()
        rot = np.einsum("ia,nij,jb->nab", basis.conj(), rho, basis)
        return np.stack([rot[:, 0, 0].real, rot[:, 1, 1].real], axis=1)

    def norms(self) -> np.ndarray:
        if self.is_pure:
            return np.sum(np.abs(self.states) ** 2, axis=1)
        return np.trace(self.states, axis1=1, axis2=2).real

    def purity(self) -> np.ndarray:
        rho = self.density_matrices()
        return np.einsum("nij,nji->n", rho, rho).real

    def min_eigenvalues(self) -> np.ndarray:
        rho = self.density_matrices()
        herm = 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))
        return np.linalg.eigvalsh(herm)[:, 0]

    def to_records(self) -> dict:
        """Columnar export; column order is fixed."""
        cols = {"t": self.t}
        if self.is_pure:
            cols["re_a_R"] = self.states[:, 0].real
            cols["im_a_R"] = self.states[:, 0].imag
            cols["re_a_L"] = self.states[:, 1].real
            cols["im_a_L"] = self.states[:, 1].imag
        else:
            for i, a in enumerate("RL"):
                for j, b in enumerate("RL"):
                    cols[f"re_rho_{a}{b}"] = self.states[:, i, j].real
                    cols[f"im_rho_{a}{b}"] = self.states[:, i, j].imag
        pops = self.populations()
        qpops = self.qubit_populations()
        cols["p_R"] = pops[:, 0]
        cols["p_L"] = pops[:, 1]
        cols["p_0"] = qpops[:, 0]
        cols["p_1"] = qpops[:, 1]
        cols["purity"] = self.purity()
        return cols


# -- evolution -----------------------------------------------------------------------


def _rwa_evolve(psi0, system, drive, t_grid, tol, max_step):
    if isinstance(drive.envelope, FluxCoupled):
        raise DomainError("RWA path needs a static detuning")
    energies, vecs = eigensystem(system)
    wq = energies[1] - energies[0]
    wd = drive.angular_frequency
    detuning = wd - wq
    m = (vecs.conj().T @ SIGMA_Z @ vecs)[0, 1]
    coupling = 0.5 * m * np.exp(1j * drive.phase)

    def hfunc(t):
        r = drive.rabi_rate(t)
        h = np.zeros((t.size, 2, 2), dtype=complex)
        h[:, 0, 0] = 0.5 * detuning
        h[:, 1, 1] = -0.5 * detuning
        h[:, 0, 1] = r * coupling
        h[:, 1, 0] = r * np.conj(coupling)
        return h

    def frame(t):
        # lab eigenbasis amplitudes = frame(t) @ rotating amplitudes
        return np.exp(0.5j * wd * t)[:, None] * np.stack([np.ones_like(t), np.exp(-1j * wd * t)], axis=1)

    t0 = t_grid[:1]
    tilde0 = (vecs.conj().T @ psi0) / frame(t0)[0]
    if isinstance(drive.envelope, ConstantEnvelope):
        maps = _static_interval_maps(hfunc(t0)[0], t_grid, unitary=True)
        tilde = _apply(maps, tilde0)
    else:
        def run(h):
            return _apply(_magnus_interval_maps(hfunc, t_grid, h), tilde0)

        first = 0.25 / max(abs(detuning) + abs(drive.amplitude), 1e-12)
        tilde = _controlled(run, t_grid, tol, max_step, first)
    eig = frame(t_grid) * tilde
    return eig @ vecs.T


def evolve_unitary(
    state,
    system: TwoLevelSystem,
    drive: DriveProgram | None,
    t_grid,
    *,
    tol: float = DEFAULT_TOL,
    max_step: float | None = None,
    rwa: bool = False,
    method: str = "magnus4",
) -> Trajectory:
    """Solve the Schroedinger equation for a ket sampled on ``t_grid``.

    ``method="magnus4"`` (default) uses a fourth-order Magnus integrator, which
    is exactly unitary; the step is refined until a step-doubling error
    estimate meets ``tol`` per unit time.  If ``max_step`` is given and too
    coarse, AccuracyError reports a suitable step instead.  ``method="rk45"``
    uses adaptive Dormand-Prince stepping.  ``rwa=True`` takes the
    rotating-wave fast path (approximate, for cross-checks).
    """
    psi0 = check_state(state)
    if psi0.ndim != 1:
        raise DomainError("evolve_unitary needs a state vector")
    t_grid = _check_grid(t_grid)
    if rwa:
        if drive is None:
            raise DomainError("RWA path requires a drive")
        return Trajectory(t_grid, _rwa_evolve(psi0, system, drive, t_grid, tol, max_step))

    def hfunc(t):
        return hamiltonian_series(system, drive, t)

    if method == "rk45":
        def rhs(t, y):
            psi = y[:2] + 1j * y[2:]
            d = -1j * (hfunc(np.array([t]))[0] @ psi)
            return np.concatenate([d.real, d.imag])

        y = _rk45(rhs, np.concatenate([psi0.real, psi0.imag]), t_grid, tol, max_step)
        return Trajectory(t_grid, y[:, :2] + 1j * y[:, 2:])
    if method != "magnus4":
        raise DomainError(f"unknown method {method!r}")

    if _is_static(drive):
        maps = _static_interval_maps(system.hamiltonian(), t_grid, unitary=True)
        return Trajectory(t_grid, _apply(maps, psi0))

    def run(h):
        return _apply(_magnus_interval_maps(hfunc, t_grid, h), psi0)

    states = _controlled(run, t_grid, tol, max_step, _default_step(hfunc, t_grid, drive))
    return Trajectory(t_grid, states)


def evolve_dissipative(
    rho,
    system: TwoLevelSystem,
    drive: DriveProgram | None,
    noise: NoiseModel,
    t_grid,
    *,
    tol: float = DEFAULT_TOL,
    max_step: float | None = None,
    method: str = "magnus4",
) -> Trajectory:
    """Lindblad evolution of a density matrix with chirality-flip noise.

    Accepts a ket for convenience.  Step control matches :func:`evolve_unitary`.
    """
    rho0 = check_state(rho)
    if rho0.ndim == 1:
        rho0 = density_matrix(rho0)
    t_grid = _check_grid(t_grid)
    jumps = noise.jump_operators()
    v0 = rho0.reshape(-1, order="F")

    def hfunc(t):
        return hamiltonian_series(system, drive, t)

    def unvec(v):
        return v.reshape(-1, 2, 2).transpose(0, 2, 1)

    if method == "rk45":
        def rhs(t, y):
            g = _liouvillian(hfunc(np.array([t])), jumps)[0]
            d = g @ (y[:4] + 1j * y[4:])
            return np.concatenate([d.real, d.imag])

        y = _rk45(rhs, np.concatenate([v0.real, v0.imag]), t_grid, tol, max_step)
        return Trajectory(t_grid, unvec(y[:, :4] + 1j * y[:, 4:]))
    if method != "magnus4":
        raise DomainError(f"unknown method {method!r}")

    if _is_static(drive):
        gen = _liouvillian(system.hamiltonian()[None], jumps)[0]
        maps = _static_interval_maps(gen, t_grid, unitary=False)
        return Trajectory(t_grid, unvec(_apply(maps, v0)))

    def run(h):
        return _apply(_magnus_interval_maps(hfunc, t_grid, h, jumps), v0)

    states = _controlled(run, t_grid, tol, max_step, _default_step(hfunc, t_grid, drive))
    return Trajectory(t_grid, unvec(states))


# -- protocols -------------------------------------------------------------------------


def landau_zener_sweep(
    delta: float,
    rate: float,
    span=None,
    *,
    tol: float = 1e-9,
) -> float:
    """Probability of a non-adiabatic transition in a linear sweep of eps.

    eps runs from ``span[0]`` to ``span[1]`` at ``rate`` (energy per time).
    The state starts in the instantaneous ground state and the result is the
    final excited-state population, which approaches exp(-2 pi delta^2 / rate).
    The default span is +-100*delta.
    """
    if not (delta > 0 and rate > 0):
        raise DomainError("delta and sweep rate must be positive")
    if span is None:
        span = (-100.0 * delta, 100.0 * delta)
    e_start, e_end = span
    if not (e_start < 0 < e_end) or min(-e_start, e_end) < 10.0 * delta:
        raise DomainError(f"sweep span {span} must cover eps = 0 with |eps| >= 10*delta at both ends")

    duration = (e_end - e_start) / rate
    system = TwoLevelSystem(0.0, delta)

    def hfunc(t):
        eps = e_start + rate * t
        h = np.zeros((t.size, 2, 2), dtype=complex)
        h[:, 0, 0] = 0.5 * eps
        h[:, 1, 1] = -0.5 * eps
        h[:, 0, 1] = h[:, 1, 0] = -delta
        return h

    _, start = eigensystem(TwoLevelSystem(e_start, delta))
    _, end = eigensystem(TwoLevelSystem(e_end, delta))
    t_grid = np.array([0.0, duration])
    psi0 = start[:, 0]

    def run(h):
        return _apply(_magnus_interval_maps(hfunc, t_grid, h), psi0)

    first = 0.25 / max(abs(e_start), abs(e_end), system.delta)
    psi = _controlled(run, t_grid, tol, None, first)[-1]
    return float(abs(np.vdot(end[:, 1], psi)) ** 2)


def dominant_frequency(t, signal, oversample: int = 16) -> float:
    """Frequency (cycles per time unit) of the highest peak in the spectrum.

    Uses a Hann window, zero padding and a bounded search of the windowed DTFT
    around the coarse FFT peak.  Requires a uniform grid.
    """
    from scipy.optimize import minimize_scalar

    t = np.asarray(t, dtype=float)
    x = np.asarray(signal, dtype=float)
    dt = t[1] - t[0]
    if np.max(np.abs(np.diff(t) - dt)) > 1e-9 * max(1.0, abs(dt)):
        raise DomainError("dominant_frequency needs a uniform time grid")
    x = (x - x.mean()) * np.hanning(x.size)
    n = oversample * x.size
    power = np.abs(np.fft.rfft(x, n))
    freqs = np.fft.rfftfreq(n, dt)
    k = int(np.argmax(power[1:])) + 1
    df = freqs[1] - freqs[0]

    def neg_power(f):
        return -abs(np.sum(x * np.exp(-2j * math.pi * f * (t - t[0]))))

    res = minimize_scalar(neg_power, bounds=(max(freqs[k] - df, 0.0), freqs[k] + df), method="bounded",
                          options={"xatol": 1e-10 * max(freqs[k], 1.0)})
    return float(res.x)


@dataclass(frozen=True)
class CoherenceReport:
    """Coherence time versus gate time for a chirality-flip rate and gate frequency.

    ``analytic_ratio`` is f_gate / gamma and ``angular_ratio`` is
    2 pi f_gate / gamma; which convention a "gate time" ratio refers to is
    ambiguous, so both are reported.  ``simulated_oscillations`` counts coherent
    R<->L oscillations at f_gate before their envelope falls to 1/e.
    """

    gamma: float
    gate_frequency: float
    analytic_ratio: float
    angular_ratio: float
    simulated_oscillations: float | None
    decay_time: float | None

    @property
    def agreement_factor(self) -> float | None:
        if not self.simulated_oscillations:
            return None
        return self.analytic_ratio / self.simulated_oscillations

    @property
    def within_two_pi(self) -> bool | None:
        f = self.agreement_factor
        if f is None:
            return None
        return 1.0 / (2 * math.pi) <= f <= 2 * math.pi

    def as_dict(self) -> dict:
        return {
            "gamma_flip_hz": self.gamma,
            "gate_frequency_hz": self.gate_frequency,
            "analytic_ratio": self.analytic_ratio,
            "angular_ratio": self.angular_ratio,
            "simulated_oscillations": self.simulated_oscillations,
            "decay_time_s": self.decay_time,
            "agreement_factor": self.agreement_factor,
            "within_two_pi": self.within_two_pi,
        }


def decay_oscillation_count(t, signal, period: float) -> float | None:
    """Oscillations (in units of ``period``) before the envelope drops to 1/e.

    The envelope is the per-period maximum of |signal|; returns None if it
    never falls below 1/e of its first value.
    """
    t = np.asarray(t, dtype=float)
    n_per = int(round(period / (t[1] - t[0])))
    nbins = (t.size - 1) // n_per
    env = np.abs(signal[: nbins * n_per]).reshape(nbins, n_per).max(axis=1)
    target = env[0] / math.e
    below = np.nonzero(env < target)[0]
    if below.size == 0:
        return None
    k = below[0]
    # log-linear interpolation between bin k-1 and bin k
    centers = (np.arange(nbins) + 0.5) * period
    lo, hi = np.log(env[k - 1]), np.log(env[k])
    frac = (lo - np.log(target)) / (lo - hi)
    crossing = centers[k - 1] + frac * period - 0.5 * period
    return float(crossing / period)


def simulate_coherence(
    gamma: float,
    gate_frequency: float,
    *,
    samples_per_period: int = 32,
    chunk_periods: int = 2000,
    max_periods: float | None = None,
) -> tuple:
    """Coherent R<->L tunneling at ``gate_frequency`` under chirality-flip noise.

    Time is measured in gate periods, so Delta = pi and the flip rate becomes
    gamma / gate_frequency.  Starting from |R>, the chirality <sigma_z>(t) is
    propagated in chunks until its envelope falls below 1/e.  Returns
    (oscillation count, trajectory of the final chunk's <sigma_z>).
    """
    if not (gamma > 0 and gate_frequency > 0):
        raise DomainError("gamma and gate frequency must be positive")
    g = gamma / gate_frequency
    system = TwoLevelSystem(0.0, math.pi)
    noise = NoiseModel(gamma_flip=g)
    if max_periods is None:
        max_periods = 20.0 / g
    dt = 1.0 / samples_per_period
    rho = density_matrix(KET_R)
    t_all, z_all = [0.0], [1.0]
    start = 0.0
    while start < max_periods:
        n = chunk_periods * samples_per_period
        grid = start + dt * np.arange(n + 1)
        traj = evolve_dissipative(rho, system, None, noise, grid)
        pops = traj.populations()
        t_all.extend(grid[1:])
        z_all.extend(pops[1:, 0] - pops[1:, 1])
        rho = traj.states[-1]
        start = grid[-1]
        count = decay_oscillation_count(np.array(t_all), np.array(z_all), 1.0)
        if count is not None:
            return count, (np.array(t_all), np.array(z_all))
    return None, (np.array(t_all), np.array(z_all))


def coherence_gate_ratio(gamma: float, gate_frequency: float, simulate: bool = True, **kwargs) -> CoherenceReport:
    """Coherence-to-gate-time figure of merit, analytic and (optionally) simulated.

    ``gamma`` is the chirality-flip rate (1/s) and ``gate_frequency`` the gate
    scale (Hz).
    """
    if not (gamma > 0 and gate_frequency > 0):
        raise DomainError("gamma and gate frequency must be positive")
    count = decay = None
    if simulate:
        count, _ = simulate_coherence(gamma, gate_frequency, **kwargs)
        if count is not None:
            decay = count / gate_frequency
    return CoherenceReport(
        gamma=gamma,
        gate_frequency=gate_frequency,
        analytic_ratio=gate_frequency / gamma,
        angular_ratio=2 * math.pi * gate_frequency / gamma,
        simulated_oscillations=count,
        decay_time=decay,
    )
