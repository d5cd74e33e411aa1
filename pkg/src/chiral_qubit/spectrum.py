"""Single-particle spectrum of chiral fermions on a flux-threaded ring.

Right-handed modes have E = +(n + phi), left-handed modes E = -(n + phi), in
units of hbar*omega with phi = Phi/Phi_0.  Every mode carries the persistent
current -dE/dPhi = -chi/(2 pi) (units of e*omega), independent of n.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from chiral_qubit.errors import DomainError

MAX_MODE_INDEX = 2**31 - 1
#: Absolute tolerance for window-edge membership and degeneracy comparisons.
EDGE_TOL = 1e-12


class Branch(enum.Enum):
    RIGHT = "R"
    LEFT = "L"

    @property
    def chirality(self) -> int:
        """Eigenvalue of sigma_z (= gamma_5): +1 for R, -1 for L."""
        return 1 if self is Branch.RIGHT else -1


def _check_index(n):
    if abs(n) > MAX_MODE_INDEX:
        raise DomainError(f"mode index {n} exceeds |n| <= {MAX_MODE_INDEX}")


def level_energy(n: int, branch: Branch, phi: float) -> float:
    """Energy of mode ``n`` of ``branch`` at flux ratio ``phi`` (hbar*omega)."""
    _check_index(n)
    return branch.chirality * (n + phi)


def level_current(branch: Branch) -> float:
    """Persistent current of any mode of ``branch`` (e*omega units)."""
    return -branch.chirality / (2.0 * math.pi)


@dataclass(frozen=True)
class Level:
    n: int
    branch: Branch
    energy: float

    @property
    def current(self) -> float:
        return level_current(self.branch)


@dataclass(frozen=True)
class SpectrumWindow:
    phi: float
    e_min: float
    e_max: float
    levels: tuple = field(default_factory=tuple)

    def branch_levels(self, branch: Branch) -> list:
        return [lv for lv in self.levels if lv.branch is branch]

    def energies(self, branch: Branch | None = None) -> np.ndarray:
        if branch is None:
            return np.array([lv.energy for lv in self.levels])
        return np.array([lv.energy for lv in self.levels if lv.branch is branch])

    def __len__(self):
        return len(self.levels)


def mode_range(branch: Branch, phi: float, e_min: float, e_max: float) -> range:
    """Mode indices of ``branch`` whose energy lies in [e_min, e_max]."""
    if branch is Branch.RIGHT:
        lo, hi = e_min - phi, e_max - phi
    else:
        lo, hi = -e_max - phi, -e_min - phi
    n_lo = math.ceil(lo - EDGE_TOL)
    n_hi = math.floor(hi + EDGE_TOL)
    _check_index(n_lo)
    _check_index(n_hi)
    return range(n_lo, n_hi + 1)


def enumerate_window(phi: float, e_min: float, e_max: float) -> SpectrumWindow:
    """All levels of both branches with energy in the closed window.

    Levels are sorted by energy; at equal energy R precedes L.
    """
    if not e_min < e_max:
        raise DomainError(f"empty window [{e_min}, {e_max}]")
    levels = [
        Level(n, b, level_energy(n, b, phi))
        for b in (Branch.RIGHT, Branch.LEFT)
        for n in mode_range(b, phi, e_min, e_max)
    ]
    levels.sort(key=lambda lv: (lv.energy, lv.branch is Branch.LEFT))
    return SpectrumWindow(phi, e_min, e_max, tuple(levels))


@dataclass(frozen=True)
class KramersReport:
    """R/L degeneracy of a spectrum window.  Truthy iff the spectra coincide."""

    phi: float
    degenerate: bool
    right_energies: tuple
    left_energies: tuple
    max_mismatch: float

    def __bool__(self):
        return self.degenerate


def kramers_check(phi: float, e_min: float = -3.0, e_max: float = 3.0) -> KramersReport:
    """Compare the multisets of R and L energies in the window."""
    win = enumerate_window(phi, e_min, e_max)
    right = np.sort(win.energies(Branch.RIGHT))
    left = np.sort(win.energies(Branch.LEFT))
    if right.size != left.size:
        degenerate, mismatch = False, math.inf
    elif right.size == 0:
        degenerate, mismatch = True, 0.0
    else:
        mismatch = float(np.max(np.abs(right - left)))
        degenerate = mismatch <= EDGE_TOL
    return KramersReport(phi, degenerate, tuple(right), tuple(left), mismatch)
