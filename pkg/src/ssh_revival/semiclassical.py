"""Closed-form dissipative dynamics in the mode-occupation (semiclassical) picture.

Every initially occupied bulk mode decays independently at rate ``gamma / 2``;
the edge mode never decays.  The state is therefore an incoherent mixture of
mode-occupation eigenstates with product weights, which for fermions is a
Gaussian state fixed by the single-particle Green's function
``G_ij = <f_i f_j^dagger>``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .chain import ModeBasis
from .fock import BOSE, FERMI, FockSpace, ResourceError, fock_dimension
from .states import DensityOperator

DENSE_DIM_CAP = 6000
KERNEL_CLAMP = 1e-12


def survival(t, gamma: float):
    """Probability ``exp(-gamma t / 2)`` that a bulk mode is still occupied."""
    return np.exp(-0.5 * gamma * np.asarray(t, dtype=float))


def occupancy_probability(m: int, t, n: int, gamma: float):
    """Probability of one particular eigenstate with ``m - 1`` bulk particles.

    ``n`` is the number of initially occupied bulk modes; the edge particle is
    always present, so the state holds ``m`` particles in total.
    """
    if not 1 <= m <= n + 1:
        raise ValueError(f"m must lie in [1, {n + 1}], got {m}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    s = survival(t, gamma)
    # numpy gives 0.0 ** 0 == 1.0, which is the fully occupied pattern at t = 0
    return s ** (m - 1) * (1.0 - s) ** (n - (m - 1))


@dataclass(frozen=True)
class PopulationLaw:
    """Eigenstate populations for ``n`` independently decaying modes."""

    n: int
    gamma: float

    def state_probability(self, m: int, t):
        return occupancy_probability(m, t, self.n, self.gamma)

    def aggregate(self, m: int, t):
        """Total probability of holding ``m`` particles (all eigenstates summed)."""
        return math.comb(self.n, m - 1) * self.state_probability(m, t)

    def aggregates(self, t) -> np.ndarray:
        """Array of shape ``(n + 1, len(t))`` with rows ``m = 1..n+1``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([self.aggregate(m, t) for m in range(1, self.n + 2)])


@dataclass(frozen=True)
class ModeOccupation:
    """Set of normal modes occupied (singly) in the initial state."""

    occupied: frozenset

    def __post_init__(self):
        object.__setattr__(self, "occupied", frozenset(int(k) for k in self.occupied))
        if 0 not in self.occupied:
            raise ValueError("the edge mode k = 0 must be initially occupied")

    @classmethod
    def ground(cls, n: int) -> "ModeOccupation":
        """Edge mode plus every negative-energy mode."""
        return cls(frozenset(range(-n, 1)))

    @classmethod
    def all_modes(cls, n: int) -> "ModeOccupation":
        return cls(frozenset(range(-n, n + 1)))

    def n_k(self, k: int) -> int:
        return int(k in self.occupied)

    def decaying(self) -> tuple:
        """Occupied bulk modes in ascending order."""
        return tuple(sorted(k for k in self.occupied if k != 0))

    def check(self, n: int) -> None:
        bad = [k for k in self.occupied if not -n <= k <= n]
        if bad:
            raise ValueError(f"mode indices {bad} outside [-{n}, {n}]")


def _occupation(occ, n):
    occ = ModeOccupation.ground(n) if occ is None else occ
    occ.check(n)
    return occ


def mode_correlation(k: int, t, gamma: float, occ: ModeOccupation | None = None, n: int | None = None):
    """``chi_k(t) = <C_k C_k^dagger>``."""
    if occ is None:
        if n is None:
            raise ValueError("need either occ or n")
        occ = ModeOccupation.ground(n)
    if k == 0:
        return np.zeros_like(np.asarray(t, dtype=float))
    return 1.0 - occ.n_k(k) * survival(t, gamma)


def mode_correlations(basis: ModeBasis, t: float, occ: ModeOccupation | None = None) -> np.ndarray:
    """``chi_k(t)`` for every row of ``basis.U``."""
    occ = _occupation(occ, basis.n)
    s = float(survival(t, basis.params.gamma))
    occupied = np.array([occ.n_k(k) for k in basis.mode_indices], dtype=float)
    chi = 1.0 - occupied * s
    chi[basis.n] = 0.0
    return chi


@dataclass(frozen=True)
class GreenFunction:
    """Single-particle correlator ``G_ij = <f_i f_j^dagger>`` at time ``t``."""

    G: np.ndarray
    t: float = 0.0

    @property
    def L(self) -> int:
        return self.G.shape[0]

    def particle_number(self) -> float:
        return float(self.L - np.trace(self.G))

    def restrict(self, sites) -> "GreenFunction":
        idx = np.asarray(sites, dtype=int)
        return GreenFunction(self.G[np.ix_(idx, idx)], self.t)


def green_function(basis: ModeBasis, t: float, occ: ModeOccupation | None = None) -> GreenFunction:
    """Green's function of the semiclassical state, ``U^T diag(chi) U``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    chi = mode_correlations(basis, t, occ)
    G = (basis.U.T * chi) @ basis.U
    return GreenFunction(0.5 * (G + G.T), float(t))


def gaussian_kernel(green: GreenFunction, clamp: float = KERNEL_CLAMP, tol: float = 1e-10) -> np.ndarray:
    """Kernel ``K = ln[(1 - G) G^-1]`` of the Gaussian form of the state.

    Eigenvalues of ``G`` are clamped to ``[clamp, 1 - clamp]``; a
    ``RuntimeWarning`` is emitted when that changes anything.
    """
    G = np.asarray(green.G if isinstance(green, GreenFunction) else green)
    lam, V = np.linalg.eigh(0.5 * (G + G.T))
    if lam.min() < -tol or lam.max() > 1 + tol:
        raise ValueError(f"G has eigenvalues outside [0, 1]: [{lam.min()}, {lam.max()}]")
    clipped = np.clip(lam, clamp, 1.0 - clamp)
    if np.any(clipped != lam):
        warnings.warn("G has eigenvalues at 0 or 1; kernel computed with clamped spectrum", RuntimeWarning, stacklevel=2)
    K = (V * np.log((1.0 - clipped) / clipped)) @ V.T
    return 0.5 * (K + K.T)


class SemiclassicalEnsemble:
    """Mode-occupation eigenstates and their closed-form weights.

    The state at time ``t`` is ``sum_S w_S(t) |S + edge><S + edge|`` where
    ``S`` runs over subsets of the initially occupied bulk modes, enumerated
    by size and then lexicographically.  Eigenstate vectors are stored per
    particle-number sector of ``space``.
    """

    def __init__(
        self,
        basis: ModeBasis,
        statistics: str = FERMI,
        occ: ModeOccupation | None = None,
        cap: int = DENSE_DIM_CAP,
    ):
        self.cap = cap
        if statistics not in (FERMI, BOSE):
            raise ValueError(f"unknown statistics {statistics!r}")
        self.basis = basis
        self.statistics = statistics
        self.occ = _occupation(occ, basis.n)
        self.modes = self.occ.decaying()
        self.law = PopulationLaw(len(self.modes), basis.params.gamma)
        self.space = FockSpace(statistics, basis.L, max_total=len(self.modes) + 1)
        self.subsets = [s for m in range(len(self.modes) + 1) for s in itertools.combinations(self.modes, m)]
        self._build()

    def _build(self):
        space, U, n = self.space, self.basis.U, self.basis.n
        edge = space.apply_mode_creation(U[n], np.ones(1), 0)
        cache = {(): edge}
        for s in self.subsets[1:]:
            parent = cache[s[:-1]]
            cache[s] = space.apply_mode_creation(U[s[-1] + n], parent, len(s))
        self.vectors = [cache[s] for s in self.subsets]
        self.sizes = np.array([len(s) for s in self.subsets])

    def __len__(self):
        return len(self.subsets)

    def sector(self, i: int) -> int:
        return int(self.sizes[i]) + 1

    def full_vector(self, i: int) -> np.ndarray:
        return self.space.embed(self.sector(i), self.vectors[i])

    def weights(self, t: float) -> np.ndarray:
        """Weight of every stored eigenstate at time ``t``."""
        return np.array([self.law.state_probability(int(m) + 1, t) for m in self.sizes])

    def size_weights(self, t: float) -> np.ndarray:
        """``P_{m+1}(t)`` for ``m = 0..n_occ`` (per-state weight by bulk count)."""
        return np.array([self.law.state_probability(m + 1, t) for m in range(self.law.n + 1)])

    def _check_dense(self, cap: int):
        if self.space.dim > cap:
            raise ResourceError(
                f"dense {self.statistics} state on L={self.basis.L} needs Fock dimension "
                f"{self.space.dim} > cap {cap}"
            )

    @cached_property
    def projectors_by_size(self) -> list:
        """``R_m = sum_{|S| = m} |S><S|`` as dense matrices, ``m = 0..n_occ``."""
        self._check_dense(self.cap)
        dim = self.space.dim
        out = [np.zeros((dim, dim)) for _ in range(self.law.n + 1)]
        for i, m in enumerate(self.sizes):
            v = self.full_vector(i)
            out[m] += np.outer(v, v)
        return out

    def density(self, t: float) -> DensityOperator:
        self._check_dense(self.cap)
        P = self.size_weights(t)
        rho = sum(p * R for p, R in zip(P, self.projectors_by_size))
        return DensityOperator(rho, self.space, float(t))


def semiclassical_density_operator(
    basis: ModeBasis,
    t: float,
    statistics: str = FERMI,
    occ: ModeOccupation | None = None,
    cap: int = DENSE_DIM_CAP,
) -> DensityOperator:
    """Dense semiclassical state of the chain at time ``t``."""
    occ = _occupation(occ, basis.n)
    dim = fock_dimension(statistics, basis.L, len(occ.occupied))
    if dim > cap:
        raise ResourceError(f"dense {statistics} state on L={basis.L} needs Fock dimension {dim} > cap {cap}")
    return SemiclassicalEnsemble(basis, statistics, occ, cap).density(t)


def steady_state(basis: ModeBasis, statistics: str = FERMI) -> DensityOperator:
    """Pure edge state ``C_0^dagger |vac><vac| C_0``."""
    space = FockSpace(statistics, basis.L, max_total=1)
    psi = space.embed(1, space.apply_mode_creation(basis.edge, np.ones(1), 0))
    return DensityOperator.pure(psi, space)
