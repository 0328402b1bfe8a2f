"""Half-SSH chain: hopping matrix, normal modes and the zero-energy edge mode.

Sites are labelled ``0 .. L-1``.  Even sites form one sublattice and carry the
edge mode; odd sites are the lossy sublattice.  Normal modes are indexed by
``k = -n .. n`` with ``n = (L - 1) // 2``; row ``k + n`` of ``ModeBasis.U``
holds the site amplitudes of mode ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Real

import numpy as np


@dataclass(frozen=True)
class ChainParams:
    """Physical scenario of a dissipative half-SSH chain.

    Parameters
    ----------
    L : int
        Odd chain length, at least 3.
    g1, g2 : float
        Intra- and inter-cell hopping (real, positive).
    gamma : float
        Loss rate on the odd sites, non-negative.
    """

    L: int
    g1: float
    g2: float = 1.0
    gamma: float = 0.1

    def __post_init__(self):
        if isinstance(self.L, bool) or not isinstance(self.L, (int, np.integer)):
            raise TypeError(f"L must be an integer, got {self.L!r}")
        if self.L < 3 or self.L % 2 == 0:
            raise ValueError(f"L must be odd and >= 3, got {self.L}")
        for name in ("g1", "g2", "gamma"):
            value = getattr(self, name)
            if not isinstance(value, Real):
                raise TypeError(f"{name} must be real, got {value!r}")
        if not (self.g1 > 0 and self.g2 > 0):
            raise ValueError(f"couplings must be positive, got g1={self.g1}, g2={self.g2}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        object.__setattr__(self, "L", int(self.L))

    @property
    def n(self) -> int:
        """Number of complete two-site unit cells."""
        return (self.L - 1) // 2

    @property
    def ratio(self) -> float:
        return self.g1 / self.g2


@dataclass(frozen=True)
class ModeBasis:
    """Normal-mode data of a half-SSH chain.

    ``energies[k-1]`` and ``phases[k-1]`` belong to mode ``k = 1..n``.
    ``A`` has rows ``k = 0..n`` (row 0 is the edge mode) and columns over even
    sites ``2i``; ``B`` has rows ``k = 1..n`` and columns over odd sites
    ``2i - 1``.  ``U`` is the full ``L x L`` orthogonal site-to-mode matrix.
    """

    params: ChainParams
    energies: np.ndarray
    phases: np.ndarray
    A: np.ndarray
    B: np.ndarray
    U: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def L(self) -> int:
        return self.params.L

    def row(self, k: int) -> int:
        """Row of ``U`` holding mode ``k``."""
        if not -self.n <= k <= self.n:
            raise IndexError(f"mode index {k} outside [-{self.n}, {self.n}]")
        return k + self.n

    def mode(self, k: int) -> np.ndarray:
        return self.U[self.row(k)]

    @property
    def mode_indices(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)

    @property
    def mode_energies(self) -> np.ndarray:
        """Energies aligned with the rows of ``U``: ``(-eps_n..-eps_1, 0, eps_1..eps_n)``."""
        return np.concatenate([-self.energies[::-1], [0.0], self.energies])

    @property
    def edge(self) -> np.ndarray:
        """Site amplitudes of the zero-energy edge mode."""
        return self.U[self.n]


def single_particle_hamiltonian(params: ChainParams) -> np.ndarray:
    """Tridiagonal hopping matrix with bonds ``g1, g2, g1, g2, ...`` from site 0."""
    bonds = np.where(np.arange(params.L - 1) % 2 == 0, params.g1, params.g2).astype(float)
    return np.diag(bonds, 1) + np.diag(bonds, -1)


def edge_amplitudes(params: ChainParams) -> np.ndarray:
    """Normalized edge-mode amplitudes on the even sites ``0, 2, ..., L-1``."""
    r = params.g1 / params.g2
    i = np.arange(params.n + 1)
    amp = (-r) ** i
    # closed-form norm breaks down at r == 1
    if abs(1.0 - r) > 1e-8:
        norm = math.sqrt((1 - r**2) / (1 - r ** (params.L + 1)))
    else:
        norm = 1.0 / math.sqrt(np.sum(amp**2))
    return norm * amp


def build_mode_basis(params: ChainParams) -> ModeBasis:
    """Closed-form normal modes of the half-SSH chain."""
    L, n = params.L, params.n
    g1, g2 = params.g1, params.g2
    k = np.arange(1, n + 1)
    kt = 2 * np.pi * k / (L + 1)
    eps = np.sqrt(g1**2 + g2**2 + 2 * g1 * g2 * np.cos(kt))
    phases = np.arccos(np.clip((g1 * np.cos(kt) + g2) / eps, -1.0, 1.0))

    norm = math.sqrt(2.0 / (L + 1))
    i_even = np.arange(n + 1)
    i_odd = np.arange(1, n + 1)
    A = np.empty((n + 1, n + 1))
    A[0] = edge_amplitudes(params)
    A[1:] = norm * np.sin(np.outer(kt, i_even) + phases[:, None])
    B = norm * np.sin(np.outer(kt, i_odd))

    U = np.zeros((L, L))
    even = 2 * i_even
    odd = 2 * i_odd - 1
    U[n, even] = A[0]
    pos = n + k
    neg = n - k
    U[np.ix_(pos, even)] = A[1:]
    U[np.ix_(neg, even)] = A[1:]
    U[np.ix_(pos, odd)] = B
    U[np.ix_(neg, odd)] = -B
    return ModeBasis(params=params, energies=eps, phases=phases, A=A, B=B, U=U)


def localization_length(params_or_ratio) -> float:
    """Edge-mode localization length ``2 / ln(g2/g1) + 1``.

    Accepts either a :class:`ChainParams` or the bare ratio ``g1/g2``.
    Raises ``ValueError`` outside the topological phase ``g1 < g2``.
    """
    if isinstance(params_or_ratio, ChainParams):
        ratio = params_or_ratio.ratio
    else:
        ratio = float(params_or_ratio)
    if not ratio > 0:
        raise ValueError(f"coupling ratio must be positive, got {ratio}")
    if ratio >= 1:
        raise ValueError(f"no edge mode outside the topological phase (g1/g2 = {ratio} >= 1)")
    return 2.0 / math.log(1.0 / ratio) + 1.0
