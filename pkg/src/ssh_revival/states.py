"""Dense many-body density operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FockSpace


@dataclass(frozen=True)
class DensityOperator:
    """Dense density matrix on a :class:`FockSpace` at time ``t``."""

    rho: np.ndarray
    space: FockSpace
    t: float = 0.0

    def __post_init__(self):
        if self.rho.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"rho has shape {self.rho.shape}, space has dim {self.space.dim}")

    @classmethod
    def pure(cls, psi: np.ndarray, space: FockSpace, t: float = 0.0) -> "DensityOperator":
        psi = np.asarray(psi)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), space, t)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))

    def expect(self, op) -> complex:
        """``Tr[rho op]`` for a dense or sparse operator."""
        return complex(np.sum(self.rho.T * (op.toarray() if hasattr(op, "toarray") else op)))

    def number_conserving(self, tol: float = 0.0) -> bool:
        """True when ``rho`` has no coherence between particle-number sectors."""
        n = self.space.particle_numbers
        return bool(np.all(np.abs(self.rho[n[:, None] != n[None, :]]) <= tol))

    def eigvalsh(self) -> np.ndarray:
        """Ascending spectrum; solved sector by sector when that is exact."""
        herm = 0.5 * (self.rho + self.rho.conj().T)
        if not self.number_conserving():
            return np.linalg.eigvalsh(herm)
        parts = []
        for p in range(self.space.max_total + 1):
            sl = self.space.sector_slice(p)
            if sl.stop > sl.start:
                parts.append(np.linalg.eigvalsh(herm[sl, sl]))
        return np.sort(np.concatenate(parts))

    def check(self, herm_tol: float = 1e-12, trace_tol: float = 1e-10, pos_tol: float = 1e-10) -> None:
        """Raise ``ValueError`` unless the matrix is a valid density operator."""
        herm = np.abs(self.rho - self.rho.conj().T).max() if self.rho.size else 0.0
        if herm > herm_tol:
            raise ValueError(f"rho not Hermitian (max deviation {herm:.2e})")
        if abs(self.trace - 1.0) > trace_tol:
            raise ValueError(f"trace of rho is {self.trace!r}")
        lowest = self.eigvalsh().min()
        if lowest < -pos_tol:
            raise ValueError(f"rho has negative eigenvalue {lowest:.2e}")

    def particle_distribution(self) -> np.ndarray:
        """Probability of each total particle number ``0..max_total``."""
        diag = np.real(np.diag(self.rho))
        return np.array([diag[self.space.sector_slice(p)].sum() for p in range(self.space.max_total + 1)])
