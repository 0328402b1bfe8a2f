"""Exact master-equation dynamics of small dissipative half-SSH chains.

The state is evolved as a set of particle-number blocks ``rho_pq``.  Loss
maps block ``(p+1, q+1)`` into ``(p, q)`` and the Hamiltonian keeps every
block, so only blocks with the offsets ``p - q`` present initially are
carried.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .chain import ChainParams, ModeBasis, single_particle_hamiltonian
from .fock import FockSpace, ResourceError
from .semiclassical import DENSE_DIM_CAP, ModeOccupation, SemiclassicalEnsemble, _occupation
from .states import DensityOperator

RTOL = 1e-9
ATOL = 1e-11


class IntegrationError(RuntimeError):
    """The ODE solver failed to meet its tolerances."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t = {t:.6g})")
        self.t = t


def lossy_sites(L: int) -> np.ndarray:
    return np.arange(1, L, 2)


def build_initial_state(
    basis: ModeBasis, space: FockSpace, occ: ModeOccupation | None = None, cap: int = DENSE_DIM_CAP
) -> DensityOperator:
    """Pure state with the edge mode and the modes of ``occ`` singly occupied.

    The default occupation fills the edge mode and every negative-energy mode.
    """
    occ = _occupation(occ, basis.n)
    if space.dim > cap:
        raise ResourceError(f"Fock dimension {space.dim} exceeds cap {cap}")
    if space.L != basis.L:
        raise ValueError(f"space has L={space.L}, chain has L={basis.L}")
    modes = sorted(k for k in occ.occupied if k != 0) + [0]
    if len(modes) > space.max_total:
        raise ResourceError(f"{len(modes)} particles do not fit under max_total={space.max_total}")
    psi = np.ones(1)
    for p, k in enumerate(modes):
        psi = space.apply_mode_creation(basis.mode(k), psi, p)
    return DensityOperator.pure(space.embed(len(modes), psi), space)


def _sector_op(op: sp.spmatrix, space: FockSpace, p: int, q: int) -> sp.csr_matrix:
    return op[space.sector_slice(p), :][:, space.sector_slice(q)].tocsr()


class Liouvillian:
    """Block-restricted generator of ``d rho / dt``."""

    def __init__(self, params: ChainParams, space: FockSpace, offsets):
        self.params = params
        self.space = space
        h = single_particle_hamiltonian(params)
        cdag = [space.creation(i) for i in range(params.L)]
        ann = [c.T.tocsr() for c in cdag]
        H = sp.csr_matrix((space.dim, space.dim))
        for i, j in zip(*np.nonzero(h)):
            H = H + h[i, j] * (cdag[i] @ ann[j])
        jumps = [ann[i] for i in lossy_sites(params.L)]
        n_loss = sum((cdag[i] @ ann[i] for i in lossy_sites(params.L)), sp.csr_matrix((space.dim, space.dim)))
        heff = (H - 0.5j * params.gamma * n_loss).tocsr()

        P = space.max_total
        self.blocks = [(p, p - d) for d in sorted(set(offsets)) for p in range(P + 1) if 0 <= p - d <= P]
        sizes = [len(space.sectors[p]) * len(space.sectors[q]) for p, q in self.blocks]
        self.starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        pos = {b: i for i, b in enumerate(self.blocks)}
        grid = [[None] * len(self.blocks) for _ in self.blocks]
        for i, (p, q) in enumerate(self.blocks):
            dp, dq = len(space.sectors[p]), len(space.sectors[q])
            if dp == 0 or dq == 0:
                continue
            hp = _sector_op(heff, space, p, p)
            hq = _sector_op(heff, space, q, q)
            # row-major vec: vec(A X B) = kron(A, B^T) vec(X); here B = heff_q^dagger
            grid[i][i] = -1j * sp.kron(hp, sp.identity(dq)) + 1j * sp.kron(sp.identity(dp), hq.conj())
            j = pos.get((p + 1, q + 1))
            if j is not None and sizes[j]:
                feed = None
                for J in jumps:
                    jp = _sector_op(J, space, p, p + 1)
                    jq = _sector_op(J, space, q, q + 1)
                    term = sp.kron(jp, jq.conj())
                    feed = term if feed is None else feed + term
                grid[i][j] = params.gamma * feed
        for i, s in enumerate(sizes):
            if grid[i][i] is None:
                grid[i][i] = sp.csr_matrix((s, s))
        self.matrix = sp.bmat(grid, format="csr")

    def pack(self, rho: np.ndarray) -> np.ndarray:
        s = self.space
        return np.concatenate([rho[s.sector_slice(p), s.sector_slice(q)].ravel() for p, q in self.blocks])

    def unpack(self, vec: np.ndarray) -> np.ndarray:
        s = self.space
        rho = np.zeros((s.dim, s.dim), dtype=complex)
        for i, (p, q) in enumerate(self.blocks):
            dp, dq = len(s.sectors[p]), len(s.sectors[q])
            rho[s.sector_slice(p), s.sector_slice(q)] = vec[self.starts[i] : self.starts[i + 1]].reshape(dp, dq)
        return rho


def _block_offsets(rho: np.ndarray, space: FockSpace, tol: float = 0.0) -> list:
    offsets = []
    for p in range(space.max_total + 1):
        for q in range(space.max_total + 1):
            blk = rho[space.sector_slice(p), space.sector_slice(q)]
            if blk.size and np.abs(blk).max() > tol:
                offsets.append(p - q)
    return sorted(set(offsets)) or [0]


def evolve(
    rho0: DensityOperator,
    params: ChainParams,
    t_grid,
    rtol: float = RTOL,
    atol: float = ATOL,
    method: str = "RK45",
) -> list:
    """Integrate the loss master equation and sample it on ``t_grid``.

    ``t_grid`` must be non-decreasing and start at 0 (physical time).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or t_grid[0] != 0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be a non-decreasing sequence starting at 0")
    space = rho0.space
    if space.L != params.L:
        raise ValueError(f"state lives on L={space.L}, params have L={params.L}")
    gen = Liouvillian(params, space, _block_offsets(rho0.rho, space))
    y0 = gen.pack(rho0.rho.astype(complex))
    if t_grid[-1] == 0:
        return [DensityOperator(gen.unpack(y0), space, 0.0) for _ in t_grid]
    M = gen.matrix
    sol = solve_ivp(
        lambda t, y: M @ y,
        (0.0, float(t_grid[-1])),
        y0,
        method=method,
        t_eval=t_grid,
        rtol=rtol,
        atol=atol,
    )
    if sol.status != 0:
        raise IntegrationError(sol.message, float(sol.t[-1]) if len(sol.t) else 0.0)
    out = []
    for k, t in enumerate(t_grid):
        rho = gen.unpack(sol.y[:, k])
        out.append(DensityOperator(0.5 * (rho + rho.conj().T), space, float(t)))
    return out


def eigenstate_populations(rho: DensityOperator, basis: ModeBasis | None = None) -> dict:
    """Total probability of each particle number ``m``.

    Mode-occupation eigenstates with ``m`` particles span the same subspace as
    the site configurations with ``m`` particles, so the projection is a sum
    over one diagonal block.
    """
    dist = rho.particle_distribution()
    return {m: float(p) for m, p in enumerate(dist)}


def mode_state_populations(rho: DensityOperator, ensemble: SemiclassicalEnsemble) -> np.ndarray:
    """``<S|rho|S>`` for every eigenstate of a semiclassical ensemble."""
    if rho.space.statistics != ensemble.space.statistics or rho.space.L != ensemble.space.L:
        raise ValueError("state and ensemble live on different chains")
    out = np.empty(len(ensemble))
    for i in range(len(ensemble)):
        p = ensemble.sector(i)
        v = ensemble.vectors[i]
        blk = rho.rho[rho.space.sector_slice(p), rho.space.sector_slice(p)]
        if len(v) != blk.shape[0]:
            raise ValueError("ensemble and state disagree on sector sizes")
        out[i] = float(np.real(v @ blk @ v))
    return out


@dataclass(frozen=True)
class TransitionRates:
    """Rates ``gamma_ab`` from eigenstate ``b`` to ``a`` (columns are sources)."""

    labels: list
    rates: np.ndarray

    def rate(self, target, source) -> float:
        a = self.labels.index(tuple(sorted(target)))
        b = self.labels.index(tuple(sorted(source)))
        return float(self.rates[a, b])


def transition_rates(
    basis: ModeBasis,
    statistics: str = "fermi",
    occ: ModeOccupation | None = None,
    form: str = "site",
) -> TransitionRates:
    """Classical rate matrix between mode-occupation eigenstates.

    ``form="site"`` sums over the physical loss channels on odd sites;
    ``form="mode"`` uses ``gamma/2 * sum_{k != 0} |<a|C_k|b>|^2``.  Labels are
    the occupied bulk modes of each state (the edge mode is always occupied).
    """
    ens = SemiclassicalEnsemble(basis, statistics, occ)
    space = ens.space
    V = np.column_stack([ens.full_vector(i) for i in range(len(ens))])
    gamma = basis.params.gamma
    if form == "site":
        ops = [(gamma, space.annihilation(i)) for i in lossy_sites(basis.L)]
    elif form == "mode":
        ann = [space.annihilation(i) for i in range(basis.L)]
        ops = []
        for k in basis.mode_indices:
            if k == 0:
                continue
            u = basis.mode(int(k))
            ops.append((0.5 * gamma, sum(u[i] * ann[i] for i in range(basis.L))))
    else:
        raise ValueError(f"form must be 'site' or 'mode', got {form!r}")
    rates = np.zeros((len(ens), len(ens)))
    for weight, op in ops:
        amp = V.T @ (op @ V)
        rates += weight * np.abs(amp) ** 2
    np.fill_diagonal(rates, 0.0)
    return TransitionRates(labels=[tuple(s) for s in ens.subsets], rates=rates)
