"""Correlation measures for half-SSH states: negativities, entropies, mutual information.

All results are in bits.  Three representations are supported:

* a fermionic Green's function ``G_ij = <f_i f_j^dagger>`` (Gaussian states),
* a dense :class:`~ssh_revival.states.DensityOperator` (small chains, both statistics),
* a :class:`~ssh_revival.semiclassical.SemiclassicalEnsemble` (bosonic chains too
  large for dense matrices).

The fermionic negativity uses the partial time-reversal ``R_A`` and is
``log2 || rho^{R_A} ||_1``; the conventional one uses the partial transpose in
the site Fock basis (Jordan-Wigner tensor structure for fermions).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .chain import ModeBasis
from .fock import BOSE, FERMI, FockSpace, ResourceError
from .semiclassical import GreenFunction, ModeOccupation, SemiclassicalEnsemble, _occupation, survival
from .states import DensityOperator

LN2 = np.log(2.0)
DENSE_NEGATIVITY_CAP = 6000
CONVENTIONAL = "conventional"
FERMIONIC = "fermionic"


@dataclass(frozen=True)
class Partition:
    """Bipartition of sites ``0..L-1`` into ``A`` and its complement ``B``."""

    A: frozenset
    L: int

    def __post_init__(self):
        A = frozenset(int(i) for i in self.A)
        object.__setattr__(self, "A", A)
        if not A:
            raise ValueError("subsystem A is empty")
        if min(A) < 0 or max(A) >= self.L:
            raise ValueError(f"sites {sorted(A)} outside 0..{self.L - 1}")
        if len(A) == self.L:
            raise ValueError("subsystem B is empty")

    @classmethod
    def single(cls, L: int, site: int = 2) -> "Partition":
        return cls(frozenset([site]), L)

    @property
    def B(self) -> frozenset:
        return frozenset(range(self.L)) - self.A

    @property
    def a_sites(self) -> np.ndarray:
        return np.array(sorted(self.A), dtype=int)

    @property
    def b_sites(self) -> np.ndarray:
        return np.array(sorted(self.B), dtype=int)

    def swapped(self) -> "Partition":
        return Partition(self.B, self.L)


@dataclass
class EntanglementCurve:
    """A measure sampled on a grid of dimensionless times ``gamma * t``."""

    times: np.ndarray
    values: np.ndarray
    measure: str
    partition: Partition
    params: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values differ in shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite values in {self.measure} curve")


# ---------------------------------------------------------------------------
# binary entropies of Gaussian spectra


def _xlog2x(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


SPECTRUM_CUTOFF = 1e-14


def binary_entropy(lam, order=1.0, cutoff: float = SPECTRUM_CUTOFF) -> float:
    """Sum of single-mode Renyi entropies for occupation eigenvalues ``lam``.

    Eigenvalues within ``cutoff`` of 0 or 1 are snapped to the endpoint.
    """
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, 1.0)
    lam = np.where(lam < cutoff, 0.0, np.where(lam > 1.0 - cutoff, 1.0, lam))
    if order <= 0:
        raise ValueError(f"Renyi order must be positive, got {order}")
    if order == 1:
        return float(-np.sum(_xlog2x(lam) + _xlog2x(1.0 - lam)))
    if np.isinf(order):
        return float(-np.sum(np.log2(np.maximum(lam, 1.0 - lam))))
    return float(np.sum(np.log2(lam**order + (1.0 - lam) ** order)) / (1.0 - order))


def spectrum_entropy(p, order=1.0, cutoff: float = SPECTRUM_CUTOFF) -> float:
    """Renyi entropy of a probability spectrum ``p``.

    Entries below ``cutoff`` are eigensolver noise and are dropped; orders
    below 1 would otherwise amplify them.
    """
    p = np.asarray(p, dtype=float)
    p = p[p > cutoff]
    if order <= 0:
        raise ValueError(f"Renyi order must be positive, got {order}")
    if order == 1:
        return float(-np.sum(p * np.log2(p)))
    if np.isinf(order):
        return float(-np.log2(p.max()))
    return float(np.log2(np.sum(p**order)) / (1.0 - order))


def _check_green(G: np.ndarray, tol: float) -> np.ndarray:
    G = np.asarray(G.G if isinstance(G, GreenFunction) else G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("G must be a square matrix")
    G = 0.5 * (G + G.T)
    lam = np.linalg.eigvalsh(G)
    if lam.size and (lam.min() < -tol or lam.max() > 1 + tol):
        raise ValueError(f"non-physical G: eigenvalues span [{lam.min():.3g}, {lam.max():.3g}]")
    return G


# ---------------------------------------------------------------------------
# Gaussian fermionic negativity


def _ptr_terms(F_minus: np.ndarray, F_plus: np.ndarray) -> float:
    """``sum_j ln(sqrt(xi_j) + sqrt(1 - xi_j))`` from factors of ``1 -/+ Gamma_x``.

    ``1 - Gamma_x ~ F_minus F_minus^T`` and ``1 + Gamma_x ~ F_plus F_plus^T``, so
    ``sqrt(2 xi)`` and ``sqrt(2 (1 - xi))`` are singular values, accurate even
    where ``xi`` is 0 or 1.  Both are paired through the common eigenbasis:
    descending ``xi`` goes with ascending ``1 - xi``.
    """
    sm = np.linalg.svd(F_minus, compute_uv=False)
    sp_ = np.linalg.svd(F_plus, compute_uv=False)[::-1]
    return float(np.sum(np.log(sm + sp_)) - 0.5 * len(sm) * LN2)


def _purity_terms(lam: np.ndarray) -> float:
    lam = np.clip(lam, 0.0, 1.0)
    return float(0.5 * np.sum(np.log((1.0 - lam) ** 2 + lam**2)))


def fermionic_log_negativity(G, part: Partition, tol: float = 1e-9) -> float:
    """Fermionic logarithmic negativity of a number-conserving Gaussian state.

    Works on the covariance ``Gamma = 2 G - 1``.  The partially time-reversed
    covariances are ``T Gamma T`` and ``T^-1 Gamma T^-1`` with
    ``T = diag(i on A, 1 on B)``; their normalized product is similar to
    ``R (Gamma Z + Z Gamma) R`` where ``R = (1 + Gamma^2)^{-1/2}`` and
    ``Z = diag(-1 on A, +1 on B)``, which is real symmetric.  Because
    ``Z^2 = 1`` this equals ``1 - R (Gamma - Z)^2 R``.
    """
    G = _check_green(G, tol)
    L = G.shape[0]
    if part.L != L:
        raise ValueError(f"partition is for L={part.L}, G is {L}x{L}")
    gam = 2.0 * G - np.eye(L)
    lam, V = np.linalg.eigh(gam)
    R = (V / np.sqrt(1.0 + lam**2)) @ V.T
    Z = np.eye(L)
    Z[part.a_sites, part.a_sites] = -1.0
    occ = 0.5 * (1.0 + lam)
    return (_ptr_terms(R @ (gam - Z), R @ (gam + Z)) + _purity_terms(occ)) / LN2


class ModeSpectralGreen:
    """Fast evaluation of Gaussian measures when ``G(t) = U^T diag(chi(t)) U``.

    ``chi`` takes one value per mode class (edge, occupied bulk, empty bulk),
    so everything outside the small subspace spanned by the class projections
    of the ``A`` site vectors contributes trivially.  The work per time point
    is independent of ``L`` once the subspace is built.
    """

    def __init__(self, basis: ModeBasis, part: Partition, occ: ModeOccupation | None = None):
        if part.L != basis.L:
            raise ValueError(f"partition is for L={part.L}, chain has L={basis.L}")
        self.basis = basis
        self.part = part
        self.occ = _occupation(occ, basis.n)
        ks = basis.mode_indices
        occupied = np.array([self.occ.n_k(int(k)) for k in ks], dtype=bool)
        edge = ks == 0
        self.classes = [edge, (~edge) & occupied, (~edge) & (~occupied)]
        self.dims = np.array([c.sum() for c in self.classes])
        cols = basis.U[:, part.a_sites]
        Q, coords, ranks = [], [], []
        for c in self.classes:
            block = cols[c]
            if block.size == 0:
                ranks.append(0)
                continue
            u, s, _ = np.linalg.svd(block, full_matrices=False)
            r = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
            u = u[:, :r]
            ranks.append(r)
            coords.append(u.T @ block)
        self.ranks = np.array(ranks)
        # coordinates of the A site vectors in the orthonormal basis of the subspace
        self.E = np.vstack(coords)
        self.labels = np.repeat(np.arange(3), self.ranks)
        q, _ = np.linalg.qr(self.E, mode="complete")
        self.Bperp = q[:, self.E.shape[1] :]

    def chi(self, t: float) -> np.ndarray:
        s = float(survival(t, self.basis.params.gamma))
        return np.array([0.0, 1.0 - s, 1.0])

    def log_negativity(self, t: float) -> float:
        chi = self.chi(t)
        gam = 2.0 * chi[self.labels] - 1.0
        Z = np.eye(len(gam)) - 2.0 * self.E @ self.E.T
        r = 1.0 / np.sqrt(1.0 + gam**2)
        G = np.diag(gam)
        F_minus = r[:, None] * (G - Z)
        F_plus = r[:, None] * (G + Z)
        return (_ptr_terms(F_minus, F_plus) + _purity_terms(chi[self.labels])) / LN2

    def entropies(self, t: float, order=1.0) -> tuple:
        """``(S_A, S_B, S_AB)`` of the Gaussian state at time ``t``."""
        chi = self.chi(t)
        GK = np.diag(chi[self.labels])
        SA = binary_entropy(np.linalg.eigvalsh(self.E.T @ GK @ self.E), order)
        inner = np.linalg.eigvalsh(self.Bperp.T @ GK @ self.Bperp) if self.Bperp.shape[1] else np.zeros(0)
        rest = np.repeat(chi, self.dims - self.ranks)
        SB = binary_entropy(np.concatenate([inner, rest]), order)
        SAB = binary_entropy(np.repeat(chi, self.dims), order)
        return SA, SB, SAB

    def mutual_information(self, t: float, order=1.0) -> float:
        SA, SB, SAB = self.entropies(t, order)
        return SA + SB - SAB


def gaussian_entropy(G, order=1.0, subsystem=None, tol: float = 1e-9) -> float:
    """Renyi entropy of a fermionic Gaussian state or of one of its subsystems."""
    G = _check_green(G, tol)
    if subsystem is not None:
        idx = np.array(sorted(subsystem), dtype=int)
        G = G[np.ix_(idx, idx)]
    return binary_entropy(np.linalg.eigvalsh(G), order)


# ---------------------------------------------------------------------------
# dense states


def reorder_signs(space: FockSpace, first) -> np.ndarray:
    """Fermionic sign of each basis state when the sites ``first`` are moved to the front.

    Relative order inside each group is kept.  All ones for bosons.
    """
    if space.statistics == BOSE:
        return np.ones(space.dim)
    mask = np.zeros(space.L, dtype=bool)
    mask[np.asarray(sorted(first), dtype=int)] = True
    occ = space.basis.astype(np.int64)
    # each occupied "first" site hops over the occupied other sites to its left
    others_before = np.cumsum(occ * (~mask), axis=1) - occ * (~mask)
    swaps = np.sum(occ * mask * others_before, axis=1)
    return np.where(swaps % 2 == 0, 1.0, -1.0)




def _config_index(configs: np.ndarray, radix: int):
    keys = configs.astype(np.int64) @ (radix ** np.arange(configs.shape[1], dtype=np.int64))
    uniq, inv = np.unique(keys, return_inverse=True)
    first = np.zeros(len(uniq), dtype=int)
    first[inv[::-1]] = np.arange(len(inv))[::-1]
    counts = configs[first].sum(axis=1)
    return inv, counts


def split_basis(space: FockSpace, part: Partition):
    """Index each basis state by its ``A`` and ``B`` configurations.

    Returns ``(x, y, nx, ny)``: configuration indices into the distinct ``A``
    and ``B`` configurations, and the particle count of every distinct
    configuration.
    """
    radix = space.max_total + 1
    x, nx = _config_index(space.basis[:, part.a_sites], radix)
    y, ny = _config_index(space.basis[:, part.b_sites], radix)
    return x, y, nx, ny


def reduced_density_matrix(rho: DensityOperator, keep) -> np.ndarray:
    """Partial trace onto the sites ``keep`` (fermionic ordering: kept sites first)."""
    space = rho.space
    part = Partition(frozenset(keep), space.L) if len(keep) < space.L else None
    if part is None:
        return rho.rho
    x, y, nx, ny = split_basis(space, part)
    s = reorder_signs(space, part.A)
    mat = rho.rho * np.outer(s, s)
    out = np.zeros((len(nx), len(nx)), dtype=mat.dtype)
    order = np.argsort(y, kind="stable")
    bounds = np.flatnonzero(np.diff(y[order])) + 1
    for grp in np.split(order, bounds):
        xi = x[grp]
        out[np.ix_(xi, xi)] += mat[np.ix_(grp, grp)]
    return out


def _hermitian_spectrum(m: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def dense_entropy(rho: DensityOperator, order=1.0, subsystem=None) -> float:
    """Renyi entropy of a dense state, optionally of the reduced state on ``subsystem``."""
    if order <= 0:
        raise ValueError(f"Renyi order must be positive, got {order}")
    if subsystem is None or len(subsystem) == rho.space.L:
        return spectrum_entropy(rho.eigvalsh(), order)
    return spectrum_entropy(_hermitian_spectrum(reduced_density_matrix(rho, subsystem)), order)


def renyi_entropy(state, order=1.0, subsystem=None) -> float:
    """Renyi entropy (bits) of a Green's function or dense state.

    ``order=1`` is the von Neumann entropy.
    """
    if isinstance(state, DensityOperator):
        return dense_entropy(state, order, subsystem)
    return gaussian_entropy(state, order, subsystem)


def mutual_information(state, part: Partition, order=1.0) -> float:
    """``S(A) + S(B) - S(AB)`` in bits."""
    SA = renyi_entropy(state, order, part.A)
    SB = renyi_entropy(state, order, part.B)
    S = renyi_entropy(state, order)
    return SA + SB - S


def _pt_entries(rho: DensityOperator, part: Partition, flavor: str):
    """Nonzero entries of the partially transposed (or time-reversed) state.

    Row and column keys index the product configurations ``(x, y)``.
    """
    space = rho.space
    if flavor not in (CONVENTIONAL, FERMIONIC):
        raise ValueError(f"flavor must be {CONVENTIONAL!r} or {FERMIONIC!r}")
    if flavor == FERMIONIC and space.statistics != FERMI:
        raise ValueError("fermionic partial time-reversal needs a fermionic state")
    x, y, nx, ny = split_basis(space, part)
    mat = rho.rho
    b, bp = np.nonzero(mat)
    vals = mat[b, bp].astype(complex)
    if flavor == FERMIONIC:
        s = reorder_signs(space, part.A)
        vals = vals * s[b] * s[bp]
        ta = nx[x[b]] + nx[x[bp]]
        tb = ny[y[b]] + ny[y[bp]]
        vals = vals * np.where(ta % 2 == 1, 1j, 1.0) * np.where((ta * tb) % 2 == 1, -1.0, 1.0)
    n_y = len(ny)
    rows = x[bp] * n_y + y[b]
    cols = x[b] * n_y + y[bp]
    dr = nx[x[bp]] - ny[y[b]]
    dc = nx[x[b]] - ny[y[bp]]
    return rows, cols, vals, dr, dc


def dense_log_negativity(
    rho: DensityOperator,
    part: Partition,
    flavor: str = CONVENTIONAL,
    blocked: bool = True,
    cap: int = DENSE_NEGATIVITY_CAP,
) -> float:
    """Logarithmic negativity of a dense state.

    The transformed matrix commutes with ``n_A - n_B``; with ``blocked=True``
    its trace norm is summed over those blocks.  Conventional flavor uses a
    Hermitian eigensolve, fermionic flavor singular values.
    """
    if rho.space.dim > cap:
        raise ResourceError(f"dense negativity needs Fock dimension {rho.space.dim} > cap {cap}")
    rows, cols, vals, dr, dc = _pt_entries(rho, part, flavor)
    mixed = dr != dc
    if np.any(np.abs(vals[mixed]) > 1e-12):
        raise ValueError("state is not number conserving; n_A - n_B blocks do not decouple")
    keep = ~mixed
    rows, cols, vals, dr = rows[keep], cols[keep], vals[keep], dr[keep]
    if not blocked:
        dr = np.zeros_like(dr)
    total = 0.0
    for d in np.unique(dr):
        sel = dr == d
        keys, inv = np.unique(np.concatenate([rows[sel], cols[sel]]), return_inverse=True)
        k = int(sel.sum())
        blk = np.zeros((len(keys), len(keys)), dtype=complex)
        np.add.at(blk, (inv[:k], inv[k:]), vals[sel])
        if flavor == CONVENTIONAL:
            total += np.abs(_hermitian_spectrum(blk)).sum()
        else:
            total += np.linalg.svd(blk, compute_uv=False).sum()
    return float(np.log2(total))


def dense_fermionic_negativity(rho: DensityOperator, part: Partition, **kw) -> float:
    return dense_log_negativity(rho, part, FERMIONIC, **kw)


# ---------------------------------------------------------------------------
# ensembles of orthonormal pure states (large bosonic chains)


class EnsembleCorrelations:
    """Subsystem entropies of ``rho = sum_S w_S |psi_S><psi_S|`` without dense matrices.

    Each ``psi_S`` is reshaped into a matrix ``M_S[y, x]`` (``x``: small-side
    configuration, ``y``: large-side configuration).  The Gram matrix of all
    columns ``M_S[:, x]`` carries the spectra of both reduced states.
    """

    def __init__(self, ensemble: SemiclassicalEnsemble, part: Partition):
        space = ensemble.space
        if part.L != space.L:
            raise ValueError(f"partition is for L={part.L}, chain has L={space.L}")
        self.ensemble = ensemble
        self.part = part
        x, y, nx, ny = split_basis(space, part)
        small_is_a = len(nx) <= len(ny)
        if not small_is_a:
            x, y, nx, ny = y, x, ny, nx
        self.small_is_a = small_is_a
        small_sites = part.A if small_is_a else part.B
        signs = reorder_signs(space, small_sites)
        n_small = len(nx)
        rows, cols, vals = [], [], []
        for i, vec in enumerate(ensemble.vectors):
            sl = space.sector_slice(ensemble.sector(i))
            nz = np.flatnonzero(vec)
            idx = sl.start + nz
            rows.append(y[idx])
            cols.append(i * n_small + x[idx])
            vals.append(vec[nz] * signs[idx])
        M = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(ny), len(ensemble) * n_small),
        )
        gram = (M.T @ M).toarray()
        self.n_small = n_small
        self.gram = gram
        self.sizes = ensemble.sizes
        nstate = len(ensemble)
        g4 = gram.reshape(nstate, n_small, nstate, n_small)
        # Tr(rho_big^S rho_big^S') = || M_S^T M_S' ||_F^2
        self.omega_big = np.einsum("iajb,iajb->ij", g4, g4)
        diag = np.einsum("iaib->iab", g4)
        self.small_blocks = diag
        self.omega_small = np.einsum("iab,jba->ij", diag, diag)
        # columns couple only within one large-side particle number
        col_state = np.repeat(np.arange(nstate), n_small)
        col_x = np.tile(np.arange(n_small), nstate)
        q = ensemble.sizes[col_state] + 1 - nx[col_x]
        alive = np.abs(np.diag(gram)) > 0
        self.col_state = col_state
        self.col_groups = [np.flatnonzero((q == v) & alive) for v in np.unique(q[alive])]

    def _sides(self, small, big):
        return (small, big) if self.small_is_a else (big, small)

    def weights(self, t: float) -> np.ndarray:
        return self.ensemble.weights(t)

    def purities(self, t: float) -> tuple:
        """``(Tr rho_A^2, Tr rho_B^2, Tr rho^2)``."""
        w = self.weights(t)
        small = float(w @ self.omega_small @ w)
        big = float(w @ self.omega_big @ w)
        a, b = self._sides(small, big)
        return a, b, float(np.sum(w**2))

    def spectra(self, t: float) -> tuple:
        """Nonzero spectra of ``(rho_A, rho_B, rho)``."""
        w = self.weights(t)
        small = np.einsum("i,iab->ab", w, self.small_blocks)
        spec_small = _hermitian_spectrum(small)
        parts = []
        sw = np.sqrt(w[self.col_state])
        for grp in self.col_groups:
            sub = self.gram[np.ix_(grp, grp)] * np.outer(sw[grp], sw[grp])
            parts.append(_hermitian_spectrum(sub))
        spec_big = np.concatenate(parts) if parts else np.zeros(0)
        a, b = self._sides(spec_small, spec_big)
        return a, b, w

    def entropies(self, t: float, order=1.0) -> tuple:
        if order == 2:
            return tuple(-np.log2(p) for p in self.purities(t))
        return tuple(spectrum_entropy(s, order) for s in self.spectra(t))

    def mutual_information(self, t: float, order=1.0) -> float:
        SA, SB, S = self.entropies(t, order)
        return SA + SB - S


# ---------------------------------------------------------------------------
# closed forms


def entropy_density_closed_form(t, gamma: float, order="vN"):
    """Entropy per unit cell of the semiclassical state, in bits.

    ``order`` is ``"vN"`` (or 1) or 2.  The pure initial state has zero
    entropy, so ``t = 0`` returns 0.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    x = 0.5 * gamma * t
    s = np.exp(-x)
    with np.errstate(divide="ignore", invalid="ignore"):
        if order in ("vN", "vn", 1):
            # -log2(1 - s) + s log2(1/s - 1), written without overflow
            val = -np.log2(-np.expm1(-x)) + s * (np.log2(-np.expm1(-x)) + x / LN2)
        elif order == 2:
            val = -np.log2(1.0 + 2.0 * s * s - 2.0 * s)
        else:
            raise ValueError(f"order must be 'vN' or 2, got {order!r}")
    val = np.where(x > 0, val, 0.0)
    return val if val.ndim else float(val)
