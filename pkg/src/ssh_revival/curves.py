"""Time series of correlation measures along the semiclassical trajectory.

Times are dimensionless (``gamma * t``).  Fermionic chains go through the
Gaussian route; bosonic chains use dense states (negativity) or the
eigenstate ensemble (entropies).
"""

from __future__ import annotations

import numpy as np

from .chain import ChainParams, ModeBasis, build_mode_basis
from .entanglement import (
    CONVENTIONAL,
    FERMIONIC,
    EnsembleCorrelations,
    EntanglementCurve,
    ModeSpectralGreen,
    Partition,
    _hermitian_spectrum,
    _pt_entries,
    dense_log_negativity,
    fermionic_log_negativity,
    mutual_information,
)
from .fock import BOSE, FERMI
from .semiclassical import GreenFunction, ModeOccupation, SemiclassicalEnsemble, _occupation, mode_correlations, steady_state
from .states import DensityOperator

NEGATIVITY = "negativity"
MUTUAL_INFORMATION = "mutual-information"


def time_grid(horizon: float = 20.0, n_steps: int = 401) -> np.ndarray:
    """Uniform grid of ``gamma * t`` on ``[0, horizon]``."""
    if horizon <= 0 or n_steps < 2:
        raise ValueError("need a positive horizon and at least two points")
    return np.linspace(0.0, horizon, n_steps)


def _physical(params: ChainParams, gamma_t) -> np.ndarray:
    if params.gamma <= 0:
        raise ValueError("curves are sampled in gamma*t and need gamma > 0")
    return np.asarray(gamma_t, dtype=float) / params.gamma


def green_block(basis: ModeBasis, t: float, sites, occ: ModeOccupation | None = None) -> GreenFunction:
    """Principal block of ``G(t)`` on ``sites`` without forming the full matrix."""
    cols = basis.U[:, np.asarray(sites, dtype=int)]
    chi = mode_correlations(basis, t, occ)
    G = (cols.T * chi) @ cols
    return GreenFunction(0.5 * (G + G.T), float(t))


def steady_green(basis: ModeBasis) -> GreenFunction:
    """Green's function of the pure edge state."""
    a = basis.edge
    return GreenFunction(np.eye(basis.L) - np.outer(a, a), np.inf)


def fermionic_negativity_curve(
    params: ChainParams,
    part: Partition,
    gamma_t,
    occ: ModeOccupation | None = None,
    method: str = "modes",
) -> EntanglementCurve:
    """Fermionic log-negativity of the Gaussian semiclassical state.

    ``method="modes"`` uses the low-rank mode decomposition, ``"dense"`` the
    full ``L x L`` Green's function.
    """
    basis = build_mode_basis(params)
    ts = _physical(params, gamma_t)
    if method == "modes":
        fast = ModeSpectralGreen(basis, part, occ)
        values = [fast.log_negativity(t) for t in ts]
    elif method == "dense":
        values = [fermionic_log_negativity(green_block(basis, t, range(params.L), occ), part) for t in ts]
    else:
        raise ValueError(f"unknown method {method!r}")
    return EntanglementCurve(gamma_t, values, f"{NEGATIVITY}:{FERMIONIC}", part, params)


def truncated_negativity_curve(
    basis: ModeBasis, keep: int, part: Partition, gamma_t, occ: ModeOccupation | None = None
) -> EntanglementCurve:
    """Negativity of the reduced state on sites ``0..keep-1`` of a longer chain."""
    if keep > basis.L:
        raise ValueError(f"cannot keep {keep} sites of an L={basis.L} chain")
    sub = Partition(part.A, keep)
    ts = _physical(basis.params, gamma_t)
    values = [fermionic_log_negativity(green_block(basis, t, range(keep), occ), sub) for t in ts]
    return EntanglementCurve(gamma_t, values, f"{NEGATIVITY}:{FERMIONIC}", sub, basis.params, {"keep": keep})


def fermionic_mutual_information_curve(
    params: ChainParams, part: Partition, gamma_t, order=1.0, occ: ModeOccupation | None = None
) -> EntanglementCurve:
    basis = build_mode_basis(params)
    fast = ModeSpectralGreen(basis, part, occ)
    values = [fast.mutual_information(t, order) for t in _physical(params, gamma_t)]
    return EntanglementCurve(gamma_t, values, f"{MUTUAL_INFORMATION}:{order}", part, params)


class DenseNegativityEvaluator:
    """Negativity of ``rho(t) = sum_m P_{m+1}(t) R_m`` with the transform done once.

    The partial transpose (or time-reversal) is linear, so every block of
    ``rho^{T_A}(t)`` is the same weighted sum of precomputed blocks.
    """

    def __init__(self, ensemble: SemiclassicalEnsemble, part: Partition, flavor: str = CONVENTIONAL):
        self.ensemble = ensemble
        self.part = part
        self.flavor = flavor
        space = ensemble.space
        pieces = []
        for R in ensemble.projectors_by_size:
            rows, cols, vals, dr, dc = _pt_entries(DensityOperator(R, space), part, flavor)
            if np.any(dr != dc):
                raise ValueError("projector is not number conserving")
            pieces.append((rows, cols, vals, dr))
        all_d = np.unique(np.concatenate([p[3] for p in pieces]))
        self.blocks = []
        for d in all_d:
            keys = np.unique(np.concatenate([np.concatenate([r[dd == d], c[dd == d]]) for r, c, _, dd in pieces]))
            mats = []
            for rows, cols, vals, dd in pieces:
                sel = dd == d
                blk = np.zeros((len(keys), len(keys)), dtype=complex)
                np.add.at(blk, (np.searchsorted(keys, rows[sel]), np.searchsorted(keys, cols[sel])), vals[sel])
                mats.append(blk)
            stack = np.array(mats)
            if flavor == CONVENTIONAL and np.abs(stack.imag).max() == 0:
                stack = stack.real
            self.blocks.append(stack)

    def __call__(self, t: float) -> float:
        P = self.ensemble.size_weights(t)
        total = 0.0
        for stack in self.blocks:
            blk = np.tensordot(P, stack, axes=1)
            if self.flavor == CONVENTIONAL:
                total += np.abs(_hermitian_spectrum(blk)).sum()
            else:
                total += np.linalg.svd(blk, compute_uv=False).sum()
        return float(np.log2(total))


def dense_negativity_curve(
    params: ChainParams,
    part: Partition,
    gamma_t,
    statistics: str = BOSE,
    flavor: str = CONVENTIONAL,
    occ: ModeOccupation | None = None,
) -> EntanglementCurve:
    ens = SemiclassicalEnsemble(build_mode_basis(params), statistics, occ)
    ev = DenseNegativityEvaluator(ens, part, flavor)
    values = [ev(t) for t in _physical(params, gamma_t)]
    return EntanglementCurve(gamma_t, values, f"{NEGATIVITY}:{flavor}", part, params, {"statistics": statistics})


def ensemble_mutual_information_curve(
    params: ChainParams,
    part: Partition,
    gamma_t,
    statistics: str = BOSE,
    order=2.0,
    occ: ModeOccupation | None = None,
) -> EntanglementCurve:
    ens = SemiclassicalEnsemble(build_mode_basis(params), statistics, occ)
    corr = EnsembleCorrelations(ens, part)
    values = [corr.mutual_information(t, order) for t in _physical(params, gamma_t)]
    return EntanglementCurve(
        gamma_t, values, f"{MUTUAL_INFORMATION}:{order}", part, params, {"statistics": statistics}
    )


def steady_value(params: ChainParams, part: Partition, measure: str, statistics: str = FERMI) -> float:
    """A measure evaluated directly on the pure edge state.

    ``measure`` uses the curve labels, e.g. ``"negativity:fermionic"`` or
    ``"mutual-information:2.0"``.
    """
    basis = build_mode_basis(params)
    kind, _, arg = measure.partition(":")
    if statistics == FERMI and (kind == MUTUAL_INFORMATION or arg == FERMIONIC):
        G = steady_green(basis)
        if kind == NEGATIVITY:
            return fermionic_log_negativity(G, part)
        return mutual_information(G, part, float(arg))
    rho = steady_state(basis, statistics)
    if kind == NEGATIVITY:
        return dense_log_negativity(rho, part, arg)
    return mutual_information(rho, part, float(arg))
