"""Truncated Fock spaces for fermions and bosons on a chain.

The basis is graded by total particle number and lexicographic (ascending
occupation tuples) within each grade.  Fermionic operators carry the
Jordan-Wigner string of the site order ``0 < 1 < ... < L-1``.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np
import scipy.sparse as sp

FERMI = "fermi"
BOSE = "bose"
STATISTICS = (FERMI, BOSE)


class ResourceError(RuntimeError):
    """A dense representation would exceed the configured size cap."""


def _sector_configs(statistics: str, L: int, p: int) -> np.ndarray:
    if statistics == FERMI:
        if p > L:
            return np.zeros((0, L), dtype=np.int8)
        rows = []
        for occ in itertools.combinations(range(L), p):
            row = np.zeros(L, dtype=np.int8)
            row[list(occ)] = 1
            rows.append(row)
    else:
        rows = []
        for occ in itertools.combinations_with_replacement(range(L), p):
            rows.append(np.bincount(np.asarray(occ, dtype=int), minlength=L).astype(np.int8))
    if not rows:
        return np.zeros((1, L), dtype=np.int8) if p == 0 else np.zeros((0, L), dtype=np.int8)
    out = np.array(rows, dtype=np.int8)
    order = np.lexsort(out.T[::-1])
    return out[order]


def sector_dimension(statistics: str, L: int, p: int) -> int:
    from math import comb

    if statistics == FERMI:
        return comb(L, p) if p <= L else 0
    return comb(p + L - 1, p)


def fock_dimension(statistics: str, L: int, max_total: int | None = None) -> int:
    """Dimension of the Fock space with at most ``max_total`` particles."""
    if max_total is None:
        if statistics != FERMI:
            raise ValueError("bosonic spaces need a particle-number cap")
        max_total = L
    top = min(max_total, L) if statistics == FERMI else max_total
    return sum(sector_dimension(statistics, L, p) for p in range(top + 1))


class FockSpace:
    """Occupation-number basis of ``L`` modes with a total particle cap.

    Parameters
    ----------
    statistics : {"fermi", "bose"}
    L : int
        Number of sites.
    max_total : int, optional
        Largest total particle number kept.  Defaults to ``L`` for fermions
        (the full ``2**L`` space); required for bosons.
    """

    def __init__(self, statistics: str, L: int, max_total: int | None = None):
        if statistics not in STATISTICS:
            raise ValueError(f"statistics must be one of {STATISTICS}, got {statistics!r}")
        if max_total is None:
            if statistics == BOSE:
                raise ValueError("bosonic Fock space needs max_total")
            max_total = L
        if statistics == FERMI:
            max_total = min(max_total, L)
        self.statistics = statistics
        self.L = int(L)
        self.max_total = int(max_total)
        self.sectors = [_sector_configs(statistics, L, p) for p in range(self.max_total + 1)]
        sizes = [len(s) for s in self.sectors]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self.dim = int(self.offsets[-1])
        self._radix = self.max_total + 1
        if self._radix**L >= 2**62:
            raise ResourceError(f"occupation keys overflow for L={L}, max_total={max_total}")
        self._weights = (self._radix ** np.arange(L)).astype(np.int64)
        self._sector_keys = []
        self._sector_sort = []
        for conf in self.sectors:
            keys = conf.astype(np.int64) @ self._weights
            order = np.argsort(keys)
            self._sector_keys.append(keys[order])
            self._sector_sort.append(order)

    def __repr__(self):
        return f"FockSpace({self.statistics!r}, L={self.L}, max_total={self.max_total}, dim={self.dim})"

    @cached_property
    def basis(self) -> np.ndarray:
        """All occupation vectors, shape ``(dim, L)``."""
        return np.concatenate(self.sectors, axis=0)

    @cached_property
    def particle_numbers(self) -> np.ndarray:
        return np.repeat(np.arange(self.max_total + 1), np.diff(self.offsets))

    def sector_slice(self, p: int) -> slice:
        return slice(self.offsets[p], self.offsets[p + 1])

    def sector_index(self, p: int, configs: np.ndarray) -> np.ndarray:
        """Positions of ``configs`` inside sector ``p`` (``-1`` where absent)."""
        configs = np.atleast_2d(configs)
        keys = configs.astype(np.int64) @ self._weights
        skeys = self._sector_keys[p]
        out = np.full(len(keys), -1, dtype=np.int64)
        if len(skeys) == 0:
            return out
        pos = np.minimum(np.searchsorted(skeys, keys), len(skeys) - 1)
        found = skeys[pos] == keys
        out[found] = self._sector_sort[p][pos[found]]
        return out

    def index(self, occupation) -> int:
        occ = np.asarray(occupation, dtype=np.int64)
        p = int(occ.sum())
        if occ.shape != (self.L,) or p > self.max_total or occ.min() < 0:
            raise KeyError(f"occupation {tuple(occ)} not in {self!r}")
        if self.statistics == FERMI and occ.max() > 1:
            raise KeyError(f"occupation {tuple(occ)} violates Pauli exclusion")
        pos = self.sector_index(p, occ[None, :])[0]
        return int(self.offsets[p] + pos)

    def raise_map(self, p: int, site: int):
        """Action of ``f_site^dagger`` from sector ``p`` to ``p + 1``.

        Returns ``(src, dst, coef)`` with positions local to the two sectors,
        so that ``(f^dagger psi)[dst] = coef * psi[src]``.
        """
        key = (p, site)
        cache = self.__dict__.setdefault("_raise_cache", {})
        if key in cache:
            return cache[key]
        if p + 1 > self.max_total:
            empty = np.zeros(0, dtype=np.int64)
            cache[key] = (empty, empty, np.zeros(0))
            return cache[key]
        conf = self.sectors[p]
        occ = conf[:, site].astype(np.int64)
        if self.statistics == FERMI:
            src = np.flatnonzero(occ == 0)
            string = conf[src, :site].sum(axis=1)
            coef = np.where(string % 2 == 0, 1.0, -1.0)
        else:
            src = np.arange(len(conf))
            coef = np.sqrt(occ + 1.0)
        target = conf[src].copy()
        target[:, site] += 1
        dst = self.sector_index(p + 1, target)
        cache[key] = (src, dst, coef)
        return cache[key]

    def creation(self, site: int) -> sp.csr_matrix:
        """Sparse ``f_site^dagger`` on the whole truncated space."""
        rows, cols, vals = [], [], []
        for p in range(self.max_total):
            src, dst, coef = self.raise_map(p, site)
            rows.append(dst + self.offsets[p + 1])
            cols.append(src + self.offsets[p])
            vals.append(coef)
        rows = np.concatenate(rows) if rows else np.zeros(0, int)
        cols = np.concatenate(cols) if cols else np.zeros(0, int)
        vals = np.concatenate(vals) if vals else np.zeros(0)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def annihilation(self, site: int) -> sp.csr_matrix:
        return self.creation(site).T.tocsr()

    def number(self, site: int) -> sp.csr_matrix:
        return sp.diags(self.basis[:, site].astype(float)).tocsr()

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[0] = 1.0
        return v

    def apply_mode_creation(self, amplitudes: np.ndarray, psi: np.ndarray, p: int) -> np.ndarray:
        """Apply ``sum_i amplitudes[i] f_i^dagger`` to a vector living in sector ``p``.

        ``psi`` is local to sector ``p``; the result is local to sector ``p + 1``.
        """
        if p + 1 > self.max_total:
            raise ResourceError(f"creation beyond max_total={self.max_total}")
        out = np.zeros(len(self.sectors[p + 1]), dtype=np.result_type(psi, amplitudes))
        for site in np.flatnonzero(amplitudes):
            src, dst, coef = self.raise_map(p, site)
            # dst is injective for a fixed site
            out[dst] += amplitudes[site] * coef * psi[src]
        return out

    def embed(self, p: int, local: np.ndarray) -> np.ndarray:
        full = np.zeros(self.dim, dtype=local.dtype)
        full[self.sector_slice(p)] = local
        return full
