"""Shared oracles built without the package's Fock machinery.

Fermionic operators come from Jordan-Wigner Kronecker products on the full
``2**L`` space (site 0 is the most significant qubit), so basis conventions
differ from :class:`ssh_revival.fock.FockSpace` and only invariants are
compared.
"""

import itertools
from functools import reduce

import numpy as np
import pytest

ACCEPTANCE = {}

_I2 = np.eye(2)
_Z = np.diag([1.0, -1.0])
_ANNIH = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0> with |0>=(1,0)


def jw_annihilators(L):
    """Dense ``f_i`` on ``2**L`` with strings on sites left of ``i``."""
    out = []
    for i in range(L):
        ops = [_Z] * i + [_ANNIH] + [_I2] * (L - i - 1)
        out.append(reduce(np.kron, ops))
    return out


def jw_state(mode_vectors, L):
    """``prod_k c_k^dagger |vac>`` for real single-particle vectors (applied left to right)."""
    f = jw_annihilators(L)
    psi = np.zeros(2**L)
    psi[0] = 1.0
    for v in reversed(list(mode_vectors)):
        psi = sum(v[i] * f[i].T @ psi for i in range(L))
    return psi / np.linalg.norm(psi)


def majoranas(L):
    f = jw_annihilators(L)
    out = []
    for a in f:
        out.append(a + a.T)
        out.append(1j * (a.T - a))
    return out


def majorana_time_reversal_negativity(rho, A, L):
    """Fermionic log-negativity from the Majorana-monomial definition.

    ``rho = sum w_{k,t} c_A^k c_B^t``; the partial time-reversal multiplies
    each term by ``i**|k|``.  Trace norm via singular values.
    """
    c = majoranas(L)
    a_idx = [m for s in sorted(A) for m in (2 * s, 2 * s + 1)]
    b_idx = [m for s in range(L) if s not in A for m in (2 * s, 2 * s + 1)]
    dim = 2**L
    out = np.zeros_like(rho, dtype=complex)
    for ka in itertools.product((0, 1), repeat=len(a_idx)):
        MA = np.eye(dim, dtype=complex)
        for bit, m in zip(ka, a_idx):
            if bit:
                MA = MA @ c[m]
        for kb in itertools.product((0, 1), repeat=len(b_idx)):
            M = MA.copy()
            for bit, m in zip(kb, b_idx):
                if bit:
                    M = M @ c[m]
            w = np.trace(M.conj().T @ rho) / dim
            if abs(w) > 1e-15:
                out += w * (1j ** sum(ka)) * M
    return float(np.log2(np.linalg.svd(out, compute_uv=False).sum()))


def qubit_partial_transpose_negativity(rho, A, L):
    """Conventional log-negativity by transposing the ``A`` qubit axes."""
    t = rho.reshape((2,) * (2 * L))
    perm = list(range(2 * L))
    for s in A:
        perm[s], perm[L + s] = L + s, s
    pt = t.transpose(perm).reshape(rho.shape)
    return float(np.log2(np.abs(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))).sum()))


def qubit_reduced(rho, keep_prefix, L):
    """Trace out the trailing ``L - keep_prefix`` qubits."""
    d1, d2 = 2**keep_prefix, 2 ** (L - keep_prefix)
    return np.einsum("ajbj->ab", rho.reshape(d1, d2, d1, d2))


def entropy_bits(p, order=1.0):
    p = np.asarray(p, dtype=float)
    p = p[p > 1e-300]
    if order == 1:
        return float(-(p * np.log2(p)).sum())
    return float(np.log2((p**order).sum()) / (1 - order))


def semiclassical_jw_density(basis, t):
    """Semiclassical mixture built on the Kronecker space."""
    L, n, gamma = basis.L, basis.n, basis.params.gamma
    s = np.exp(-gamma * t / 2)
    rho = np.zeros((2**L, 2**L))
    occupied = [basis.mode(-k) for k in range(1, n + 1)]
    for size in range(n + 1):
        p = s**size * (1 - s) ** (n - size)
        for sub in itertools.combinations(range(n), size):
            psi = jw_state([basis.edge] + [occupied[j] for j in sub], L)
            rho += p * np.outer(psi, psi)
    return rho


@pytest.fixture
def acceptance_record():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
