import math

import numpy as np
import pytest

from ssh_revival import ChainParams, build_mode_basis, localization_length, single_particle_hamiltonian
from ssh_revival.chain import edge_amplitudes


def test_params_validation():
    with pytest.raises(ValueError, match="odd"):
        ChainParams(8, 0.1)
    with pytest.raises(ValueError):
        ChainParams(1, 0.1)
    with pytest.raises(ValueError):
        ChainParams(7, 0.0)
    with pytest.raises(ValueError):
        ChainParams(7, 0.1, -1.0)
    with pytest.raises(ValueError):
        ChainParams(7, 0.1, 1.0, -0.1)
    with pytest.raises((TypeError, ValueError)):
        ChainParams(7, 0.1 + 0.2j)
    p = ChainParams(7, 0.2, 2.0, 0.1)
    assert p.n == 3 and p.ratio == pytest.approx(0.1)


def test_hamiltonian_bonds():
    H = single_particle_hamiltonian(ChainParams(3, 0.3, 1.7))
    assert np.allclose(np.diag(H, 1), [0.3, 1.7])
    assert np.allclose(H, H.T) and np.all(np.diag(H) == 0)


def test_l3_closed_form_against_eigensolve():
    b = build_mode_basis(ChainParams(3, 1.0, 1.0))
    assert b.energies[0] == pytest.approx(math.sqrt(2))
    assert b.phases[0] == pytest.approx(math.pi / 4)
    assert np.allclose(b.A[1], [0.5, 0.5])
    assert b.B[0, 0] == pytest.approx(1 / math.sqrt(2))
    # oracle: dense eigensolve of the 3x3 matrix
    w, v = np.linalg.eigh(single_particle_hamiltonian(b.params))
    assert np.allclose(w, [-math.sqrt(2), 0, math.sqrt(2)])
    for k, col in zip((-1, 0, 1), v.T):
        assert abs(abs(col @ b.mode(k)) - 1) < 1e-12


@pytest.mark.parametrize("L", [3, 5, 7, 21, 101])
@pytest.mark.parametrize("ratio", [0.05, 0.5, 0.9, 1.0, 1.3])
def test_basis_orthonormal_and_diagonalizing(L, ratio):
    b = build_mode_basis(ChainParams(L, ratio, 1.0))
    U = b.U
    assert np.abs(U @ U.T - np.eye(L)).max() < 1e-12
    D = U @ single_particle_hamiltonian(b.params) @ U.T
    assert np.abs(D - np.diag(b.mode_energies)).max() < 1e-12
    assert np.array_equal(b.mode_energies, np.concatenate([-b.energies[::-1], [0], b.energies]))
    n = b.n
    if n:
        assert np.allclose(b.A[1:] @ b.A[1:].T, 0.5 * np.eye(n), atol=1e-12)
        assert np.allclose(b.B @ b.B.T, 0.5 * np.eye(n), atol=1e-12)
    assert np.sum(b.A[0] ** 2) == pytest.approx(1.0, abs=1e-12)
    assert np.all((b.phases >= 0) & (b.phases <= math.pi))


def test_l7_spectrum_matches_eigvalsh():
    p = ChainParams(7, 0.1, 1.0)
    b = build_mode_basis(p)
    w = np.linalg.eigvalsh(single_particle_hamiltonian(p))
    assert np.allclose(np.sort(w), np.sort(b.mode_energies), atol=1e-13)


@pytest.mark.parametrize("L,ratio", [(9, 0.3), (31, 0.9), (15, 0.99)])
def test_edge_mode_is_kernel_and_chiral(L, ratio):
    p = ChainParams(L, ratio)
    H = single_particle_hamiltonian(p)
    S = np.diag((-1.0) ** np.arange(L))
    assert np.array_equal(S @ H @ S, -H)
    w, v = np.linalg.eigh(H)
    zero = np.argmin(np.abs(w))
    assert np.sum(np.abs(w) < 1e-12) == 1
    edge = build_mode_basis(p).edge
    assert abs(abs(v[:, zero] @ edge) - 1) < 1e-10
    assert np.all(edge[1::2] == 0)


def test_edge_decoupled_first_site():
    amp = edge_amplitudes(ChainParams(3, 1e-12))
    assert np.allclose(amp, [1, 0], atol=1e-11)


def test_localization_length():
    assert localization_length(0.9) == pytest.approx(19.98, abs=0.01)
    assert localization_length(0.1) == pytest.approx(1.87, abs=0.01)
    assert localization_length(ChainParams(5, 0.5)) == pytest.approx(2 / math.log(2) + 1)
    assert localization_length(1 - 1e-9) > 1e8
    with pytest.raises(ValueError):
        localization_length(1.0)
    with pytest.raises(ValueError):
        localization_length(ChainParams(5, 2.0))
