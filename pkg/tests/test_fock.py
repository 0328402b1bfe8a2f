import math

import numpy as np
import pytest

from ssh_revival.fock import BOSE, FERMI, FockSpace, ResourceError, fock_dimension


def test_dimensions():
    assert FockSpace(FERMI, 5).dim == 32 == fock_dimension(FERMI, 5)
    assert FockSpace(FERMI, 7, 4).dim == sum(math.comb(7, p) for p in range(5))
    assert FockSpace(BOSE, 5, 3).dim == sum(math.comb(p + 4, p) for p in range(4))
    # bose L=15 with N=8 particles: the cap-rule example
    assert fock_dimension(BOSE, 15, 8) == sum(math.comb(p + 14, p) for p in range(9)) == 490314
    with pytest.raises(ValueError):
        FockSpace(BOSE, 3)
    with pytest.raises(ValueError):
        FockSpace("anyon", 3, 1)


def test_basis_graded_and_lexicographic():
    sp = FockSpace(BOSE, 3, 2)
    nums = sp.basis.sum(axis=1)
    assert np.all(np.diff(nums) >= 0)
    for p in range(3):
        block = [tuple(r) for r in sp.sectors[p]]
        assert block == sorted(block)
    for i, occ in enumerate(sp.basis):
        assert sp.index(occ) == i


def test_fermion_anticommutation():
    sp = FockSpace(FERMI, 4)
    f = [sp.annihilation(i).toarray() for i in range(4)]
    for i in range(4):
        for j in range(4):
            anti = f[i] @ f[j].T + f[j].T @ f[i]
            assert np.allclose(anti, np.eye(sp.dim) * (i == j))
            assert np.allclose(f[i] @ f[j] + f[j] @ f[i], 0)
        assert np.allclose(f[i].T @ f[i], sp.number(i).toarray())


def test_boson_commutation_below_cap():
    sp = FockSpace(BOSE, 3, 3)
    a = [sp.annihilation(i).toarray() for i in range(3)]
    below = sp.particle_numbers < sp.max_total
    for i in range(3):
        for j in range(3):
            comm = a[i] @ a[j].T - a[j].T @ a[i]
            expect = np.eye(sp.dim) * (i == j)
            assert np.allclose(comm[np.ix_(below, below)], expect[np.ix_(below, below)])
        assert np.allclose(a[i].T @ a[i], sp.number(i).toarray())


@pytest.mark.parametrize("stat", [FERMI, BOSE])
def test_mode_creation_matches_sparse_operators(stat):
    rng = np.random.default_rng(1)
    sp = FockSpace(stat, 4, 3)
    amp = rng.normal(size=4)
    psi = rng.normal(size=len(sp.sectors[1]))
    op = sum(amp[i] * sp.creation(i) for i in range(4))
    ref = op @ sp.embed(1, psi)
    out = sp.embed(2, sp.apply_mode_creation(amp, psi, 1))
    assert np.allclose(out, ref)
    with pytest.raises(ResourceError):
        sp.apply_mode_creation(amp, np.ones(len(sp.sectors[3])), 3)


def test_sector_index_absent():
    sp = FockSpace(FERMI, 3, 1)
    assert sp.sector_index(1, np.array([[1, 1, 0]]))[0] == -1
