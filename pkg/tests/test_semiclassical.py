import math
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import entropy_bits, jw_annihilators, semiclassical_jw_density
from ssh_revival import ChainParams, build_mode_basis
from ssh_revival.fock import BOSE, FERMI, ResourceError
from ssh_revival.semiclassical import (
    GreenFunction,
    ModeOccupation,
    PopulationLaw,
    SemiclassicalEnsemble,
    gaussian_kernel,
    green_function,
    mode_correlation,
    occupancy_probability,
    semiclassical_density_operator,
    steady_state,
)

LN2 = math.log(2)


def test_occupancy_limits():
    n, g = 3, 0.1
    assert occupancy_probability(n + 1, 0.0, n, g) == 1.0
    assert all(occupancy_probability(m, 0.0, n, g) == 0.0 for m in range(1, n + 1))
    t = 2 * LN2 / g
    assert all(occupancy_probability(m, t, n, g) == pytest.approx(1 / 8, abs=1e-15) for m in range(1, 5))
    assert occupancy_probability(1, 1e4, n, g) == pytest.approx(1.0)
    assert occupancy_probability(2, 1e4, n, g) < 1e-200
    with pytest.raises(ValueError):
        occupancy_probability(0, 1.0, n, g)
    with pytest.raises(ValueError):
        occupancy_probability(n + 2, 1.0, n, g)


@pytest.mark.parametrize("n", [1, 3, 10, 50])
def test_population_normalization(n):
    law = PopulationLaw(n, 0.1)
    t = np.linspace(0, 20, 201) / 0.1  # gamma t in {0, 0.1, ..., 20}
    total = sum(math.comb(n, m) * law.state_probability(m + 1, t) for m in range(n + 1))
    assert np.abs(total - 1).max() < 1e-12
    assert np.allclose(law.aggregates(t).sum(axis=0), 1, atol=1e-12)


def test_mode_correlation_default_and_limits():
    n, g = 3, 0.1
    for k in range(-n, n + 1):
        expect = 0.0 if k <= 0 else 1.0
        assert mode_correlation(k, 0.0, g, n=n) == expect
        assert mode_correlation(k, 1e4, g, n=n) == pytest.approx(0.0 if k == 0 else 1.0)
    occ = ModeOccupation.all_modes(n)
    for k in (-2, 2):
        assert mode_correlation(k, 7.0, g, occ) == pytest.approx(1 - math.exp(-0.35))
    with pytest.raises(ValueError):
        ModeOccupation(frozenset({-1}))


@pytest.mark.parametrize("L,ratio", [(7, 0.1), (9, 0.6), (51, 0.9)])
def test_green_function_invariants(L, ratio):
    b = build_mode_basis(ChainParams(L, ratio, 1.0, 0.1))
    n = b.n
    G0 = green_function(b, 0.0)
    assert np.trace(G0.G) == pytest.approx((L - 1) / 2)
    assert G0.particle_number() == pytest.approx((L + 1) / 2)
    for t in (0.0, 3.0, 17.0, 80.0):
        G = green_function(b, t)
        assert np.allclose(G.G, G.G.T)
        w = np.linalg.eigvalsh(G.G)
        assert w.min() > -1e-12 and w.max() < 1 + 1e-12
        assert G.particle_number() == pytest.approx(1 + n * math.exp(-0.05 * t), abs=1e-10)
    Ginf = green_function(b, 1e6).G
    a = b.edge
    assert np.abs(Ginf - (np.eye(L) - np.outer(a, a))).max() < 1e-12
    assert np.all(a[1::2] == 0)


def test_green_function_matches_dense_oracle_l7():
    b = build_mode_basis(ChainParams(7, 0.1, 1.0, 0.1))
    f = jw_annihilators(7)
    for t in (0.0, 4.0, 13.86, 40.0):
        rho = semiclassical_jw_density(b, t)
        oracle = np.array([[np.trace(rho @ f[i] @ f[j].T) for j in range(7)] for i in range(7)])
        assert np.abs(oracle - green_function(b, t).G).max() < 1e-10


def test_green_function_all_modes_occupied():
    b = build_mode_basis(ChainParams(5, 0.3, 1.0, 0.1))
    occ = ModeOccupation.all_modes(2)
    G = green_function(b, 6.0, occ)
    assert G.particle_number() == pytest.approx(1 + 4 * math.exp(-0.3))
    # chi equal on +k and -k, so G only mixes sites of the same sublattice
    assert np.allclose(G.G[0::2, 1::2], 0, atol=1e-14)


@pytest.mark.parametrize("stat", [FERMI, BOSE])
def test_density_operator_examples(stat):
    b = build_mode_basis(ChainParams(7, 0.1, 1.0, 0.1))
    rho0 = semiclassical_density_operator(b, 0.0, stat)
    rho0.check()
    assert rho0.purity == pytest.approx(1.0)
    rho = semiclassical_density_operator(b, 2 * LN2 / 0.1, stat)
    rho.check()
    w = np.sort(rho.eigvalsh())[::-1]
    assert np.allclose(w[:8], 1 / 8, atol=1e-12) and np.abs(w[8:]).max() < 1e-12
    assert rho.purity == pytest.approx(1 / 8)
    late = semiclassical_density_operator(b, 1e5, stat)
    edge = steady_state(b, stat)
    n_late = late.space.particle_numbers
    blk = late.rho[np.ix_(n_late == 1, n_late == 1)]
    assert np.abs(blk - edge.rho[1:, 1:]).max() < 1e-12
    assert abs(late.trace - 1) < 1e-12


def test_spectrum_independent_of_statistics():
    b = build_mode_basis(ChainParams(7, 0.4, 1.0, 0.1))
    for t in (3.0, 11.0):
        wf = np.sort(semiclassical_density_operator(b, t, FERMI).eigvalsh())
        wb = np.sort(semiclassical_density_operator(b, t, BOSE).eigvalsh())
        wf, wb = wf[wf > 1e-13], wb[wb > 1e-13]
        assert np.allclose(wf, wb, atol=1e-12)


def test_ensemble_spectrum_matches_kron_oracle():
    b = build_mode_basis(ChainParams(5, 0.7, 1.0, 0.1))
    for t in (2.0, 9.0):
        ref = np.linalg.eigvalsh(semiclassical_jw_density(b, t))
        got = SemiclassicalEnsemble(b).density(t).eigvalsh()
        assert entropy_bits(ref) == pytest.approx(entropy_bits(got), abs=1e-12)


def test_dense_cap():
    b = build_mode_basis(ChainParams(13, 0.1, 1.0, 0.1))
    with pytest.raises(ResourceError, match="Fock dimension"):
        semiclassical_density_operator(b, 1.0, BOSE)


def test_gaussian_kernel_reproduces_state():
    assert np.allclose(gaussian_kernel(GreenFunction(0.5 * np.eye(4))), 0)
    b = build_mode_basis(ChainParams(3, 0.6, 1.0, 0.1))
    G = green_function(b, 5.0)
    with pytest.warns(RuntimeWarning):
        K = gaussian_kernel(G)  # edge mode gives an eigenvalue at 0
    assert np.allclose(K, K.T)
    # interior G: rebuild rho = det(G) exp(sum K f^dag f) on the Kronecker space
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    Gi = Q @ np.diag([0.2, 0.5, 0.9]) @ Q.T
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        K = gaussian_kernel(GreenFunction(Gi))
    f = jw_annihilators(3)
    rho = np.linalg.det(Gi) * expm(sum(K[i, j] * f[i].T @ f[j] for i in range(3) for j in range(3)))
    assert np.trace(rho) == pytest.approx(1.0)
    back = np.array([[np.trace(rho @ f[i] @ f[j].T) for j in range(3)] for i in range(3)])
    assert np.allclose(back, Gi, atol=1e-12)
    with pytest.raises(ValueError):
        gaussian_kernel(GreenFunction(np.diag([1.5, 0.5])))
