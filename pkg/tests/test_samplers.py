import itertools
import math

import numpy as np
import pytest
from scipy import stats

from orbitkit.errors import DomainError
from orbitkit.hciz import InterlacingVector, _abs_vandermonde_rows, interlaces
from orbitkit.partition import log_partition_gradient, partition_p1, simplex_monomial_integral
from orbitkit.randlie import RandomSource, sample_orbit_uniform_batch
from orbitkit.samplers import (
    CornersChain, sample_bingham_rank1, sample_bingham_rank1_batch, sample_corners_chain,
    sample_corners_chains, sample_minor_eigs, sample_minor_eigs_batch,
    sample_simplex_exponential, sample_simplex_exponential_batch, vandermonde_envelope,
)
from oracles import random_hermitian, random_unitary, within

E1 = math.exp(-1)


def test_envelope_bounds_interior_maximum():
    # the maximum of |V| over the box is interior here, above every corner
    lam = np.array([0.0, 1.0, 2.0, 3.0])
    corners = np.array(list(itertools.product(*zip(lam[:-1], lam[1:]))))
    assert np.max(_abs_vandermonde_rows(corners)) == pytest.approx(6.0)
    env = vandermonde_envelope(lam)
    assert 6.75 <= env <= 6.75 * (1 + 1e-5)
    grid = np.stack(np.meshgrid(*[np.linspace(a, b, 41) for a, b in zip(lam[:-1], lam[1:])]),
                    axis=-1).reshape(-1, 3)
    assert np.max(_abs_vandermonde_rows(grid)) <= env


def test_minors_n2_uniform():
    a = sample_minor_eigs_batch([0.0, 1.0], 10_000, RandomSource(1))[:, 0]
    assert stats.kstest(a, "uniform").pvalue >= 1e-3
    assert within(a, 0.5)


def test_minors_upper_mean_n3():
    a = sample_minor_eigs_batch([0.0, 1.0, 2.0], 100_000, RandomSource(2))
    assert within(a[:, 1], 19 / 12)


def test_minors_support_and_type():
    lam = [0.0, 0.4, 2.0, 2.1, 5.0]
    a = sample_minor_eigs_batch(lam, 2000, RandomSource(3))
    assert all(interlaces(row, lam) for row in a)
    v = sample_minor_eigs(lam, RandomSource(3))
    assert isinstance(v, InterlacingVector) and v.values.size == 4


def test_minors_match_haar_principal_minors():
    lam = np.array([0.0, 1.0, 2.5, 3.0])
    a = sample_minor_eigs_batch(lam, 10_000, RandomSource(4))
    X = sample_orbit_uniform_batch(lam, 10_000, RandomSource(5))
    b = np.linalg.eigvalsh(X[:, :3, :3])
    for i in range(3):
        assert stats.ks_2samp(a[:, i], b[:, i]).pvalue >= 1e-3


def test_minors_reject_repeats():
    with pytest.raises(DomainError):
        sample_minor_eigs([0.0, 1.0, 1.0], RandomSource(0))


def test_minors_deterministic():
    a = sample_minor_eigs_batch([0.0, 1.0, 3.0], 50, RandomSource(7))
    b = sample_minor_eigs_batch([0.0, 1.0, 3.0], 50, RandomSource(7))
    assert np.array_equal(a, b)


def test_corners_chain_single():
    chain = sample_corners_chain([4.0], RandomSource(0))
    assert chain.n == 1 and chain.levels[0].tolist() == [4.0]


def test_corners_chain_validity():
    lam = [0.0, 1.0, 1.5, 4.0]
    levels, resamples = sample_corners_chains(lam, 10_000, RandomSource(1))
    assert [l.shape for l in levels] == [(10_000, k + 1) for k in range(4)]
    assert resamples >= 0
    for r in range(0, 10_000, 97):
        assert CornersChain(tuple(level[r] for level in levels)).is_valid()
    assert np.allclose(levels[-1], lam)
    chain = sample_corners_chain(lam, RandomSource(2))
    assert chain.is_valid()


def test_corners_first_level_matches_minors():
    lam = [0.0, 1.0, 1.5, 4.0]
    levels, _ = sample_corners_chains(lam, 10_000, RandomSource(3))
    a = sample_minor_eigs_batch(lam, 10_000, RandomSource(4))
    for i in range(3):
        assert stats.ks_2samp(levels[2][:, i], a[:, i]).pvalue >= 1e-3


def test_corners_chain_matches_haar_nested_minors():
    lam = np.array([0.0, 1.0, 3.0])
    levels, _ = sample_corners_chains(lam, 10_000, RandomSource(5))
    X = sample_orbit_uniform_batch(lam, 10_000, RandomSource(6))
    assert stats.ks_2samp(levels[0][:, 0], X[:, 0, 0].real).pvalue >= 1e-3


def test_simplex_uniform_moments():
    pts = sample_simplex_exponential_batch(np.zeros(3), 100_000, RandomSource(1)).points
    for m in itertools.product(range(4), repeat=3):
        if sum(m) <= 3:
            vals = np.prod(pts ** np.array(m), axis=1)
            assert within(vals, float(simplex_monomial_integral(m))), m


@pytest.mark.parametrize("method", ["inverse_cdf", "rejection"])
def test_simplex_n2_mean(method):
    pts = sample_simplex_exponential_batch([0.0, 1.0], 100_000, RandomSource(2), method).points
    assert within(pts[:, 1], (1 - 2 * E1) / (1 - E1))


def test_simplex_support():
    for method in ("inverse_cdf", "rejection"):
        pts = sample_simplex_exponential_batch([0.0, 2.0, 5.0, 9.0], 5000, RandomSource(3),
                                               method).points
        assert np.all(pts >= 0)
        assert np.max(np.abs(pts.sum(axis=1) - 1)) <= 1e-12


def test_simplex_methods_agree():
    lam = [0.0, 1.0, 3.0]
    a = sample_simplex_exponential_batch(lam, 10_000, RandomSource(4), "inverse_cdf").points
    b = sample_simplex_exponential_batch(lam, 10_000, RandomSource(5), "rejection").points
    for i in range(3):
        assert stats.ks_2samp(a[:, i], b[:, i]).pvalue >= 1e-3


def test_rejection_acceptance_rate_is_shifted_partition():
    lam = np.array([1.0, 1.5, 3.0])
    batch = sample_simplex_exponential_batch(lam, 100_000, RandomSource(6), "rejection")
    p = partition_p1(lam - lam.min())
    se = math.sqrt(p * (1 - p) / batch.proposals)
    assert abs(batch.acceptance_rate - p) <= 3 * se


def test_simplex_errors():
    with pytest.raises(DomainError, match="inverse_cdf"):
        sample_simplex_exponential([0.0, 31.0], RandomSource(0), "rejection")
    with pytest.raises(DomainError):
        sample_simplex_exponential([0.0, 1.0], RandomSource(0), "gibbs")
    assert sample_simplex_exponential([0.0, 50.0], RandomSource(0)).shape == (2,)


def test_simplex_is_shift_invariant_and_seeded():
    a = sample_simplex_exponential_batch([0.0, 1.0, 2.0], 100, RandomSource(9)).points
    b = sample_simplex_exponential_batch([5.0, 6.0, 7.0], 100, RandomSource(9)).points
    assert np.array_equal(a, b)


def test_bingham_zero_matrix_is_uniform():
    v = sample_bingham_rank1_batch(np.zeros((3, 3)), 100_000, RandomSource(1))
    for i in range(3):
        assert within(np.abs(v[:, i]) ** 2, 1 / 3)


def test_bingham_diag_quadratic_form():
    v = sample_bingham_rank1_batch(np.diag([0.0, 1.0]), 100_000, RandomSource(2))
    assert within(np.abs(v[:, 1]) ** 2, (1 - 2 * E1) / (1 - E1))


def test_bingham_unit_norm_and_gradient_mean():
    gen = np.random.default_rng(3)
    A = random_hermitian(gen, 4)
    lam, W = np.linalg.eigh(A)
    v = sample_bingham_rank1_batch(A, 100_000, RandomSource(3))
    assert np.allclose(np.linalg.norm(v, axis=1), 1, atol=1e-14)
    x = np.abs(v @ W.conj()) ** 2
    g = log_partition_gradient(lam)
    for i in range(4):
        assert within(x[:, i], g[i])


def test_bingham_unitary_equivariance():
    gen = np.random.default_rng(4)
    A = random_hermitian(gen, 3)
    V = random_unitary(gen, 3)
    v = sample_bingham_rank1_batch(A, 100_000, RandomSource(5))
    w = sample_bingham_rank1_batch(V @ A @ V.conj().T, 100_000, RandomSource(6))
    Vv = v @ V.T
    for i in range(3):
        a, b = np.abs(Vv[:, i]) ** 2, np.abs(w[:, i]) ** 2
        se = math.sqrt(np.var(a) / a.size + np.var(b) / b.size)
        assert abs(a.mean() - b.mean()) <= 3 * se


def test_bingham_single_draw():
    v = sample_bingham_rank1(np.diag([0.0, 2.0]), RandomSource(0))
    assert v.shape == (2,) and abs(np.linalg.norm(v) - 1) < 1e-14
