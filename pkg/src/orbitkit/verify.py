"""Closed form versus Monte Carlo checks, one :class:`VerifyReport` each."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .hciz import gauss_box, hciz_det, _density_rows, _require_distinct
from .linalg import as_hermitian, as_spectrum, eigh
from .partition import bombieri_moment, log_partition_gradient, partition_p1
from .randlie import (
    MonteCarloEstimate, RandomSource, chunked_mean, mc_expectation, mc_sphere,
    sample_orbit_uniform_batch,
)
from .samplers import sample_bingham_rank1_batch

Z_LIMIT = 3.0


@dataclass(frozen=True)
class VerifyReport:
    closed_form: float
    mc_mean: float
    mc_stderr: float
    n_samples: int
    z_score: float
    passed: bool

    @classmethod
    def compare(cls, closed_form: float, est: MonteCarloEstimate) -> "VerifyReport":
        z = est.z_score(closed_form)
        return cls(float(closed_form), est.mean, est.stderr, est.n_samples, float(z),
                   bool(abs(z) <= Z_LIMIT))

    def to_dict(self) -> dict:
        return {
            "closed_form": self.closed_form,
            "mc_mean": self.mc_mean,
            "mc_stderr": self.mc_stderr,
            "n_samples": self.n_samples,
            "z_score": self.z_score,
            "pass": self.passed,
        }


def verify_partition(lam, trials: int, rng: RandomSource, threads: int = 1) -> VerifyReport:
    """partition_p1 against the uniform-sphere average of exp(-sum lam_i |v_i|^2)."""
    lam = as_spectrum(lam)
    vals = lam.values
    est = mc_sphere(lambda x: np.exp(-(x @ vals)), lam.n, trials, rng, threads=threads)
    return VerifyReport.compare(partition_p1(lam), est)


def verify_hciz(y, lam, trials: int, rng: RandomSource, threads: int = 1) -> VerifyReport:
    """hciz_det against Haar Monte Carlo over U(n)."""
    y, lam = as_spectrum(y), as_spectrum(lam)
    est = mc_expectation(lam, np.diag(y.values), trials, rng, threads=threads)
    return VerifyReport.compare(hciz_det(y, lam), est)


def multi_indices(n: int, max_degree: int):
    """All exponent tuples of length n with total degree <= max_degree."""
    return [a for a in itertools.product(range(max_degree + 1), repeat=n) if sum(a) <= max_degree]


def verify_bombieri(n: int, trials: int, rng: RandomSource, max_degree: int = 3,
                    threads: int = 1):
    """Exact sphere moments against Monte Carlo, jointly for every |alpha| <= max_degree."""
    alphas = multi_indices(n, max_degree)
    powers = np.array(alphas, dtype=float)

    def f(x):
        return np.prod(x[:, None, :] ** powers[None, :, :], axis=2)

    ests = mc_sphere(f, n, trials, rng, threads=threads)
    return [(a, VerifyReport.compare(float(bombieri_moment(a)), e)) for a, e in zip(alphas, ests)]


def top_minor_mean(lam) -> float:
    """Mean of the largest leading-minor eigenvalue under the minor density.

    The integrand is polynomial on the box, so a modest Gauss rule is exact.
    """
    lam = as_spectrum(lam)
    _require_distinct(lam)
    nodes, weights = gauss_box(lam.values[None, :], lam.n + 2)
    dens = _density_rows(nodes[0], np.broadcast_to(lam.values, (nodes.shape[1], lam.n)))
    return float(np.sum(weights[0] * dens * nodes[0, :, -1]))


def verify_baryshnikov(lam, trials: int, rng: RandomSource, threads: int = 1) -> VerifyReport:
    """Minor-density mean of the top minor eigenvalue against Haar conjugation."""
    lam = as_spectrum(lam)
    closed = top_minor_mean(lam)
    n = lam.n

    def draw(source, m):
        X = sample_orbit_uniform_batch(lam, m, source)
        return np.linalg.eigvalsh(X[:, : n - 1, : n - 1])[:, -1]

    return VerifyReport.compare(closed, chunked_mean(draw, trials, rng, threads=threads))


def verify_bingham(A, trials: int, rng: RandomSource, threads: int = 1):
    """Mean eigenbasis weights |<w_i, v>|^2 of Bingham samples against the
    gradient of -log partition_p1."""
    A = as_hermitian(A)
    lam, W = eigh(A)
    grad = log_partition_gradient(lam)

    def draw(source, m):
        v = sample_bingham_rank1_batch(A, m, source)
        return np.abs(v @ W.conj()) ** 2

    ests = chunked_mean(draw, trials, rng, chunk=min(trials, 20_000), threads=threads)
    return [VerifyReport.compare(g, e) for g, e in zip(grad, ests)]


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)
