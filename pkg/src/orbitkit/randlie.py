"""Seeded randomness, Haar unitaries and Monte Carlo estimators.

Every random quantity in orbitkit is driven by a :class:`RandomSource`, a
single-owner wrapper around NumPy's counter-based Philox generator. Batch
Monte Carlo work is split into fixed-size chunks whose generators are
derived from ``(base seed, chunk index)`` so results do not depend on how
many threads evaluate them.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShiftRequiredError
from .linalg import as_hermitian, as_spectrum

MAX_EXPONENT = 700.0
DEFAULT_CHUNK = 50_000


class RandomSource:
    """Reproducible stream of uniforms and Gaussians.

    Identical seeds and identical call sequences give bit-identical output.
    Instances are not thread safe; use :meth:`spawn` to hand independent
    streams to workers.
    """

    def __init__(self, seed: int = 0, _key=()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._key = tuple(_key)
        ss = np.random.SeedSequence(seed, spawn_key=self._key)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, key={self._key})"

    def spawn(self, index: int) -> "RandomSource":
        """Child stream keyed by hashing ``(seed, key..., index)``."""
        return RandomSource(self.seed, self._key + (int(index),))

    def next_seed(self) -> int:
        return int(self._gen.integers(0, 2**63, dtype=np.int64))

    def uniform(self, size=None) -> np.ndarray:
        """Uniforms on [0, 1)."""
        return self._gen.random(size)

    def uniform_open(self, size=None) -> np.ndarray:
        """Uniforms on (0, 1], safe to take logs of."""
        return 1.0 - self._gen.random(size)

    def normal(self, size=None) -> np.ndarray:
        """Standard normals by the Box-Muller transform."""
        shape = () if size is None else (size if isinstance(size, tuple) else (size,))
        count = int(np.prod(shape, dtype=np.int64))
        half = (count + 1) // 2
        r = np.sqrt(-2.0 * np.log(self.uniform_open(half)))
        theta = 2.0 * np.pi * self.uniform(half)
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:count]
        return z.reshape(shape) if shape else float(z[0])

    def complex_normal(self, size) -> np.ndarray:
        """Standard complex Gaussians, E|z|^2 = 1."""
        shape = size if isinstance(size, tuple) else (size,)
        z = self.normal(shape + (2,))
        return (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)

    def exponential(self, size=None) -> np.ndarray:
        return -np.log(self.uniform_open(size))


def as_random_source(rng) -> RandomSource:
    if isinstance(rng, RandomSource):
        return rng
    if rng is None:
        return RandomSource(0)
    return RandomSource(int(rng))


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n_samples: int

    def z_score(self, exact: float, floor: float = 1e-12) -> float:
        """Standardised deviation of ``exact`` from the estimate.

        ``floor`` bounds the standard error from below, relative to
        ``max(1, |exact|)``, so that integrands constant up to rounding do
        not produce spurious infinite scores.
        """
        se = max(self.stderr, floor * max(1.0, abs(exact)))
        return (exact - self.mean) / se


def merge_moments(parts):
    """Combine ``(count, mean, M2)`` triples with Chan's pairwise update.

    Means and M2 may be scalars or arrays (merged elementwise).
    """
    n_tot, mean_tot, m2_tot = 0, 0.0, 0.0
    for n, mean, m2 in parts:
        if n == 0:
            continue
        delta = mean - mean_tot
        new_n = n_tot + n
        mean_tot += delta * n / new_n
        m2_tot += m2 + delta * delta * n_tot * n / new_n
        n_tot = new_n
    return n_tot, mean_tot, m2_tot


def _chunk_moments(values: np.ndarray):
    mean = np.mean(values, axis=0)
    return values.shape[0], mean, np.sum((values - mean) ** 2, axis=0)


def chunked_mean(draw, n_samples: int, rng: RandomSource, chunk: int = DEFAULT_CHUNK,
                 threads: int = 1):
    """Estimate ``E[draw(rng_k, m)]`` over ``n_samples`` draws.

    ``draw(source, m)`` must return ``m`` i.i.d. samples of the integrand,
    either shape ``(m,)`` or ``(m, d)`` for ``d`` integrands estimated
    jointly. The sample budget is cut into chunks of ``chunk`` draws,
    chunk ``k`` using ``RandomSource(base).spawn(k)`` where ``base`` is one
    value taken from ``rng``; the result is independent of ``threads``.

    Returns a :class:`MonteCarloEstimate`, or a list of them for
    vector-valued draws.
    """
    n_samples = int(n_samples)
    if n_samples < 2:
        raise DomainError("need at least two samples for a standard error")
    base = RandomSource(rng.next_seed())
    sizes = [chunk] * (n_samples // chunk)
    if n_samples % chunk:
        sizes.append(n_samples % chunk)

    def work(k):
        return _chunk_moments(np.asarray(draw(base.spawn(k), sizes[k]), dtype=float))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(k) for k in range(len(sizes))]
    n, mean, m2 = merge_moments(parts)
    stderr = np.sqrt(m2 / (n - 1)) / math.sqrt(n)
    if np.ndim(mean) == 0:
        return MonteCarloEstimate(mean=float(mean), stderr=float(stderr), n_samples=n)
    return [MonteCarloEstimate(mean=float(m), stderr=float(s), n_samples=n)
            for m, s in zip(mean, stderr)]


def haar_unitary_batch(n: int, count: int, rng: RandomSource) -> np.ndarray:
    """``count`` independent Haar unitaries, shape ``(count, n, n)``.

    QR of a complex Ginibre matrix, with the columns of Q rephased by
    ``r_jj / |r_jj|`` so the distribution is exactly Haar.
    """
    if n < 1:
        raise DomainError("dimension must be positive")
    Z = rng.complex_normal((count, n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    return Q * phase[:, None, :]


def haar_unitary(n: int, rng: RandomSource) -> np.ndarray:
    return haar_unitary_batch(n, 1, rng)[0]


def sphere_batch(n: int, count: int, rng: RandomSource) -> np.ndarray:
    """Uniform points on the complex unit sphere in C^n, shape (count, n)."""
    z = rng.complex_normal((count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def conjugate_diag(U: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """``U diag(lam) U*`` for a single matrix or a stack of them."""
    return (U * lam) @ np.swapaxes(U, -1, -2).conj()


def sample_orbit_uniform(lam, rng: RandomSource) -> np.ndarray:
    """A Haar-random point ``U diag(lam) U*`` of the adjoint orbit."""
    lam = as_spectrum(lam)
    U = haar_unitary(lam.n, rng)
    X = conjugate_diag(U, lam.values)
    return 0.5 * (X + X.conj().T)


def sample_orbit_uniform_batch(lam, count: int, rng: RandomSource) -> np.ndarray:
    lam = as_spectrum(lam)
    U = haar_unitary_batch(lam.n, count, rng)
    X = conjugate_diag(U, lam.values)
    return 0.5 * (X + np.swapaxes(X, -1, -2).conj())


def orbit_exponent_bound(lam, y) -> float:
    """max over the orbit of ``-<diag(y), X>``: ascending lam against descending y."""
    lam = np.sort(np.asarray(lam, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))[::-1]
    return float(-np.dot(lam, y))


def mc_expectation(lam, Y, n_samples: int, rng: RandomSource, chunk: int = DEFAULT_CHUNK,
                   threads: int = 1) -> MonteCarloEstimate:
    """Monte Carlo estimate of the orbit integral of ``exp(-<Y, X>_F)``.

    ``X`` is uniform on the orbit of ``diag(lam)``. Raises
    :class:`ShiftRequiredError` when the exponent can exceed 700.
    """
    lam = as_spectrum(lam)
    Y = as_hermitian(Y)
    if Y.shape[0] != lam.n:
        raise DomainError(f"Y is {Y.shape[0]}x{Y.shape[0]} but the spectrum has {lam.n} values")
    y_eigs = np.linalg.eigvalsh(Y)
    if orbit_exponent_bound(lam.values, y_eigs) > MAX_EXPONENT:
        raise ShiftRequiredError(
            "exp(-<Y, X>) overflows on this orbit; shift Y by c*I and multiply "
            "the result by exp(-c * sum(lam))"
        )
    lam_v = lam.values
    Yh = 0.5 * (Y + Y.conj().T)

    def draw(source, m):
        U = haar_unitary_batch(lam.n, m, source)
        # <Y, U L U*> = sum_j lam_j (U* Y U)_jj
        quad = np.einsum("kij,il,klj->kj", U.conj(), Yh, U).real
        return np.exp(-(quad @ lam_v))

    return chunked_mean(draw, n_samples, rng, chunk=chunk, threads=threads)


def mc_sphere(f, n: int, n_samples: int, rng: RandomSource, chunk: int = DEFAULT_CHUNK,
              threads: int = 1) -> MonteCarloEstimate:
    """Estimate ``E f(|v_1|^2, ..., |v_n|^2)`` for ``v`` uniform on the sphere.

    ``f`` receives an array of shape ``(m, n)`` and returns ``m`` values.
    """
    def draw(source, m):
        v = sphere_batch(n, m, source)
        return f(np.abs(v) ** 2)

    return chunked_mean(draw, n_samples, rng, chunk=chunk, threads=threads)
