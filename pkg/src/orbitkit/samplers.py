"""Exact samplers driven by the closed forms.

* minor spectra of a uniform orbit point (rejection on the interlacing box),
* the corners chain of nested minor spectra,
* exponential densities ``exp(-<lam, x>)`` on the probability simplex,
* the rank-one complex matrix Bingham law ``exp(-v* A v)`` on the sphere.

All samplers take a :class:`~orbitkit.randlie.RandomSource` and are
deterministic given its seed. Batch variants return stacked arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, NumericalError
from .hciz import InterlacingVector, _abs_vandermonde_rows, _require_distinct
from .linalg import DISTINCT_TOL, as_hermitian, as_spectrum, eigh
from .partition import dd_exp
from .randlie import RandomSource

REJECTION_MAX_SPREAD = 30.0
BISECTION_TOL = 1e-12
ENVELOPE_SLACK = 1e-6
MAX_CHAIN_RESAMPLES = 1000


@dataclass(frozen=True)
class CornersChain:
    """Nested spectra; ``levels[k]`` has ``k + 1`` entries, the last is the parent."""

    levels: tuple
    resamples: int = 0

    @property
    def n(self) -> int:
        return len(self.levels)

    def is_valid(self, slack: float = 1e-12) -> bool:
        for lower, upper in zip(self.levels[:-1], self.levels[1:]):
            if np.any(lower < upper[:-1] - slack) or np.any(lower > upper[1:] + slack):
                return False
        return True


@dataclass(frozen=True)
class SimplexBatch:
    points: np.ndarray
    proposals: int

    @property
    def acceptance_rate(self) -> float:
        return self.points.shape[0] / self.proposals


# --- minor spectra --------------------------------------------------------

def vandermonde_envelope(lam: np.ndarray) -> float:
    """Upper bound for ``|V_{n-1}(a)|`` over the interlacing box of ``lam``.

    ``log|V_{n-1}|`` is concave on the box (a sum of logs of affine
    functions that are positive there), so a bounded quasi-Newton search
    finds its global maximum; a small relative slack absorbs the
    optimiser's tolerance.
    """
    lo, hi = lam[:-1], lam[1:]
    k = lo.size
    if k <= 1:
        return 1.0

    def neg_log(a):
        diff = a[None, :] - a[:, None]
        iu = np.triu_indices(k, 1)
        d = diff[iu]
        if np.any(d <= 0):
            return np.inf, np.zeros(k)
        grad = np.zeros(k)
        inv = 1.0 / d
        np.add.at(grad, iu[1], inv)
        np.subtract.at(grad, iu[0], inv)
        return -float(np.sum(np.log(d))), -grad

    start = 0.5 * (lo + hi)
    res = minimize(neg_log, start, jac=True, method="L-BFGS-B",
                   bounds=list(zip(lo, hi)), options={"ftol": 1e-15, "gtol": 1e-12})
    best = max(math.exp(-res.fun), float(_abs_vandermonde_rows(start[None, :])[0]))
    return best * (1.0 + ENVELOPE_SLACK)


def _factor_envelope(parents: np.ndarray) -> np.ndarray:
    """Row-wise bound prod_{i<j} (lam_{j+1} - lam_i) >= |V_{n-1}(a)| on each box."""
    k = parents.shape[1] - 1
    out = np.ones(parents.shape[0])
    for i in range(k):
        for j in range(i + 1, k):
            out *= parents[:, j + 1] - parents[:, i]
    return out


def _minors_rejection(parents: np.ndarray, envelope: np.ndarray, rng: RandomSource) -> np.ndarray:
    """One minor spectrum per row of ``parents`` by rejection from the uniform box."""
    B, n = parents.shape
    out = np.empty((B, n - 1))
    pending = np.arange(B)
    while pending.size:
        lo, hi = parents[pending, :-1], parents[pending, 1:]
        a = lo + (hi - lo) * rng.uniform((pending.size, n - 1))
        accept = rng.uniform(pending.size) * envelope[pending] < _abs_vandermonde_rows(a)
        out[pending[accept]] = a[accept]
        pending = pending[~accept]
    return out


def sample_minor_eigs_batch(lam, count: int, rng: RandomSource) -> np.ndarray:
    """``count`` minor spectra, shape ``(count, n-1)``, each ascending."""
    lam = as_spectrum(lam)
    _require_distinct(lam)
    if lam.n == 1:
        return np.empty((count, 0))
    M = vandermonde_envelope(lam.values)
    parents = np.broadcast_to(lam.values, (count, lam.n))
    return _minors_rejection(parents, np.full(count, M), rng)


def sample_minor_eigs(lam, rng: RandomSource) -> InterlacingVector:
    """Eigenvalues of the leading ``(n-1)`` minor of a uniform orbit point."""
    lam = as_spectrum(lam)
    return InterlacingVector(sample_minor_eigs_batch(lam, 1, rng)[0], lam)


def sample_corners_chains(lam, count: int, rng: RandomSource):
    """``count`` corners chains at once.

    Returns ``(levels, resamples)`` where ``levels[k]`` has shape
    ``(count, k + 1)`` and ``resamples`` counts chains redrawn because a
    level came out with numerically coincident values.
    """
    lam = as_spectrum(lam)
    _require_distinct(lam)
    n = lam.n
    resamples = 0
    levels = [None] * n
    levels[-1] = np.broadcast_to(lam.values, (count, n)).copy()
    todo = np.arange(count)
    for _ in range(MAX_CHAIN_RESAMPLES):
        bad = np.zeros(todo.size, dtype=bool)
        parents = levels[-1][todo]
        for k in range(n - 1, 0, -1):
            child = _minors_rejection(parents, _factor_envelope(parents), rng)
            if k > 1:
                bad |= np.min(np.diff(child, axis=1), axis=1) <= DISTINCT_TOL
            if levels[k - 1] is None:
                levels[k - 1] = np.empty((count, k))
            levels[k - 1][todo] = child
            parents = child
        if not np.any(bad):
            break
        resamples += int(bad.sum())
        todo = todo[bad]
    else:
        raise NumericalError(f"corners chain kept hitting coincident levels ({resamples} redraws)")
    return levels, resamples


def sample_corners_chain(lam, rng: RandomSource) -> CornersChain:
    levels, resamples = sample_corners_chains(lam, 1, rng)
    return CornersChain(tuple(level[0] for level in levels), resamples)


# --- exponential densities on the simplex ---------------------------------

def _simplex_inverse_cdf(lam: np.ndarray, count: int, rng: RandomSource) -> np.ndarray:
    """Coordinate-by-coordinate inversion of the exact conditionals.

    Given remaining mass ``r``, coordinate ``k`` has tail probability
    ``P(x_k > x) = e^{-lam_k x} C_k(r - x) / C_k(r)`` with ``C_k`` the
    convolution of the exponentials ``lam_k, ..., lam_{n-1}``.
    """
    n = lam.size
    x = np.empty((count, n))
    r = np.ones(count)
    for k in range(n - 1):
        nodes = lam[k:]
        target = rng.uniform_open(count)
        norm = dd_exp(nodes, r)
        lo = np.zeros(count)
        hi = r.copy()
        while np.max(hi - lo) > BISECTION_TOL:
            mid = 0.5 * (lo + hi)
            tail = np.exp(-lam[k] * mid) * dd_exp(nodes, np.maximum(r - mid, 0.0)) / norm
            above = tail > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        xk = 0.5 * (lo + hi)
        x[:, k] = xk
        r = np.maximum(r - xk, 0.0)
    x[:, -1] = r
    return x


def _simplex_rejection(lam: np.ndarray, count: int, rng: RandomSource):
    """Uniform proposals accepted with probability ``exp(-<lam - min lam, x>)``."""
    n = lam.size
    out = np.empty((count, n))
    filled = 0
    proposals = 0
    while filled < count:
        m = max(2 * (count - filled), 1024)
        e = rng.exponential((m, n))
        prop = e / e.sum(axis=1, keepdims=True)
        keep = rng.uniform(m) < np.exp(-(prop @ lam))
        idx = np.flatnonzero(keep)[: count - filled]
        out[filled:filled + idx.size] = prop[idx]
        filled += idx.size
        # proposals past the last accepted one in the final round are unused
        proposals += int(idx[-1]) + 1 if filled == count else m
    return out, proposals


def sample_simplex_exponential_batch(lam, count: int, rng: RandomSource,
                                     method: str = "inverse_cdf") -> SimplexBatch:
    """Points of the simplex with density ``exp(-<lam, x>)`` w.r.t. its uniform law.

    Coordinates follow the ascending order of ``lam``.
    """
    lam = as_spectrum(lam)
    shifted = lam.values - lam.values[0]
    if method == "inverse_cdf":
        pts = _simplex_inverse_cdf(shifted, count, rng)
        proposals = count
    elif method == "rejection":
        if lam.spread > REJECTION_MAX_SPREAD:
            raise DomainError(
                f"spread {lam.spread:.1f} > {REJECTION_MAX_SPREAD}: rejection would "
                "accept too rarely; use method='inverse_cdf'"
            )
        pts, proposals = _simplex_rejection(shifted, count, rng)
    else:
        raise DomainError(f"unknown method {method!r}; use 'inverse_cdf' or 'rejection'")
    pts = np.clip(pts, 0.0, None)
    pts /= pts.sum(axis=1, keepdims=True)
    return SimplexBatch(pts, proposals)


def sample_simplex_exponential(lam, rng: RandomSource, method: str = "inverse_cdf") -> np.ndarray:
    return sample_simplex_exponential_batch(lam, 1, rng, method).points[0]


# --- rank-one Bingham on the complex sphere --------------------------------

def sample_bingham_rank1_batch(A, count: int, rng: RandomSource,
                               method: str = "inverse_cdf") -> np.ndarray:
    """Unit vectors with density proportional to ``exp(-v* A v)``, shape ``(count, n)``.

    In the eigenbasis ``A = W diag(lam) W*`` the squared moduli
    ``x_i = |<w_i, v>|^2`` follow the exponential simplex law for ``lam``;
    their phases are independent and uniform.
    """
    A = as_hermitian(A)
    lam, W = eigh(A)
    x = sample_simplex_exponential_batch(lam, count, rng, method).points
    theta = 2.0 * np.pi * rng.uniform((count, lam.n))
    coords = np.sqrt(x) * np.exp(1j * theta)
    v = coords @ W.T
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_bingham_rank1(A, rng: RandomSource, method: str = "inverse_cdf") -> np.ndarray:
    return sample_bingham_rank1_batch(A, 1, rng, method)[0]
