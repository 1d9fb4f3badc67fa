"""Majorization, Birkhoff decomposition and linear optimisation over orbits.

The diagonal of ``U diag(lam) U*`` is ``Q @ lam`` with ``Q = |U|^2`` doubly
stochastic, so linear objectives over a unitary orbit are bounded by their
values at permutations of ``lam``. This module provides both directions
(diagonal -> permutohedron, permutohedron point -> unitary) plus the
resulting reduction of orbit linear programs to the symmetric group.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .linalg import Permutation, as_hermitian, as_spectrum, as_unitary, eigh

DS_TOL = 1e-10
MAJORIZATION_TOL = 1e-9
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class BirkhoffDecomposition:
    terms: tuple  # of (weight, Permutation)

    def __len__(self):
        return len(self.terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.terms])

    def matrix(self) -> np.ndarray:
        n = self.terms[0][1].n
        out = np.zeros((n, n))
        for w, perm in self.terms:
            out += w * perm.matrix()
        return out


def _check_doubly_stochastic(Q: np.ndarray, tol: float = DS_TOL) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {Q.shape}")
    if np.any(Q < -SUPPORT_TOL) or np.any(Q > 1 + SUPPORT_TOL):
        raise DomainError("doubly stochastic entries must lie in [0, 1]")
    rows = np.max(np.abs(Q.sum(axis=1) - 1))
    cols = np.max(np.abs(Q.sum(axis=0) - 1))
    if max(rows, cols) > tol:
        raise DomainError(f"row/column sums deviate from 1 by {max(rows, cols):.3e}")
    return np.clip(Q, 0.0, 1.0)


def unistochastic(U) -> np.ndarray:
    """Entrywise squared modulus ``|u_ij|^2`` of a unitary matrix."""
    U = as_unitary(U)
    return _check_doubly_stochastic(np.abs(U) ** 2)


def _partial_sum_gaps(v, lam):
    """Top-k partial sums of sorted-descending ``v`` minus those of ``lam``."""
    v = np.sort(np.asarray(v, dtype=float))[::-1]
    lam = np.sort(np.asarray(lam, dtype=float))[::-1]
    return np.cumsum(v) - np.cumsum(lam)


def is_majorized(v, lam) -> bool:
    """True iff ``v`` lies in the permutohedron of ``lam``."""
    lam = as_spectrum(lam)
    v = np.asarray(v, dtype=float).ravel()
    if v.size != lam.n:
        raise DomainError(f"length mismatch: {v.size} vs {lam.n}")
    gaps = _partial_sum_gaps(v, lam.values)
    if abs(gaps[-1]) > MAJORIZATION_TOL:
        return False
    return bool(np.all(gaps[:-1] <= MAJORIZATION_TOL))


def _perfect_matching(support: np.ndarray):
    """Row -> column perfect matching on a boolean support, or None.

    Kuhn's augmenting-path algorithm.
    """
    n = support.shape[0]
    match_col = [-1] * n  # column -> row

    def augment(r, seen):
        for c in np.flatnonzero(support[r]):
            if seen[c]:
                continue
            seen[c] = True
            if match_col[c] < 0 or augment(match_col[c], seen):
                match_col[c] = r
                return True
        return False

    for r in range(n):
        if not augment(r, [False] * n):
            return None
    mapping = [0] * n
    for c, r in enumerate(match_col):
        mapping[r] = c
    return mapping


def birkhoff_decompose(Q) -> BirkhoffDecomposition:
    """Write a doubly stochastic matrix as a convex combination of permutations.

    Each step peels off the permutation of a perfect matching on the current
    support, weighted by its smallest matched entry. The residual's support
    shrinks every step, so at most ``(n-1)^2 + 1`` terms are produced.
    """
    Q = _check_doubly_stochastic(Q)
    n = Q.shape[0]
    R = Q.copy()
    remaining = 1.0
    terms = []
    max_terms = (n - 1) ** 2 + 1
    while remaining > SUPPORT_TOL:
        support = R > SUPPORT_TOL
        mapping = _perfect_matching(support)
        if mapping is None:
            raise NumericalError(
                f"no perfect matching on the residual support (remaining weight "
                f"{remaining:.3e}); input is not doubly stochastic to tolerance"
            )
        rows = np.arange(n)
        entries = R[rows, mapping]
        w = float(entries.min())
        R[rows, mapping] -= w
        R[rows[entries == w], np.asarray(mapping)[entries == w]] = 0.0
        R[R < SUPPORT_TOL] = 0.0
        remaining -= w
        terms.append((w, Permutation(mapping)))
        if len(terms) > max_terms:
            raise NumericalError(f"decomposition exceeded {max_terms} terms")
    total = sum(w for w, _ in terms)
    return BirkhoffDecomposition(tuple((w / total, p) for w, p in terms))


def _rotation_kernel(t: float) -> np.ndarray:
    a, b = math.sqrt(1.0 - t), math.sqrt(t)
    return np.array([[a, b], [-b, a]])


def horn_construct(v, lam) -> np.ndarray:
    """A unitary ``U`` with ``diag(U diag(lam) U*) == v``.

    ``U`` is a coordinate permutation times at most ``n-1`` two-coordinate
    rotations. Targets are placed largest first; each uses the adjacent
    pair of still-available values bracketing it, keeping the available
    block diagonal.
    """
    lam = as_spectrum(lam)
    v = np.asarray(v, dtype=float).ravel()
    n = lam.n
    if v.size != n:
        raise DomainError(f"length mismatch: {v.size} vs {n}")
    gaps = _partial_sum_gaps(v, lam.values)
    bad = np.flatnonzero(gaps[:-1] > MAJORIZATION_TOL)
    if abs(gaps[-1]) > MAJORIZATION_TOL or bad.size:
        k = int(bad[0]) + 1 if bad.size else n
        raise DomainError(
            f"v is not majorized by lam: top-{k} partial sum exceeds by {gaps[k - 1]:.3e}"
        )

    d = lam.values.astype(float).copy()  # current diagonal, one slot per coordinate
    available = list(range(n))
    placed = {}  # coordinate -> index into v
    U = np.eye(n)
    order = np.argsort(-v, kind="stable")
    for k in order[:-1]:
        target = v[k]
        above = [i for i in available if d[i] >= target]
        below = [j for j in available if d[j] <= target]
        if not above or not below:
            # target sits outside the available range by rounding only
            i = min(available, key=lambda c: abs(d[c] - target))
            placed[i] = k
            available.remove(i)
            continue
        i = min(above, key=lambda c: d[c])
        j = max((c for c in below if c != i), key=lambda c: d[c], default=None)
        if j is None or d[i] == d[j]:
            placed[i] = k
            available.remove(i)
            continue
        t = min(max((d[i] - target) / (d[i] - d[j]), 0.0), 1.0)
        G = np.eye(n)
        G[np.ix_([i, j], [i, j])] = _rotation_kernel(t)
        U = G @ U
        d[i], d[j] = target, d[i] + d[j] - target
        placed[i] = k
        available.remove(i)
    placed[available[0]] = int(order[-1])

    P = np.zeros((n, n))
    for coord, k in placed.items():
        P[k, coord] = 1.0
    return (P @ U).astype(complex)


def min_orbit_linear(lam, z):
    """Minimise ``<sigma . lam, z>`` over permutations.

    By the Schur direction this equals the minimum of
    ``<U diag(lam) U*, diag(z)>`` over all unitaries. The value pairs
    ascending ``lam`` with descending ``z``. Among optimal permutations the
    lexicographically smallest mapping (indices into sorted ``lam``) is
    returned.
    """
    lam = as_spectrum(lam)
    z = np.asarray(z, dtype=float).ravel()
    n = lam.n
    if z.size != n:
        raise DomainError(f"length mismatch: {z.size} vs {n}")
    pos = np.argsort(-z, kind="stable")  # positions by descending z
    value = math.fsum(lam.values[r] * z[p] for r, p in enumerate(pos))

    # multiset of lam values each z-tie-group must receive
    wanted = {}
    rank = 0
    for zval in sorted(set(z.tolist()), reverse=True):
        members = np.flatnonzero(z == zval)
        bag = wanted.setdefault(zval, {})
        for _ in members:
            lv = lam.values[rank]
            bag[lv] = bag.get(lv, 0) + 1
            rank += 1
    free = list(range(n))
    mapping = []
    for i in range(n):
        bag = wanted[z[i]]
        j = next(j for j in free if bag.get(lam.values[j], 0) > 0)
        bag[lam.values[j]] -= 1
        free.remove(j)
        mapping.append(j)
    return value, Permutation(mapping)


def min_eigenvalue(A):
    """Smallest eigenvalue of a Hermitian matrix and a unit eigenvector."""
    A = as_hermitian(A)
    lam, W = eigh(A)
    return float(lam.values[0]), W[:, 0].copy()
