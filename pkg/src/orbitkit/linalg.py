"""Dense complex linear algebra kernel.

Everything here works on plain NumPy arrays. Spectra are always stored in
ascending order; callers that need a descending view reverse explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
DISTINCT_TOL = 1e-8

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 50


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalue vector, sorted ascending on construction."""

    values: np.ndarray
    min_gap: float = field(init=False)

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=float).ravel())
        if vals.size == 0:
            raise DomainError("a spectrum needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise DomainError("spectrum values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        gap = float(np.min(np.diff(vals))) if vals.size > 1 else np.inf
        object.__setattr__(self, "min_gap", gap)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def distinct(self) -> bool:
        return self.min_gap > DISTINCT_TOL

    @property
    def spread(self) -> float:
        return float(self.values[-1] - self.values[0])

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.values)

    def shifted(self, c: float) -> "Spectrum":
        return Spectrum(self.values + c)


def as_spectrum(x) -> Spectrum:
    """Coerce a Spectrum or any real array-like into a Spectrum."""
    if isinstance(x, Spectrum):
        return x
    return Spectrum(np.atleast_1d(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class Permutation:
    """A permutation sigma of {0..n-1}; ``apply(x)[i] == x[mapping[i]]``."""

    mapping: tuple
    sign: int = field(init=False)

    def __post_init__(self):
        mapping = tuple(int(i) for i in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise DomainError(f"{mapping} is not a permutation of 0..{len(mapping) - 1}")
        object.__setattr__(self, "mapping", mapping)
        object.__setattr__(self, "sign", _parity_sign(mapping))

    @property
    def n(self) -> int:
        return len(self.mapping)

    def apply(self, x) -> np.ndarray:
        return np.asarray(x)[list(self.mapping)]

    def matrix(self) -> np.ndarray:
        """Permutation matrix P with ``P @ x == self.apply(x)``."""
        P = np.zeros((self.n, self.n))
        P[np.arange(self.n), self.mapping] = 1.0
        return P


def _parity_sign(mapping) -> int:
    seen = [False] * len(mapping)
    sign = 1
    for start in range(len(mapping)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = mapping[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DomainError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix entries must be finite")
    return M


def hermitian_deviation(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T)))


def as_hermitian(A) -> np.ndarray:
    """Validate ``A`` as Hermitian and return it as a complex array.

    Raises DomainError if ``max|A - A*| > HERMITIAN_TOL * max|A|``.
    """
    A = as_square(A)
    scale = float(np.max(np.abs(A)))
    dev = hermitian_deviation(A)
    if dev > HERMITIAN_TOL * max(scale, 1.0):
        raise DomainError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return A


def unitary_deviation(U) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))))


def as_unitary(U) -> np.ndarray:
    U = as_square(U)
    dev = unitary_deviation(U)
    if dev > UNITARY_TOL:
        raise DomainError(f"matrix is not unitary (max |UU* - I| = {dev:.3e})")
    return U


def _offdiag_norm(A) -> float:
    # summed directly: |A|_F^2 - |diag A|^2 cancels and hides small residuals
    off = A - np.diag(np.diagonal(A))
    return float(np.linalg.norm(off))


def eigh(A, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Returns
    -------
    spectrum : Spectrum
        Eigenvalues, ascending.
    W : ndarray
        Unitary matrix whose columns are the matching eigenvectors, so
        that ``A == W @ diag(spectrum.values) @ W.conj().T``.
    """
    A = as_hermitian(A).copy()
    n = A.shape[0]
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(A))
    if scale == 0.0 or n == 1:
        return Spectrum(np.real(np.diagonal(A))), V

    for _ in range(max_sweeps):
        if _offdiag_norm(A) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                mag = abs(b)
                if mag <= 1e-300:
                    continue
                phase = b / mag
                app = A[p, p].real
                aqq = A[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta^2 would overflow
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # W restricted to (p, q) is diag(1, conj(phase)) @ [[c, s], [-s, c]]
                G = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = A[:, [p, q]] @ G
                A[:, p], A[:, q] = cols[:, 0], cols[:, 1]
                rows = G.conj().T @ A[[p, q], :]
                A[p, :], A[q, :] = rows[0], rows[1]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                vcols = V[:, [p, q]] @ G
                V[:, p], V[:, q] = vcols[:, 0], vcols[:, 1]
    else:
        resid = _offdiag_norm(A)
        if resid > tol * scale:
            raise NumericalError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
                f"(off-diagonal residual {resid:.3e})"
            )

    vals = np.real(np.diagonal(A))
    order = np.argsort(vals, kind="stable")
    return Spectrum(vals[order]), V[:, order]


def eigvalsh(A) -> Spectrum:
    return eigh(A)[0]


def det_complex(M) -> complex:
    """Determinant by Gaussian elimination with partial pivoting."""
    M = as_square(M).copy()
    n = M.shape[0]
    det = complex(1.0)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(M[k:, k])))
        if M[piv, k] == 0:
            return complex(0.0)
        if piv != k:
            M[[k, piv]] = M[[piv, k]]
            det = -det
        det *= M[k, k]
        if k + 1 < n:
            factors = M[k + 1:, k] / M[k, k]
            M[k + 1:, k:] -= np.outer(factors, M[k, k:])
    return det


def vandermonde(x) -> float:
    """prod_{i<j} (x_i - x_j); 1.0 for fewer than two entries.

    The product is formed on the sorted values and the sign taken from the
    sorting permutation, so reordering the input changes at most the sign.
    """
    x = np.asarray(x, dtype=float).ravel()
    order = np.argsort(x, kind="stable")
    s = x[order]
    out = 1.0
    for i in range(s.size - 1):
        out *= float(np.prod(s[i + 1:] - s[i]))
    if out == 0.0:
        return 0.0
    # prod_{i<j}(s_i - s_j) has sign (-1)^{n(n-1)/2}; x = s composed with order
    flips = s.size * (s.size - 1) // 2
    return out * (-1) ** flips * _parity_sign(tuple(order))


def frobenius_inner(A, B) -> float:
    """Tr(A B) for Hermitian A, B (the real Frobenius pairing)."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise DomainError(f"dimension mismatch: {A.shape} vs {B.shape}")
    val = np.sum(A * B.T)
    scale = max(float(np.max(np.abs(A))) * float(np.max(np.abs(B))) * A.shape[0], 1.0)
    if abs(val.imag) > 1e-12 * scale:
        raise DomainError(f"Tr(AB) has imaginary part {val.imag:.3e}; inputs are not Hermitian")
    return float(val.real)
