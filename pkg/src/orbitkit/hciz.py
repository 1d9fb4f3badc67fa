"""The HCIZ orbit integral and the minor-eigenvalue machinery behind it.

``hciz_det(y, lam)`` evaluates

    int_{U(n)} exp(-<diag(y), U diag(lam) U*>) dU
        = prod_{p<n} p! * det[exp(-y_i lam_j)] / prod_{i<j} -(y_i - y_j)(lam_i - lam_j).

The ratio of the determinant to the two Vandermonde products is computed as
a single determinant of bivariate divided differences of ``(s, x) -> e^{-sx}``,
which stays finite and accurate when eigenvalues cluster or coincide.
"""
from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np

from .errors import DomainError, NumericalError, ShiftRequiredError, SizeError
from .linalg import DISTINCT_TOL, as_spectrum
from .partition import TAYLOR_SPAN, TAYLOR_TERMS, _complete_homogeneous

MAX_EXPONENT = 700.0
INTERLACE_SLACK = 1e-12
WEYL_MAX_N = 9
INDUCTION_MAX_N = 3
# extended precision where the platform has it (80-bit on x86-64); the
# determinant below cancels, and the extra digits absorb that loss
EXT = np.longdouble
_INV_FACTORIAL = np.cumprod(np.concatenate([[EXT(1)], 1 / np.arange(1, 512, dtype=EXT)]))


def _det_ext(M: np.ndarray):
    """Real determinant by pivoted elimination carried out in ``EXT``."""
    M = np.array(M, dtype=EXT)
    n = M.shape[0]
    det = EXT(1)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(M[k:, k])))
        if M[piv, k] == 0:
            return EXT(0)
        if piv != k:
            M[[k, piv]] = M[[piv, k]]
            det = -det
        det *= M[k, k]
        if k + 1 < n:
            M[k + 1:, k:] -= np.outer(M[k + 1:, k] / M[k, k], M[k, k:])
    return det


def _superfactorial(n: int) -> int:
    return math.prod(math.factorial(p) for p in range(1, n))


def _pair(y, lam):
    y, lam = as_spectrum(y), as_spectrum(lam)
    if y.n != lam.n:
        raise DomainError(f"spectra have different lengths: {y.n} vs {lam.n}")
    return y, lam


def _shift_exponent(y: np.ndarray, lam: np.ndarray):
    """Split off the exponent of the shift to ``min(y) = min(lam) = 0``.

    Returns ``(exponent, y0, lam0)`` with
    ``I(y, lam) = exp(exponent) * I(y0, lam0)``.
    """
    c, d = y[0], lam[0]
    y0, lam0 = y - c, lam - d
    exponent = -(d * math.fsum(y0) + c * math.fsum(lam0) + c * d * y.size)
    return exponent, y0, lam0


def _complete_homogeneous_ext(u, top: int) -> np.ndarray:
    h = np.zeros(top + 1, dtype=EXT)
    h[0] = 1
    for x in u:
        for k in range(1, top + 1):
            h[k] += x * h[k - 1]
    return h


def _taylor_cell_2d(u, v, c, d, p, q):
    """``g[y_I ; lam_J]`` for ``g(s, x) = e^{-sx}`` by its Taylor series about ``(c, d)``.

    ``u = y_I - c`` and ``v = lam_J - d`` are the centred nodes, ``p + 1`` and
    ``q + 1`` of them. Writing ``s = c + a`` and ``x = d + b``,
    ``e^{-sx} = e^{-cd} e^{-d a} e^{-c b} e^{-ab}``; the divided difference of
    ``a^r`` over ``p + 1`` nodes is ``h_{r-p}(u)``, so the cell is a double power
    series in complete homogeneous polynomials that collapses to one sum over
    the power ``k`` of ``ab``.
    """
    hy = _complete_homogeneous_ext(u, TAYLOR_TERMS)
    hl = _complete_homogeneous_ext(v, TAYLOR_TERMS)
    top = TAYLOR_TERMS + max(p, q)
    m = np.arange(top + TAYLOR_TERMS + 1)
    alpha = (-d) ** m * _INV_FACTORIAL[m]
    beta = (-c) ** m * _INV_FACTORIAL[m]
    r = np.arange(TAYLOR_TERMS + 1)
    k = np.arange(top + 1)
    ia = r[None, :] + p - k[:, None]
    ib = r[None, :] + q - k[:, None]
    A = np.where(ia >= 0, alpha[np.clip(ia, 0, None)], 0) @ hy
    B = np.where(ib >= 0, beta[np.clip(ib, 0, None)], 0) @ hl
    ek = np.where(k % 2 == 0, 1, -1) * _INV_FACTORIAL[k]
    return np.exp(-c * d) * np.sum(ek * A * B)


def exp_divided_difference_matrix(y: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """``M[i, j] = g[y_0..y_i ; lam_0..lam_j]`` for ``g(s, x) = e^{-s x}``.

    Both node vectors must be ascending. Each tensor divided difference is
    built by the Newton recursion along whichever direction has its nodes
    well separated on the scale of the other variable, and by a two-variable
    Taylor series once neither is, so clustered and repeated eigenvalues keep
    full relative accuracy in every entry. Arithmetic is carried out in
    ``numpy.longdouble`` and the result is returned in that type.
    """
    y = np.asarray(y, dtype=EXT)
    lam = np.asarray(lam, dtype=EXT)
    n = y.size
    memo = {}

    def cell(i0, i1, j0, j1):
        key = (i0, i1, j0, j1)
        if key in memo:
            return memo[key]
        sy, sl = y[i1] - y[i0], lam[j1] - lam[j0]
        ny = sy * max(abs(lam[j0]), abs(lam[j1]))
        nl = sl * max(abs(y[i0]), abs(y[i1]))
        if ny > TAYLOR_SPAN and ny >= nl:
            val = (cell(i0 + 1, i1, j0, j1) - cell(i0, i1 - 1, j0, j1)) / sy
        elif nl > TAYLOR_SPAN:
            val = (cell(i0, i1, j0 + 1, j1) - cell(i0, i1, j0, j1 - 1)) / sl
        else:
            c, d = 0.5 * (y[i0] + y[i1]), 0.5 * (lam[j0] + lam[j1])
            val = _taylor_cell_2d(y[i0:i1 + 1] - c, lam[j0:j1 + 1] - d, c, d,
                                  i1 - i0, j1 - j0)
        memo[key] = val
        return val

    return np.array([[cell(0, i, 0, j) for j in range(n)] for i in range(n)], dtype=EXT)


def hciz_det(y, lam, log: bool = False) -> float:
    """HCIZ integral by its determinantal closed form.

    Symmetric in its arguments, invariant under reordering either spectrum,
    and continuous across coincident eigenvalues. With ``log=True`` the
    natural log of the value is returned, which avoids overflow for
    spectra whose shift exponent is large.
    """
    y, lam = _pair(y, lam)
    n = y.n
    # shift both spectra to minimum 0; the integral picks up exp(exponent)
    yv, lv = y.values.astype(EXT), lam.values.astype(EXT)
    c, d = yv[0], lv[0]
    y0, lam0 = yv - c, lv - d
    exponent = -(d * np.sum(y0) + c * np.sum(lam0) + c * d * n)
    if n == 1 or not np.any(y0) or not np.any(lam0):
        # one argument is a multiple of the identity: the integrand is constant
        total = exponent
    else:
        core = _det_ext(exp_divided_difference_matrix(y0, lam0))
        if n * (n - 1) // 2 % 2:
            core = -core
        for k in range(2, n):
            core *= EXT(k) ** (n - k)  # prod_{p<n} p! = prod_k k^(n-k)
        if not np.isfinite(core) or core <= 0:
            raise NumericalError(f"determinantal evaluation lost positivity (value {float(core)!r})")
        total = exponent + np.log(core)
    if log:
        return float(total)
    if total > MAX_EXPONENT:
        raise ShiftRequiredError(
            f"log of the integral is {float(total):.1f}; shift y by c (value scales by "
            "exp(-c*sum(lam))) or call with log=True"
        )
    return float(np.exp(total))


def _signed_permutations(n: int):
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    # sign via inversion count
    inv = np.zeros(len(perms), dtype=np.intp)
    for i in range(n):
        for j in range(i + 1, n):
            inv += perms[:, i] > perms[:, j]
    return perms, np.where(inv % 2 == 0, 1, -1)


def hciz_weyl_sum(y, lam) -> float:
    """HCIZ integral as the signed sum over the symmetric group.

    ``prod p! * sum_sigma sign(sigma) exp(-<y, sigma.lam>) / prod_{i<j} -(y_i-y_j)(lam_i-lam_j)``.

    The alternating sum cancels heavily, so it is accumulated in extended
    precision, raising the working precision until the result is stable.
    """
    y, lam = _pair(y, lam)
    n = y.n
    if not (y.distinct and lam.distinct):
        raise DomainError("Weyl-sum evaluation needs distinct spectra; use hciz_det")
    if n > WEYL_MAX_N:
        raise SizeError(f"n = {n} > {WEYL_MAX_N}: n! terms is too many; use hciz_det")
    if n == 1:
        return math.exp(-y.values[0] * lam.values[0])
    perms, signs = _signed_permutations(n)
    yv = [mpmath.mpf(float(v)) for v in y.values]
    lv = [mpmath.mpf(float(v)) for v in lam.values]

    def evaluate(dps):
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            scale = mpmath.mpf(0)
            for perm, s in zip(perms, signs):
                term = mpmath.exp(-mpmath.fsum(yv[i] * lv[p] for i, p in enumerate(perm)))
                total += term if s > 0 else -term
                scale += term
            den = mpmath.mpf(1)
            for i in range(n):
                for j in range(i + 1, n):
                    den *= -(yv[i] - yv[j]) * (lv[i] - lv[j])
            return _superfactorial(n) * total / den, scale, total

    dps = 30
    while True:
        value, scale, total = evaluate(dps)
        lost = float(mpmath.log10(scale / abs(total))) if total != 0 else float(dps)
        if dps - lost >= 20:
            break
        dps = int(2 * dps + lost)
        if dps > 2000:
            raise NumericalError("Weyl sum did not stabilise below 2000 digits")
    out = float(value)
    if not math.isfinite(out) or abs(float(mpmath.log(abs(value)))) > MAX_EXPONENT:
        raise ShiftRequiredError("Weyl sum outside double range; shift the spectra")
    return out


def interlaces(a, lam) -> bool:
    """Weak interlacing ``lam_i <= a_i <= lam_{i+1}`` (ascending storage)."""
    lam = as_spectrum(lam)
    a = np.sort(np.asarray(a, dtype=float).ravel())
    if a.size != lam.n - 1:
        raise DomainError(f"expected {lam.n - 1} values, got {a.size}")
    lo, hi = lam.values[:-1], lam.values[1:]
    return bool(np.all(a >= lo - INTERLACE_SLACK) and np.all(a <= hi + INTERLACE_SLACK))


class InterlacingVector:
    """Values of length ``n-1`` interlacing a parent spectrum of length ``n``."""

    __slots__ = ("values", "parent")

    def __init__(self, values, parent):
        parent = as_spectrum(parent)
        if not interlaces(values, parent):
            raise DomainError(f"{np.asarray(values)} does not interlace {parent.values}")
        vals = np.sort(np.asarray(values, dtype=float).ravel())
        vals.setflags(write=False)
        self.values = vals
        self.parent = parent

    def __repr__(self):
        return f"InterlacingVector({self.values.tolist()}, parent={self.parent.values.tolist()})"

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _abs_vandermonde_rows(a: np.ndarray) -> np.ndarray:
    """|prod_{i<j}(a_i - a_j)| for each row of a 2-D array."""
    out = np.ones(a.shape[0])
    k = a.shape[1]
    for i in range(k):
        for j in range(i + 1, k):
            out *= np.abs(a[:, j] - a[:, i])
    return out


def _require_distinct(lam, what="spectrum"):
    if not lam.distinct:
        raise DomainError(
            f"{what} has a gap of {lam.min_gap:.3e} <= {DISTINCT_TOL}; the minor "
            "density is undefined for repeated eigenvalues"
        )


def baryshnikov_density(a, lam) -> float:
    """Density of the leading ``(n-1)``-minor spectrum of a uniform orbit point.

    ``(n-1)! |V_{n-1}(a)| / |V_n(lam)|`` on the interlacing box.
    """
    lam = as_spectrum(lam)
    _require_distinct(lam)
    vals = a.values if isinstance(a, InterlacingVector) else np.asarray(a, dtype=float)
    if not interlaces(vals, lam):
        raise DomainError(f"{vals} does not interlace {lam.values}")
    return float(_density_rows(np.sort(vals)[None, :], lam.values[None, :])[0])


def _density_rows(a: np.ndarray, lam: np.ndarray) -> np.ndarray:
    n = lam.shape[1]
    return math.factorial(n - 1) * _abs_vandermonde_rows(a) / _abs_vandermonde_rows(lam)


def gauss_box(lam: np.ndarray, q: int):
    """Tensor Gauss-Legendre rule on the interlacing boxes of each row of ``lam``.

    Returns nodes of shape ``(B, q**(n-1), n-1)`` and weights ``(B, q**(n-1))``.
    """
    B, n = lam.shape
    xi, wi = np.polynomial.legendre.leggauss(q)
    grid = np.array(list(itertools.product(range(q), repeat=n - 1)), dtype=np.intp)
    lo, hi = lam[:, :-1], lam[:, 1:]
    half = 0.5 * (hi - lo)
    nodes = lo[:, None, :] + half[:, None, :] * (xi[grid][None, :, :] + 1.0)
    weights = np.prod(wi[grid], axis=1)[None, :] * np.prod(half, axis=1)[:, None]
    return nodes, weights


def _induction(y: np.ndarray, lam: np.ndarray, q: int) -> np.ndarray:
    """Orbit integral for each row of ``lam`` by recursive box quadrature."""
    B, n = lam.shape
    if n == 1:
        return np.exp(-y[0] * lam[:, 0])
    nodes, weights = gauss_box(lam, q)
    dens = math.factorial(n - 1) * _abs_vandermonde_rows(nodes.reshape(-1, n - 1)).reshape(
        B, -1) / _abs_vandermonde_rows(lam)[:, None]
    inner = _induction(y[:-1], nodes.reshape(-1, n - 1), q).reshape(B, -1)
    y_last = y[-1]
    tilt = np.exp(y_last * (nodes.sum(axis=2) - lam.sum(axis=1)[:, None]))
    return np.sum(weights * dens * inner * tilt, axis=1)


def hciz_via_induction(y, lam, quad_points: int = 200) -> float:
    """HCIZ integral from the minor-spectrum recursion, by quadrature.

    Peels off the last coordinate of ``y``: the leading minor's spectrum
    ``a`` has the Baryshnikov density on the interlacing box, and the
    integral reduces to an orbit integral of ``diag(a)`` one size smaller,
    down to ``n = 1``. Cost grows like ``quad_points**(n(n-1)/2)``.
    """
    y, lam = _pair(y, lam)
    n = y.n
    if n > INDUCTION_MAX_N:
        raise SizeError(f"n = {n} > {INDUCTION_MAX_N} is too costly for tensor quadrature")
    if n > 1:
        _require_distinct(lam)
        _require_distinct(y, "y")
    if quad_points < 1:
        raise DomainError("quad_points must be positive")
    exponent, y0, lam0 = _shift_exponent(y.values, lam.values)
    if exponent > MAX_EXPONENT:
        raise ShiftRequiredError("shift exponent exceeds 700; shift the spectra")
    core = _induction(y0, lam0[None, :], int(quad_points))[0]
    return math.exp(exponent) * float(core)
