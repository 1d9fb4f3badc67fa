"""Closed forms on the rank-one orbit and the probability simplex.

The central primitive is :func:`dd_exp`, the ``k``-fold convolution

    (e^{-x_1 s} * ... * e^{-x_k s})(t) = sum_i e^{-t x_i} / prod_{j != i} (x_j - x_i),

evaluated as ``(-1)^(k-1)`` times the divided difference of ``x -> e^{-t x}``
so that coincident nodes are handled by their confluent limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ShiftRequiredError
from .linalg import as_spectrum

MAX_EXPONENT = 700.0
# A divided-difference cell whose node span times |t| is at most this is
# evaluated by its Taylor series about the cell centre instead of by the
# Newton recursion (which cancels badly for clustered nodes).
TAYLOR_SPAN = 4.0
TAYLOR_TERMS = 40
EXACT_FACTORIAL_CAP = 20


@dataclass(frozen=True)
class MultiIndex:
    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(a) for a in self.exponents)
        if any(a < 0 for a in exps):
            raise DomainError(f"multi-index entries must be nonnegative, got {exps}")
        if not exps:
            raise DomainError("multi-index must have at least one entry")
        object.__setattr__(self, "exponents", exps)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def n(self) -> int:
        return len(self.exponents)


def _as_multi_index(alpha) -> MultiIndex:
    return alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha))


def _complete_homogeneous(u: np.ndarray, top: int) -> np.ndarray:
    """h_0..h_top of the nodes ``u`` (complete homogeneous symmetric polys)."""
    h = np.zeros(top + 1)
    h[0] = 1.0
    for x in u:
        for s in range(1, top + 1):
            h[s] += x * h[s - 1]
    return h


def _taylor_cell(nodes: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Divided difference of ``x -> e^{-t x}`` on ``nodes`` via Taylor series.

    With ``c`` the node centre and ``u = nodes - c``,
    ``f[nodes] = e^{-tc} sum_{r >= m} (-t)^r / r! * h_{r-m}(u)``, ``m = len - 1``.
    """
    m = nodes.size - 1
    c = 0.5 * (nodes[0] + nodes[-1])
    h = _complete_homogeneous(nodes - c, TAYLOR_TERMS)
    # coefficient of (-t)^(m+s) is h_s / (m+s)!
    coef = np.array([h[s] / math.factorial(m + s) for s in range(TAYLOR_TERMS + 1)])
    mt = -t
    acc = np.zeros_like(t)
    for s in range(TAYLOR_TERMS, -1, -1):
        acc = acc * mt + coef[s]
    return np.exp(-t * c) * acc * mt ** m


def _exp_divided_difference(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """f[x_0..x_{k-1}] for f(x) = e^{-t x}; ``x`` sorted ascending, ``t`` a 1-D array."""
    k = x.size
    out = np.empty_like(t)
    taylor = (x[-1] - x[0]) * np.abs(t) <= TAYLOR_SPAN
    if np.any(taylor):
        out[taylor] = _taylor_cell(x, t[taylor])
    rest = ~taylor
    if not np.any(rest):
        return out
    tr = t[rest]
    level = [np.exp(-tr * xi) for xi in x]
    for m in range(1, k):
        nxt = []
        for i in range(k - m):
            span = x[i + m] - x[i]
            small = span * np.abs(tr) <= TAYLOR_SPAN
            val = np.empty_like(tr)
            if np.any(small):
                val[small] = _taylor_cell(x[i:i + m + 1], tr[small])
            big = ~small
            if np.any(big):
                val[big] = (level[i + 1][big] - level[i][big]) / span
            nxt.append(val)
        level = nxt
    out[rest] = level[0]
    return out


def _check_exponent(nodes: np.ndarray, t: np.ndarray):
    worst = float(np.max(np.abs(np.multiply.outer(t, nodes)))) if t.size else 0.0
    if worst > MAX_EXPONENT:
        raise ShiftRequiredError(
            f"exponent magnitude {worst:.1f} exceeds {MAX_EXPONENT}; shift the "
            "spectrum by c and multiply the result by exp(-c)"
        )


def dd_exp(nodes, t=1.0):
    """Convolution of the exponentials ``e^{-x_i s}`` at time ``t``.

    Equal to ``sum_i e^{-t x_i} / prod_{j != i}(x_j - x_i)`` for distinct
    nodes, and to its continuous extension when nodes coincide. ``t`` may
    be a scalar or an array; the result has the same shape.

    >>> round(dd_exp([0.0, 1.0], 1.0), 10)
    0.6321205588
    """
    x = np.sort(np.asarray(nodes, dtype=float).ravel())
    if x.size == 0:
        raise DomainError("dd_exp needs at least one node")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("dd_exp is defined for t >= 0")
    flat = t_arr.ravel()
    _check_exponent(x, flat)
    k = x.size
    val = _exp_divided_difference(x, flat) * (-1.0) ** (k - 1)
    if t_arr.ndim == 0:
        return float(val[0])
    return val.reshape(t_arr.shape)


def _factorial_moment(exps) -> Fraction | float:
    n = len(exps)
    d = sum(exps)
    if d + n - 1 <= EXACT_FACTORIAL_CAP:
        num = math.prod(math.factorial(a) for a in exps) * math.factorial(n - 1)
        return Fraction(num, math.factorial(d + n - 1))
    log_val = sum(math.lgamma(a + 1) for a in exps) + math.lgamma(n) - math.lgamma(d + n)
    return math.exp(log_val)


def bombieri_moment(alpha):
    """``E prod |v_i|^(2 alpha_i)`` for ``v`` uniform on the complex sphere.

    Returns ``alpha_1! ... alpha_n! (n-1)! / (d+n-1)!`` as a Fraction when the
    largest factorial argument is at most 20, otherwise as a float computed
    in log space.
    """
    a = _as_multi_index(alpha)
    return _factorial_moment(a.exponents)


def simplex_monomial_integral(m):
    """``E prod x_i^(m_i)`` for ``x`` uniform on the probability simplex.

    Computed independently of :func:`bombieri_moment`, by iterating the Beta
    integral one coordinate at a time.
    """
    m = _as_multi_index(m).exponents
    n = len(m)
    if sum(m) + n - 1 > EXACT_FACTORIAL_CAP:
        return _factorial_moment(m)
    # integral over {x >= 0, sum x <= 1} of x_1^m_1 ... x_{n-1}^m_{n-1} (1 - sum)^m_n,
    # peeling one coordinate at a time; times (n-1)! for the probability measure
    val = Fraction(1)
    carried = m[-1]
    for a in reversed(m[:-1]):
        # int_0^s x^a (s - x)^b dx = s^(a+b+1) a! b! / (a+b+1)!
        val *= Fraction(math.factorial(a) * math.factorial(carried),
                        math.factorial(a + carried + 1))
        carried = a + carried + 1
    return val * math.factorial(n - 1)


def partition_p1(lam) -> float:
    """Integral of ``exp(-<diag(lam), X>)`` over rank-one projections.

    Equals ``(n-1)! * dd_exp(lam, 1)``: the uniform average of
    ``exp(-v* diag(lam) v)`` over the complex unit sphere.
    """
    lam = as_spectrum(lam)
    if float(np.max(np.abs(lam.values))) > MAX_EXPONENT:
        raise ShiftRequiredError(
            "spectrum magnitude exceeds 700; use partition_p1(lam + c) = "
            "exp(-c) * partition_p1(lam)"
        )
    return math.factorial(lam.n - 1) * dd_exp(lam.values, 1.0)


def log_partition_gradient(lam) -> np.ndarray:
    """Gradient of ``-log partition_p1`` with respect to the eigenvalues.

    Differentiating a divided difference in one node repeats that node, so
    component ``i`` is ``dd_exp(lam + [lam_i]) / dd_exp(lam)``: the mean of
    ``x_i`` under the exponential density on the simplex.
    """
    lam = as_spectrum(lam)
    base = dd_exp(lam.values, 1.0)
    grads = np.array([dd_exp(np.append(lam.values, li), 1.0) for li in lam.values])
    return grads / base
