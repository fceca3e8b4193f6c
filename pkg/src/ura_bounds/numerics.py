"""Numerically stable scalar primitives shared by both bound evaluators.

All probabilities are carried as natural logarithms end to end; ``-inf``
encodes an exact zero.  Binomial coefficients with astronomically large
upper index (``2**100 - 250``) are handled through exact Python integers,
so no intermediate ever leaves the range of a double in log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

LN2 = math.log(2.0)

# beyond this, n+1 is no longer exactly representable and lgamma(n+1)
# silently rounds the argument; switch to the product form
_LGAMMA_SAFE_N = 10**15

_MAX_BINOMIAL_K = 10**6


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) for integer 0 <= k <= n.

    ``n`` may be an arbitrarily large exact integer (e.g. ``2**100 - 250``):
    the huge-n branch evaluates sum_j ln(n - j) - ln Gamma(k+1) with each
    factor logged from the exact integer, which keeps full double precision
    even when ``n`` itself is not representable as a float.
    """
    if k < 0 or n < 0:
        raise ValueError(f"negative argument: n={n}, k={k}")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if k == 0 or k == n:
        return 0.0
    if n <= _LGAMMA_SAFE_N:
        return (
            math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
        )
    if k > _MAX_BINOMIAL_K:
        raise ValueError(f"k={k} too large for the product form")
    total = 0.0
    for j in range(k):
        total += math.log(n - j)  # exact int -> correctly rounded log
    return total - math.lgamma(k + 1)


def log_sum_exp(terms: Sequence[float]) -> float:
    """ln sum_i exp(terms[i]) with max-shift; never overflows."""
    if len(terms) == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    m = max(terms)
    if m == -math.inf:
        return -math.inf
    if m == math.inf:
        return math.inf
    return m + math.log(sum(math.exp(t - m) for t in terms))


# ---------------------------------------------------------------------------
# chi-square upper tail, log domain
# ---------------------------------------------------------------------------

def chi_square_upper_tail(dof: int, x: float) -> float:
    """ln Pr[chi^2_dof > x] via the upper regularized incomplete gamma.

    Stays accurate deep in the tail (values like exp(-400) that underflow
    any linear-domain implementation).
    """
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return _log_igammac(dof / 2.0, x / 2.0)


def _log_igammac(a: float, x: float) -> float:
    """ln Q(a, x), Q the upper regularized incomplete gamma function."""
    if x == 0.0:
        return 0.0
    # series for the lower function where it converges fast and Q is not
    # tiny; continued fraction (logged) otherwise
    if x < a + max(1.0, 2.0 * math.sqrt(a)):
        log_p = _log_igamma_series(a, x)
        return math.log1p(-math.exp(log_p))
    return _log_igammac_cf(a, x)


def _log_igamma_series(a: float, x: float) -> float:
    """ln P(a, x) by the standard rising series; valid for x < a + O(sqrt a)."""
    term = 1.0
    total = 1.0
    ap = a
    for _ in range(10_000_000):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * 1e-17:
            break
    return a * math.log(x) - x - math.lgamma(a + 1.0) + math.log(total)


def _log_igammac_cf(a: float, x: float) -> float:
    """ln Q(a, x) by the Lentz continued fraction; valid for x >> a."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, 10_000_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return a * math.log(x) - x - math.lgamma(a) + math.log(h)


# ---------------------------------------------------------------------------
# small symmetric matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymMat:
    """Symmetric real matrix of order 2 or 3, stored as tuple rows."""

    rows: Tuple[Tuple[float, ...], ...]

    def __post_init__(self) -> None:
        q = len(self.rows)
        if q not in (1, 2, 3):
            raise ValueError(f"order must be 1..3, got {q}")
        for r in self.rows:
            if len(r) != q:
                raise ValueError("matrix is not square")
        for i in range(q):
            for j in range(i):
                if self.rows[i][j] != self.rows[j][i]:
                    raise ValueError("matrix is not exactly symmetric")

    @property
    def order(self) -> int:
        return len(self.rows)


DEFAULT_PD_MARGIN = 1e-12


def logdet_pd(m: SymMat, feasibility_margin: float = DEFAULT_PD_MARGIN) -> Optional[float]:
    """ln det(m) if every leading principal minor exceeds the margin.

    Returns None when the matrix fails the positive-definiteness check;
    callers treat that as a constraint violation, not an error.
    """
    r = m.rows
    q = m.order
    d1 = r[0][0]
    if d1 <= feasibility_margin:
        return None
    if q == 1:
        return math.log(d1)
    d2 = r[0][0] * r[1][1] - r[0][1] * r[0][1]
    if d2 <= feasibility_margin:
        return None
    if q == 2:
        return math.log(d2)
    d3 = (
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[1][2])
        - r[0][1] * (r[0][1] * r[2][2] - r[1][2] * r[0][2])
        + r[0][2] * (r[0][1] * r[1][2] - r[1][1] * r[0][2])
    )
    if d3 <= feasibility_margin:
        return None
    return math.log(d3)


# ---------------------------------------------------------------------------
# coordinate distribution of a sum of t random signs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RhoDist:
    """Exact distribution of one coordinate of a sum of t unit signs.

    ``weights[i]`` is the probability that the sum equals ``i`` for
    i in {-t, ..., t}; entries with the wrong parity are absent (zero).
    """

    t: int
    weights: Dict[int, float]
    log_weights: Dict[int, float]

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(sorted(self.weights))


def rho_distribution(t: int) -> RhoDist:
    """Weights C(t, (i+t)/2) / 2^t on the parity lattice i = 2j - t."""
    if t < 1:
        raise ValueError(f"t must be positive, got {t}")
    denom = 1 << t
    weights: Dict[int, float] = {}
    logw: Dict[int, float] = {}
    log_denom = t * LN2
    for j in range(t + 1):
        i = 2 * j - t
        c = math.comb(t, j)
        weights[i] = c / denom  # exact big-int ratio, correctly rounded
        logw[i] = math.log(c) - log_denom
    return RhoDist(t=t, weights=weights, log_weights=logw)
