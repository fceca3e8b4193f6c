"""Per-t error exponents and defect term for the binary (+-sqrt(P)) ensemble.

A sum of t binary codewords takes per-coordinate values i*sqrt(P) on the
parity lattice i in {-t, ..., t}; the Chernoff expectations factor across
coordinates into powers of small lattice sums, which are evaluated by
log-sum-exp over the nonzero-weight points only.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .numerics import LN2, log_binomial, rho_distribution
from .gaussian_bound import RegionParams, SystemParams, PowerParams


class FeasibilityError(ValueError):
    """Raised when a closed-form exponent is evaluated outside its domain."""


def phi_exponent(alpha: float, u: float, v: float, m: int, f: int) -> float:
    """Per-coordinate exponent of the joint error/region Chernoff sum."""
    d = 1.0 - 2.0 * v * (alpha - 1.0)
    if d <= 0.0:
        raise FeasibilityError(f"1 - 2v(alpha-1) = {d} <= 0")
    return (
        2.0 * (alpha * v * m - u * (m - f)) ** 2 / d
        + alpha * v * m * m
        - u * (m - f) ** 2
    )


def psi_exponent(alpha: float, delta: float, m: int) -> float:
    """Per-coordinate exponent of the region-complement Chernoff sum."""
    d = 1.0 - 2.0 * delta * (1.0 - alpha)
    if d <= 0.0:
        raise FeasibilityError(f"1 - 2delta(1-alpha) = {d} <= 0")
    return delta * alpha * (2.0 * delta - 1.0) / d * m * m


@lru_cache(maxsize=16)
def _lattice(t: int):
    """Cached per-t grids over the nonzero-weight (m, f) lattice.

    The (t+1)^2 pair grid skips off-parity points where the weight
    vanishes, and is folded along the (m, f) -> (-m, -f) symmetry of
    every exponent used here: the returned pair arrays are the first
    half of the row-major flattened grid, plus the weight of the
    self-paired center point (present only for even t).

    Returns (support, logrho, m^2, (m-f)^2, m*(m-f), logrho_m + logrho_f,
    center_log_weight).
    """
    dist = rho_distribution(t)
    support = np.array(dist.support, dtype=float)
    logrho = np.array([dist.log_weights[int(i)] for i in dist.support])
    mm = support[:, None]
    ff = support[None, :]
    dd = mm - ff
    lr = logrho[:, None] + logrho[None, :]
    npairs = lr.size
    half = (npairs + 1) // 2
    center = lr.ravel()[half - 1] if npairs % 2 else None
    flat = lambda g: np.ascontiguousarray(g.ravel()[:half])
    return (
        support,
        logrho,
        flat(mm * mm + 0.0 * ff),
        flat(dd * dd),
        flat(mm * dd),
        flat(lr),
        center,
    )


def log_p_t_binary(
    region: RegionParams,
    u: float,
    v: float,
    P: float,
    t: int,
    n: int,
    margin: float = 1e-12,
) -> Optional[float]:
    """n * (ln S_p - zeta) at fixed tilts, or None when infeasible.

    zeta = (1/2) ln(1 - 2v(alpha-1)) - beta*v and S_p is the double lattice
    sum of rho_m * rho_f * exp(P * phi(alpha,u,v,m,f)), evaluated with a
    max-shift so P*phi magnitudes of ~1e3 at large t cannot overflow.
    """
    alpha = region.alpha
    d = 1.0 - 2.0 * v * (alpha - 1.0)
    if d <= margin:
        return None
    zeta = 0.5 * math.log(d) - region.beta * v
    a = alpha * v
    c1 = P * (2.0 * a * a / d + a)
    c2 = P * (2.0 * u * u / d - u)
    c3 = P * (-4.0 * a * u / d)
    _, _, m2, d2, md, lr, center = _lattice(t)
    w = lr + c1 * m2 + c2 * d2 + c3 * md
    wmax = float(w.max())
    # entries 45 nats under the max cannot move the sum at float64
    # precision; skipping their exp dominates the cost at large t
    big = w[w >= wmax - 45.0]
    log_half = wmax + math.log(np.exp(big - wmax).sum())
    if center is None:
        log_sp = LN2 + log_half
    else:
        # the self-paired center (m = f = 0) must not be double-counted
        log_sp = log_half + math.log(2.0 - math.exp(center - log_half))
    return n * (log_sp - zeta)


def log_q_t_binary(
    region: RegionParams,
    delta: float,
    P: float,
    t: int,
    n: int,
    margin: float = 1e-12,
) -> Optional[float]:
    """n * (ln S_q - xi) at fixed delta, or None when infeasible.

    xi = (1/2) ln(1 - 2delta(1-alpha)) + delta*beta and S_q sums
    rho_m * exp(P * psi(alpha,delta,m)) over the lattice.
    """
    alpha = region.alpha
    d = 1.0 - 2.0 * delta * (1.0 - alpha)
    if d <= margin:
        return None
    xi = 0.5 * math.log(d) + delta * region.beta
    coef = P * delta * alpha * (2.0 * delta - 1.0) / d
    support, logrho = _lattice(t)[:2]
    w = logrho + coef * support * support
    wmax = w.max()
    log_sq = wmax + math.log(np.exp(w - wmax).sum())
    return n * (log_sq - xi)


def p0_binary(params: SystemParams) -> float:
    """ln[ C(Ka,2)/M ]; binary symbols meet the power constraint exactly."""
    if params.ka < 2:
        return -math.inf
    return log_binomial(params.ka, 2) - params.k * LN2


def pe_bound_binary(params: SystemParams, power: PowerParams, opt=None, **kwargs):
    """Total PUPE bound for the binary ensemble; see optimizer module."""
    from .optimizer import OptimizerSettings, pe_bound_at_power

    return pe_bound_at_power(params, power, "binary", opt or OptimizerSettings(), **kwargs)
