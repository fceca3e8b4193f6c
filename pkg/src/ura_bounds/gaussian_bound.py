"""Per-t error exponents and codebook-defect term for the Gaussian ensemble.

The joint error/region probability and the region-complement probability at
fixed region and tilt parameters reduce to log-determinants of a 3x3 and a
2x2 symmetric matrix; the matrices themselves are exposed so tests can check
them against the full block-matrix construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .numerics import (
    DEFAULT_PD_MARGIN,
    LN2,
    SymMat,
    chi_square_upper_tail,
    log_binomial,
    log_sum_exp,
)


@dataclass(frozen=True)
class SystemParams:
    """Frame length, payload bits, active users and target error rate."""

    n: int
    k: int
    ka: int
    epsilon: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 1 <= self.ka < (1 << self.k):
            raise ValueError(f"need 1 <= ka < 2^k, got ka={self.ka}, k={self.k}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")

    @property
    def M(self) -> int:
        """Codebook size 2^k as an exact integer."""
        return 1 << self.k


@dataclass(frozen=True)
class PowerParams:
    """Per-symbol power constraint P and codebook variance P' <= P."""

    P: float
    Pprime: float

    def __post_init__(self) -> None:
        if self.P <= 0.0 or self.Pprime <= 0.0:
            raise ValueError("powers must be positive")
        if self.Pprime > self.P:
            raise ValueError(f"Pprime={self.Pprime} exceeds P={self.P}")


@dataclass(frozen=True)
class RegionParams:
    """Slope and offset of the good-region constraint on the noise norm."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("alpha and beta must be positive")


@dataclass(frozen=True)
class TiltParams:
    """Chernoff tilts: (u, v) for the joint event, delta for the complement."""

    u: float
    v: float
    delta: float

    def __post_init__(self) -> None:
        if self.u <= 0.0 or self.v <= 0.0 or self.delta <= 0.0:
            raise ValueError("tilts must be positive")


def ebno_db(P: float, n: int, k: int) -> float:
    """Energy per bit over noise density, Eb/N0 = P*n/(2k), in dB.

    The noise has variance 1 per real dimension, so N0 = 2; energy per
    bit is n*P/k.  Values below 10*log10(ln 2) ~ -1.59 dB are infeasible
    for any code, which pins down the factor of two in the convention.
    """
    return 10.0 * math.log10(P * n / (2.0 * k))


def power_for_ebno(params: SystemParams, ebno: float, ratio: float = 1.0) -> PowerParams:
    """PowerParams with P matching the given Eb/N0 (dB) and P' = ratio*P."""
    p = 2.0 * 10.0 ** (ebno / 10.0) * params.k / params.n
    return PowerParams(P=p, Pprime=ratio * p)


def build_matrix_A(alpha: float, u: float, v: float, pprime: float, t: int) -> SymMat:
    """3x3 quadratic-form matrix of the tilted joint error/region event."""
    s = pprime * t
    rs = math.sqrt(s)
    a11 = (alpha - 1.0) * v
    a12 = (alpha * v - u) * rs
    a13 = u * rs
    a22 = (alpha * v - u) * s
    a23 = u * s
    a33 = -u * s
    return SymMat(((a11, a12, a13), (a12, a22, a23), (a13, a23, a33)))


def build_matrix_B(alpha: float, pprime: float, t: int) -> SymMat:
    """2x2 quadratic-form matrix of the region-complement event."""
    s = pprime * t
    rs = math.sqrt(s)
    return SymMat(((1.0 - alpha, -alpha * rs), (-alpha * rs, -alpha * s)))


def log_p_t_gaussian(
    region: RegionParams,
    u: float,
    v: float,
    pprime: float,
    t: int,
    n: int,
    margin: float = DEFAULT_PD_MARGIN,
) -> Optional[float]:
    """-(n/2) ln det(I3 - 2A) + v*beta*n, or None if I3 - 2A is not PD.

    This is the Chernoff value at fixed (u, v); the infimum over tilts is
    the optimizer's job.  Determinant of the 3x3 is expanded inline (the
    optimizer calls this millions of times); idempotent with
    logdet_pd(I - 2*build_matrix_A(...)).
    """
    alpha = region.alpha
    s = pprime * t
    rs = math.sqrt(s)
    m11 = 1.0 - 2.0 * (alpha - 1.0) * v
    m12 = -2.0 * (alpha * v - u) * rs
    m13 = -2.0 * u * rs
    m22 = 1.0 - 2.0 * (alpha * v - u) * s
    m23 = -2.0 * u * s
    m33 = 1.0 + 2.0 * u * s
    if m11 <= margin:
        return None
    d2 = m11 * m22 - m12 * m12
    if d2 <= margin:
        return None
    d3 = (
        m11 * (m22 * m33 - m23 * m23)
        - m12 * (m12 * m33 - m23 * m13)
        + m13 * (m12 * m23 - m22 * m13)
    )
    if d3 <= margin:
        return None
    return -0.5 * n * math.log(d3) + v * region.beta * n


def log_q_t_gaussian(
    region: RegionParams,
    delta: float,
    pprime: float,
    t: int,
    n: int,
    margin: float = DEFAULT_PD_MARGIN,
) -> Optional[float]:
    """-(n/2) ln det(I2 - 2*delta*B) - delta*beta*n, or None if not PD."""
    alpha = region.alpha
    s = pprime * t
    rs = math.sqrt(s)
    e11 = 1.0 - 2.0 * delta * (1.0 - alpha)
    e12 = 2.0 * delta * alpha * rs
    e22 = 1.0 + 2.0 * delta * alpha * s
    if e11 <= margin:
        return None
    d2 = e11 * e22 - e12 * e12
    if d2 <= margin:
        return None
    return -0.5 * n * math.log(d2) - delta * region.beta * n


def p0_gaussian(params: SystemParams, power: PowerParams) -> float:
    """ln[ C(Ka,2)/M + Ka * Pr[chi^2_n > n*P/P'] ].

    The tail is the probability that a codeword drawn with per-symbol
    variance P' violates the power constraint ||f(W)||^2 <= n*P.
    """
    if power.Pprime >= power.P:
        raise ValueError("p0 requires Pprime < P")
    parts = []
    if params.ka >= 2:
        parts.append(log_binomial(params.ka, 2) - params.k * LN2)
    tail = chi_square_upper_tail(params.n, params.n * power.P / power.Pprime)
    parts.append(math.log(params.ka) + tail)
    return log_sum_exp(parts)


def pe_bound_gaussian(params: SystemParams, power: PowerParams, opt=None, **kwargs):
    """Total PUPE bound for the Gaussian ensemble; see optimizer module."""
    from .optimizer import OptimizerSettings, pe_bound_at_power

    return pe_bound_at_power(params, power, "gaussian", opt or OptimizerSettings(), **kwargs)
