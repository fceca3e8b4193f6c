"""Monte-Carlo and exhaustive oracles for the analytical machinery.

Everything here is deliberately independent of the closed-form bound code:
events are simulated from their definitions, the quadratic-form MGF is
averaged directly, and the tiny-scale simulator decodes by brute force over
all candidate message subsets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

import numpy as np

from .gaussian_bound import RegionParams, SystemParams

_MAX_SUBSETS = 10**6
_BATCH = 20_000


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int


@dataclass(frozen=True)
class Codebook:
    """One realization of the random codebook, columns indexed by message."""

    kind: str
    symbols: np.ndarray  # shape (n, M)
    power: float


@dataclass(frozen=True)
class ChannelDraw:
    tx_set: FrozenSet[int]
    noise: np.ndarray
    received: np.ndarray


@dataclass(frozen=True)
class TxOutcome:
    decoded_set: FrozenSet[int]
    missed: FrozenSet[int]
    false: FrozenSet[int]
    correct: FrozenSet[int]


def draw_codebook(kind: str, M: int, n: int, power: float, rng: np.random.Generator) -> Codebook:
    if kind == "gaussian":
        sym = rng.normal(0.0, math.sqrt(power), size=(n, M))
    elif kind == "binary":
        sym = (2.0 * rng.integers(0, 2, size=(n, M)) - 1.0) * math.sqrt(power)
    else:
        raise ValueError(f"unknown codebook kind: {kind}")
    return Codebook(kind=kind, symbols=sym, power=power)


def sample_codeword_sum(
    kind: str, P: float, t: int, n, rng: np.random.Generator
) -> np.ndarray:
    """Coordinate-wise sum of t freshly drawn codewords; n may be a shape."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    shape = (t,) + (tuple(n) if isinstance(n, tuple) else (n,))
    if kind == "gaussian":
        return rng.normal(0.0, math.sqrt(P), size=shape).sum(axis=0)
    if kind == "binary":
        return (2.0 * rng.integers(0, 2, size=shape) - 1.0).sum(axis=0) * math.sqrt(P)
    raise ValueError(f"unknown codebook kind: {kind}")


def _freq_estimate(hits: int, trials: int, seed: int) -> MCEstimate:
    p = hits / trials
    var = p * (1.0 - p) * trials / max(1, trials - 1)
    return MCEstimate(mean=p, stderr=math.sqrt(var / trials), trials=trials, seed=seed)


def estimate_event_probs(
    kind: str,
    P: float,
    t: int,
    n: int,
    region: RegionParams,
    trials: int,
    seed: int,
) -> Tuple[MCEstimate, MCEstimate]:
    """Empirical frequencies of the joint error/region event and of the
    region complement, drawing noise and codeword sums per trial."""
    if trials < 10**3:
        raise ValueError(f"trials must be >= 1000, got {trials}")
    rng = np.random.default_rng(seed)
    hits_er = 0  # error AND region
    hits_rc = 0  # region complement
    left = trials
    while left > 0:
        b = min(_BATCH, left)
        left -= b
        z = rng.standard_normal((b, n))
        cm = sample_codeword_sum(kind, P, t, (b, n), rng)
        cf = sample_codeword_sum(kind, P, t, (b, n), rng)
        z2 = (z * z).sum(axis=1)
        err = z2 - ((cm - cf + z) ** 2).sum(axis=1) >= 0.0
        reg = region.alpha * ((cm + z) ** 2).sum(axis=1) - z2 + region.beta * n > 0.0
        hits_er += int(np.count_nonzero(err & reg))
        hits_rc += int(np.count_nonzero(~reg))
    return (
        _freq_estimate(hits_er, trials, seed),
        _freq_estimate(hits_rc, trials, seed),
    )


def check_lemma2_mgf(
    A: np.ndarray, b: np.ndarray, trials: int, seed: int
) -> Tuple[MCEstimate, float]:
    """MC average of exp(eta' A eta + b' eta) against the closed form.

    A must be symmetric with lambda_min(I - 2A) > 0; the caller asserts
    |mc - closed| <= 3 * stderr.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    dim = A.shape[0]
    if A.shape != (dim, dim) or not np.allclose(A, A.T):
        raise ValueError("A must be square symmetric")
    M = np.eye(dim) - 2.0 * A
    evals = np.linalg.eigvalsh(M)
    if evals.min() <= 0.0:
        raise ValueError("lambda_min(I - 2A) must be positive")
    sign, logdet = np.linalg.slogdet(M)
    closed = math.exp(-0.5 * logdet + 0.5 * float(b @ np.linalg.solve(M, b)))
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    left = trials
    while left > 0:
        bsz = min(_BATCH * 5, left)
        left -= bsz
        eta = rng.standard_normal((bsz, dim))
        w = np.exp(((eta @ A) * eta).sum(axis=1) + eta @ b)
        total += float(w.sum())
        total_sq += float((w * w).sum())
    mean = total / trials
    var = max(0.0, (total_sq / trials - mean * mean)) * trials / max(1, trials - 1)
    return MCEstimate(mean=mean, stderr=math.sqrt(var / trials), trials=trials, seed=seed), closed


def decode_ml(
    codebook: Codebook,
    received: np.ndarray,
    ka: int,
    rng: np.random.Generator,
) -> FrozenSet[int]:
    """Exhaustive ML set decoding: the size-ka subset whose codeword sum is
    norm-closest to the received vector, ties broken uniformly."""
    M = codebook.symbols.shape[1]
    subsets = list(itertools.combinations(range(M), ka))
    sums = codebook.symbols[:, np.array(subsets)].sum(axis=2)  # (n, S)
    d = ((received[:, None] - sums) ** 2).sum(axis=0)
    dmin = d.min()
    ties = np.flatnonzero(d == dmin)
    pick = ties[rng.integers(0, len(ties))] if len(ties) > 1 else ties[0]
    return frozenset(subsets[int(pick)])


def classify_outcome(tx_set: FrozenSet[int], decoded: FrozenSet[int]) -> TxOutcome:
    return TxOutcome(
        decoded_set=decoded,
        missed=tx_set - decoded,
        false=decoded - tx_set,
        correct=tx_set & decoded,
    )


def simulate_pupe_ml(
    params: SystemParams,
    kind: str,
    P: float,
    trials: int,
    seed: int,
) -> MCEstimate:
    """Ensemble-average per-user error rate of the exhaustive ML decoder.

    A fresh codebook is drawn per trial (the bounds are ensemble averages);
    transmit sets use distinct messages, so message collisions are excluded
    here and accounted for separately by the defect term.
    """
    M = params.M
    ka = params.ka
    if math.comb(M, ka) > _MAX_SUBSETS:
        raise ValueError(
            f"C({M},{ka}) exceeds the exhaustive-ML limit {_MAX_SUBSETS}"
        )
    subsets = list(itertools.combinations(range(M), ka))
    sub_idx = np.array(subsets)  # (S, ka)
    rng = np.random.default_rng(seed)
    total_missed = 0.0
    total_sq = 0.0
    for _ in range(trials):
        cb = draw_codebook(kind, M, params.n, P, rng)
        tx = rng.choice(M, size=ka, replace=False)
        tx_set = frozenset(int(w) for w in tx)
        y = cb.symbols[:, tx].sum(axis=1) + rng.standard_normal(params.n)
        sums = cb.symbols[:, sub_idx].sum(axis=2)
        d = ((y[:, None] - sums) ** 2).sum(axis=0)
        dmin = d.min()
        ties = np.flatnonzero(d == dmin)
        pick = ties[rng.integers(0, len(ties))] if len(ties) > 1 else ties[0]
        decoded = frozenset(subsets[int(pick)])
        frac = len(tx_set - decoded) / ka
        total_missed += frac
        total_sq += frac * frac
    mean = total_missed / trials
    var = max(0.0, total_sq / trials - mean * mean) * trials / max(1, trials - 1)
    return MCEstimate(mean=mean, stderr=math.sqrt(var / trials), trials=trials, seed=seed)
