"""Search machinery for every infimum in the two achievability bounds.

Layout of the nested searches, innermost first:

* (u, v) tilts of the joint error/region event: Nelder-Mead in log space
  (the objective is a cumulant generating function, hence convex in the
  tilts at fixed region).
* delta tilt of the region complement: coarse log-grid scan followed by a
  golden section (1-D, unimodal).
* (alpha, beta) region per t: Nelder-Mead in log space with random
  restarts, or a single warm start carried over from the previous power
  point.
* P'/P for the Gaussian ensemble: golden section per power point.
* Eb/N0: bisection certified by the endpoint evaluations.

Per-t optimizations are independent and may run in a process pool; the
final reduction is a fixed-order log-sum-exp so results are identical for
any worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import binary_bound as bb
from . import gaussian_bound as gb
from .gaussian_bound import PowerParams, RegionParams, SystemParams, power_for_ebno
from .numerics import log_binomial, log_sum_exp

INF = math.inf

_OUTER_STEP = 0.30  # initial simplex edge in (ln alpha, ln beta_off)
_INNER_STEP = 0.35  # initial simplex edge in (ln u, ln v)
# cold-start grid, relative to the q-feasibility cliff (see optimize_term_t)
_ALPHA_FRACS = (0.35, 0.6, 1.0, 1.6)
_BETA_OFFS = (3e-3, 0.02, 0.08, 0.3)
_ALPHA_DRAW = (0.25, 2.5)  # restart draw, multiples of 1/(1+s)
_BETA_OFF_DRAW = (1e-4, 0.5)
_DELTA_GRID = tuple(np.linspace(math.log(1e-8), math.log(1e3), 23))
_RATIO_BRACKET = (0.8, 1.0 - 1e-6)
# coarse P'/P seed: the optimum sits where the codebook power-violation
# tail in p0 is just affordable, always in the high-0.9x range here
_RATIO_GRID = (0.90, 0.93, 0.95, 0.96, 0.965, 0.97, 0.9725, 0.975, 0.98, 0.99)


class SearchFailure(RuntimeError):
    """Eb/N0 bracket could not be established; endpoint bounds attached."""

    def __init__(self, msg: str, endpoints=None):
        super().__init__(msg)
        self.endpoints = endpoints or []


@dataclass(frozen=True)
class OptimizerSettings:
    outer_max_evals: int = 200
    inner_max_evals: int = 200
    rel_tol: float = 1e-7
    multistarts: int = 8
    seed: int = 0
    bisect_tol_db: float = 0.01

    def __post_init__(self) -> None:
        if self.rel_tol <= 0 or self.bisect_tol_db <= 0:
            raise ValueError("tolerances must be positive")
        if min(self.outer_max_evals, self.inner_max_evals, self.multistarts) < 1:
            raise ValueError("budgets must be >= 1")


@dataclass(frozen=True)
class TermResult:
    """Optimum of one t-term: clipped ln min(1, C1*p_t + C2*q_t)."""

    t: int
    log_pt: float
    log_qt: float
    log_binom_pt: float
    log_binom_qt: float
    log_term: float
    alpha: float
    beta: float
    u: float
    v: float
    delta: float
    evals: int
    infeasible_probes: int
    feasible: bool

    @property
    def argmin(self) -> Tuple[float, float, float, float, float]:
        return (self.alpha, self.beta, self.u, self.v, self.delta)


@dataclass
class BoundResult:
    log_pe: float
    log_p0: float
    terms: List[TermResult]
    diagnostics: dict = field(default_factory=dict)


WarmStart = Tuple[float, float, float, float, float]  # ln of (alpha, beta, u, v, delta)


# ---------------------------------------------------------------------------
# derivative-free building blocks
# ---------------------------------------------------------------------------

def nelder_mead(
    f: Callable[[Tuple[float, ...]], float],
    x0: Sequence[float],
    step: float,
    max_evals: int,
    rel_tol: float,
) -> Tuple[Tuple[float, ...], float, int]:
    """Minimal Nelder-Mead; +inf objective values mark infeasible probes.

    scipy's implementation would work, but its per-call overhead dominates
    for objectives this cheap invoked millions of times.
    """
    dim = len(x0)
    pts: List[Tuple[float, ...]] = [tuple(x0)]
    for i in range(dim):
        p = list(x0)
        p[i] += step
        pts.append(tuple(p))
    vals = [f(p) for p in pts]
    evals = dim + 1
    while evals < max_evals:
        order = sorted(range(dim + 1), key=lambda i: vals[i])
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        best, worst = vals[0], vals[-1]
        if math.isfinite(best) and math.isfinite(worst):
            if worst - best <= rel_tol * (abs(best) + 1e-12):
                break
        centroid = tuple(
            sum(p[i] for p in pts[:-1]) / dim for i in range(dim)
        )
        refl = tuple(2.0 * centroid[i] - pts[-1][i] for i in range(dim))
        fr = f(refl)
        evals += 1
        if fr < vals[0]:
            expd = tuple(3.0 * centroid[i] - 2.0 * pts[-1][i] for i in range(dim))
            fe = f(expd)
            evals += 1
            if fe < fr:
                pts[-1], vals[-1] = expd, fe
            else:
                pts[-1], vals[-1] = refl, fr
        elif fr < vals[-2]:
            pts[-1], vals[-1] = refl, fr
        else:
            contr = tuple(0.5 * (centroid[i] + pts[-1][i]) for i in range(dim))
            fc = f(contr)
            evals += 1
            if fc < vals[-1]:
                pts[-1], vals[-1] = contr, fc
            else:
                # shrink toward the best vertex
                for j in range(1, dim + 1):
                    pts[j] = tuple(
                        0.5 * (pts[0][i] + pts[j][i]) for i in range(dim)
                    )
                    vals[j] = f(pts[j])
                evals += dim
    i = min(range(dim + 1), key=lambda j: vals[j])
    return pts[i], vals[i], evals


def golden_min(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    max_evals: int,
    xtol: float,
) -> Tuple[float, float, int]:
    """Golden-section minimum on [lo, hi]; returns best probed point."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    while b - a > xtol and evals < max_evals:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        evals += 1
        if fc < best_f:
            best_x, best_f = c, fc
        if fd < best_f:
            best_x, best_f = d, fd
    return best_x, best_f, evals


# ---------------------------------------------------------------------------
# inner searches at fixed region
# ---------------------------------------------------------------------------

def _minimize_uv(eval_lp, warm, max_evals, rel_tol, counters):
    """Infimum over tilts (u, v) of a per-t Chernoff value.

    Returns (value clipped at 0, (ln u, ln v)); value 0 (probability 1)
    is always available as the tilt-to-zero limit.
    """

    def f(x):
        u, v = math.exp(x[0]), math.exp(x[1])
        counters["evals"] += 1
        if u == 0.0 or v == 0.0 or math.isinf(u) or math.isinf(v):
            # under/overflowed tilt: the objective is flat there, which
            # strands the simplex, so wall it off instead
            counters["infeasible"] += 1
            return INF
        val = eval_lp(u, v)
        if val is None:
            counters["infeasible"] += 1
            return INF
        return val

    # fixed candidates guard against a stale warm start from a very
    # different region landing in a bad basin; the clamp keeps a warm
    # point off the v->0 plateau where every simplex step is a no-op
    lim = math.log(1e4)
    candidates = (
        []
        if warm is None
        else [tuple(min(lim, max(-lim, w)) for w in warm)]
    )
    candidates += [
        (math.log(0.1), math.log(0.1)),
        (math.log(0.02), math.log(0.02)),
        (math.log(0.25), math.log(20.0)),
    ]
    scored = []
    for c in candidates:
        fc = f(c)
        shrink = 0
        while fc == INF and shrink < 50:
            c = (c[0] - 1.0, c[1] - 1.0)
            fc = f(c)
            shrink += 1
        scored.append((fc, c))
    fs, start = min(scored, key=lambda s: s[0])
    if fs == INF:
        return 0.0, start
    x, v, _ = nelder_mead(f, start, _INNER_STEP, max_evals, rel_tol)
    if fs < v:
        x, v = start, fs
    return min(v, 0.0), x


def _minimize_delta(eval_lq, warm, max_evals, rel_tol, counters):
    """Infimum over delta; coarse log-grid scan plus golden section."""

    def f(ld):
        val = eval_lq(math.exp(ld))
        counters["evals"] += 1
        if val is None:
            counters["infeasible"] += 1
            return INF
        return val

    grid = sorted(set(_DELTA_GRID) | ({warm} if warm is not None else set()))
    vals = [f(g) for g in grid]
    finite = [i for i, v in enumerate(vals) if math.isfinite(v)]
    if not finite:
        return 0.0, grid[0]
    i = min(finite, key=lambda j: vals[j])
    lo = grid[i - 1] if i > 0 else grid[i] - 1.0
    hi = grid[i + 1] if i + 1 < len(grid) else grid[i] + 1.0
    budget = max(16, max_evals - len(grid))
    x, v, _ = golden_min(f, lo, hi, budget, 1e-4)
    if vals[i] < v:
        x, v = grid[i], vals[i]
    return min(v, 0.0), x


# ---------------------------------------------------------------------------
# one t-term
# ---------------------------------------------------------------------------

def optimize_term_t(
    t: int,
    params: SystemParams,
    power: PowerParams,
    kind: str,
    settings: OptimizerSettings,
    warm: Optional[WarmStart] = None,
    record_probes: Optional[list] = None,
) -> TermResult:
    """Best probed value of ln min(1, C1*p_t(a,b) + C2*q_t(a,b)).

    A warm start (log-domain argmin of an adjacent power point) replaces
    the random multistarts; infeasible probes contribute +inf and never
    lower the certified value.
    """
    if not 1 <= t <= params.ka:
        raise ValueError(f"t={t} out of range 1..{params.ka}")
    lc1 = log_binomial(params.M - params.ka, t) + log_binomial(params.ka, t)
    lc2 = log_binomial(params.ka, t)
    n = params.n
    counters = {"evals": 0, "infeasible": 0}
    tilt_warm: Dict[str, Optional[object]] = {
        "uv": (warm[2], warm[3]) if warm is not None else None,
        "delta": warm[4] if warm is not None else None,
    }
    best = {
        "obj": INF,
        "lp": 0.0,
        "lq": 0.0,
        "ab": (0.0, 0.0),
        "uv": (math.log(0.1), math.log(0.1)),
        "delta": math.log(0.1),
    }

    if kind == "gaussian":
        x_pt = lambda region, u, v: gb.log_p_t_gaussian(region, u, v, power.Pprime, t, n)
        x_qt = lambda region, d: gb.log_q_t_gaussian(region, d, power.Pprime, t, n)
        s_var = power.Pprime * t  # per-coordinate variance of the missed sum
    elif kind == "binary":
        x_pt = lambda region, u, v: bb.log_p_t_binary(region, u, v, power.P, t, n)
        x_qt = lambda region, d: bb.log_q_t_binary(region, d, power.P, t, n)
        s_var = power.P * t
    else:
        raise ValueError(f"unknown codebook kind: {kind}")

    # The q-bound dips below 1 only for beta above the cliff
    # beta_thr(alpha) = max(0, 1 - alpha*(1+s)): the small-delta slope of
    # the region-complement exponent changes sign there.  Every optimum
    # hugs that cliff, so the outer search runs in (ln alpha,
    # ln(beta - beta_thr)) where the landscape is smooth.
    def beta_thr(alpha: float) -> float:
        return max(0.0, 1.0 - alpha * (1.0 + s_var))

    def region_of(x: Tuple[float, ...]) -> Optional[RegionParams]:
        alpha = math.exp(x[0])
        beta_off = math.exp(x[1])
        if alpha <= 0.0 or beta_off <= 0.0 or not (
            math.isfinite(alpha) and math.isfinite(beta_off)
        ):
            return None  # exp under/overflow from a wild simplex step
        return RegionParams(alpha=alpha, beta=beta_thr(alpha) + beta_off)

    def outer_obj(x: Tuple[float, ...]) -> float:
        region = region_of(x)
        if region is None:
            return INF
        alpha, beta = region.alpha, region.beta
        lp, uv = _minimize_uv(
            lambda u, v: x_pt(region, u, v),
            tilt_warm["uv"],
            settings.inner_max_evals,
            settings.rel_tol,
            counters,
        )
        lq, ld = _minimize_delta(
            lambda d: x_qt(region, d),
            tilt_warm["delta"],
            settings.inner_max_evals,
            settings.rel_tol,
            counters,
        )
        tilt_warm["uv"] = uv
        tilt_warm["delta"] = ld
        obj = log_sum_exp([lc1 + lp, lc2 + lq])
        if record_probes is not None:
            record_probes.append((alpha, beta, obj))
        if obj < best["obj"]:
            best.update(obj=obj, lp=lp, lq=lq, ab=x[:2], uv=uv, delta=ld)
        return obj

    athr = 1.0 / (1.0 + s_var)
    if warm is not None:
        off = math.exp(warm[1]) - beta_thr(math.exp(warm[0]))
        starts = [(warm[0], math.log(off) if off > 1e-4 else math.log(1e-4))]
    else:
        # deterministic cliff-relative grid probe seeds the first simplex;
        # the remaining restarts are random log-uniform draws
        grid_pts = [
            (math.log(fa * athr), math.log(ob))
            for fa in _ALPHA_FRACS
            for ob in _BETA_OFFS
        ]
        grid_vals = [outer_obj(p) for p in grid_pts]
        best_grid = grid_pts[min(range(len(grid_pts)), key=lambda i: grid_vals[i])]
        starts = [best_grid]
        for i in range(settings.multistarts - 1):
            rng = np.random.default_rng((settings.seed, t, i))
            la = math.log(athr) + rng.uniform(
                math.log(_ALPHA_DRAW[0]), math.log(_ALPHA_DRAW[1])
            )
            lb = rng.uniform(math.log(_BETA_OFF_DRAW[0]), math.log(_BETA_OFF_DRAW[1]))
            starts.append((la, lb))
    for start in starts:
        nelder_mead(outer_obj, start, _OUTER_STEP, settings.outer_max_evals, settings.rel_tol)

    feasible = math.isfinite(best["obj"])
    log_term = min(0.0, best["obj"]) if feasible else 0.0
    ab = best["ab"]
    best_alpha = math.exp(ab[0])
    best_beta = beta_thr(best_alpha) + math.exp(ab[1])
    uv = best["uv"]
    return TermResult(
        t=t,
        log_pt=best["lp"],
        log_qt=best["lq"],
        log_binom_pt=lc1,
        log_binom_qt=lc2,
        log_term=log_term,
        alpha=best_alpha,
        beta=best_beta,
        u=math.exp(uv[0]),
        v=math.exp(uv[1]),
        delta=math.exp(best["delta"]),
        evals=counters["evals"],
        infeasible_probes=counters["infeasible"],
        feasible=feasible,
    )


def _term_worker(args):
    return optimize_term_t(*args)


# ---------------------------------------------------------------------------
# full bound at one power point
# ---------------------------------------------------------------------------

def warm_from_result(res: BoundResult) -> Dict[int, WarmStart]:
    """Log-domain argmins keyed by t, for warm-starting a nearby power."""
    warm = {}
    for r in res.terms:
        if r.feasible:
            warm[r.t] = (
                math.log(r.alpha),
                math.log(r.beta),
                math.log(r.u),
                math.log(r.v),
                math.log(r.delta),
            )
    return warm


def pe_bound_at_power(
    params: SystemParams,
    power: PowerParams,
    kind: str,
    settings: OptimizerSettings,
    warm: Optional[Dict[int, WarmStart]] = None,
    pool: Optional[ProcessPoolExecutor] = None,
) -> BoundResult:
    """Combine all t-terms and the defect term; fixed-order reduction."""
    start = time.perf_counter()
    warm = warm or {}
    jobs = [
        (t, params, power, kind, settings, warm.get(t))
        for t in range(1, params.ka + 1)
    ]
    if pool is not None:
        chunk = max(1, params.ka // (8 * getattr(pool, "_max_workers", 1)))
        terms = list(pool.map(_term_worker, jobs, chunksize=chunk))
    else:
        terms = [_term_worker(j) for j in jobs]
    if kind == "gaussian":
        log_p0 = gb.p0_gaussian(params, power)
    else:
        log_p0 = bb.p0_binary(params)
    parts = [math.log(r.t / params.ka) + r.log_term for r in terms]
    parts.append(log_p0)
    log_pe = min(0.0, log_sum_exp(parts))
    # total pre-clip excess of the clipped terms: zero when nothing clips,
    # otherwise a smooth measure of how far the worst band is from
    # feasibility (the clipped log_pe itself plateaus at 0 there)
    excess = 0.0
    for r in terms:
        if r.log_term >= 0.0 and r.feasible:
            pre = log_sum_exp(
                [r.log_binom_pt + r.log_pt, r.log_binom_qt + r.log_qt]
            )
            excess += max(0.0, pre)
    diag = {
        "kind": kind,
        "P": power.P,
        "Pprime": power.Pprime,
        "evals": sum(r.evals for r in terms),
        "infeasible_probes": sum(r.infeasible_probes for r in terms),
        "failed_terms": [r.t for r in terms if not r.feasible],
        "excess": excess,
        "wall_time_s": time.perf_counter() - start,
    }
    return BoundResult(log_pe=log_pe, log_p0=log_p0, terms=terms, diagnostics=diag)


def _best_ratio_bound(
    params: SystemParams,
    P: float,
    settings: OptimizerSettings,
    state: dict,
    pool=None,
    bracket: Tuple[float, float] = _RATIO_BRACKET,
) -> Tuple[BoundResult, float]:
    """Best P'/P for the Gaussian ensemble at fixed P.

    A coarse grid seeds a local golden section.  The score adds the
    pre-clip excess of infeasible terms to the bound so the search keeps
    a gradient on the plateau where the clipped bound is identically 1.
    """
    best = {"res": None, "ratio": None, "log_pe": INF, "score": INF}

    def f(ratio: float) -> float:
        power = PowerParams(P=P, Pprime=ratio * P)
        res = pe_bound_at_power(
            params, power, "gaussian", settings, warm=state.get("warm"), pool=pool
        )
        state["warm"] = warm_from_result(res)
        score = res.log_pe + res.diagnostics["excess"]
        if score < best["score"]:
            best.update(res=res, ratio=ratio, log_pe=res.log_pe, score=score)
        return score

    lo, hi = bracket
    grid = [r for r in _RATIO_GRID if lo <= r <= hi] or [0.5 * (lo + hi)]
    vals = [f(r) for r in grid]
    i = min(range(len(grid)), key=lambda j: vals[j])
    glo = grid[i - 1] if i > 0 else lo
    ghi = grid[i + 1] if i + 1 < len(grid) else hi
    golden_min(f, glo, ghi, max_evals=8, xtol=5e-4)
    return best["res"], best["ratio"]


# ---------------------------------------------------------------------------
# minimum Eb/N0 search
# ---------------------------------------------------------------------------

def _bound_at_ebno(params, ebno, kind, settings, state, pool):
    if kind == "binary":
        power = power_for_ebno(params, ebno, 1.0)
        res = pe_bound_at_power(
            params, power, "binary", settings, warm=state.get("warm"), pool=pool
        )
        state["warm"] = warm_from_result(res)
        return res
    P = power_for_ebno(params, ebno).P
    res, ratio = _best_ratio_bound(params, P, settings, state, pool=pool)
    state["ratio"] = ratio
    return res


def find_min_ebno(
    params: SystemParams,
    kind: str,
    settings: OptimizerSettings,
    pool: Optional[ProcessPoolExecutor] = None,
    bracket: Tuple[float, float] = (-2.0, 20.0),
    warm0: Optional[Dict[int, WarmStart]] = None,
) -> Tuple[float, BoundResult]:
    """Smallest certified Eb/N0 (dB) whose optimized bound meets epsilon.

    Bisection on the dB axis; on success the returned point satisfies
    bound(ebno) <= epsilon while the recorded lower endpoint, within
    bisect_tol_db below it, exceeds epsilon.
    """
    log_eps = math.log(params.epsilon)
    state: dict = {"warm": dict(warm0 or {})}
    history: List[Tuple[float, float]] = []

    def bound_at(eb: float) -> BoundResult:
        res = _bound_at_ebno(params, eb, kind, settings, state, pool)
        history.append((eb, res.log_pe))
        return res

    lo, hi = bracket
    res_lo = bound_at(lo)
    if res_lo.log_pe <= log_eps:
        res_lo.diagnostics["certificate"] = {
            "at_lower_bracket": True,
            "history_db": list(history),
        }
        return lo, res_lo
    res_hi = bound_at(hi)
    expansions = 0
    while res_hi.log_pe > log_eps and expansions < 6:
        width = hi - lo
        lo, res_lo = hi, res_hi
        hi = hi + 2.0 * width
        res_hi = bound_at(hi)
        expansions += 1
    if res_hi.log_pe > log_eps:
        raise SearchFailure(
            f"no bracket after {expansions} expansions: "
            f"bound({lo:.2f} dB)={math.exp(res_lo.log_pe):.3g}, "
            f"bound({hi:.2f} dB)={math.exp(res_hi.log_pe):.3g}",
            endpoints=[(lo, res_lo.log_pe), (hi, res_hi.log_pe)],
        )
    while hi - lo > settings.bisect_tol_db:
        mid = 0.5 * (lo + hi)
        res_mid = bound_at(mid)
        if res_mid.log_pe <= log_eps:
            hi, res_hi = mid, res_mid
        else:
            lo, res_lo = mid, res_mid
    by_eb = sorted(history)
    monotone_ok = all(
        b2 <= b1 + 1e-6 for (_, b1), (_, b2) in zip(by_eb, by_eb[1:])
    )
    res_hi.diagnostics["certificate"] = {
        "ebno_db": hi,
        "lo_db": lo,
        "lo_log_pe": res_lo.log_pe,
        "tol_db": settings.bisect_tol_db,
        "monotone_ok": monotone_ok,
        "history_db": list(history),
    }
    if kind == "gaussian":
        res_hi.diagnostics["pprime_ratio"] = state.get("ratio")
    return hi, res_hi


@dataclass
class SweepPoint:
    ka: int
    ebno_db: Optional[float]
    result: Optional[BoundResult]
    error: Optional[str] = None


def ebno_sweep(
    params_template: SystemParams,
    ka_list: Sequence[int],
    kind: str,
    settings: OptimizerSettings,
    pool: Optional[ProcessPoolExecutor] = None,
) -> List[SweepPoint]:
    """find_min_ebno per Ka with warm-started brackets and argmin reuse."""
    if not ka_list:
        raise ValueError("ka_list must be non-empty")
    points: List[SweepPoint] = []
    done: Dict[int, SweepPoint] = {}
    prev_ebno: Optional[float] = None
    prev_warm: Optional[Dict[int, WarmStart]] = None
    for ka in ka_list:
        if ka in done:
            points.append(done[ka])
            continue
        params = replace(params_template, ka=ka)
        warm0 = None
        if prev_warm is not None:
            warm0 = {t: w for t, w in prev_warm.items() if t <= ka}
        try:
            if prev_ebno is not None:
                try:
                    eb, res = find_min_ebno(
                        params,
                        kind,
                        settings,
                        pool=pool,
                        bracket=(prev_ebno - 1.0, prev_ebno + 1.0),
                        warm0=warm0,
                    )
                    cert = res.diagnostics.get("certificate", {})
                    if cert.get("at_lower_bracket"):
                        raise SearchFailure("warm bracket too high")
                except SearchFailure:
                    eb, res = find_min_ebno(
                        params, kind, settings, pool=pool, warm0=warm0
                    )
            else:
                eb, res = find_min_ebno(params, kind, settings, pool=pool, warm0=warm0)
            pt = SweepPoint(ka=ka, ebno_db=eb, result=res)
            prev_ebno, prev_warm = eb, warm_from_result(res)
        except SearchFailure as exc:
            pt = SweepPoint(ka=ka, ebno_db=None, result=None, error=str(exc))
        points.append(pt)
        done[ka] = pt
    ok = [p for p in points if p.ebno_db is not None]
    for a, b in zip(ok, ok[1:]):
        if a.ka < b.ka and b.ebno_db < a.ebno_db - 0.1:
            b.result.diagnostics["monotone_warning"] = (
                f"ebno dropped from {a.ebno_db:.3f} (ka={a.ka}) "
                f"to {b.ebno_db:.3f} (ka={b.ka})"
            )
    return points
