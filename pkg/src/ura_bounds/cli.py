"""Command-line front end: bound evaluation, minimum-Eb/N0 search, sweeps
and the Monte-Carlo validation suites, with a content-addressed result
cache and plot-ready CSV output."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import mc_validator as mc
from .gaussian_bound import PowerParams, RegionParams, SystemParams, ebno_db, power_for_ebno
from .numerics import rho_distribution
from .optimizer import (
    BoundResult,
    OptimizerSettings,
    SearchFailure,
    TermResult,
    _best_ratio_bound,
    ebno_sweep,
    find_min_ebno,
    pe_bound_at_power,
)

ARTIFACT_VERSION = "0.1.0"
CACHE_ENV_VAR = "URA_BOUNDS_CACHE"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SEARCH = 3
EXIT_IO = 4

CSV_HEADER = "ka,codebook,ebno_db,pe_bound,p0,n,k,epsilon,artifact_version"
PER_T_HEADER = "t,log_pt,log_qt,log_term,alpha,beta,u,v,delta"


@dataclass(frozen=True)
class RunConfig:
    """Effective run configuration; every field has a documented default."""

    n: int = 30000
    k: int = 100
    ka: str = "250"  # single value or start:stop:step
    pe: float = 0.05
    codebook: str = "gaussian"
    ebno_db: Optional[float] = None  # fixed-power mode when set
    pprime_ratio: Optional[float] = None  # None -> optimized (gaussian)
    outer_max_evals: int = 200
    inner_max_evals: int = 200
    rel_tol: float = 1e-7
    multistarts: int = 8
    seed: int = 0
    bisect_tol_db: float = 0.01
    threads: int = 1
    cache_dir: str = ""
    no_cache: bool = False
    out: str = "results.csv"
    per_t_out: str = ""

    def optimizer_settings(self) -> OptimizerSettings:
        return OptimizerSettings(
            outer_max_evals=self.outer_max_evals,
            inner_max_evals=self.inner_max_evals,
            rel_tol=self.rel_tol,
            multistarts=self.multistarts,
            seed=self.seed,
            bisect_tol_db=self.bisect_tol_db,
        )


_BOOL_FIELDS = {"no_cache"}


def parse_config(path: str) -> Dict[str, object]:
    """Flat ``key = value`` config file; unknown keys are rejected."""
    known = {f.name: f.type for f in fields(RunConfig)}
    out: Dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce(key, val)
    return out


def _coerce(key: str, val: str):
    if key in _BOOL_FIELDS:
        return val.lower() in ("1", "true", "yes", "on")
    for f in fields(RunConfig):
        if f.name == key:
            default = f.default
            break
    if key in ("ebno_db", "pprime_ratio"):
        return None if val.lower() in ("", "none") else float(val)
    if val == "":
        return "" if isinstance(default, str) else None
    if isinstance(default, bool):
        return val.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(val)
    if isinstance(default, float):
        return float(val)
    return val


def write_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for f in fields(RunConfig):
            val = getattr(cfg, f.name)
            if val is None:
                val = "none" if f.name in ("ebno_db", "pprime_ratio") else ""
            elif isinstance(val, bool):
                val = "true" if val else "false"
            elif isinstance(val, float):
                val = format(val, ".15g")
            fh.write(f"{f.name} = {val}\n")


def build_config(args: argparse.Namespace) -> RunConfig:
    """defaults < config file < command-line flags."""
    merged: Dict[str, object] = {}
    if getattr(args, "config", None):
        merged.update(parse_config(args.config))
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            merged[f.name] = flag
    return RunConfig(**merged)


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

def cache_key(payload: Dict[str, object]) -> str:
    blob = json.dumps(
        {**payload, "artifact_version": ARTIFACT_VERSION}, sort_keys=True
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def cache_lookup_store(key: str, compute, cache_dir: str, enabled: bool = True):
    """Atomic write-temp-then-rename JSON cache; degrades to compute-only."""
    if not enabled or not cache_dir:
        return compute()
    path = os.path.join(cache_dir, f"{key}.json")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            record = json.load(fh)
        if record.get("key") == key:
            return record["payload"]
    except (OSError, ValueError, KeyError):
        pass
    payload = compute()
    record = {"key": key, "payload": payload, "created_at": time.time()}
    try:
        os.makedirs(cache_dir, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(record, fh)
        os.replace(tmp, path)
    except OSError as exc:
        print(f"warning: cache store failed ({exc}); continuing uncached", file=sys.stderr)
    return payload


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def result_to_dict(res: BoundResult) -> dict:
    return {
        "log_pe": res.log_pe,
        "log_p0": res.log_p0,
        "terms": [asdict(t) for t in res.terms],
        "diagnostics": {
            k: v for k, v in res.diagnostics.items() if k != "wall_time_s"
        },
    }


def result_from_dict(d: dict) -> BoundResult:
    return BoundResult(
        log_pe=d["log_pe"],
        log_p0=d["log_p0"],
        terms=[TermResult(**t) for t in d["terms"]],
        diagnostics=dict(d.get("diagnostics", {})),
    )


def _fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".15g")


def emit_csv(rows: Sequence[dict], path: str) -> None:
    """Header-first CSV of sweep/bound rows; UTF-8, LF endings."""
    if not rows:
        raise ValueError("no result rows to write")
    cols = CSV_HEADER.split(",")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                out = []
                for c in cols:
                    v = row[c]
                    out.append(_fmt(v) if isinstance(v, float) else str(v))
                fh.write(",".join(out) + "\n")
    except OSError as exc:
        raise IOError(f"cannot write CSV {path}: {exc}") from exc


def emit_per_t_csv(res: BoundResult, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(PER_T_HEADER + "\n")
            for t in res.terms:
                fh.write(
                    ",".join(
                        [str(t.t)]
                        + [
                            _fmt(v)
                            for v in (
                                t.log_pt,
                                t.log_qt,
                                t.log_term,
                                t.alpha,
                                t.beta,
                                t.u,
                                t.v,
                                t.delta,
                            )
                        ]
                    )
                    + "\n"
                )
    except OSError as exc:
        raise IOError(f"cannot write per-t CSV {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def parse_ka_range(spec: str) -> List[int]:
    """``start:stop:step`` (stop inclusive when aligned) or comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad ka range {spec!r}")
        start, stop = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        if step < 1:
            raise ValueError("ka range step must be >= 1")
        return list(range(start, stop + 1, step))
    return [int(x) for x in spec.split(",") if x]


def _make_pool(threads: int) -> Optional[ProcessPoolExecutor]:
    if threads in (0, None):
        threads = os.cpu_count() or 1
    if threads <= 1:
        return None
    return ProcessPoolExecutor(max_workers=threads)


def _row(params: SystemParams, kind: str, eb: float, res: BoundResult) -> dict:
    return {
        "ka": params.ka,
        "codebook": kind,
        "ebno_db": float(eb),
        "pe_bound": math.exp(res.log_pe),
        "p0": math.exp(res.log_p0),
        "n": params.n,
        "k": params.k,
        "epsilon": params.epsilon,
        "artifact_version": ARTIFACT_VERSION,
    }


def _single_ka(cfg: RunConfig) -> int:
    kas = parse_ka_range(cfg.ka)
    if len(kas) != 1:
        raise ValueError(f"subcommand needs a single ka, got {cfg.ka!r}")
    return kas[0]


def cmd_bound(cfg: RunConfig) -> int:
    if cfg.ebno_db is None:
        raise ValueError("bound requires --ebno-db")
    ka = _single_ka(cfg)
    params = SystemParams(n=cfg.n, k=cfg.k, ka=ka, epsilon=cfg.pe)
    settings = cfg.optimizer_settings()
    key = cache_key(
        {
            "op": "bound",
            "params": asdict(params),
            "kind": cfg.codebook,
            "ebno_db": cfg.ebno_db,
            "pprime_ratio": cfg.pprime_ratio,
            "settings": asdict(settings),
        }
    )

    def compute():
        pool = _make_pool(cfg.threads)
        try:
            if cfg.codebook == "binary":
                power = power_for_ebno(params, cfg.ebno_db, 1.0)
                res = pe_bound_at_power(params, power, "binary", settings, pool=pool)
            elif cfg.pprime_ratio is not None:
                power = power_for_ebno(params, cfg.ebno_db, cfg.pprime_ratio)
                res = pe_bound_at_power(params, power, "gaussian", settings, pool=pool)
            else:
                P = power_for_ebno(params, cfg.ebno_db).P
                res, _ = _best_ratio_bound(params, P, settings, {}, pool=pool)
        finally:
            if pool is not None:
                pool.shutdown()
        return result_to_dict(res)

    payload = cache_lookup_store(key, compute, cfg.cache_dir, not cfg.no_cache)
    res = result_from_dict(payload)
    emit_csv([_row(params, cfg.codebook, cfg.ebno_db, res)], cfg.out)
    if cfg.per_t_out:
        emit_per_t_csv(res, cfg.per_t_out)
    print(
        f"bound ka={ka} codebook={cfg.codebook} ebno_db={cfg.ebno_db:.4f} "
        f"pe_bound={math.exp(res.log_pe):.6g} p0={math.exp(res.log_p0):.6g}"
    )
    return EXIT_OK


def cmd_find_ebno(cfg: RunConfig) -> int:
    ka = _single_ka(cfg)
    params = SystemParams(n=cfg.n, k=cfg.k, ka=ka, epsilon=cfg.pe)
    settings = cfg.optimizer_settings()
    key = cache_key(
        {
            "op": "find-ebno",
            "params": asdict(params),
            "kind": cfg.codebook,
            "settings": asdict(settings),
        }
    )

    def compute():
        pool = _make_pool(cfg.threads)
        try:
            eb, res = find_min_ebno(params, cfg.codebook, settings, pool=pool)
        finally:
            if pool is not None:
                pool.shutdown()
        return {"ebno_db": eb, "result": result_to_dict(res)}

    payload = cache_lookup_store(key, compute, cfg.cache_dir, not cfg.no_cache)
    eb = payload["ebno_db"]
    res = result_from_dict(payload["result"])
    emit_csv([_row(params, cfg.codebook, eb, res)], cfg.out)
    if cfg.per_t_out:
        emit_per_t_csv(res, cfg.per_t_out)
    print(
        f"find-ebno ka={ka} codebook={cfg.codebook} ebno_db={eb:.4f} "
        f"pe_bound={math.exp(res.log_pe):.6g}"
    )
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    kas = parse_ka_range(cfg.ka)
    params0 = SystemParams(n=cfg.n, k=cfg.k, ka=kas[0], epsilon=cfg.pe)
    settings = cfg.optimizer_settings()
    key = cache_key(
        {
            "op": "sweep",
            "params": {"n": cfg.n, "k": cfg.k, "epsilon": cfg.pe},
            "ka_list": kas,
            "kind": cfg.codebook,
            "settings": asdict(settings),
        }
    )

    def compute():
        pool = _make_pool(cfg.threads)
        try:
            points = ebno_sweep(params0, kas, cfg.codebook, settings, pool=pool)
        finally:
            if pool is not None:
                pool.shutdown()
        return [
            {
                "ka": p.ka,
                "ebno_db": p.ebno_db,
                "result": result_to_dict(p.result) if p.result else None,
                "error": p.error,
            }
            for p in points
        ]

    payload = cache_lookup_store(key, compute, cfg.cache_dir, not cfg.no_cache)
    rows = []
    failures = []
    for p in payload:
        if p["ebno_db"] is None:
            failures.append((p["ka"], p["error"]))
            continue
        params = replace(params0, ka=p["ka"])
        rows.append(
            _row(params, cfg.codebook, p["ebno_db"], result_from_dict(p["result"]))
        )
    if rows:
        emit_csv(rows, cfg.out)
    for ka, err in failures:
        print(f"warning: ka={ka} failed: {err}", file=sys.stderr)
    print(
        f"sweep codebook={cfg.codebook} points={len(rows)} "
        f"failures={len(failures)} out={cfg.out}"
    )
    return EXIT_OK


def cmd_validate(cfg: RunConfig, suite: str) -> int:
    """Deterministic validation runs; writes one line per check."""
    lines: List[str] = []
    ok = True
    if suite == "rho":
        for t in range(1, 13):
            dist = rho_distribution(t)
            counts = {i: 0 for i in dist.support}
            for bits in range(1 << t):
                s = 2 * bin(bits).count("1") - t
                counts[s] += 1
            exact = all(
                abs(dist.weights[i] - counts[i] / (1 << t)) <= 1e-12
                for i in dist.support
            )
            ok &= exact
            lines.append(f"rho t={t} exact={exact}")
    elif suite == "lemma2":
        rng = np.random.default_rng(cfg.seed)
        for i in range(20):
            dim = int(rng.integers(2, 9))
            Q = rng.normal(size=(dim, dim))
            A = 0.075 * (Q + Q.T) / math.sqrt(dim)
            if np.linalg.eigvalsh(np.eye(dim) - 2 * A).min() <= 0.05:
                A *= 0.5
            b = rng.normal(scale=0.3, size=dim)
            est, closed = mc.check_lemma2_mgf(A, b, trials=10**5, seed=cfg.seed + i)
            passed = abs(est.mean - closed) <= 3.0 * est.stderr
            ok &= passed
            lines.append(
                f"lemma2 case={i} dim={dim} mc={est.mean:.6f} "
                f"closed={closed:.6f} stderr={est.stderr:.2g} pass={passed}"
            )
    elif suite == "dominance":
        from .gaussian_bound import log_p_t_gaussian, log_q_t_gaussian
        from .binary_bound import log_p_t_binary, log_q_t_binary

        rng = np.random.default_rng(cfg.seed)
        n = 50
        for i in range(10):
            kind = "gaussian" if i % 2 == 0 else "binary"
            t = int(rng.integers(1, 4))
            P = float(rng.uniform(0.2, 1.0))
            region = RegionParams(
                alpha=float(rng.uniform(0.5, 1.5)), beta=float(rng.uniform(0.05, 0.6))
            )
            u = float(rng.uniform(0.02, 0.25))
            v = float(rng.uniform(0.02, 0.25))
            delta = float(rng.uniform(0.02, 0.35))
            if kind == "gaussian":
                lp = log_p_t_gaussian(region, u, v, P, t, n)
                lq = log_q_t_gaussian(region, delta, P, t, n)
            else:
                lp = log_p_t_binary(region, u, v, P, t, n)
                lq = log_q_t_binary(region, delta, P, t, n)
            if lp is None or lq is None:
                lines.append(f"dominance case={i} kind={kind} infeasible (skipped)")
                continue
            ee, rc = mc.estimate_event_probs(kind, P, t, n, region, 10**4, cfg.seed + i)
            p_ok = math.exp(min(lp, 0.0)) >= ee.mean - 3.0 * ee.stderr
            q_ok = math.exp(min(lq, 0.0)) >= rc.mean - 3.0 * rc.stderr
            ok &= p_ok and q_ok
            lines.append(
                f"dominance case={i} kind={kind} t={t} "
                f"p_bound={math.exp(min(lp, 0.0)):.4g} p_freq={ee.mean:.4g} "
                f"q_bound={math.exp(min(lq, 0.0)):.4g} q_freq={rc.mean:.4g} "
                f"pass={p_ok and q_ok}"
            )
    elif suite == "simulator":
        params = SystemParams(n=40, k=3, ka=2, epsilon=0.1)
        for i, eb in enumerate((2.0, 5.0, 8.0)):
            P = power_for_ebno(params, eb).P
            est = mc.simulate_pupe_ml(params, "binary", P, trials=500, seed=cfg.seed + i)
            lines.append(f"simulator ebno_db={eb:.1f} pupe={est.mean:.4f}")
    else:
        raise ValueError(f"unknown validation suite {suite!r}")
    lines.append(f"suite={suite} ok={ok}")
    try:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IOError(f"cannot write {cfg.out}: {exc}") from exc
    print(f"validate suite={suite} ok={ok} out={cfg.out}")
    return EXIT_OK if ok else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--n", type=int, help="frame length in channel uses")
    p.add_argument("--k", type=int, help="payload bits per user")
    p.add_argument("--ka", help="active users (value, list, or start:stop:step)")
    p.add_argument("--pe", type=float, help="target per-user error probability")
    p.add_argument("--codebook", choices=("gaussian", "binary"))
    p.add_argument("--pprime-ratio", dest="pprime_ratio", type=float,
                   help="fix P'/P instead of optimizing it (gaussian only)")
    p.add_argument("--outer-max-evals", dest="outer_max_evals", type=int)
    p.add_argument("--inner-max-evals", dest="inner_max_evals", type=int)
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--multistarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bisect-tol-db", dest="bisect_tol_db", type=float)
    p.add_argument("--threads", type=int, help="worker processes (0 = all cores)")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--no-cache", dest="no_cache", action="store_const", const=True)
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--per-t-out", dest="per_t_out", help="per-t breakdown CSV path")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ura-bounds",
        description="Finite-blocklength achievability bounds for unsourced "
        "random access over the Gaussian MAC.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("bound", "evaluate the PUPE bound at a fixed Eb/N0"),
        ("find-ebno", "search the minimal Eb/N0 meeting the PUPE target"),
        ("sweep", "minimal Eb/N0 over a range of active-user counts"),
        ("validate", "run a Monte-Carlo / exact validation suite"),
    ):
        p = sub.add_parser(name, help=desc)
        _add_common(p)
        if name == "bound":
            p.add_argument("--ebno-db", dest="ebno_db", type=float)
        if name == "validate":
            p.add_argument(
                "--suite",
                required=True,
                choices=("rho", "lemma2", "dominance", "simulator"),
            )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        cfg = build_config(args)
        if not cfg.cache_dir:
            cfg = replace(cfg, cache_dir=os.environ.get(CACHE_ENV_VAR, ""))
        if args.command == "bound":
            return cmd_bound(cfg)
        if args.command == "find-ebno":
            return cmd_find_ebno(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "validate":
            return cmd_validate(cfg, args.suite)
        print(f"ERROR code={EXIT_USAGE} message=\"unknown command\"", file=sys.stderr)
        return EXIT_USAGE
    except SearchFailure as exc:
        print(f'ERROR code={EXIT_SEARCH} message="{exc}"', file=sys.stderr)
        return EXIT_SEARCH
    except (OSError, IOError) as exc:
        print(f'ERROR code={EXIT_IO} message="{exc}"', file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f'ERROR code={EXIT_USAGE} message="{exc}"', file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
