import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from ura_bounds.gaussian_bound import PowerParams, SystemParams, power_for_ebno
from ura_bounds.optimizer import (
    OptimizerSettings,
    SearchFailure,
    ebno_sweep,
    find_min_ebno,
    golden_min,
    nelder_mead,
    optimize_term_t,
    pe_bound_at_power,
    warm_from_result,
)

FAST = OptimizerSettings(
    outer_max_evals=80, inner_max_evals=80, multistarts=2, bisect_tol_db=0.05
)

SMALL = SystemParams(n=200, k=10, ka=4, epsilon=0.05)


class TestBuildingBlocks:
    def test_nelder_mead_quadratic(self):
        f = lambda x: (x[0] - 1.0) ** 2 + 3.0 * (x[1] + 2.0) ** 2
        x, v, evals = nelder_mead(f, (5.0, 5.0), 0.5, 400, 1e-12)
        assert v < 1e-6
        assert evals <= 400

    def test_nelder_mead_with_infeasible_wall(self):
        f = lambda x: (x[0] - 1.0) ** 2 if x[0] > 0 else math.inf
        x, v, _ = nelder_mead(f, (3.0, 0.0), 0.5, 300, 1e-12)
        assert v < 1e-5

    def test_golden_section(self):
        x, v, _ = golden_min(lambda x: abs(x - 1.3), 0.0, 4.0, 100, 1e-6)
        assert x == pytest.approx(1.3, abs=1e-4)


class TestOptimizeTerm:
    def test_infimum_soundness(self):
        # the certified value never beats any probed feasible objective
        power = PowerParams(P=0.5, Pprime=0.45)
        for kind in ("gaussian", "binary"):
            probes = []
            res = optimize_term_t(2, SMALL, power, kind, FAST, record_probes=probes)
            assert probes, "outer search recorded no probes"
            best_probed = min(obj for _, _, obj in probes)
            assert res.log_term <= min(0.0, best_probed) + 1e-9
            assert res.log_term <= 0.0

    def test_high_power_drives_term_down(self):
        lo = optimize_term_t(1, SMALL, PowerParams(P=0.2, Pprime=0.18), "gaussian", FAST)
        hi = optimize_term_t(1, SMALL, PowerParams(P=2.0, Pprime=1.8), "gaussian", FAST)
        assert hi.log_term < lo.log_term
        assert hi.log_term < -20.0

    def test_zero_power_limit_clips_at_one(self):
        res = optimize_term_t(1, SMALL, PowerParams(P=1e-9, Pprime=9e-10), "gaussian", FAST)
        assert res.log_term == pytest.approx(0.0, abs=1e-6)

    def test_warm_start_agrees_with_cold(self):
        power = PowerParams(P=0.8, Pprime=0.75)
        cold = optimize_term_t(2, SMALL, power, "binary", FAST)
        warm = optimize_term_t(
            2,
            SMALL,
            power,
            "binary",
            FAST,
            warm=(
                math.log(cold.alpha),
                math.log(cold.beta),
                math.log(cold.u),
                math.log(cold.v),
                math.log(cold.delta),
            ),
        )
        assert warm.log_term <= cold.log_term + 0.05 * abs(cold.log_term)

    def test_t_out_of_range(self):
        with pytest.raises(ValueError):
            optimize_term_t(0, SMALL, PowerParams(P=1.0, Pprime=0.9), "gaussian", FAST)
        with pytest.raises(ValueError):
            optimize_term_t(5, SMALL, PowerParams(P=1.0, Pprime=0.9), "gaussian", FAST)


class TestPeBound:
    def test_bound_between_p0_and_one(self):
        power = PowerParams(P=0.6, Pprime=0.55)
        res = pe_bound_at_power(SMALL, power, "gaussian", FAST)
        assert res.log_p0 - 1e-12 <= res.log_pe <= 0.0

    def test_huge_power_approaches_p0(self):
        params = SystemParams(n=100, k=6, ka=2, epsilon=0.1)
        power = PowerParams(P=500.0, Pprime=450.0)
        res = pe_bound_at_power(params, power, "gaussian", FAST)
        assert res.log_pe == pytest.approx(res.log_p0, rel=1e-6)

    def test_term_clipping_tightens(self):
        power = PowerParams(P=0.6, Pprime=0.55)
        res = pe_bound_at_power(SMALL, power, "binary", FAST)
        for r in res.terms:
            pre = np.logaddexp(
                r.log_binom_pt + r.log_pt, r.log_binom_qt + r.log_qt
            )
            assert r.log_term <= float(pre) + 1e-9

    def test_deterministic_across_worker_counts(self):
        power = PowerParams(P=0.7, Pprime=0.65)
        serial = pe_bound_at_power(SMALL, power, "binary", FAST)
        with ProcessPoolExecutor(max_workers=2) as pool:
            parallel = pe_bound_at_power(SMALL, power, "binary", FAST, pool=pool)
        assert serial.log_pe == parallel.log_pe
        for a, b in zip(serial.terms, parallel.terms):
            assert a == b


class TestFindMinEbno:
    def test_certificate(self):
        params = SystemParams(n=300, k=8, ka=3, epsilon=0.05)
        eb, res = find_min_ebno(params, "binary", FAST, bracket=(-2.0, 14.0))
        cert = res.diagnostics["certificate"]
        assert math.exp(res.log_pe) <= params.epsilon
        assert math.exp(cert["lo_log_pe"]) > params.epsilon
        assert eb - cert["lo_db"] <= FAST.bisect_tol_db + 1e-12
        assert cert["monotone_ok"]

    def test_gaussian_certificate(self):
        params = SystemParams(n=300, k=8, ka=3, epsilon=0.05)
        eb, res = find_min_ebno(params, "gaussian", FAST, bracket=(-2.0, 14.0))
        assert math.exp(res.log_pe) <= params.epsilon
        assert 0.0 < res.diagnostics["pprime_ratio"] < 1.0

    def test_degenerate_target_returns_lower_bracket(self):
        # ka=1 binary has p0 = 0, so a loose target is met at the bracket
        # lower edge already
        params = SystemParams(n=100, k=6, ka=1, epsilon=0.9)
        eb, res = find_min_ebno(params, "binary", FAST, bracket=(11.0, 14.0))
        assert eb == 11.0
        assert res.diagnostics["certificate"]["at_lower_bracket"]

    def test_unreachable_target_fails(self):
        # epsilon below p0 = C(2,1... C(2,2)/M can never be met
        params = SystemParams(n=30, k=6, ka=2, epsilon=1e-9)
        small = OptimizerSettings(
            outer_max_evals=30, inner_max_evals=30, multistarts=1, bisect_tol_db=0.1
        )
        with pytest.raises(SearchFailure) as exc:
            find_min_ebno(params, "binary", small, bracket=(5.0, 6.0))
        assert exc.value.endpoints

    def test_warm_start_neutrality(self):
        params = SystemParams(n=300, k=8, ka=3, epsilon=0.05)
        eb_cold, res = find_min_ebno(params, "binary", FAST, bracket=(-2.0, 14.0))
        eb_warm, _ = find_min_ebno(
            params, "binary", FAST, bracket=(-2.0, 14.0), warm0=warm_from_result(res)
        )
        assert abs(eb_warm - eb_cold) <= 2.0 * FAST.bisect_tol_db + 1e-12


class TestSweep:
    def test_duplicates_and_monotone(self):
        params = SystemParams(n=300, k=8, ka=2, epsilon=0.05)
        pts = ebno_sweep(params, [2, 3, 3, 2], "binary", FAST)
        assert [p.ka for p in pts] == [2, 3, 3, 2]
        assert pts[1].ebno_db == pts[2].ebno_db
        assert pts[0].ebno_db == pts[3].ebno_db
        assert all(p.error is None for p in pts)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ebno_sweep(SMALL, [], "binary", FAST)


class TestSettingsValidation:
    def test_bad_settings(self):
        with pytest.raises(ValueError):
            OptimizerSettings(rel_tol=0.0)
        with pytest.raises(ValueError):
            OptimizerSettings(multistarts=0)
