import random
from fractions import Fraction

import pytest
from mpmath import mp

from cflab.construction import (
    ConstructionParams,
    ConstructionSoundnessError,
    DistOracle,
    InvalidInputError,
    box_count_diagnostic,
    build_base_level,
    build_levels,
    choose_M,
    choose_c,
    dimension_bound,
    dist_range_over_interval,
    falconer_bound,
    refine_level,
    sample_point,
    three_term_brute_check,
    three_term_select,
    verify_level,
)
from cflab.exact import sqrt2
from cflab.intervals import interval_of

from conftest import frac_mpf, oracle_dist, oracle_value


def feasible_params(depth=2, M=16, enumeration="full", seed=0):
    x = sqrt2()
    return ConstructionParams(x=x, lam=Fraction(2), M=M, c=Fraction(1, 4) ** 18,
                              mode="feasible", depth=depth, enumeration=enumeration,
                              seed=seed)


class TestThreeTermSelect:
    def test_examples(self, x_sqrt2):
        assert three_term_select(1, 1, x_sqrt2, Fraction(1, 5)) == 2
        assert three_term_select(3, 2, x_sqrt2, Fraction(1, 5)) == 2

    def test_smallest_index_rule(self, x_sqrt2):
        # ||4*sqrt2|| ~ 0.343 > 1/5 so A=1,B=3 picks index 1
        assert three_term_select(1, 3, x_sqrt2, Fraction(1, 5)) == 1

    def test_precondition_enforced(self, x_sqrt2):
        with pytest.raises(InvalidInputError):
            three_term_select(2, 1, x_sqrt2, Fraction(1, 5))  # ||2 sqrt2|| < 1/5
        with pytest.raises(InvalidInputError):
            three_term_select(1, 1, x_sqrt2, Fraction(1, 4))

    def test_selected_index_verified_by_oracle(self, x_alt12):
        value = oracle_value(x_alt12)
        c = Fraction(1, 6)
        rng = random.Random(2)
        for _ in range(50):
            A = rng.randint(1, 200)
            if oracle_dist(A, value) <= frac_mpf(c):
                continue
            B = rng.randint(1, 200)
            idx = three_term_select(A, B, x_alt12, c)
            assert oracle_dist(idx * A + B, value) > frac_mpf(c)
            for earlier in range(1, idx):
                assert oracle_dist(earlier * A + B, value) <= frac_mpf(c)


class TestTripleBrute:
    def test_no_counterexamples_small(self, x_sqrt2, x_golden):
        for x in (x_sqrt2, x_golden):
            report = three_term_brute_check(x, Fraction(1, 5), 300, 300)
            assert report.ok
            assert report.pairs_checked > 0
            assert sum(report.case_counts.values()) == report.pairs_checked

    def test_rejects_large_threshold(self, x_sqrt2):
        with pytest.raises(InvalidInputError):
            three_term_brute_check(x_sqrt2, Fraction(1, 4), 10, 10)

    def test_case_split_matches_oracle(self, x_alt12):
        report = three_term_brute_check(x_alt12, Fraction(24, 100), 60, 60)
        assert report.ok
        value = oracle_value(x_alt12)
        want = {1: 0, 2: 0, 3: 0, 4: 0}
        for A in range(1, 61):
            if oracle_dist(A, value) <= 0.24:
                continue
            for B in range(1, 61):
                a_high = mp.frac(A * value) > 0.5
                b_high = mp.frac((A + B) * value) > 0.5
                want[2 if a_high and b_high else 3 if a_high else 4 if b_high else 1] += 1
        assert report.case_counts == want


class TestChooseM:
    def test_lambda_two(self):
        assert choose_M(Fraction(2)) == 1024

    def test_lambda_three_halves(self):
        # 2*log_1.5(M)+1 at M=1024 is ~35.2 > 32; at 2048 it is ~38.6 < 64
        assert choose_M(Fraction(3, 2)) == 2048

    def test_lambda_huge(self):
        assert choose_M(Fraction(100)) == 256

    def test_requires_lam_above_one(self):
        with pytest.raises(InvalidInputError):
            choose_M(Fraction(1))


class TestChooseC:
    def test_sqrt2_feasible(self, x_sqrt2):
        assert choose_c(x_sqrt2, 16) == Fraction(1, 4) ** 18

    def test_condition_one_bound(self, x_sqrt2):
        for M in (8, 16, 32):
            c = choose_c(x_sqrt2, M)
            assert c < Fraction(1, 9 * M ** 8)

    def test_scan_holds(self, x_sqrt2):
        M = 8
        c = choose_c(x_sqrt2, M)
        value = oracle_value(x_sqrt2)
        worst = min(oracle_dist(a, value) for a in range(1, M * M + 1))
        assert frac_mpf(c) < worst


class TestBaseLevel:
    def test_keep_odd_rule(self):
        params = feasible_params(M=8)
        params = ConstructionParams(x=params.x, lam=params.lam, M=8,
                                    c=choose_c(params.x, 8), mode="feasible",
                                    depth=1, enumeration="full")
        level = build_base_level(params)
        assert [e.interval.digits[0] for e in level.entries] == [1, 3, 5, 7]
        assert len(level.entries) == 4

    def test_base_verifies(self):
        params = feasible_params()
        level = build_base_level(params)
        report = verify_level(level, params)
        assert report.all_pass

    def test_window_emptiness(self):
        params = feasible_params()
        assert params.sqrt_c * params.M ** 4 < 1
        assert params.window_denominators(1) == []


class TestRefine:
    def test_window_example_k3(self):
        # sqrt2, M=16, c=2^-36: level-3 window [2^6, 2^14) holds exactly these
        params = feasible_params(depth=4)
        assert params.window_denominators(3) == [70, 169, 408, 985, 2378, 5741, 13860]
        assert len(params.window_denominators(3)) <= 2 * 4 + 1  # 2*log2(16)+1

    def test_refine_feasible_depth3(self):
        params = feasible_params(depth=3)
        levels, reports = build_levels(params)
        assert [lv.k for lv in levels] == [1, 2, 3]
        assert all(r.all_pass for r in reports)
        for lv in levels[1:]:
            for parent, stats in lv.stage_stats.items():
                assert stats["E"] >= 2
                assert stats["A"] >= stats["B"] >= stats["C"] >= stats["E"]

    def test_children_digit_cap(self):
        params = feasible_params(depth=3)
        levels, _ = build_levels(params)
        for e in levels[-1].entries:
            assert all(d <= 2 * params.M for d in e.interval.digits)

    def test_tampered_level_fails_condition_one(self):
        params = feasible_params(depth=2)
        levels, _ = build_levels(params)
        level = levels[-1]
        bad_iv = interval_of(level.entries[0].interval.digits[:-1] + (2 * params.M + 1,))
        from cflab.construction import LevelEntry
        tampered = LevelEntry(bad_iv, level.entries[0].cert, level.entries[0].parent)
        level.entries[0] = tampered
        report = verify_level(level, params)
        assert not report.results["digit_range"].ok

    def test_gap_floor_exact(self):
        params = feasible_params(depth=3)
        levels, _ = build_levels(params)
        for lv in levels:
            for parent, group in lv.by_parent().items():
                ordered = sorted(group, key=lambda e: e.interval.lo)
                for a, b in zip(ordered, ordered[1:]):
                    assert b.interval.lo - a.interval.hi >= lv.eps_k


class TestStrips:
    def test_strip_avoidance_depth4(self):
        # depth 4 exercises the nonempty window [2^6, 2^14)
        params = feasible_params(depth=4)
        levels, reports = build_levels(params)
        assert all(r.all_pass for r in reports)
        c = params.c
        for q in params.window_denominators(3):
            for e in levels[3].entries:
                iv = e.interval
                lo_p = (q * iv.lo - c)
                hi_p = (q * iv.hi + c)
                first = -((-lo_p.numerator) // lo_p.denominator)
                last = hi_p.numerator // hi_p.denominator
                assert first > last  # no strip center admissible

    def test_strip_drops_logged(self):
        params = feasible_params(depth=4)
        levels, _ = build_levels(params)
        drops = [d for lv in levels for d in lv.drop_log if d.reason == "strip-hit"]
        for d in drops:
            assert d.strip is not None
            p, q = d.strip
            assert q in params.window_denominators(3) + params.window_denominators(2)


class TestSamplePoint:
    def test_feasible_sampled_certificate(self):
        params = feasible_params(depth=4, enumeration="sampled", seed=7)
        cert = sample_point(params, depth=4, seed=7)
        assert cert.depth == 4
        assert cert.all_products_positive
        assert cert.all_products_above_floor
        assert all(r.all_pass for r in cert.level_reports)

    def test_depth_one(self):
        params = feasible_params(depth=1)
        cert = sample_point(params, depth=1, seed=1)
        assert len(cert.y_side) == 1
        assert cert.y_side[0].product_lo > 0

    def test_distinct_seeds_distinct_paths(self):
        params = feasible_params(depth=3, enumeration="sampled")
        cert_a = sample_point(params, depth=3, seed=1)
        cert_b = sample_point(params, depth=3, seed=4)
        assert cert_a.y_interval.digits != cert_b.y_interval.digits

    def test_determinism(self):
        params = feasible_params(depth=3, enumeration="sampled")
        again = sample_point(params, depth=3, seed=9)
        first = sample_point(params, depth=3, seed=9)
        assert first.y_interval.digits == again.y_interval.digits
        assert first.c_xy == again.c_xy


class TestDistRange:
    def test_exact_endpoints(self):
        enc = dist_range_over_interval(3, Fraction(1, 3), Fraction(2, 5))
        # 3y in [1, 6/5]: distances 0 at y=1/3, 1/5 at y=2/5
        assert enc.lo == 0 and enc.hi == Fraction(1, 5)

    def test_half_crossing(self):
        enc = dist_range_over_interval(1, Fraction(2, 5), Fraction(3, 5))
        assert enc.hi == Fraction(1, 2)
        assert enc.lo == Fraction(2, 5)

    def test_no_crossing(self):
        enc = dist_range_over_interval(2, Fraction(1, 10), Fraction(2, 10))
        assert (enc.lo, enc.hi) == (Fraction(1, 5), Fraction(2, 5))


class TestDimensionFormulas:
    def test_exact_dyadic_values(self):
        assert dimension_bound(1024).step_bound.lo == Fraction(1, 4)
        assert dimension_bound(1024).step_bound.hi == Fraction(1, 4)
        assert dimension_bound(2 ** 20).step_bound.lo == Fraction(3, 8)
        assert dimension_bound(64).step_bound.lo == Fraction(1, 12)

    def test_monotone_and_below_half(self):
        values = [dimension_bound(2 ** t).step_bound.lo for t in range(6, 24)]
        assert all(v < Fraction(1, 2) for v in values)
        assert values == sorted(values)

    def test_non_dyadic_enclosure(self):
        rep = dimension_bound(1000)
        truth = 0.5 * float(mp.log(1000 / 32) / mp.log(1000))
        assert float(rep.step_bound.lo) <= truth <= float(rep.step_bound.hi)
        assert rep.step_bound.width < Fraction(1, 10 ** 9)

    def test_total_adds_cited_dimension(self):
        rep = dimension_bound(1024)
        assert rep.total_with_cited_bad.lo == Fraction(5, 4)

    def test_rejects_small_m(self):
        with pytest.raises(InvalidInputError):
            dimension_bound(32)


class TestFalconer:
    def test_middle_thirds(self):
        report = falconer_bound(lambda k: 2, lambda k: Fraction(1, 3 ** k), 10 ** 4)
        target = float(mp.log(2) / mp.log(3))
        assert abs(float(report.at_k.lo) - target) < 1e-4
        assert abs(float(report.at_k.hi) - target) < 1e-4

    def test_quarter_gaps(self):
        report = falconer_bound(lambda k: 2, lambda k: Fraction(1, 4 ** k), 10 ** 4)
        assert abs(float(report.at_k.lo) - 0.5) < 1e-4

    def test_construction_sequence(self):
        M = 1024
        report = falconer_bound(lambda k: M // 32,
                                lambda k: Fraction(1, M ** (2 * k + 3)), 10 ** 4)
        assert abs(float(report.at_k.lo) - 0.25) < 1e-3

    def test_closed_form_cross_check(self):
        # value at k: (k-1)log2 / (k log3 - log2)
        K = 500
        report = falconer_bound(lambda k: 2, lambda k: Fraction(1, 3 ** k), K)
        want = float((K - 1) * mp.log(2) / (K * mp.log(3) - mp.log(2)))
        assert float(report.at_k.lo) <= want <= float(report.at_k.hi)

    def test_monotonicity_guard(self):
        with pytest.raises(InvalidInputError):
            falconer_bound([2, 2, 2], [Fraction(1, 3), Fraction(1, 3), Fraction(1, 9)], 3)

    def test_small_m_guard(self):
        with pytest.raises(InvalidInputError):
            falconer_bound([2, 1, 2], [Fraction(1, 3), Fraction(1, 9), Fraction(1, 27)], 3)


class TestBoxCount:
    def _synthetic_middle_thirds(self, depth):
        from cflab.construction import LevelEntry, LevelSet
        from cflab.exact import ConvergentPair
        from cflab.intervals import FundamentalInterval, NicenessCertificate

        def level(k):
            intervals = []
            for idx in range(2 ** k):
                lo = Fraction(0)
                width = Fraction(1, 3 ** k)
                pos = idx
                offset = Fraction(0)
                for bit in range(k - 1, -1, -1):
                    if pos >> bit & 1:
                        offset += 2 * Fraction(1, 3 ** (k - bit))
                iv = FundamentalInterval((1,) * k, ConvergentPair(k, 1, 1, 1, 0),
                                         offset, offset + width)
                cert = NicenessCertificate((1,) * k, Fraction(1, 8), "synthetic", ())
                intervals.append(LevelEntry(iv, cert, ()))
            return LevelSet(k, intervals, Fraction(1, 3 ** k), (Fraction(0), Fraction(1)), {})

        return [level(k) for k in range(1, depth + 1)]

    def test_middle_thirds_slope(self):
        levels = self._synthetic_middle_thirds(8)
        report = box_count_diagnostic(levels)
        assert abs(report.slope - 0.6309) < 0.05
        assert not report.degenerate

    def test_single_interval_degenerate(self):
        from cflab.construction import LevelEntry, LevelSet
        from cflab.exact import ConvergentPair
        from cflab.intervals import FundamentalInterval, NicenessCertificate
        iv = FundamentalInterval((1,), ConvergentPair(1, 1, 1, 1, 0),
                                 Fraction(0), Fraction(1, 2))
        cert = NicenessCertificate((1,), Fraction(1, 8), "synthetic", ())
        entry = LevelEntry(iv, cert, ())
        levels = [LevelSet(1, [entry], Fraction(1, 8), (Fraction(0), Fraction(1)), {}),
                  LevelSet(2, [entry], Fraction(1, 16), (Fraction(0), Fraction(1)), {})]
        report = box_count_diagnostic(levels)
        assert report.degenerate
        assert abs(report.slope - 1.0) < 0.1

    def test_construction_output_reported(self):
        params = feasible_params(depth=3)
        levels, _ = build_levels(params)
        report = box_count_diagnostic(levels)
        assert 0 < report.slope <= 1.2
