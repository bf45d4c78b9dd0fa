"""Orbit ensembles: determinism, exact bounds, and limit-law statistics."""

import math
from fractions import Fraction

import numpy as np
import pytest

import oracle_values as ov
from thetacf import (
    QThetaNumber,
    RngConfig,
    TerminationError,
    approx_error_statistic,
    arithmetic_mean_statistic,
    check_cylinder_bounds,
    check_error_bounds,
    digit_frequency,
    digit_law,
    ergodic_report,
    exact_orbit_statistics,
    expand,
    geometric_mean_statistic,
    levy_statistic,
    new_params,
    sample_orbit,
)
from thetacf.montecarlo import float_digit_run, random_rational_seed

P2 = new_params(2)
P10 = new_params(10)


class TestSampling:
    def test_exact_orbit_matches_expand(self):
        s = sample_orbit(Fraction(1, 2), 6, P2, backend="exact")
        assert s.digits.digits == expand(Fraction(1, 2), 6, P2).digits
        assert len(s.points) == 7
        assert s.points[0] == QThetaNumber(Fraction(1, 2), Fraction(0), 2)

    def test_float_orbit_prefix_agrees(self):
        s = sample_orbit(0.5, 8, P2, backend="float")
        assert s.digits.digits[:4] == (2, 2, 4, 2)

    def test_one_digit_point_terminates(self):
        x = QThetaNumber(Fraction(0), Fraction(4), 2).reciprocal()
        s = sample_orbit(x, 10, P2)
        assert s.digits.digits == (4,) and s.digits.terminated

    def test_random_start_requires_rng(self):
        with pytest.raises(ValueError):
            sample_orbit(None, 5, P2)
        gen = RngConfig(seed=1).generator(0, 0)
        s = sample_orbit(None, 5, P2, backend="exact", rng=gen)
        assert len(s.digits) >= 1

    def test_fixed_seed_reproducible(self):
        g1 = RngConfig(seed=9).generator(0, 0)
        g2 = RngConfig(seed=9).generator(0, 0)
        s1 = sample_orbit(None, 20, P2, backend="float", rng=g1)
        s2 = sample_orbit(None, 20, P2, backend="float", rng=g2)
        assert s1.digits.digits == s2.digits.digits

    def test_rational_seed_inside_domain(self):
        gen = RngConfig(seed=5).generator(0, 0)
        for _ in range(200):
            x = random_rational_seed(gen, P2)
            assert 0 < x < Fraction(70711, 100000) + Fraction(1, 10)
            assert x.numerator**2 * 2 < x.denominator**2

    def test_float_run_digit_law_shape(self):
        digits, pts = float_digit_run(0.3, 5000, P2)
        assert digits.min() >= 2
        assert np.all((pts >= 0) & (pts <= P2.theta))


class TestExactStatistics:
    def test_levy_sandwich_per_orbit(self):
        gen = RngConfig(seed=17).generator(0, 0)
        for _ in range(8):
            x0 = random_rational_seed(gen, P2)
            st = exact_orbit_statistics(x0, 60, P2)
            lo = 2.0 * st.growth_rate
            hi = lo + math.log(1.0 + P2.theta) / 60
            assert lo <= st.levy <= hi

    def test_statistic_wrappers(self):
        x0 = Fraction(3, 7)
        st = exact_orbit_statistics(x0, 40, P2)
        assert levy_statistic(x0, 40, P2) == st.levy
        assert approx_error_statistic(x0, 40, P2) == st.approx_error_rate

    def test_termination_statistics(self):
        x = QThetaNumber(Fraction(0), Fraction(4), 2).reciprocal()  # expansion [4]
        assert approx_error_statistic(x, 1, P2) == -math.inf
        with pytest.raises(TerminationError):
            exact_orbit_statistics(x, 2, P2)

    def test_exact_bounds_hold(self):
        gen = RngConfig(seed=23).generator(0, 0)
        for params in (P2, P10):
            for _ in range(10):
                x0 = random_rational_seed(gen, params)
                assert check_cylinder_bounds(x0, 20, params)
                assert check_error_bounds(x0, 20, params)

    def test_rates_approach_limits(self):
        # averaged over seeds, the orbit rates approach their limits at n = 120:
        # denominator growth -> beta, cylinder and error rates -> +/- 2*beta
        gen = RngConfig(seed=29).generator(0, 0)
        two_beta = 2 * ov.BETA[2]
        levies, errs, growths = [], [], []
        for _ in range(10):
            x0 = random_rational_seed(gen, P2)
            st = exact_orbit_statistics(x0, 120, P2)
            levies.append(st.levy)
            errs.append(st.approx_error_rate)
            growths.append(st.growth_rate)
        assert np.mean(levies) == pytest.approx(two_beta, rel=0.08)
        assert np.mean(errs) == pytest.approx(-two_beta, rel=0.08)
        assert np.mean(growths) == pytest.approx(ov.BETA[2], rel=0.08)


class TestDigitStatistics:
    def test_geometric_mean_constant_stream(self):
        assert geometric_mean_statistic([7] * 100) == pytest.approx(7.0, rel=1e-12)

    def test_geometric_mean_at_least_m(self):
        digits, _ = float_digit_run(0.41, 50_000, P2)
        assert geometric_mean_statistic(digits) >= 2.0

    def test_arithmetic_means_at_checkpoints(self):
        digits, _ = float_digit_run(0.41, 60_000, P2)
        trend = arithmetic_mean_statistic(digits, (100, 1000, 10_000))
        assert [n for n, _ in trend] == [100, 1000, 10_000]
        assert all(v >= 2.0 for _, v in trend)

    def test_capped_digits_converge_negative_control(self):
        # capping at K restores a finite mean; the capped empirical mean
        # must settle near the capped-law expectation
        K = 50
        ks = np.arange(2, K, dtype=float)
        law = digit_law(ks, P2)
        tail_mass = 1.0 - float(np.sum(law))
        capped_expect = float(np.sum(ks * law)) + K * tail_mass
        digits, _ = float_digit_run(0.2345, 400_000, P2)
        capped = np.minimum(digits, K).astype(float)
        sd = float(np.std(capped)) / math.sqrt(capped.size)
        assert abs(float(np.mean(capped)) - capped_expect) < 6 * sd + 0.05

    def test_histogram_columns_and_coverage(self):
        digits, _ = float_digit_run(0.37, 40_000, P2)
        hist = digit_frequency(digits, P2)
        ks = [row[0] for row in hist.rows]
        assert ks[0] == 2 and ks == sorted(ks)
        freq_total = sum(row[2] for row in hist.rows)
        assert freq_total == pytest.approx(hist.coverage, abs=1e-12)
        for k, _, _, law, _ in hist.rows[:5]:
            assert law == pytest.approx(float(digit_law(k, P2)), abs=1e-15)
        csv_rows = hist.csv_rows()
        assert csv_rows[0] == ["k", "count", "frequency", "law", "sigma"]

    def test_histogram_needs_samples(self):
        with pytest.raises(ValueError):
            digit_frequency(np.array([2, 3, 4]), P2)


class TestErgodicReport:
    def test_deterministic(self):
        kw = dict(seed=3, n_seeds=3, orbit_length=40, float_digit_target=30_000)
        r1 = ergodic_report(2, **kw)
        r2 = ergodic_report(2, **kw)
        assert r1.to_json_dict() == r2.to_json_dict()

    def test_report_fields(self):
        rep = ergodic_report(2, seed=3, n_seeds=4, orbit_length=50, float_digit_target=25_000)
        assert rep.m == 2 and rep.n_orbits == 4 and rep.orbit_length == 50
        assert len(rep.levy_per_seed) == 4
        assert rep.float_digit_total >= 25_000
        assert rep.reference["two_beta"] == pytest.approx(2 * ov.BETA[2], abs=1e-9)
        d = rep.to_json_dict()
        assert set(d["deviations"]) == {"levy_rel", "approx_rel", "geo_rel"}
        assert d["digit_histogram"][0]["k"] == 2

    def test_different_seeds_differ(self):
        r1 = ergodic_report(2, seed=3, n_seeds=2, orbit_length=30, float_digit_target=15_000)
        r2 = ergodic_report(2, seed=4, n_seeds=2, orbit_length=30, float_digit_target=15_000)
        assert r1.exact_seeds != r2.exact_seeds
