#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "pushsum/bounds.hpp"

using namespace pushsum;

namespace {

// Independent oracle for the series lower bound: straight long-double
// summation until the terms vanish, no truncation bookkeeping. Kept apart
// from the implementation on purpose.
long double oracle_lower_series(double p) {
    const long double g = p == 0.0 ? 0.0L : (1.0L - sqrtl(1.0L - (long double)p * p)) / p;
    long double sum = 0.0L;
    for (int i = 1; i <= 300; ++i) {
        long double pow2i = powl(2.0L, i);
        long double term = powl(2.0L * g, i) / ((pow2i + 1.0L) * (pow2i + 1.0L));
        sum += term;
        if (term < 1e-30L) break;
    }
    return g - 4.0L * (1.0L - g) * sum;
}

// Sum of gamma^|a| over |a| <= cap plus the exact geometric remainder.
double oracle_t_normalization(double p, long cap) {
    const double g = gamma_rate(p);
    double total = t_pmf(p, 0);
    for (long a = 1; a <= cap; ++a) total += 2.0 * t_pmf(p, a);
    const double tail = 2.0 * t_pmf(p, cap) * g / (1.0 - g);
    return total + tail;
}

} // namespace

TEST_CASE("gamma_rate") {
    CHECK(gamma_rate(0.0) == 0.0);
    CHECK(gamma_rate(1.0) == 1.0);
    CHECK(gamma_rate(0.6) == 1.0 / 3.0); // sqrt(0.64) is exact, no cancellation path
    CHECK(gamma_rate(1e-3) == doctest::Approx(0.5e-3).epsilon(1e-3));

    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double g = gamma_rate(i / 1000.0);
        CHECK(g > prev);
        prev = g;
    }
    CHECK_THROWS_AS(gamma_rate(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(gamma_rate(1.1), std::invalid_argument);
}

TEST_CASE("lower_bound_series against the summation oracle") {
    for (double p : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        const double exact = static_cast<double>(oracle_lower_series(p));
        const double value = lower_bound_series(p);
        CHECK(value == doctest::Approx(exact).epsilon(1e-12));
        CHECK(value <= exact + 1e-15); // truncation is padded, never optimistic
    }
    // Frozen oracle value at p = 0.6 (gamma = 1/3).
    CHECK(lower_bound_series(0.6) == doctest::Approx(0.07642864246852316).epsilon(1e-12));
    CHECK(lower_bound_series(0.0) == 0.0);
    CHECK(lower_bound_series(1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("lower_bound_series is monotone in the term count") {
    for (double p : {0.3, 0.6, 0.9}) {
        const double t5 = lower_bound_series(p, 5);
        const double t20 = lower_bound_series(p, 20);
        const double t80 = lower_bound_series(p, 80);
        CHECK(t5 <= t20 + 1e-15); // widening only sheds tail allowance, up to rounding
        CHECK(t20 <= t80 + 1e-15);
    }
    CHECK_THROWS_AS(lower_bound_series(0.5, 0), std::invalid_argument);
}

TEST_CASE("lower bound asymptote p/18") {
    CHECK(lower_bound_series(1e-3) / (1e-3 / 18.0) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(lower_bound_series(1e-4) / (1e-4 / 18.0) == doctest::Approx(1.0).epsilon(0.002));
    CHECK(lower_bound_closed(1e-3) / (1e-3 / 18.0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("lower_bound_closed") {
    // 1/3 - 16/81 - 12/135 = 19/405 at p = 0.6.
    CHECK(lower_bound_closed(0.6) == doctest::Approx(19.0 / 405.0).epsilon(1e-14));
    CHECK(lower_bound_closed(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lower_bound_closed(0.0) == 0.0);
    for (int i = 0; i <= 100; ++i) {
        const double p = i / 100.0;
        CHECK(lower_bound_closed(p) <= lower_bound_series(p) + 1e-14);
    }
}

TEST_CASE("upper_bound_general") {
    CHECK(upper_bound_general(0.0) == 0.0);
    CHECK(upper_bound_general(1.0) == 1.0); // 18+23+50-41 = 50, over 25*(1+1)
    CHECK(upper_bound_general(0.5) >= lower_bound_series(0.5));
}

TEST_CASE("t_pmf") {
    CHECK(t_pmf(0.6, 0) == 0.5); // sqrt(0.4/1.6) exactly
    CHECK(t_pmf(0.6, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(t_pmf(0.6, -1) == t_pmf(0.6, 1));
    CHECK(t_pmf(0.6, 7) == t_pmf(0.6, -7));

    for (double p : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9})
        CHECK(std::abs(oracle_t_normalization(p, 40) - 1.0) <= 1e-12);

    CHECK(t_pmf(0.0, 0) == 1.0);
    CHECK(t_pmf(0.0, 3) == 0.0);
    CHECK_THROWS_AS(t_pmf(1.0, 0), std::invalid_argument);
}

TEST_CASE("highp_ratios") {
    const HighPRatios origin = highp_ratios(0, 0);
    CHECK(origin.ratio1 == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(origin.ratio2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(highp_ratios(-1, 0).ratio1 == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(highp_ratios(60, 0).ratio2 == doctest::Approx(1.0).epsilon(1e-15));

    for (long t1 = -20; t1 <= 20; t1 += 3)
        for (long t2 = -20; t2 <= 20; t2 += 3) {
            const HighPRatios r = highp_ratios(t1, t2);
            CHECK(r.ratio1 >= -1.0);
            CHECK(r.ratio1 <= 1.0);
            CHECK(r.ratio2 >= -1.0);
            CHECK(r.ratio2 <= 1.0);
        }
    CHECK_THROWS_AS(highp_ratios(61, 0), std::invalid_argument);
    CHECK_THROWS_AS(highp_ratios(0, -61), std::invalid_argument);
}

TEST_CASE("region table partitions the integer plane") {
    for (long a1 = -50; a1 <= 50; ++a1)
        for (long a2 = -50; a2 <= 50; ++a2) {
            int matches = 0;
            if (a1 <= -1) ++matches;
            if (a1 >= 0 && a1 >= a2 + 1) ++matches;
            if (a1 >= 0 && a1 <= a2 && 2 * a1 >= a2) ++matches;
            if (a1 >= 0 && 2 * a1 + 1 <= a2) ++matches;
            CHECK(matches == 1);
            CHECK_NOTHROW(highp_region(a1, a2));
        }
}

TEST_CASE("r_term examples and worse-ratio consistency") {
    CHECK(highp_region(0, 0) == HighPRegion::SecondWorseMixed);
    CHECK(r_term(0, 0) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(highp_region(-1, 0) == HighPRegion::FirstWorseNegative);
    CHECK(r_term(-1, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(highp_region(0, 1) == HighPRegion::FirstWorseMixed);
    const HighPRatios r01 = highp_ratios(0, 1);
    CHECK(r_term(0, 1) == doctest::Approx(r01.ratio1 * r01.ratio1).epsilon(1e-15));

    // The printed region table should agree with brute-force "worse ratio";
    // a discrepancy is reported but the table stays authoritative.
    for (long a1 = -50; a1 <= 50; ++a1)
        for (long a2 = -50; a2 <= 50; ++a2) {
            const double r = r_term(a1, a2);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            const HighPRatios pair = highp_ratios(a1, a2);
            const double brute = std::max(pair.ratio1 * pair.ratio1, pair.ratio2 * pair.ratio2);
            WARN_MESSAGE(std::abs(r - brute) <= 1e-12,
                         "region table disagrees with worse-ratio brute force at ("
                             << a1 << ", " << a2 << "): " << r << " vs " << brute);
        }
}

TEST_CASE("upper_bound_highp") {
    CHECK(upper_bound_highp(0.9) < upper_bound_general(0.9)); // the high-p bound wins near 1
    CHECK(upper_bound_highp(0.999) <= 1.0);

    for (double p : {0.3, 0.6, 0.9}) {
        const double c20 = upper_bound_highp(p, 20);
        const double c40 = upper_bound_highp(p, 40);
        const double c60 = upper_bound_highp(p, 60);
        CHECK(c40 <= c20 + 1e-15); // exact terms replace tail allowance
        CHECK(c60 <= c40 + 1e-15);
    }
    // Default cutoff leaves the tail allowance below 1e-9 up to p = 0.9.
    for (double p : {0.1, 0.5, 0.9})
        CHECK(std::abs(upper_bound_highp(p) - upper_bound_highp(p, 60)) <= 1e-9);

    CHECK_THROWS_AS(upper_bound_highp(0.0), std::invalid_argument);
    CHECK_THROWS_AS(upper_bound_highp(1.0), std::invalid_argument);
}

TEST_CASE("bound sandwich on the p grid") {
    for (int i = 1; i <= 19; ++i) {
        const double p = 0.05 * i;
        const BoundSet b = evaluate_bounds(p);
        const double lower = std::max(b.lower_closed, b.lower_series);
        const double upper = std::min(b.upper_general, b.upper_highp.value());
        CHECK(lower <= upper);
        CHECK(b.lower_closed >= 0.0);
        CHECK(upper <= 1.0);
    }
}

TEST_CASE("evaluate_bounds endpoints") {
    const BoundSet at_zero = evaluate_bounds(0.0);
    CHECK(!at_zero.upper_highp.has_value());
    CHECK(at_zero.gamma == 0.0);
    const BoundSet at_one = evaluate_bounds(1.0);
    CHECK(!at_one.upper_highp.has_value());
    CHECK(at_one.upper_general == 1.0);
}
