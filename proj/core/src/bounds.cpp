#include "pushsum/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pushsum {

namespace {

void require_unit_interval(double p, const char* who) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(who) + ": p must be in [0, 1]");
}

void require_open_interval(double p, const char* who) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(std::string(who) + ": p must be in (0, 1)");
}

void require_power_cap(long t, const char* who) {
    if (t > kPowerCap || t < -kPowerCap)
        throw std::invalid_argument(std::string(who) + ": |t| exceeds the 2^t power cap");
}

} // namespace

double gamma_rate(double p) {
    require_unit_interval(p, "gamma_rate");
    return p / (1.0 + std::sqrt((1.0 - p) * (1.0 + p)));
}

double lower_bound_series(double p, int terms) {
    require_unit_interval(p, "lower_bound_series");
    if (terms < 1) throw std::invalid_argument("lower_bound_series: terms must be >= 1");
    if (terms > 400) terms = 400; // 2^400 squared still fits a double; more terms change nothing

    const double g = gamma_rate(p);
    double sum = 0.0;
    for (int i = 1; i <= terms; ++i) {
        const double denom = std::ldexp(1.0, i) + 1.0;
        sum += std::pow(2.0 * g, i) / (denom * denom);
    }
    // Remainder of the subtracted series, bounded above via (2^i+1)^2 >= 4^i:
    // sum_{i>terms} (2g)^i/4^i <= (g/2)^{terms+1} / (1 - g/2). Subtracting an
    // upper bound keeps the result a certified lower bound on R.
    const double half = 0.5 * g;
    const double tail = std::pow(half, terms + 1) / (1.0 - half);
    return g - 4.0 * (1.0 - g) * (sum + tail);
}

double lower_bound_closed(double p) {
    require_unit_interval(p, "lower_bound_closed");
    const double g = gamma_rate(p);
    return g - (8.0 / 9.0) * g * (1.0 - g) - 2.0 / (2.0 - g) * g * g * (1.0 - g);
}

double upper_bound_general(double p) {
    require_unit_interval(p, "upper_bound_general");
    const double one_minus = 1.0 - p;
    const double first = p * one_minus * one_minus / (3.0 + p);
    const double poly = 18.0 + 23.0 * p + 50.0 * p * p - 41.0 * p * p * p;
    return first + p * poly / (25.0 * (1.0 + p * p));
}

double t_pmf(double p, long a) {
    require_unit_interval(p, "t_pmf");
    if (p == 0.0) return a == 0 ? 1.0 : 0.0;
    if (p == 1.0) throw std::invalid_argument("t_pmf: undefined at p = 1");
    const double prefactor = std::sqrt((1.0 - p) / (1.0 + p));
    if (a == 0) return prefactor;
    return prefactor * std::pow(gamma_rate(p), static_cast<double>(a < 0 ? -a : a));
}

HighPRatios highp_ratios(long t1, long t2) {
    require_power_cap(t1, "highp_ratios");
    require_power_cap(t2, "highp_ratios");
    const double p1 = std::ldexp(1.0, static_cast<int>(t1));
    const double p2 = std::ldexp(1.0, static_cast<int>(t2));
    return {(-p2 + p1 - 0.5) / (p2 + p1 + 0.5), (p1 - 0.5) / (p1 + 0.5)};
}

HighPRegion highp_region(long t1, long t2) {
    if (t1 <= -1) return HighPRegion::FirstWorseNegative;
    if (t1 >= t2 + 1) return HighPRegion::SecondWorsePositive;
    if (t1 <= t2 && 2 * t1 >= t2) return HighPRegion::SecondWorseMixed;
    if (2 * t1 + 1 <= t2) return HighPRegion::FirstWorseMixed;
    // The four predicates partition the integer plane; reaching this point
    // would be an internal error.
    throw std::logic_error("highp_region: unclassifiable pair");
}

double r_term(long t1, long t2) {
    const HighPRatios r = highp_ratios(t1, t2);
    switch (highp_region(t1, t2)) {
    case HighPRegion::FirstWorseNegative:
    case HighPRegion::FirstWorseMixed:
        return r.ratio1 * r.ratio1;
    case HighPRegion::SecondWorsePositive:
    case HighPRegion::SecondWorseMixed:
        return r.ratio2 * r.ratio2;
    }
    throw std::logic_error("r_term: unreachable");
}

namespace {

// Everything outside the truncation square, with r <= 1:
// sum_{|t1|>C or |t2|>C} gamma^{|t1|+|t2|} <= 4 gamma^{C+1} (1+gamma)/(1-gamma)^2.
double highp_tail_allowance(double g, int cutoff) {
    const double d = 1.0 - g;
    return 4.0 * std::pow(g, cutoff + 1) * (1.0 + g) / (d * d);
}

} // namespace

int highp_default_cutoff(double p) {
    require_open_interval(p, "highp_default_cutoff");
    const double g = gamma_rate(p);
    for (int c = 8; c <= kPowerCap; ++c)
        if (highp_tail_allowance(g, c) < 1e-9) return c;
    return static_cast<int>(kPowerCap);
}

double upper_bound_highp(double p, int cutoff) {
    require_open_interval(p, "upper_bound_highp");
    if (cutoff == 0) cutoff = highp_default_cutoff(p);
    if (cutoff < 1 || cutoff > kPowerCap)
        throw std::invalid_argument("upper_bound_highp: cutoff must be in [1, power cap]");

    const double g = gamma_rate(p);
    // gamma^|t| weights, precomputed once per axis.
    std::vector<double> weight(cutoff + 1);
    weight[0] = 1.0;
    for (int i = 1; i <= cutoff; ++i) weight[i] = weight[i - 1] * g;

    double sum = 0.0;
    for (long a1 = -cutoff; a1 <= cutoff; ++a1)
        for (long a2 = -cutoff; a2 <= cutoff; ++a2)
            sum += weight[a1 < 0 ? -a1 : a1] * weight[a2 < 0 ? -a2 : a2] * r_term(a1, a2);

    const double value =
        0.5 + (1.0 - p) / (2.0 * (1.0 + p)) * (sum + highp_tail_allowance(g, cutoff));
    // R <= n-1 = 1 holds unconditionally for two nodes.
    return value < 1.0 ? value : 1.0;
}

BoundSet evaluate_bounds(double p, int series_terms, int highp_cutoff) {
    BoundSet b;
    b.p = p;
    b.gamma = gamma_rate(p);
    b.lower_series = lower_bound_series(p, series_terms);
    b.lower_closed = lower_bound_closed(p);
    b.upper_general = upper_bound_general(p);
    b.series_terms = series_terms;
    if (p > 0.0 && p < 1.0) {
        b.highp_cutoff = highp_cutoff == 0 ? highp_default_cutoff(p) : highp_cutoff;
        b.upper_highp = upper_bound_highp(p, b.highp_cutoff);
    }
    return b;
}

} // namespace pushsum
