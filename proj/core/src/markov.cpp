#include "pushsum/markov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pushsum {

namespace {

void require_open(double p, const char* who) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(std::string(who) + ": p must be in (0, 1)");
}

} // namespace

StationaryDistribution markov_stationary(double p, int truncation) {
    require_open(p, "markov_stationary");
    if (truncation < 1) throw std::invalid_argument("markov_stationary: truncation must be >= 1");

    StationaryDistribution dist;
    const double q = 1.0 - p;
    const double denom = 1.0 + p * p;
    dist.s_a = q * q;
    dist.s_b = 2.0 * p * q;
    dist.s_c = p * p;
    dist.b0 = 2.0 * p * q * q / denom;
    dist.b1 = 2.0 * p * p * (1.0 - p * p) / denom;
    dist.c0 = p * p * q * q / denom;
    dist.c1 = 2.0 * p * p * p / denom;
    dist.a.resize(truncation);
    for (int i = 0; i < truncation; ++i) dist.a[i] = p * std::pow(q, i + 2);
    dist.a_tail = std::pow(q, truncation + 2);
    return dist;
}

MarkovChain build_markov_chain(double p, int truncation) {
    require_open(p, "build_markov_chain");
    if (truncation < 1) throw std::invalid_argument("build_markov_chain: truncation must be >= 1");

    MarkovChain chain;
    chain.truncation = truncation;
    const int n = chain.size();
    chain.transition.assign(static_cast<std::size_t>(n) * n, 0.0);

    const int a_tail = truncation;
    const int bp0 = truncation + 1;
    const int bpp0 = truncation + 2;
    const int bp1 = truncation + 3;
    const int bpp1 = truncation + 4;
    const int c0 = truncation + 5;
    const int c1 = truncation + 6;
    const int a0 = 0;

    const double d = 0.5 * (1.0 - p); // one delivered transition
    const double f = 0.5 * p;         // one failed transition
    auto add = [&](int from, int to, double w) {
        chain.transition[static_cast<std::size_t>(from) * n + to] += w;
    };

    // A_i: both delivered maps push one level deeper; both failure maps
    // land on the level-0 one-sided intervals.
    for (int i = 0; i < truncation; ++i) {
        add(i, i + 1, 2.0 * d); // A_{K-1} feeds the lumped tail at index K
        add(i, bp0, f);
        add(i, bpp0, f);
    }
    add(a_tail, a_tail, 2.0 * d);
    add(a_tail, bp0, f);
    add(a_tail, bpp0, f);

    // B'_0 and its mirror B''_0.
    add(bp0, a0, d);
    add(bp0, bp0, d);
    add(bp0, bp1, f);
    add(bp0, c0, f);
    add(bpp0, a0, d);
    add(bpp0, bpp0, d);
    add(bpp0, bpp1, f);
    add(bpp0, c0, f);

    // B'_1 and its mirror B''_1.
    add(bp1, a0, d);
    add(bp1, bp1, d);
    add(bp1, bp1, f);
    add(bp1, c1, f);
    add(bpp1, a0, d);
    add(bpp1, bpp1, d);
    add(bpp1, bpp1, f);
    add(bpp1, c1, f);

    // C_0: delivered maps land one level in; failures escape to C_1.
    add(c0, bpp0, d);
    add(c0, bp0, d);
    add(c0, c1, 2.0 * f);

    // C_1: delivered maps land on the level-1 one-sided intervals;
    // failures keep the full interval.
    add(c1, bpp1, d);
    add(c1, bp1, d);
    add(c1, c1, 2.0 * f);

    return chain;
}

std::vector<double> stationary_vector(const StationaryDistribution& dist) {
    const int truncation = static_cast<int>(dist.a.size());
    std::vector<double> pi(truncation + 7, 0.0);
    for (int i = 0; i < truncation; ++i) pi[i] = dist.a[i];
    pi[truncation] = dist.a_tail;
    pi[truncation + 1] = 0.5 * dist.b0;
    pi[truncation + 2] = 0.5 * dist.b0;
    pi[truncation + 3] = 0.5 * dist.b1;
    pi[truncation + 4] = 0.5 * dist.b1;
    pi[truncation + 5] = dist.c0;
    pi[truncation + 6] = dist.c1;
    return pi;
}

double stationary_residual(const MarkovChain& chain, const std::vector<double>& pi) {
    const int n = chain.size();
    if (static_cast<int>(pi.size()) != n)
        throw std::invalid_argument("stationary_residual: vector length mismatch");
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += pi[i] * chain.at(i, j);
        worst = std::max(worst, std::abs(acc - pi[j]));
    }
    return worst;
}

double interval_error(int i) {
    if (i < 0 || i > 60) throw std::invalid_argument("interval_error: index out of range");
    const double denom = std::ldexp(1.0, i + 1) + 1.0;
    return 1.0 / (denom * denom);
}

double recombine_upper_bound(double p) {
    require_open(p, "recombine_upper_bound");
    const double q = 1.0 - p;
    double series = 0.0;
    double term = 0.0;
    int i = 0;
    for (; i <= 60; ++i) {
        term = p * std::pow(q, i + 2) * interval_error(i);
        series += term;
        if (term < 1e-300) break;
    }
    // Geometric tail of the a_i series, ratio (1-p)/4 per step.
    const double ratio = q / 4.0;
    series += term * ratio / (1.0 - ratio);

    const double denom = 1.0 + p * p;
    const double b0 = 2.0 * p * q * q / denom;
    const double b1 = 2.0 * p * p * (1.0 - p * p) / denom;
    const double c0 = p * p * q * q / denom;
    const double c1 = 2.0 * p * p * p / denom;
    return series + (9.0 / 25.0) * (b0 + c0) + b1 + c1;
}

} // namespace pushsum
