#pragma once

#include <vector>

namespace pushsum {

/// Stationary masses of the support-tracking chain behind the general upper
/// bound. States: A_i (nested central intervals), B'_i / B''_i (one-sided
/// intervals, reported jointly as b_i), C_i (wide intervals).
struct StationaryDistribution {
    std::vector<double> a; ///< a_i = p (1-p)^{i+2}, i = 0 .. truncation-1
    double a_tail = 0.0;   ///< lumped mass of all deeper A-states
    double b0 = 0.0;       ///< joint mass of B'_0 and B''_0: 2p(1-p)^2 / (1+p^2)
    double b1 = 0.0;       ///< joint mass of B'_1 and B''_1: 2p^2(1-p^2) / (1+p^2)
    double c0 = 0.0;       ///< p^2 (1-p)^2 / (1+p^2)
    double c1 = 0.0;       ///< 2 p^3 / (1+p^2)
    double s_a = 0.0;      ///< (1-p)^2
    double s_b = 0.0;      ///< 2p(1-p)
    double s_c = 0.0;      ///< p^2
};

/// Closed-form stationary distribution; requires 0 < p < 1.
StationaryDistribution markov_stationary(double p, int truncation = 40);

/// Dense row-stochastic transition matrix on the truncated state space.
/// State order: A_0 .. A_{K-1}, A_tail, B'_0, B''_0, B'_1, B''_1, C_0, C_1
/// (K = truncation). A_tail lumps every A_i with i >= K; the lumped chain
/// is exactly stationary under the closed-form vector, so the pi P = pi
/// residual is pure floating-point noise rather than truncation error.
struct MarkovChain {
    int truncation = 0;
    std::vector<double> transition; ///< size() x size(), row-major

    int size() const { return truncation + 7; }
    double at(int row, int col) const { return transition[static_cast<std::size_t>(row) * size() + col]; }
};

MarkovChain build_markov_chain(double p, int truncation = 40);

/// Per-state probability vector matching the MarkovChain state order, with
/// each joint b_i split evenly between the primed and double-primed state
/// (they are mirror images with equal interval errors).
std::vector<double> stationary_vector(const StationaryDistribution& dist);

/// max_j |(pi P)_j - pi_j|.
double stationary_residual(const MarkovChain& chain, const std::vector<double>& pi);

/// Worst-case quadratic error on the central interval alpha_i:
/// r(alpha_i) = 1 / (2^{i+1} + 1)^2.
double interval_error(int i);

/// Stationary mixture of per-interval worst-case errors:
///
///   sum_i a_i r(alpha_i) + (9/25) b0 + b1 + (9/25) c0 + c1,
///
/// summed with exact (2^{i+1}+1)^2 denominators plus a geometric tail
/// allowance. Never exceeds upper_bound_general, which relaxes the
/// denominators to 4^{i+1}.
double recombine_upper_bound(double p);

} // namespace pushsum
