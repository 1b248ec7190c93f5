#pragma once

#include <cstdint>
#include <vector>

#include "pushsum/measure.hpp"
#include "pushsum/protocol.hpp"

namespace pushsum {

/// Coefficient run state: one nonnegative n-vector z_i per agent, started
/// at the unit basis, row i stored at z[i*n .. i*n+n). Delivered events
/// conserve the column sums; a failure shrinks only the sender's row.
struct CoefficientState {
    int n = 0;
    std::vector<double> z;
    long t = 0;
};

CoefficientState make_coefficient_state(int n);

/// Push-sum rule on rows: sender keeps (1-alpha) of its row, receiver gains
/// the alpha share when delivered.
void coefficient_step(CoefficientState& state, const ProtocolParams& params, const EdgeEvent& event);

/// Consensus rule on rows: receiver moves to (1-alpha) z_j + alpha z_i on
/// delivery. Rows stay row-stochastic.
void consensus_coefficient_step(CoefficientState& state, const ProtocolParams& params,
                                const EdgeEvent& event);

/// Max over coordinates of the range of the L1-rescaled rows; zero exactly
/// at consensus of the rescaled rows.
double coefficient_spread(const CoefficientState& state);

/// Joint rescale by the largest row sum, same role as for SystemState.
void renormalize(CoefficientState& state);

struct TauSample {
    std::vector<double> tau;  ///< simplex vector; empty if not converged
    bool converged = false;
    long steps = 0;
    std::uint64_t events_fingerprint = 0;
};

/// Runs the coefficient recursion under the seed-derived event stream until
/// the rescaled rows agree within tol, then returns their common value
/// renormalized onto the simplex.
TauSample sample_tau(const ProtocolParams& params, std::uint64_t seed);

/// Same run for the consensus update rule.
TauSample sample_consensus_tau(const ProtocolParams& params, std::uint64_t seed);

/// n * sum_i (tau_i - 1/n)^2: zero exactly at the uniform vector, n-1 at a
/// vertex of the simplex.
double quadratic_error(const std::vector<double>& tau);

struct CouplingCheck {
    double direct = 0.0;    ///< final value of the value/weight run
    double combined = 0.0;  ///< <tau, initial values> from the coefficient run
    bool converged = false;
};

/// Runs run_to_consensus and sample_tau on the same seed-derived event
/// stream and returns both sides of the coupling identity; they agree
/// pathwise within a small multiple of tol. Throws std::logic_error if the
/// two runs did not in fact consume the same events (internal bug).
CouplingCheck coupling_check(const ProtocolParams& params, const std::vector<double>& initial_values,
                             std::uint64_t seed);

struct ErrorEstimate {
    double r_hat = 0.0;        ///< mean quadratic error over converged trials
    double stderr_mean = 0.0;  ///< sample std / sqrt(trials)
    long trials = 0;           ///< converged trials entering the mean
    long nonconverged = 0;     ///< excluded trials
    double p = 0.0;
    int n = 0;
    double alpha = 0.5;
};

/// Monte Carlo estimate of the expected quadratic error R over `trials`
/// seeded coefficient runs. Non-converged trials are excluded and counted;
/// all trials diverging is an error. Deterministic for a fixed base seed,
/// independent of the thread count.
ErrorEstimate estimate_R(const ProtocolParams& params, long trials, std::uint64_t base_seed,
                         int threads = 0);

/// Same estimator for the consensus update rule.
ErrorEstimate estimate_consensus_R(const ProtocolParams& params, long trials, std::uint64_t base_seed,
                                   int threads = 0);

/// All tau samples for `trials` seeded runs, in trial order.
std::vector<TauSample> sample_tau_batch(const ProtocolParams& params, long trials,
                                        std::uint64_t base_seed, int threads = 0);

/// Histogram of tau_1 over [0, 1] for two agents, total mass 1.
DiscreteMeasure empirical_measure(const ProtocolParams& params, long trials, int bins,
                                  std::uint64_t base_seed, int threads = 0);

/// Histogram of (tau_1, tau_2) over the triangle tau_1 + tau_2 <= 1 for
/// three agents; cell (i, j) covers [i/bins, (i+1)/bins) x [j/bins, (j+1)/bins).
struct TriangleHistogram {
    int bins = 0;
    std::vector<double> mass; ///< bins*bins row-major, upper cells stay zero
    long samples = 0;

    double& at(int i, int j) { return mass[static_cast<std::size_t>(j) * bins + i]; }
    double at(int i, int j) const { return mass[static_cast<std::size_t>(j) * bins + i]; }
};

TriangleHistogram empirical_triangle(const ProtocolParams& params, long trials, int bins,
                                     std::uint64_t base_seed, int threads = 0);

/// Per-interval masses of a symmetric two-node coefficient measure around
/// the grid a_k: s[i] is the (mirror-averaged) mass of the open interval
/// (a_i, a_{i+1}) and t_atoms[i] the mass of the single bin containing a_i,
/// for i = 0..depth. `tail` is everything at or beyond a_{depth+1} on either
/// side, so 2*sum(s) + t_0 + 2*sum_{i>=1}(t) + tail recovers the total mass
/// exactly. Bins must be aligned so every involved grid point lies strictly
/// inside a bin (see aligned_bin_count); otherwise std::invalid_argument.
struct IntervalMasses {
    std::vector<double> s;
    std::vector<double> t_atoms;
    double tail = 0.0;
};

IntervalMasses interval_masses(const DiscreteMeasure& measure, int depth);

/// Smallest bin count >= requested for which no grid point a_k with
/// |k| <= depth+1 falls on a bin edge (an edge hit needs (2^k + 1) to
/// divide the count, so odd counts avoiding those divisors qualify).
int aligned_bin_count(int requested, int depth);

} // namespace pushsum
