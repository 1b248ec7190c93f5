#pragma once

#include <cstdint>
#include <vector>

#include "pushsum/rng.hpp"

namespace pushsum {

/// Which averaging protocol a step or run uses.
enum class Mode { PushSum, Consensus };

struct ProtocolParams {
    int n = 2;                  ///< agent count, >= 2
    double p = 0.0;             ///< transmission failure probability in [0, 1]
    double alpha = 0.5;         ///< fraction sent (push-sum) / influence (consensus), in (0, 1)
    long max_steps = 200000;    ///< step budget for convergence-seeking runs
    double tol = 1e-12;         ///< spread tolerance declaring consensus

    /// Throws std::invalid_argument on any violated field invariant.
    void validate() const;

    /// As validate(), and additionally requires p < 1: a run with p = 1
    /// never communicates and cannot converge. Bound evaluators accept
    /// p = 1; convergence-seeking runs must not.
    void validate_for_runs() const;
};

struct AgentState {
    double x = 0.0; ///< value mass
    double w = 1.0; ///< weight mass, stays > 0
};

/// One directed transmission attempt. Over many draws (sender, receiver) is
/// uniform over ordered pairs and delivery fails independently with
/// probability p.
struct EdgeEvent {
    int sender = 0;
    int receiver = 1;
    bool delivered = true;
};

struct SystemState {
    std::vector<AgentState> agents;
    long t = 0;
};

/// All agents start with the given values and unit weight.
SystemState make_initial_state(const std::vector<double>& values);

/// Sender keeps a (1-alpha) share of its value and weight; the alpha share
/// reaches the receiver only when the event is delivered, otherwise it is
/// lost. Total function on valid inputs.
void push_sum_step(SystemState& state, const ProtocolParams& params, const EdgeEvent& event);

/// Receiver moves to (1-alpha)*x_j + alpha*x_i on delivery; a failed event
/// changes nothing. Weights are ignored (held at 1).
void consensus_step(SystemState& state, const ProtocolParams& params, const EdgeEvent& event);

/// M(t) - m(t): the range of rescaled measurements x_i/w_i (push-sum) or of
/// the raw x_i (consensus). Nonincreasing along any trajectory. Throws
/// std::domain_error if a push-sum weight is not finite-positive.
double spread(const SystemState& state, Mode mode);

/// Divides every (x_i, w_i) jointly by max_i w_i. Ratios x_i/w_i are
/// invariant under a common scale, so no observable changes; this only
/// prevents floating underflow on long lossy runs. Throws
/// std::runtime_error if the scale is not finite-positive.
void renormalize(SystemState& state);

/// Values and weights shrink geometrically, so states are rescaled after
/// every this many steps.
inline constexpr long kRenormalizeInterval = 512;

/// Seeded source of EdgeEvents: uniform ordered pair first, delivery coin
/// second. Keeps a running fingerprint of the emitted events so two
/// consumers of the same seed can be cross-checked.
class EventStream {
public:
    EventStream(int n, double p, std::uint64_t seed);

    EdgeEvent next();

    std::uint64_t count() const { return count_; }
    std::uint64_t fingerprint() const { return hash_; }

private:
    Xoshiro256pp rng_;
    int n_;
    double p_;
    std::uint64_t count_ = 0;
    std::uint64_t hash_ = 14695981039346656037ULL;
};

/// Outcome of one seeded run.
struct TrialRecord {
    double final_value = 0.0;     ///< mean of per-agent ratios at stop time
    long steps = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    std::uint64_t events_fingerprint = 0;
};

/// Iterates seeded steps until spread <= tol or the step budget runs out.
/// Non-convergence is reported via the record, not an error. The final
/// value lies in [min, max] of the initial values.
TrialRecord run_to_consensus(const ProtocolParams& params, const std::vector<double>& initial_values,
                             Mode mode, std::uint64_t seed);

/// As run_to_consensus, also recording spread every `sample_every` steps
/// (t = 0, sample_every, 2*sample_every, ...) for convergence-rate fits.
TrialRecord run_to_consensus_traced(const ProtocolParams& params, const std::vector<double>& initial_values,
                                    Mode mode, std::uint64_t seed, long sample_every,
                                    std::vector<double>& spread_trace);

/// Least-squares slope of log(y) against sample index, ignoring entries
/// that are not finite-positive. Returns 0 with fewer than two usable
/// points.
double fit_log_slope(const std::vector<double>& values);

} // namespace pushsum
