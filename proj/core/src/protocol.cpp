#include "pushsum/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pushsum {

void ProtocolParams::validate() const {
    if (n < 2) throw std::invalid_argument("ProtocolParams: n must be >= 2");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ProtocolParams: p must be in [0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ProtocolParams: alpha must be in (0, 1)");
    if (max_steps < 1) throw std::invalid_argument("ProtocolParams: max_steps must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("ProtocolParams: tol must be > 0");
}

void ProtocolParams::validate_for_runs() const {
    validate();
    if (p >= 1.0) throw std::invalid_argument("ProtocolParams: runs require p < 1");
}

SystemState make_initial_state(const std::vector<double>& values) {
    SystemState state;
    state.agents.reserve(values.size());
    for (double v : values) state.agents.push_back({v, 1.0});
    return state;
}

void push_sum_step(SystemState& state, const ProtocolParams& params, const EdgeEvent& event) {
    AgentState& src = state.agents[event.sender];
    const double sent_x = params.alpha * src.x;
    const double sent_w = params.alpha * src.w;
    src.x *= 1.0 - params.alpha;
    src.w *= 1.0 - params.alpha;
    if (event.delivered) {
        AgentState& dst = state.agents[event.receiver];
        dst.x += sent_x;
        dst.w += sent_w;
    }
    ++state.t;
}

void consensus_step(SystemState& state, const ProtocolParams& params, const EdgeEvent& event) {
    if (event.delivered) {
        AgentState& dst = state.agents[event.receiver];
        dst.x = (1.0 - params.alpha) * dst.x + params.alpha * state.agents[event.sender].x;
    }
    ++state.t;
}

double spread(const SystemState& state, Mode mode) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const AgentState& agent : state.agents) {
        double r = agent.x;
        if (mode == Mode::PushSum) {
            if (!(agent.w > 0.0) || !std::isfinite(agent.w))
                throw std::domain_error("spread: weight not finite-positive");
            r = agent.x / agent.w;
        }
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return hi - lo;
}

void renormalize(SystemState& state) {
    double scale = 0.0;
    for (const AgentState& agent : state.agents) scale = std::max(scale, agent.w);
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::runtime_error("renormalize: weight scale not finite-positive");
    for (AgentState& agent : state.agents) {
        agent.x /= scale;
        agent.w /= scale;
    }
}

EventStream::EventStream(int n, double p, std::uint64_t seed) : rng_(seed), n_(n), p_(p) {}

EdgeEvent EventStream::next() {
    const std::uint64_t pairs = static_cast<std::uint64_t>(n_) * (n_ - 1);
    const std::uint64_t k = rng_.next_below(pairs);
    const int sender = static_cast<int>(k / (n_ - 1));
    const int offset = static_cast<int>(k % (n_ - 1));
    const int receiver = offset + (offset >= sender ? 1 : 0);
    const bool delivered = rng_.next_double() >= p_;

    const std::uint64_t key = (static_cast<std::uint64_t>(sender) << 32) |
                              (static_cast<std::uint64_t>(receiver) << 1) |
                              (delivered ? 1u : 0u);
    hash_ = (hash_ ^ key) * 1099511628211ULL;
    ++count_;
    return {sender, receiver, delivered};
}

namespace {

double consensus_value(const SystemState& state, Mode mode) {
    double acc = 0.0;
    for (const AgentState& agent : state.agents)
        acc += mode == Mode::PushSum ? agent.x / agent.w : agent.x;
    return acc / static_cast<double>(state.agents.size());
}

template <typename Observer>
TrialRecord run_impl(const ProtocolParams& params, const std::vector<double>& initial_values, Mode mode,
                     std::uint64_t seed, Observer&& observe) {
    params.validate_for_runs();
    if (static_cast<int>(initial_values.size()) != params.n)
        throw std::invalid_argument("run_to_consensus: initial_values length must equal n");

    SystemState state = make_initial_state(initial_values);
    EventStream events(params.n, params.p, seed);

    TrialRecord record;
    record.seed = seed;
    while (true) {
        const double sp = spread(state, mode);
        observe(state.t, sp);
        if (sp <= params.tol) {
            record.converged = true;
            break;
        }
        if (state.t >= params.max_steps) break;
        const EdgeEvent event = events.next();
        if (mode == Mode::PushSum) {
            push_sum_step(state, params, event);
            if (state.t % kRenormalizeInterval == 0) renormalize(state);
        } else {
            consensus_step(state, params, event);
        }
    }
    record.steps = state.t;
    record.final_value = consensus_value(state, mode);
    record.events_fingerprint = events.fingerprint();
    return record;
}

} // namespace

TrialRecord run_to_consensus(const ProtocolParams& params, const std::vector<double>& initial_values,
                             Mode mode, std::uint64_t seed) {
    return run_impl(params, initial_values, mode, seed, [](long, double) {});
}

TrialRecord run_to_consensus_traced(const ProtocolParams& params, const std::vector<double>& initial_values,
                                    Mode mode, std::uint64_t seed, long sample_every,
                                    std::vector<double>& spread_trace) {
    if (sample_every < 1) throw std::invalid_argument("run_to_consensus_traced: sample_every must be >= 1");
    spread_trace.clear();
    return run_impl(params, initial_values, mode, seed, [&](long t, double sp) {
        if (t % sample_every == 0) spread_trace.push_back(sp);
    });
}

double fit_log_slope(const std::vector<double>& values) {
    // Normal equations for log(y) = a + b*i over usable samples.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long m = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) continue;
        const double x = static_cast<double>(i);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return 0.0;
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (m * sxy - sx * sy) / denom;
}

} // namespace pushsum
