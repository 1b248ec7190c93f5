#include "pushsum/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pushsum/parallel.hpp"

namespace pushsum {

CoefficientState make_coefficient_state(int n) {
    CoefficientState state;
    state.n = n;
    state.z.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) state.z[static_cast<std::size_t>(i) * n + i] = 1.0;
    return state;
}

void coefficient_step(CoefficientState& state, const ProtocolParams& params, const EdgeEvent& event) {
    const int n = state.n;
    const double keep = 1.0 - params.alpha;
    double* src = state.z.data() + static_cast<std::size_t>(event.sender) * n;
    if (event.delivered) {
        double* dst = state.z.data() + static_cast<std::size_t>(event.receiver) * n;
        for (int k = 0; k < n; ++k) {
            const double sent = params.alpha * src[k];
            src[k] *= keep;
            dst[k] += sent;
        }
    } else {
        for (int k = 0; k < n; ++k) src[k] *= keep;
    }
    ++state.t;
}

void consensus_coefficient_step(CoefficientState& state, const ProtocolParams& params,
                                const EdgeEvent& event) {
    if (event.delivered) {
        const int n = state.n;
        const double* src = state.z.data() + static_cast<std::size_t>(event.sender) * n;
        double* dst = state.z.data() + static_cast<std::size_t>(event.receiver) * n;
        for (int k = 0; k < n; ++k) dst[k] = (1.0 - params.alpha) * dst[k] + params.alpha * src[k];
    }
    ++state.t;
}

namespace {

double row_sum(const CoefficientState& state, int i) {
    const double* row = state.z.data() + static_cast<std::size_t>(i) * state.n;
    double acc = 0.0;
    for (int k = 0; k < state.n; ++k) acc += row[k];
    return acc;
}

} // namespace

double coefficient_spread(const CoefficientState& state) {
    const int n = state.n;
    double worst = 0.0;
    std::vector<double> inv(n);
    for (int i = 0; i < n; ++i) {
        const double s = row_sum(state, i);
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::domain_error("coefficient_spread: row mass not finite-positive");
        inv[i] = 1.0 / s;
    }
    for (int k = 0; k < n; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int i = 0; i < n; ++i) {
            const double r = state.z[static_cast<std::size_t>(i) * n + k] * inv[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        worst = std::max(worst, hi - lo);
    }
    return worst;
}

void renormalize(CoefficientState& state) {
    double scale = 0.0;
    for (int i = 0; i < state.n; ++i) scale = std::max(scale, row_sum(state, i));
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::runtime_error("renormalize: coefficient scale not finite-positive");
    for (double& v : state.z) v /= scale;
}

namespace {

std::vector<double> mean_rescaled_rows(const CoefficientState& state) {
    const int n = state.n;
    std::vector<double> tau(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double inv = 1.0 / row_sum(state, i);
        for (int k = 0; k < n; ++k) tau[k] += state.z[static_cast<std::size_t>(i) * n + k] * inv;
    }
    double total = 0.0;
    for (double& v : tau) {
        v /= n;
        total += v;
    }
    // Project onto the simplex: rows are nonnegative by construction, only
    // the unit sum needs restoring after the finite stop.
    for (double& v : tau) v /= total;
    return tau;
}

using StepFn = void (*)(CoefficientState&, const ProtocolParams&, const EdgeEvent&);

TauSample sample_tau_impl(const ProtocolParams& params, std::uint64_t seed, StepFn step) {
    params.validate_for_runs();
    CoefficientState state = make_coefficient_state(params.n);
    EventStream events(params.n, params.p, seed);

    TauSample sample;
    while (true) {
        if (coefficient_spread(state) <= params.tol) {
            sample.converged = true;
            break;
        }
        if (state.t >= params.max_steps) break;
        step(state, params, events.next());
        if (state.t % kRenormalizeInterval == 0) renormalize(state);
    }
    sample.steps = state.t;
    sample.events_fingerprint = events.fingerprint();
    if (sample.converged) sample.tau = mean_rescaled_rows(state);
    return sample;
}

} // namespace

TauSample sample_tau(const ProtocolParams& params, std::uint64_t seed) {
    return sample_tau_impl(params, seed, coefficient_step);
}

TauSample sample_consensus_tau(const ProtocolParams& params, std::uint64_t seed) {
    return sample_tau_impl(params, seed, consensus_coefficient_step);
}

double quadratic_error(const std::vector<double>& tau) {
    const double n = static_cast<double>(tau.size());
    double acc = 0.0;
    for (double v : tau) {
        const double d = v - 1.0 / n;
        acc += d * d;
    }
    return n * acc;
}

CouplingCheck coupling_check(const ProtocolParams& params, const std::vector<double>& initial_values,
                             std::uint64_t seed) {
    const TrialRecord record = run_to_consensus(params, initial_values, Mode::PushSum, seed);
    const TauSample sample = sample_tau(params, seed);

    // Both runs consumed a prefix of the one stream this seed defines;
    // replay it and compare prefix fingerprints to catch any divergence.
    EventStream replay(params.n, params.p, seed);
    std::uint64_t fp_record = replay.fingerprint();
    std::uint64_t fp_sample = replay.fingerprint();
    const long longest = std::max(record.steps, sample.steps);
    for (long t = 1; t <= longest; ++t) {
        replay.next();
        if (t == record.steps) fp_record = replay.fingerprint();
        if (t == sample.steps) fp_sample = replay.fingerprint();
    }
    if (fp_record != record.events_fingerprint || fp_sample != sample.events_fingerprint)
        throw std::logic_error("coupling_check: event streams diverged");

    CouplingCheck check;
    check.converged = record.converged && sample.converged;
    check.direct = record.final_value;
    if (sample.converged) {
        double inner = 0.0;
        for (int k = 0; k < params.n; ++k) inner += sample.tau[k] * initial_values[k];
        check.combined = inner;
    }
    return check;
}

namespace {

constexpr long kTrialChunk = 1024;

struct ErrorAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    long converged = 0;
    long nonconverged = 0;
};

ErrorEstimate estimate_impl(const ProtocolParams& params, long trials, std::uint64_t base_seed,
                            int threads, TauSample (*sampler)(const ProtocolParams&, std::uint64_t)) {
    params.validate_for_runs();
    if (trials < 1) throw std::invalid_argument("estimate_R: trials must be >= 1");

    const long n_chunks = (trials + kTrialChunk - 1) / kTrialChunk;
    std::vector<ErrorAccumulator> acc(n_chunks);
    parallel_chunks(trials, kTrialChunk, threads, [&](long chunk, long begin, long end) {
        ErrorAccumulator local;
        for (long trial = begin; trial < end; ++trial) {
            const TauSample sample = sampler(params, derive_stream_seed(base_seed, trial));
            if (!sample.converged) {
                ++local.nonconverged;
                continue;
            }
            const double err = quadratic_error(sample.tau);
            local.sum += err;
            local.sum_sq += err * err;
            ++local.converged;
        }
        acc[chunk] = local;
    });

    ErrorAccumulator total;
    for (const ErrorAccumulator& a : acc) {
        total.sum += a.sum;
        total.sum_sq += a.sum_sq;
        total.converged += a.converged;
        total.nonconverged += a.nonconverged;
    }
    if (total.converged == 0) throw std::runtime_error("estimate_R: every trial failed to converge");

    ErrorEstimate est;
    est.trials = total.converged;
    est.nonconverged = total.nonconverged;
    est.p = params.p;
    est.n = params.n;
    est.alpha = params.alpha;
    const double m = static_cast<double>(total.converged);
    est.r_hat = total.sum / m;
    if (total.converged > 1) {
        const double var = std::max(0.0, (total.sum_sq - total.sum * total.sum / m) / (m - 1.0));
        est.stderr_mean = std::sqrt(var / m);
    }
    return est;
}

} // namespace

ErrorEstimate estimate_R(const ProtocolParams& params, long trials, std::uint64_t base_seed,
                         int threads) {
    return estimate_impl(params, trials, base_seed, threads, sample_tau);
}

ErrorEstimate estimate_consensus_R(const ProtocolParams& params, long trials, std::uint64_t base_seed,
                                   int threads) {
    return estimate_impl(params, trials, base_seed, threads, sample_consensus_tau);
}

std::vector<TauSample> sample_tau_batch(const ProtocolParams& params, long trials,
                                        std::uint64_t base_seed, int threads) {
    params.validate_for_runs();
    std::vector<TauSample> samples(trials);
    parallel_chunks(trials, kTrialChunk, threads, [&](long, long begin, long end) {
        for (long trial = begin; trial < end; ++trial)
            samples[trial] = sample_tau(params, derive_stream_seed(base_seed, trial));
    });
    return samples;
}

DiscreteMeasure empirical_measure(const ProtocolParams& params, long trials, int bins,
                                  std::uint64_t base_seed, int threads) {
    if (params.n != 2) throw std::invalid_argument("empirical_measure: one-dimensional output needs n = 2");
    if (bins < 1) throw std::invalid_argument("empirical_measure: need at least one bin");

    const long n_chunks = (trials + kTrialChunk - 1) / kTrialChunk;
    std::vector<std::vector<double>> partial(n_chunks);
    std::vector<long> kept(n_chunks, 0);
    parallel_chunks(trials, kTrialChunk, threads, [&](long chunk, long begin, long end) {
        std::vector<double> hist(bins, 0.0);
        long count = 0;
        for (long trial = begin; trial < end; ++trial) {
            const TauSample sample = sample_tau(params, derive_stream_seed(base_seed, trial));
            if (!sample.converged) continue;
            hist[std::clamp(static_cast<int>(sample.tau[0] * bins), 0, bins - 1)] += 1.0;
            ++count;
        }
        partial[chunk] = std::move(hist);
        kept[chunk] = count;
    });

    DiscreteMeasure measure;
    measure.bins.assign(bins, 0.0);
    long total = 0;
    for (long c = 0; c < n_chunks; ++c) {
        for (int k = 0; k < bins; ++k) measure.bins[k] += partial[c][k];
        total += kept[c];
    }
    if (total == 0) throw std::runtime_error("empirical_measure: every trial failed to converge");
    for (double& m : measure.bins) m /= static_cast<double>(total);
    return measure;
}

TriangleHistogram empirical_triangle(const ProtocolParams& params, long trials, int bins,
                                     std::uint64_t base_seed, int threads) {
    if (params.n != 3) throw std::invalid_argument("empirical_triangle: needs n = 3");
    if (bins < 1) throw std::invalid_argument("empirical_triangle: need at least one bin");

    const long n_chunks = (trials + kTrialChunk - 1) / kTrialChunk;
    std::vector<std::vector<double>> partial(n_chunks);
    std::vector<long> kept(n_chunks, 0);
    const auto cell = [bins](double x) {
        int k = static_cast<int>(x * bins);
        return std::clamp(k, 0, bins - 1);
    };
    parallel_chunks(trials, kTrialChunk, threads, [&](long chunk, long begin, long end) {
        std::vector<double> hist(static_cast<std::size_t>(bins) * bins, 0.0);
        long count = 0;
        for (long trial = begin; trial < end; ++trial) {
            const TauSample sample = sample_tau(params, derive_stream_seed(base_seed, trial));
            if (!sample.converged) continue;
            hist[static_cast<std::size_t>(cell(sample.tau[1])) * bins + cell(sample.tau[0])] += 1.0;
            ++count;
        }
        partial[chunk] = std::move(hist);
        kept[chunk] = count;
    });

    TriangleHistogram tri;
    tri.bins = bins;
    tri.mass.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    long total = 0;
    for (long c = 0; c < n_chunks; ++c) {
        for (std::size_t k = 0; k < tri.mass.size(); ++k) tri.mass[k] += partial[c][k];
        total += kept[c];
    }
    if (total == 0) throw std::runtime_error("empirical_triangle: every trial failed to converge");
    for (double& m : tri.mass) m /= static_cast<double>(total);
    tri.samples = total;
    return tri;
}

int aligned_bin_count(int requested, int depth) {
    if (requested < 1) throw std::invalid_argument("aligned_bin_count: requested must be >= 1");
    if (depth < 0 || depth > 50) throw std::invalid_argument("aligned_bin_count: depth out of range");
    for (int n = requested;; ++n) {
        if (n % 2 == 0) continue;
        bool ok = true;
        for (int k = 1; k <= depth + 1 && ok; ++k) {
            const long divisor = (1L << k) + 1;
            if (n % divisor == 0) ok = false;
        }
        if (ok) return n;
    }
}

IntervalMasses interval_masses(const DiscreteMeasure& measure, int depth) {
    if (depth < 1) throw std::invalid_argument("interval_masses: depth must be >= 1");
    const int n = measure.size();

    // Every grid point up to depth+1 (both sides) must sit strictly inside
    // a bin, and consecutive grid points must land in distinct bins.
    std::vector<int> bin_pos(depth + 2), bin_neg(depth + 2);
    for (int k = 0; k <= depth + 1; ++k) {
        for (int sign = 0; sign < 2; ++sign) {
            const double a = grid_point(sign == 0 ? k : -k);
            const double scaled = a * n;
            if (std::abs(scaled - std::round(scaled)) < 1e-9 * n)
                throw std::invalid_argument("interval_masses: grid point on a bin edge; use aligned_bin_count");
            (sign == 0 ? bin_pos : bin_neg)[k] = measure.bin_of(a);
        }
        if (k > 0 && (bin_pos[k] == bin_pos[k - 1] || bin_neg[k] == bin_neg[k - 1]))
            throw std::invalid_argument("interval_masses: depth beyond bin resolution");
    }

    const auto open_mass = [&](int lo_bin, int hi_bin) {
        double acc = 0.0;
        for (int k = lo_bin + 1; k < hi_bin; ++k) acc += measure.bins[k];
        return acc;
    };

    IntervalMasses out;
    out.s.resize(depth + 1);
    out.t_atoms.resize(depth + 1);
    for (int i = 0; i <= depth; ++i) {
        const double right = open_mass(bin_pos[i], bin_pos[i + 1]);
        const double left = open_mass(bin_neg[i + 1], bin_neg[i]);
        out.s[i] = 0.5 * (right + left);
        out.t_atoms[i] = i == 0 ? measure.bins[bin_pos[0]]
                                : 0.5 * (measure.bins[bin_pos[i]] + measure.bins[bin_neg[i]]);
    }
    double tail = 0.0;
    for (int k = 0; k <= bin_neg[depth + 1]; ++k) tail += measure.bins[k];
    for (int k = bin_pos[depth + 1]; k < n; ++k) tail += measure.bins[k];
    out.tail = tail;
    return out;
}

} // namespace pushsum
