#include "pushsum/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pushsum/parallel.hpp"

namespace pushsum {

std::vector<double> linear_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("linear_grid: bad range");
    std::vector<double> grid;
    const long count = static_cast<long>(std::floor((hi - lo) / step + 0.5));
    for (long i = 0; i <= count; ++i) {
        double v = lo + i * step;
        // Snap decimal grids to 12 places so accumulated rounding does not
        // leak into output (0.30000000000000004 and the like).
        if (std::abs(v) < 1e3) v = std::round(v * 1e12) / 1e12;
        grid.push_back(v);
    }
    if (!grid.empty()) grid.back() = std::min(grid.back(), hi);
    return grid;
}

std::vector<BoundSet> bounds_table(const std::vector<double>& p_grid, int series_terms) {
    std::vector<BoundSet> rows;
    rows.reserve(p_grid.size());
    for (double p : p_grid) rows.push_back(evaluate_bounds(p, series_terms));
    return rows;
}

std::vector<SimulateRow> simulate_table(const std::vector<double>& p_grid, int n, double alpha,
                                        long trials, std::uint64_t base_seed, int threads) {
    std::vector<SimulateRow> rows;
    rows.reserve(p_grid.size());
    for (std::size_t g = 0; g < p_grid.size(); ++g) {
        ProtocolParams params;
        params.n = n;
        params.p = p_grid[g];
        params.alpha = alpha;
        SimulateRow row;
        row.p = p_grid[g];
        row.estimate = estimate_R(params, trials, derive_stream_seed(base_seed, g), threads);
        rows.push_back(row);
    }
    return rows;
}

namespace {

/// One coefficient run measuring both metrics: steps to reach speed_eps and
/// the realized error at tau_tol.
CompareRecord run_instance(int n, double p, double alpha, bool pushsum, double speed_eps,
                           double tau_tol, long max_steps, std::uint64_t seed) {
    ProtocolParams params;
    params.n = n;
    params.p = p;
    params.alpha = alpha;
    params.tol = tau_tol;
    params.max_steps = max_steps;
    params.validate_for_runs();

    CompareRecord rec;
    rec.p = p;
    rec.alpha = alpha;
    rec.pushsum = pushsum;

    CoefficientState state = make_coefficient_state(n);
    EventStream events(n, p, seed);
    long speed_steps = -1;
    while (true) {
        const double sp = coefficient_spread(state);
        if (speed_steps < 0 && sp <= speed_eps) speed_steps = state.t;
        if (sp <= tau_tol) {
            rec.converged = true;
            break;
        }
        if (state.t >= max_steps) break;
        const EdgeEvent event = events.next();
        if (pushsum)
            coefficient_step(state, params, event);
        else
            consensus_coefficient_step(state, params, event);
        if (state.t % kRenormalizeInterval == 0) renormalize(state);
    }
    rec.converged = rec.converged && speed_steps >= 0;
    if (rec.converged) {
        rec.speed = speed_steps;
        std::vector<double> tau(n, 0.0);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += state.z[static_cast<std::size_t>(i) * n + k];
            for (int k = 0; k < n; ++k) tau[k] += state.z[static_cast<std::size_t>(i) * n + k] / s;
        }
        for (double& v : tau) {
            v /= n;
            total += v;
        }
        for (double& v : tau) v /= total;
        rec.error = quadratic_error(tau);
    }
    return rec;
}

} // namespace

std::vector<CompareRecord> run_compare(const CompareConfig& config) {
    if (config.p_samples < 1 || config.alpha_samples < 1 || config.trials_per_cell < 1)
        throw std::invalid_argument("run_compare: sample counts must be >= 1");
    if (!(config.p_max > 0.0 && config.p_max < 1.0))
        throw std::invalid_argument("run_compare: p_max must be in (0, 1)");
    if (!(config.alpha_min > 0.0 && config.alpha_min < config.alpha_max && config.alpha_max < 1.0))
        throw std::invalid_argument("run_compare: alpha range must satisfy 0 < min < max < 1");
    if (!(config.speed_eps >= config.tau_tol))
        throw std::invalid_argument("run_compare: speed_eps must be >= tau_tol");

    // Axis draws come from dedicated streams so the instance grid is stable
    // under changes of trials_per_cell.
    Xoshiro256pp p_rng(derive_stream_seed(config.base_seed, 0x517eed));
    Xoshiro256pp a_rng(derive_stream_seed(config.base_seed, 0xa1fa5eed));
    std::vector<double> ps(config.p_samples);
    std::vector<double> alphas(config.alpha_samples);
    for (double& p : ps) p = p_rng.next_double() * config.p_max;
    for (double& a : alphas) a = config.alpha_min + a_rng.next_double() * (config.alpha_max - config.alpha_min);

    const long pairs = config.p_samples * config.alpha_samples;
    const long per_pair = 2 * config.trials_per_cell;
    std::vector<CompareRecord> records(pairs * per_pair);
    parallel_chunks(pairs, 16, config.threads, [&](long, long begin, long end) {
        for (long pair = begin; pair < end; ++pair) {
            const double p = ps[pair / config.alpha_samples];
            const double alpha = alphas[pair % config.alpha_samples];
            for (long trial = 0; trial < config.trials_per_cell; ++trial) {
                const std::uint64_t seed =
                    derive_stream_seed(config.base_seed, 2 * (pair * config.trials_per_cell + trial) + 2);
                const long base = pair * per_pair + 2 * trial;
                records[base] = run_instance(config.n, p, alpha, true, config.speed_eps,
                                             config.tau_tol, config.max_steps, seed);
                records[base + 1] = run_instance(config.n, p, alpha, false, config.speed_eps,
                                                 config.tau_tol, config.max_steps, seed + 1);
            }
        }
    });
    return records;
}

namespace {

double median(std::vector<double>& values) {
    if (values.empty()) return -1.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

} // namespace

CellGrid label_cells(const std::vector<CompareRecord>& records, int error_bins, double error_max,
                     int p_bins, double p_max) {
    if (error_bins < 1 || p_bins < 1 || !(error_max > 0.0) || !(p_max > 0.0))
        throw std::invalid_argument("label_cells: bad grid");

    CellGrid grid;
    grid.error_bins = error_bins;
    grid.p_bins = p_bins;
    grid.error_max = error_max;
    grid.p_max = p_max;
    const int cells = error_bins * p_bins;
    grid.labels.assign(cells, CellLabel::Empty);
    grid.pushsum_count.assign(cells, 0);
    grid.consensus_count.assign(cells, 0);
    grid.pushsum_speed.assign(cells, -1.0);
    grid.consensus_speed.assign(cells, -1.0);

    std::vector<std::vector<double>> ps_speeds(cells), cs_speeds(cells);
    for (const CompareRecord& rec : records) {
        if (!rec.converged) continue;
        if (rec.error >= error_max || rec.p >= p_max) continue;
        const int eb = std::min(error_bins - 1, static_cast<int>(rec.error / error_max * error_bins));
        const int pb = std::min(p_bins - 1, static_cast<int>(rec.p / p_max * p_bins));
        const int cell = grid.index(eb, pb);
        if (rec.pushsum) {
            ++grid.pushsum_count[cell];
            ps_speeds[cell].push_back(static_cast<double>(rec.speed));
        } else {
            ++grid.consensus_count[cell];
            cs_speeds[cell].push_back(static_cast<double>(rec.speed));
        }
    }
    for (int cell = 0; cell < cells; ++cell) {
        grid.pushsum_speed[cell] = median(ps_speeds[cell]);
        grid.consensus_speed[cell] = median(cs_speeds[cell]);
        const bool has_ps = grid.pushsum_count[cell] > 0;
        const bool has_cs = grid.consensus_count[cell] > 0;
        if (!has_ps && !has_cs) {
            grid.labels[cell] = CellLabel::Empty;
        } else if (!has_ps) {
            grid.labels[cell] = CellLabel::NoPushSum;
        } else if (!has_cs) {
            grid.labels[cell] = CellLabel::PushSumFaster;
        } else {
            grid.labels[cell] = grid.consensus_speed[cell] < grid.pushsum_speed[cell]
                                    ? CellLabel::ConsensusFaster
                                    : CellLabel::PushSumFaster;
        }
    }
    return grid;
}

} // namespace pushsum
