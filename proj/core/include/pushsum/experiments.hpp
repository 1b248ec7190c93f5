#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pushsum/bounds.hpp"
#include "pushsum/coefficients.hpp"

namespace pushsum {

/// Inclusive evenly spaced grid; the last point is pinned to `hi` exactly.
std::vector<double> linear_grid(double lo, double hi, double step);

/// Analytic bound rows for a p-grid.
std::vector<BoundSet> bounds_table(const std::vector<double>& p_grid, int series_terms = 60);

struct SimulateRow {
    double p = 0.0;
    ErrorEstimate estimate;
};

/// Monte Carlo error estimates over a p-grid (every p must be < 1). Each
/// grid point draws its trial streams from (base_seed, grid index, trial).
std::vector<SimulateRow> simulate_table(const std::vector<double>& p_grid, int n, double alpha,
                                        long trials, std::uint64_t base_seed, int threads = 0);

/// One (p, alpha) instance run under both protocols. `speed` is the number
/// of steps until the coefficient spread first reaches speed_eps; `error`
/// the realized quadratic error at full convergence.
struct CompareRecord {
    double p = 0.0;
    double alpha = 0.0;
    bool pushsum = true;
    double error = 0.0;
    long speed = 0;
    bool converged = false;
};

struct CompareConfig {
    int n = 5;
    long p_samples = 100;       ///< random p draws
    long alpha_samples = 100;   ///< random alpha draws; instances = all pairs
    long trials_per_cell = 1;   ///< runs of each protocol per (p, alpha) pair
    double p_max = 0.99;
    double alpha_min = 0.02;
    double alpha_max = 0.98;
    double speed_eps = 1e-6;    ///< spread target defining the speed metric
    double tau_tol = 1e-9;      ///< convergence tolerance for the error part
    long max_steps = 2000000;
    std::uint64_t base_seed = 1;
    int threads = 0;
};

/// All instance records, ordered by (pair index, trial, protocol) for
/// reproducible output.
std::vector<CompareRecord> run_compare(const CompareConfig& config);

/// Speed comparison cells over the (error, p) plane.
enum class CellLabel {
    Empty,           ///< no records at all
    ConsensusFaster, ///< region a
    PushSumFaster,   ///< region b
    NoPushSum,       ///< region c: consensus records only
};

struct CellGrid {
    int error_bins = 0;
    int p_bins = 0;
    double error_max = 0.0;
    double p_max = 0.0;
    std::vector<CellLabel> labels;       ///< error_bins * p_bins, row-major by p bin
    std::vector<long> pushsum_count;
    std::vector<long> consensus_count;
    std::vector<double> pushsum_speed;   ///< median steps, -1 when absent
    std::vector<double> consensus_speed;

    int index(int error_bin, int p_bin) const { return p_bin * error_bins + error_bin; }
    double error_center(int error_bin) const { return (error_bin + 0.5) * error_max / error_bins; }
    double p_center(int p_bin) const { return (p_bin + 0.5) * p_max / p_bins; }
};

/// Bins converged records by (realized error, p) and labels each cell with
/// the faster protocol by median speed. Cells that only consensus reached
/// are region c; cells that only push-sum reached count as push-sum faster.
CellGrid label_cells(const std::vector<CompareRecord>& records, int error_bins, double error_max,
                     int p_bins, double p_max);

} // namespace pushsum
