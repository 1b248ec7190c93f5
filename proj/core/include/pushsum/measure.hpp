#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pushsum {

/// Nonnegative masses over a uniform partition of [0, 1]. The invariance
/// iteration keeps the total at 1 (within 1e-12) and the bins mirror
/// symmetric: bins[k] == bins[N-1-k].
struct DiscreteMeasure {
    std::vector<double> bins;

    int size() const { return static_cast<int>(bins.size()); }
    double total() const;
    double bin_center(int k) const { return (k + 0.5) / static_cast<double>(size()); }

    /// Bin containing x, clamped to [0, N-1] for x at the right endpoint.
    int bin_of(double x) const {
        const int n = size();
        int k = static_cast<int>(x * n);
        if (k < 0) k = 0;
        if (k >= n) k = n - 1;
        return k;
    }

    void normalize();
    void symmetrize();
};

DiscreteMeasure uniform_measure(int n_bins);
/// All mass in the bin containing 1/2.
DiscreteMeasure centered_measure(int n_bins);

/// Total-variation distance (half the L1 distance of the bin masses).
double total_variation(const DiscreteMeasure& a, const DiscreteMeasure& b);

// The four maps acting on the two-node coefficient measure, one per
// possible first event: delivered 1->2 / 2->1, failed send by 1 / by 2.
// Each is a strictly increasing bijection of [0, 1] onto its image, and the
// family is mirror symmetric: d2(x) = 1 - d1(1-x), f2(x) = 1 - f1(1-x).
inline double map_d1(double x) { return 1.0 / (3.0 - 2.0 * x); }
inline double map_d2(double x) { return 2.0 * x / (1.0 + 2.0 * x); }
inline double map_f1(double x) { return x / (2.0 - x); }
inline double map_f2(double x) { return 2.0 * x / (1.0 + x); }

/// Grid point a_k: 1 - 1/(2^k + 1) for k >= 0, mirrored a_{-k} = 1 - a_k.
/// a_0 = 1/2, strictly increasing in k. The failure maps permute the grid:
/// f1(a_k) = a_{k-1} and f2(a_k) = a_{k+1}. |k| is capped at 60.
double grid_point(int k);

/// Pushforward of a binned measure under a strictly increasing map: the
/// mass of each source bin lands on the image interval of that bin, split
/// across destination bins in proportion to overlap length. Mass is
/// conserved exactly up to rounding. Throws std::invalid_argument if the
/// sampled map values fail to be nondecreasing on the bin edges.
template <typename Map>
DiscreteMeasure pushforward(const DiscreteMeasure& measure, Map&& map) {
    const int n = measure.size();
    const double scale = static_cast<double>(n);

    std::vector<double> edge(n + 1);
    for (int k = 0; k <= n; ++k) {
        double y = map(static_cast<double>(k) / scale);
        if (y < 0.0) y = 0.0;
        if (y > 1.0) y = 1.0;
        edge[k] = y;
        if (k > 0 && edge[k] < edge[k - 1]) throw std::invalid_argument("pushforward: map not increasing");
    }

    DiscreteMeasure out;
    out.bins.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double mass = measure.bins[k];
        if (mass == 0.0) continue;
        const double lo = edge[k];
        const double hi = edge[k + 1];
        const double width = hi - lo;
        if (!(width > 0.0)) {
            out.bins[out.bin_of(0.5 * (lo + hi))] += mass;
            continue;
        }
        int i0 = out.bin_of(lo);
        int i1 = out.bin_of(hi);
        if (i0 == i1) {
            out.bins[i0] += mass;
            continue;
        }
        out.bins[i0] += mass * ((i0 + 1) / scale - lo) / width;
        for (int i = i0 + 1; i < i1; ++i) out.bins[i] += mass * (1.0 / scale) / width;
        out.bins[i1] += mass * (hi - i1 / scale) / width;
    }
    return out;
}

enum class StartMeasure { Uniform, Centered };

struct FixpointResult {
    DiscreteMeasure measure;
    int iterations = 0;
    double last_tv_change = 0.0;
};

/// Iterates the two-node invariance equation
///
///   nu <- (1-p)/2 d1*(nu) + (1-p)/2 d2*(nu) + p/2 f1*(nu) + p/2 f2*(nu),
///
/// symmetrizing and renormalizing after every pass, until the
/// total-variation change drops below tv_stop or max_iterations passes run.
FixpointResult invariance_iterate(double p, int n_bins, int max_iterations = 500,
                                  StartMeasure start = StartMeasure::Uniform, double tv_stop = 1e-10);

/// Quadratic error of a binned two-node coefficient measure:
/// sum over bins of mass * (1 - 2 * center)^2.
double measure_R(const DiscreteMeasure& measure);

} // namespace pushsum
