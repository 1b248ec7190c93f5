#include "pushsum/measure.hpp"

#include <algorithm>

namespace pushsum {

double DiscreteMeasure::total() const {
    double acc = 0.0;
    for (double m : bins) acc += m;
    return acc;
}

void DiscreteMeasure::normalize() {
    const double t = total();
    if (!(t > 0.0)) throw std::domain_error("DiscreteMeasure::normalize: total mass not positive");
    for (double& m : bins) m /= t;
}

void DiscreteMeasure::symmetrize() {
    const int n = size();
    for (int k = 0; k < n / 2; ++k) {
        const double avg = 0.5 * (bins[k] + bins[n - 1 - k]);
        bins[k] = avg;
        bins[n - 1 - k] = avg;
    }
}

DiscreteMeasure uniform_measure(int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("uniform_measure: need at least one bin");
    DiscreteMeasure m;
    m.bins.assign(n_bins, 1.0 / n_bins);
    return m;
}

DiscreteMeasure centered_measure(int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("centered_measure: need at least one bin");
    DiscreteMeasure m;
    m.bins.assign(n_bins, 0.0);
    if (n_bins % 2 == 1) {
        m.bins[n_bins / 2] = 1.0;
    } else {
        m.bins[n_bins / 2 - 1] = 0.5;
        m.bins[n_bins / 2] = 0.5;
    }
    return m;
}

double total_variation(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.size() != b.size()) throw std::invalid_argument("total_variation: bin counts differ");
    double acc = 0.0;
    for (int k = 0; k < a.size(); ++k) acc += std::abs(a.bins[k] - b.bins[k]);
    return 0.5 * acc;
}

double grid_point(int k) {
    if (k > 60 || k < -60) throw std::invalid_argument("grid_point: |k| exceeds the 2^k cap");
    if (k >= 0) return 1.0 - 1.0 / (std::ldexp(1.0, k) + 1.0);
    return 1.0 / (std::ldexp(1.0, -k) + 1.0);
}

FixpointResult invariance_iterate(double p, int n_bins, int max_iterations, StartMeasure start,
                                  double tv_stop) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("invariance_iterate: p must be in [0, 1)");
    if (n_bins < 100) throw std::invalid_argument("invariance_iterate: need at least 100 bins");
    if (max_iterations < 1) throw std::invalid_argument("invariance_iterate: need at least one iteration");

    const double w_deliver = 0.5 * (1.0 - p);
    const double w_fail = 0.5 * p;

    FixpointResult result;
    result.measure = start == StartMeasure::Uniform ? uniform_measure(n_bins) : centered_measure(n_bins);
    for (int it = 0; it < max_iterations; ++it) {
        const DiscreteMeasure d1 = pushforward(result.measure, map_d1);
        const DiscreteMeasure d2 = pushforward(result.measure, map_d2);
        const DiscreteMeasure f1 = pushforward(result.measure, map_f1);
        const DiscreteMeasure f2 = pushforward(result.measure, map_f2);

        DiscreteMeasure next;
        next.bins.resize(n_bins);
        for (int k = 0; k < n_bins; ++k)
            next.bins[k] = w_deliver * (d1.bins[k] + d2.bins[k]) + w_fail * (f1.bins[k] + f2.bins[k]);
        next.symmetrize();
        next.normalize();

        result.last_tv_change = total_variation(next, result.measure);
        result.measure = std::move(next);
        result.iterations = it + 1;
        if (result.last_tv_change < tv_stop) break;
    }
    return result;
}

double measure_R(const DiscreteMeasure& measure) {
    double acc = 0.0;
    for (int k = 0; k < measure.size(); ++k) {
        const double d = 1.0 - 2.0 * measure.bin_center(k);
        acc += measure.bins[k] * d * d;
    }
    return acc;
}

} // namespace pushsum
