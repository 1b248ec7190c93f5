#pragma once

#include <optional>

namespace pushsum {

/// Largest |exponent| for which 2^t terms are formed explicitly. Keeps the
/// ratio arithmetic comfortably inside double range; terms beyond the cap
/// are covered by analytic tail bounds.
inline constexpr long kPowerCap = 60;

/// gamma(p) = (1 - sqrt(1 - p^2)) / p, the rate governing how fast interval
/// masses of the two-node coefficient measure may decay. Evaluated as
/// p / (1 + sqrt(1 - p^2)), the algebraically identical form without the
/// cancellation near p = 0; gamma(0) = 0 by continuous extension.
/// Strictly increasing on [0, 1], gamma(1) = 1, gamma(p) ~ p/2 near 0.
double gamma_rate(double p);

/// Series lower bound on the two-node quadratic error R:
///
///   R >= gamma - 4(1-gamma) * sum_{i>=1} (2 gamma)^i / (2^i + 1)^2.
///
/// The partial sum over `terms` terms is completed with an upper bound on
/// the remainder (geometric, (2^i+1)^2 >= 4^i), so the returned value is a
/// true lower bound for every truncation and is nondecreasing in `terms`.
double lower_bound_series(double p, int terms = 60);

/// Closed-form relaxation of the series bound:
///
///   R >= gamma - (8/9) gamma (1-gamma) - 2 gamma^2 (1-gamma) / (2-gamma).
///
/// Never exceeds lower_bound_series. Both behave as p/18 + O(p^2) near 0.
double lower_bound_closed(double p);

/// Upper bound valid for all p in [0, 1]:
///
///   R <= p(1-p)^2/(3+p) + p (18 + 23p + 50p^2 - 41p^3) / (25 (1+p^2)).
double upper_bound_general(double p);

/// P(t = a) = sqrt((1-p)/(1+p)) * gamma(p)^|a| for the signed count t of
/// excess failed halvings between two successful transmissions. Requires
/// 0 < p < 1; at p = 0 the distribution degenerates to a point mass at 0.
double t_pmf(double p, long a);

struct HighPRatios {
    double ratio1; ///< x_1/w_1 after the second successful transmission
    double ratio2; ///< x_2/w_2 after the second successful transmission
};

/// Node ratios as a function of t1 = k1 - l1 and t2 = l2 - k2:
///
///   ratio1 = (-2^t2 + 2^t1 - 1/2) / (2^t2 + 2^t1 + 1/2),
///   ratio2 = ( 2^t1 - 1/2) / (2^t1 + 1/2).
///
/// Both lie in [-1, 1]. Throws std::invalid_argument beyond the power cap.
HighPRatios highp_ratios(long t1, long t2);

/// Sign/magnitude regions of the (t1, t2) plane. Exactly one region matches
/// every integer pair.
enum class HighPRegion {
    FirstWorseNegative,  ///< a) t1 <= -1: both ratios non-positive, first worse
    SecondWorsePositive, ///< b) t1 >= 0, t1 >= t2+1: both non-negative, second worse
    SecondWorseMixed,    ///< c) t1 >= 0, t1 <= t2 <= 2 t1: mixed signs, second worse
    FirstWorseMixed,     ///< d) t1 >= 0, t2 >= 2 t1 + 1: mixed signs, first worse
};

HighPRegion highp_region(long t1, long t2);

/// Squared worse ratio r(t1, t2) per the region classification.
double r_term(long t1, long t2);

/// Smallest cutoff whose tail allowance stays below 1e-9, capped at the
/// power cap (near p = 1 the cap binds and the tail allowance grows; the
/// result stays a valid bound either way).
int highp_default_cutoff(double p);

/// High-failure-rate upper bound:
///
///   R <= 1/2 + (1-p)/(2(1+p)) * sum_{t1, t2} gamma^{|t1|+|t2|} r(t1, t2),
///
/// truncated at |t1|, |t2| <= cutoff and completed with the analytic tail
/// bound using r <= 1, so the result is a true upper bound and tightens as
/// the cutoff grows. The trivial n=2 bound R <= 1 caps the result. Requires
/// 0 < p < 1; cutoff 0 picks highp_default_cutoff(p).
double upper_bound_highp(double p, int cutoff = 0);

/// All analytic quantities at one p. upper_highp is absent at the endpoints
/// where the high-p bound is undefined.
struct BoundSet {
    double p = 0.0;
    double gamma = 0.0;
    double lower_series = 0.0;
    double lower_closed = 0.0;
    double upper_general = 0.0;
    std::optional<double> upper_highp;
    int series_terms = 0;
    int highp_cutoff = 0;
};

BoundSet evaluate_bounds(double p, int series_terms = 60, int highp_cutoff = 0);

} // namespace pushsum
