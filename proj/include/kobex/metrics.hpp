#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kobex/domain.hpp"
#include "kobex/psh.hpp"

namespace kobex {

enum class Side { lower, upper };
const char* side_name(Side s);

struct MetricBound {
    double value = 0.0;
    Side side = Side::lower;
    std::string method;  // graham_lower, graham_upper, sibony, inscribed_ball, ltc_lower, ...
    CPoint at;
    CPoint dir;  // tangent vector, or the second point for distance bounds
    std::vector<std::pair<std::string, double>> constants;
};

// Invariant metric of the ball, normalized so k(0; v) = |v|.
double kob_metric_ball_exact(const CPoint& z, const CPoint& v);
// artanh of the pseudo-hyperbolic distance.
double kob_distance_ball_exact(const CPoint& z1, const CPoint& z2);

std::pair<MetricBound, MetricBound> graham_bounds(const DomainSpec& D, const CPoint& z, const CPoint& v,
                                                  const DirectionalOptions& opt = {});
// Same bounds from a precomputed delta(z; v).
std::pair<MetricBound, MetricBound> graham_bounds_from(double delta_zv, const CPoint& z, const CPoint& v);

inline constexpr double kDefaultSibonyAlpha = 4.0;
MetricBound sibony_lower_bound(const PshWitness& u, const CPoint& z, const CPoint& v, double c,
                               double alpha = kDefaultSibonyAlpha);

MetricBound inscribed_ball_upper_bound(const DomainSpec& D, const CPoint& z, const CPoint& v);

struct LtcSample {
    double delta;    // delta_D(z)
    double delta_v;  // delta_D(z; v)
};

struct LtcFit {
    double C = 0.0;
    double nu = 0.0;
    int sample_count = 0;
    double max_violation = 0.0;  // max delta_v |log delta|^(1+nu) - C on the fitting set
    double c = 0.0;              // metric scale of the lower bound, 1/(2C)
    int bands = 0;
};

inline constexpr double kLtcNuMin = 0.05;
inline constexpr double kLtcNuMax = 5.0;
inline constexpr double kLtcNuStep = 0.05;

LtcFit ltc_fit(const std::vector<LtcSample>& samples);
LtcFit ltc_fit(const DomainSpec& D, const std::vector<std::pair<CPoint, CPoint>>& samples,
               const DirectionalOptions& opt = {});
std::vector<LtcSample> ltc_samples(const DomainSpec& D, const std::vector<std::pair<CPoint, CPoint>>& samples,
                                   const DirectionalOptions& opt = {});
// max over samples of delta_v |log delta|^(1+nu) - C
double ltc_violation(const LtcFit& fit, const std::vector<LtcSample>& samples);

MetricBound ltc_metric_lower_bound(const LtcFit& fit, const CPoint& w, const CPoint& v, double delta);
MetricBound convex_distance_lower_bound(double dw, double dw2);
MetricBound fr_distance_upper_bound(double d1, double d2, double sep, double C);
MetricBound pair_lower_bound(double d1, double d2, double K);

using DistanceEstimator = std::function<double(const CPoint&, const CPoint&)>;

struct PathOptions {
    int segments = 128;
    int sweeps = 4;
};
// Length of a polygonal path under the inscribed-ball metric |dz|/delta(z), midpoint rule,
// after coordinate-descent shortening of the interior vertices.
double path_distance_upper(const DomainSpec& D, const CPoint& z1, const CPoint& z2, const PathOptions& opt = {});
DistanceEstimator path_estimator(const DomainSpec& D, const PathOptions& opt = {});

struct PairConstant {
    double K_prime = 0.0;
    double K = 0.0;
    double delta_o = 0.0;
    int pairs = 0;
};

PairConstant fit_pair_constant(const DomainSpec& D, const CPoint& o, const std::vector<CPoint>& Vq,
                               const std::vector<CPoint>& Vxi, const DistanceEstimator& est);

using MetricLowerSource = std::function<double(const CPoint&, const CPoint&)>;
// sup over samples with delta_D(w) <= r of 1 / (lower bound of k(w; v)).
double goldilocks_M(const DomainSpec& D, double r, const MetricLowerSource& lower,
                    const std::vector<std::pair<CPoint, CPoint>>& samples);
// (log 1/r)^-(1+nu) / c, the rate implied by an LTC lower bound
Modulus ltc_goldilocks_rate(const LtcFit& fit, double r_end);

double localization_gap(double K_local, double K_global);

// Smallest C with est <= fr_distance_upper_bound(..., C) on the pairs.
double fit_fr_constant(const DomainSpec& D, const std::vector<std::pair<CPoint, CPoint>>& pairs,
                       const DistanceEstimator& est);

}  // namespace kobex
