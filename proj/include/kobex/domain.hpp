#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kobex/cpoint.hpp"

namespace kobex {

struct BoundaryHit {
    double distance;
    CPoint point;
};

// One scalar constraint; the domain is the set where every constraint is negative.
struct Constraint {
    std::string label;
    std::function<double(const CPoint&)> value;
    // Gradient as dg/dx_k + i dg/dy_k. Returns nullopt where g is not differentiable.
    // Empty means "use finite differences".
    std::function<std::optional<CPoint>(const CPoint&)> gradient;
    // Nearest point of {g >= 0} to a point where g < 0. Empty means numeric search.
    std::function<BoundaryHit(const CPoint&)> nearest;
};

struct DomainSpec {
    std::string name;
    int dim = 0;
    std::vector<Constraint> constraints;
    bool convex = false;
    bool reinhardt = false;
    double bounding_radius = std::numeric_limits<double>::infinity();

    // max_i g_i(z)
    double defining(const CPoint& z) const;
};

bool contains(const DomainSpec& D, const CPoint& z);

struct DistanceOptions {
    bool allow_closed_form = true;
    bool use_reinhardt = true;
    int starts = 16;
    double final_step = 1e-10;  // angular resolution of the direction search
};

struct DistanceResult {
    double value = 0.0;
    double error_estimate = 0.0;
    CPoint witness;
    bool converged = true;
    bool closed_form = false;
};

DistanceResult boundary_distance(const DomainSpec& D, const CPoint& z, const DistanceOptions& opt = {});
CPoint nearest_boundary_point(const DomainSpec& D, const CPoint& z, const DistanceOptions& opt = {});

// First exit radius along the ray z + t u (u need not be normalized; t is measured in units of |u|).
double exit_radius(const DomainSpec& D, const CPoint& z, const CPoint& u);

struct DirectionalOptions {
    int phases = 256;
    bool refine = true;
};
inline DirectionalOptions directional_oracle() { return {4096, false}; }

double directional_distance(const DomainSpec& D, const CPoint& z, const CPoint& v,
                            const DirectionalOptions& opt = {});

// Unit inward normal at a smooth boundary point.
CPoint inward_normal(const DomainSpec& D, const CPoint& xi, double active_tol = 1e-8);

struct ConeSpec {
    CPoint vertex;
    CPoint axis;
    double theta = 0.0;
    double r = std::numeric_limits<double>::infinity();
};

bool cone_contains(const ConeSpec& c, const CPoint& z);

struct ConeWitness {
    CPoint w;
    CPoint xi;
    CPoint v;
};

struct ConeCertificate {
    double r = 0.0;
    double theta = 0.0;
    std::vector<ConeWitness> witnesses;
    int violation_count = 0;
    std::vector<int> violating_samples;
};

struct CertifyOptions {
    int mc_points = 100000;
    double radius_factor = 2.0;
    double theta_min = 1e-3;
    int bisect_iters = 30;
    double r_max = 0.0;  // 0: derived from W's bounding radius
    std::uint64_t seed = 1;
};

ConeCertificate certify_cone_condition(const DomainSpec& D, const DomainSpec& W,
                                       const std::vector<CPoint>& samples, const CertifyOptions& opt = {});

// Rejection sampling inside the bounding ball.
std::vector<CPoint> sample_interior(const DomainSpec& D, int count, std::uint64_t seed);

}  // namespace kobex
