#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kobex/domain.hpp"

namespace kobex {

// Nondecreasing rate with w(0) = 0: a closed form or a table with linear interpolation.
class Modulus {
public:
    Modulus() = default;
    static Modulus closed_form(std::function<double(double)> f, double domain_end, std::string label);
    // Expression in the variable r.
    static Modulus from_expression(const std::string& text, double domain_end);
    // Table values are replaced by their running max; (0,0) is prepended when missing.
    static Modulus table(std::vector<double> r, std::vector<double> w, std::string label);
    static Modulus zero(double domain_end);

    double operator()(double r) const;
    double domain_end() const { return end_; }
    bool is_table() const { return !tr_.empty(); }
    const std::vector<double>& table_r() const { return tr_; }
    const std::vector<double>& table_w() const { return tw_; }
    const std::string& label() const { return label_; }
    bool valid() const { return static_cast<bool>(f_) || is_table(); }

    // Least concave majorant through the origin, tabulated on `points` nodes. Concave with w(0)=0
    // implies subadditive.
    Modulus subadditive_envelope(int points = 400) const;
    // r -> w(kappa r^m)
    Modulus compose(double kappa, double m) const;
    // c * w(r)
    Modulus scaled(double c) const;

private:
    std::function<double(double)> f_;
    std::vector<double> tr_, tw_;
    double end_ = 0.0;
    std::string label_;
};

struct DiniResult {
    bool convergent = false;
    double value = 0.0;         // levels plus tail when convergent, partial sum otherwise
    double tail = 0.0;
    double exponent = 0.0;      // fitted decay exponent of the level contributions
    std::vector<double> levels; // contribution of [eps 2^-k-1, eps 2^-k]
};

inline constexpr int kDiniLevels = 60;
// log-decay exponents p <= 1 + margin count as divergent
inline constexpr double kDiniExponentMargin = 1e-2;

// int_0^eps w(r)/r dr over 60 dyadic levels; declares divergence when the level
// contributions decay no faster than 1/k.
DiniResult dini_integral(const Modulus& w, double eps);

// int_0^|t| w(r) dr
double h_integral(const Modulus& w, double t);
// Inverse of h on [0, domain_end); +inf when x is beyond the range or h vanishes identically.
double h_inverse(const Modulus& w, double x);

struct ModelDomainParams {
    double beta = 0.0;
    double eps = 0.0;
    Modulus omega;
    std::string beta_rule;  // which constraint fixed beta
    std::string eps_rule;   // which constraint fixed eps
    double m = 0.0;
    double r_V = 0.0;
};

bool model_domain_contains(const ModelDomainParams& p, cplx zeta);

ModelDomainParams select_embedding_params(const Modulus& omega_p, double m, double r_V);

enum class Regularity { lipschitz, c1_dini };

// Z = U (z - base); D near base is {Im Z_n > phi(Z', Re Z_n)} inside the box
// |Z'| < radius, |Re Z_n| < radius, |Im Z_n| < radius.
struct GraphChart {
    std::string name;
    CPoint base;
    CMat U;
    double radius = 0.0;
    // x = (Re Z1, Im Z1, ..., Re Z_{n-1}, Im Z_{n-1}, Re Z_n)
    std::function<double(const RVec&)> phi;
    std::function<std::optional<RVec>(const RVec&)> grad;  // empty or nullopt: not differentiable
    Regularity regularity = Regularity::lipschitz;
    double lipschitz = 0.0;  // declared Lipschitz constant on the box
    std::optional<Modulus> modulus;

    int dim() const { return static_cast<int>(base.size()); }
    CPoint to_chart(const CPoint& z) const;
    CPoint from_chart(const CPoint& Z) const;
    bool in_box(const CPoint& Z) const;
    RVec graph_coords(const CPoint& Z) const;
    CPoint boundary_point(const RVec& x) const;
    // phi(Z', Re Z_n) - Im Z_n
    double defining(const CPoint& Z) const;
};

// Y(Z', Z_n) = Im Z_n - phi(Z', Re Z_n)
double vertical_height(const GraphChart& chart, const CPoint& Z);

struct ChartCheck {
    double isometry_error = 0.0;
    int interior_checked = 0;
    int interior_violations = 0;
    double boundary_max_error = 0.0;
    int boundary_checked = 0;
};

// Isometry on test vectors, interior points above the graph, graph points on the boundary of D.
ChartCheck check_chart(const DomainSpec& D, const GraphChart& chart, int samples, std::uint64_t seed);

// Tabulates r -> max |grad phi(x) - grad phi(y)| over pairs with |x - y| <= r.
Modulus estimate_modulus(const GraphChart& chart, const std::vector<std::pair<RVec, RVec>>& pairs,
                         const std::vector<double>& r_grid);
// Random pairs in the chart's parameter box.
std::vector<std::pair<RVec, RVec>> sample_chart_pairs(const GraphChart& chart, int count, double max_sep,
                                                      std::uint64_t seed);

struct EmbeddingReport {
    int checked = 0;
    int violations = 0;
    int outside_box = 0;
    int outside_domain = 0;
    double worst_margin = -std::numeric_limits<double>::infinity();  // max defining value seen
    CPoint worst_xi, worst_point;
    cplx worst_zeta = 0.0;
};

// Checks xi + zeta eta_xi lies in the chart box and in D for every pair.
EmbeddingReport verify_embedding(const DomainSpec& D, const GraphChart& chart, const std::vector<CPoint>& xis,
                                 const ModelDomainParams& p, const std::vector<cplx>& zetas);
// Uniform samples of D(beta, eps).
std::vector<cplx> sample_model_domain(const ModelDomainParams& p, int count, std::uint64_t seed);
// Boundary points of D in the chart with |x| < patch_radius.
std::vector<CPoint> sample_chart_boundary(const GraphChart& chart, int count, double patch_radius,
                                          std::uint64_t seed);

struct SandwichResult {
    double C = 1.0;
    double max_first_violation = 0.0;  // max of delta - Y
    int samples = 0;
};

// delta_D(z) <= Y(U z) <= C delta_D(z) on the samples.
SandwichResult verify_lipschitz_sandwich(const DomainSpec& D, const GraphChart& chart,
                                         const std::vector<CPoint>& samples);

GraphChart make_ex21_chart(double radius = 0.15);
GraphChart make_ex22_chart(double radius = 0.5);
// Im Z_n > 0
GraphChart make_flat_chart(int n, double radius = 0.5);
// Im Z_2 > Re Z_1
GraphChart make_plane45_chart(double radius = 0.5);
// Im Z_n > |x|^2 / 2
GraphChart make_paraboloid_chart(int n, double radius = 0.5);

GraphChart parse_chart(const std::string& text, const std::string& source = "<string>");
Modulus parse_modulus(const std::string& text, const std::string& source = "<string>");

}  // namespace kobex
