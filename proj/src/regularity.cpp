#include "kobex/regularity.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "kobex/domain_io.hpp"
#include "kobex/error.hpp"
#include "kobex/expression.hpp"

namespace kobex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (b <= a) return 0.0;
    // shallow: a tighter tolerance sits below roundoff and only forces needless splitting
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 6, 1e-12);
}

RVec random_in_param_box(int n, double r, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-r, r);
    RVec x(2 * n - 1);
    for (;;) {
        for (int k = 0; k < x.size(); ++k) x[k] = U(rng);
        if (x.head(2 * n - 2).norm() < r) return x;
    }
}

}  // namespace

// ---- Modulus ----

Modulus Modulus::closed_form(std::function<double(double)> f, double domain_end, std::string label) {
    if (!(domain_end > 0.0)) throw ConfigError("modulus domain_end must be positive");
    Modulus m;
    m.f_ = std::move(f);
    m.end_ = domain_end;
    m.label_ = std::move(label);
    return m;
}

Modulus Modulus::from_expression(const std::string& text, double domain_end) {
    Expr e = Expr::parse(text, {"r"});
    return closed_form([e](double r) {
        cplx x = r;
        return e.eval(&x).real();
    }, domain_end, text);
}

Modulus Modulus::table(std::vector<double> r, std::vector<double> w, std::string label) {
    if (r.size() != w.size() || r.empty()) throw ConfigError("modulus table: mismatched or empty columns");
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] > r[i - 1])) throw ConfigError("modulus table: r must be strictly increasing");
    if (r.front() < 0.0) throw ConfigError("modulus table: negative r");
    if (r.front() > 0.0) {
        r.insert(r.begin(), 0.0);
        w.insert(w.begin(), 0.0);
    }
    w.front() = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) w[i] = std::max(w[i], w[i - 1]);
    Modulus m;
    m.tr_ = std::move(r);
    m.tw_ = std::move(w);
    m.end_ = m.tr_.back();
    m.label_ = std::move(label);
    if (!(m.end_ > 0.0)) throw ConfigError("modulus table: need a positive node");
    return m;
}

Modulus Modulus::zero(double domain_end) {
    return closed_form([](double) { return 0.0; }, domain_end, "0");
}

double Modulus::operator()(double r) const {
    if (r <= 0.0) return 0.0;
    if (f_) return f_(r);
    if (tr_.empty()) throw ConfigError("empty modulus");
    if (r >= tr_.back()) return tw_.back();
    auto it = std::upper_bound(tr_.begin(), tr_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - tr_.begin());
    double t = (r - tr_[i - 1]) / (tr_[i] - tr_[i - 1]);
    return tw_[i - 1] + t * (tw_[i] - tw_[i - 1]);
}

Modulus Modulus::subadditive_envelope(int points) const {
    std::vector<double> r, w;
    if (is_table()) {
        r = tr_;
        w = tw_;
    } else {
        // geometric near 0, linear further out
        r.push_back(0.0);
        for (int k = points / 2; k >= 1; --k) r.push_back(end_ * std::pow(2.0, -k * 40.0 / points));
        for (int k = 1; k <= points / 2; ++k) {
            double x = end_ * k / (points / 2);
            if (x > r.back()) r.push_back(x);
        }
        for (double x : r) w.push_back((*this)(x));
    }
    // upper hull from the origin
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < r.size(); ++i) {
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2], b = hull.back();
            double cross = (r[b] - r[a]) * (w[i] - w[a]) - (w[b] - w[a]) * (r[i] - r[a]);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    std::vector<double> hr, hw;
    for (std::size_t i : hull) {
        hr.push_back(r[i]);
        hw.push_back(w[i]);
    }
    // re-tabulate on all nodes so evaluation matches the hull's linear pieces
    Modulus hullm = table(hr, hw, label_ + " (concave envelope)");
    std::vector<double> ow;
    for (double x : r) ow.push_back(hullm(x));
    return table(r, ow, hullm.label());
}

Modulus Modulus::compose(double kappa, double m) const {
    if (!(kappa > 0.0) || !(m > 0.0)) throw ConfigError("compose: kappa and m must be positive");
    Modulus base = *this;
    double end = std::pow(end_ / kappa, 1.0 / m);
    return closed_form([base, kappa, m](double r) { return base(kappa * std::pow(r, m)); }, end,
                       label_ + " o (" + std::to_string(kappa) + " r^" + std::to_string(m) + ")");
}

Modulus Modulus::scaled(double c) const {
    Modulus base = *this;
    return closed_form([base, c](double r) { return c * base(r); }, end_, std::to_string(c) + " * " + label_);
}

// ---- Dini ----

DiniResult dini_integral(const Modulus& w, double eps) {
    if (!(eps > 0.0)) throw DomainError("dini_integral: eps must be positive");
    if (eps > w.domain_end() * (1.0 + 1e-12)) throw DomainError("dini_integral: eps beyond the modulus range");
    DiniResult res;
    auto g = [&w](double r) { return w(r) / r; };
    double sum = 0.0;
    for (int k = 0; k < kDiniLevels; ++k) {
        double hi = std::ldexp(eps, -k), lo = std::ldexp(eps, -k - 1);
        double I = integrate(g, lo, hi);
        res.levels.push_back(I);
        sum += I;
    }
    const auto& L = res.levels;
    const int a = 29, b = 44, c = kDiniLevels - 1;
    if (L[c] <= 0.0) {
        res.convergent = true;
        res.value = sum;
        res.exponent = kInf;
        return res;
    }
    if (L[a] <= 0.0 || L[b] <= 0.0) {
        // nonzero only near 0 would mean w is not monotone
        throw ConvergenceError("dini_integral: level contributions are not monotone");
    }
    double d1 = std::log(L[a] / L[b]) / (b - a);
    double d2 = std::log(L[b] / L[c]) / (c - b);
    if (d2 > 0.0 && d2 >= 0.9 * d1) {
        double q = std::exp(-d2);
        res.convergent = true;
        res.exponent = d2 / std::log(2.0);  // w(r) ~ r^exponent
        res.tail = L[c] * q / (1.0 - q);
        res.value = sum + res.tail;
        return res;
    }
    // logarithmic decay: fit L_k ~ A (lambda_k + s)^-p with lambda_k = log(1/r_k) at the level midpoint;
    // the shift s makes the three sampled levels agree on p
    auto lam = [eps](int k) { return std::log(1.0 / eps) + (k + 0.5) * std::log(2.0); };
    auto pfit = [&](int i, int j, double sh) { return std::log(L[i] / L[j]) / std::log((lam(j) + sh) / (lam(i) + sh)); };
    auto gap = [&](double sh) { return pfit(a, b, sh) - pfit(b, c, sh); };
    double shift = 0.0;
    double slo = -lam(a) + 1e-3, shi = 1e4;
    if (gap(slo) * gap(shi) < 0.0) {
        auto r = boost::math::tools::bisect(gap, slo, shi, boost::math::tools::eps_tolerance<double>(40));
        shift = 0.5 * (r.first + r.second);
    }
    double p = pfit(a, c, shift);
    res.exponent = p;
    // 60 levels cannot separate p = 1 from p slightly above it; such rates are reported divergent
    if (!(p > 1.0 + kDiniExponentMargin)) {
        res.convergent = false;
        res.value = sum;
        res.tail = kInf;
        return res;
    }
    res.convergent = true;
    double lc = lam(c) + shift;
    res.tail = L[c] * std::pow(lc, p) * std::pow(lc + 0.5 * std::log(2.0), 1.0 - p) / ((p - 1.0) * std::log(2.0));
    res.value = sum + res.tail;
    return res;
}

// ---- h ----

double h_integral(const Modulus& w, double t) {
    double a = std::abs(t);
    if (a > w.domain_end() * (1.0 + 1e-12)) throw DomainError("h_integral: |t| beyond the modulus range");
    if (a == 0.0) return 0.0;
    if (w.is_table()) {
        const auto& r = w.table_r();
        double s = 0.0;
        for (std::size_t i = 1; i < r.size() && r[i - 1] < a; ++i) {
            double hi = std::min(r[i], a);
            s += 0.5 * (w(r[i - 1]) + w(hi)) * (hi - r[i - 1]);
        }
        return s;
    }
    return integrate([&w](double r) { return w(r); }, 0.0, a);
}

double h_inverse(const Modulus& w, double x) {
    if (x <= 0.0) return 0.0;
    double end = w.domain_end();
    double H = h_integral(w, end);
    if (!(H > 0.0) || x >= H) return kInf;
    double lo = 0.0, hi = end;
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        if (h_integral(w, mid) < x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

bool model_domain_contains(const ModelDomainParams& p, cplx zeta) {
    double s = zeta.real(), t = zeta.imag();
    if (!(std::abs(t) < p.eps)) return false;
    if (std::abs(t) > p.omega.domain_end()) return false;
    return p.beta * h_integral(p.omega, t) < s && s < p.eps;
}

ModelDomainParams select_embedding_params(const Modulus& omega_p, double m, double r_V) {
    if (!(m > 0.0)) throw DomainError("select_embedding_params: m must be positive");
    if (!(r_V > 0.0)) throw DomainError("select_embedding_params: r_V must be positive");
    ModelDomainParams p;
    p.omega = omega_p;
    p.m = m;
    p.r_V = r_V;
    double b = 4.0 * std::sqrt(2.0) / m;
    p.beta = std::max(1.0 + 1e-9, b);
    p.beta_rule = b >= 1.0 + 1e-9 ? "1/beta <= m/(4 sqrt 2)" : "beta > 1";

    // x/h^-1(x) < 1/beta  <=>  h^-1(x) > beta x  <=>  h(beta x) < x, for continuous nondecreasing h;
    // x >= h(end) has h^-1(x) = inf and imposes nothing
    const double H = h_integral(omega_p, omega_p.domain_end());
    auto admissible = [&](double eps) {
        for (int i = 1; i <= 1000; ++i) {
            double x = eps * i / 1000.0;
            if (!(x < H)) continue;
            double bx = p.beta * x;
            if (bx >= omega_p.domain_end() || !(h_integral(omega_p, bx) < x)) return false;
        }
        return true;
    };
    const double eps0 = r_V / std::sqrt(2.0) * (1.0 - 1e-12);
    const double ratio = 1.0 - std::ldexp(1.0, -12);
    auto grid = [&](long k) { return eps0 * std::pow(ratio, static_cast<double>(k)); };
    long kmax = static_cast<long>(std::floor(std::log(1e-12 / eps0) / std::log(ratio)));
    if (kmax < 0) throw FitError("select_embedding_params: r_V below the grid minimum");
    if (admissible(eps0)) {
        p.eps = eps0;
        p.eps_rule = "sqrt(2) eps < r_V";
        return p;
    }
    if (!admissible(grid(kmax))) throw FitError("select_embedding_params: no admissible eps at grid minimum 1e-12");
    long lo = 0, hi = kmax;  // lo fails, hi passes
    while (hi - lo > 1) {
        long mid = (lo + hi) / 2;
        if (admissible(grid(mid)))
            hi = mid;
        else
            lo = mid;
    }
    p.eps = grid(hi);
    p.eps_rule = "x/h^-1(x) < 1/beta";
    return p;
}

// ---- charts ----

CPoint GraphChart::to_chart(const CPoint& z) const {
    require_dim(z, dim(), "chart point");
    return U * (z - base);
}

CPoint GraphChart::from_chart(const CPoint& Z) const {
    require_dim(Z, dim(), "chart point");
    return base + U.adjoint() * Z;
}

bool GraphChart::in_box(const CPoint& Z) const {
    int n = dim();
    return Z.head(n - 1).norm() < radius && std::abs(Z[n - 1].real()) < radius && std::abs(Z[n - 1].imag()) < radius;
}

RVec GraphChart::graph_coords(const CPoint& Z) const {
    int n = dim();
    RVec x(2 * n - 1);
    for (int k = 0; k < n - 1; ++k) {
        x[2 * k] = Z[k].real();
        x[2 * k + 1] = Z[k].imag();
    }
    x[2 * n - 2] = Z[n - 1].real();
    return x;
}

CPoint GraphChart::boundary_point(const RVec& x) const {
    int n = dim();
    CPoint Z(n);
    for (int k = 0; k < n - 1; ++k) Z[k] = cplx(x[2 * k], x[2 * k + 1]);
    Z[n - 1] = cplx(x[2 * n - 2], phi(x));
    return Z;
}

double GraphChart::defining(const CPoint& Z) const { return phi(graph_coords(Z)) - Z[dim() - 1].imag(); }

double vertical_height(const GraphChart& chart, const CPoint& Z) {
    if (!chart.in_box(Z)) throw DomainError("vertical_height: point outside the chart box");
    return -chart.defining(Z);
}

ChartCheck check_chart(const DomainSpec& D, const GraphChart& chart, int samples, std::uint64_t seed) {
    ChartCheck out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    int n = chart.dim();
    for (int i = 0; i < 32; ++i) {
        CPoint v(n);
        for (int k = 0; k < n; ++k) v[k] = cplx(N(rng), N(rng));
        out.isometry_error = std::max(out.isometry_error, std::abs((chart.U * v).norm() - v.norm()));
    }
    std::uniform_real_distribution<double> U(-chart.radius, chart.radius);
    for (int i = 0; i < samples; ++i) {
        RVec x = random_in_param_box(n, chart.radius, rng);
        CPoint Z = chart.boundary_point(x);
        Z[n - 1] = cplx(x[2 * n - 2], U(rng));
        CPoint z = chart.from_chart(Z);
        if (contains(D, z)) {
            ++out.interior_checked;
            if (!(vertical_height(chart, Z) > 0.0)) ++out.interior_violations;
        }
        CPoint B = chart.boundary_point(x);
        if (chart.in_box(B)) {
            ++out.boundary_checked;
            out.boundary_max_error = std::max(out.boundary_max_error, std::abs(D.defining(chart.from_chart(B))));
        }
    }
    return out;
}

std::vector<std::pair<RVec, RVec>> sample_chart_pairs(const GraphChart& chart, int count, double max_sep,
                                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U01;
    int n = chart.dim();
    std::vector<std::pair<RVec, RVec>> out;
    while (static_cast<int>(out.size()) < count) {
        RVec x = random_in_param_box(n, chart.radius, rng);
        RVec u(x.size());
        for (int k = 0; k < u.size(); ++k) u[k] = N(rng);
        u /= u.norm();
        RVec y = x + max_sep * U01(rng) * u;
        if (y.head(2 * n - 2).norm() < chart.radius && std::abs(y[2 * n - 2]) < chart.radius)
            out.emplace_back(x, y);
    }
    return out;
}

Modulus estimate_modulus(const GraphChart& chart, const std::vector<std::pair<RVec, RVec>>& pairs,
                         const std::vector<double>& r_grid) {
    if (!chart.grad) throw ConfigError("estimate_modulus: chart has no gradient oracle");
    if (chart.regularity != Regularity::c1_dini) throw ConfigError("estimate_modulus: chart is not C^1");
    if (r_grid.empty()) throw ConfigError("estimate_modulus: empty r grid");
    std::vector<std::pair<double, double>> dg;
    for (const auto& [x, y] : pairs) {
        auto gx = chart.grad(x), gy = chart.grad(y);
        if (!gx || !gy) throw NonSmoothPointError("estimate_modulus: gradient undefined at a sample");
        dg.emplace_back((x - y).norm(), (*gx - *gy).norm());
    }
    std::sort(dg.begin(), dg.end());
    std::vector<double> r, w;
    std::size_t j = 0;
    double run = 0.0;
    for (double rg : r_grid) {
        while (j < dg.size() && dg[j].first <= rg) run = std::max(run, dg[j++].second);
        r.push_back(rg);
        w.push_back(run);
    }
    return Modulus::table(r, w, chart.name + " sampled gradient modulus");
}

EmbeddingReport verify_embedding(const DomainSpec& D, const GraphChart& chart, const std::vector<CPoint>& xis,
                                 const ModelDomainParams& p, const std::vector<cplx>& zetas) {
    EmbeddingReport rep;
    for (const auto& xi : xis) {
        CPoint eta = inward_normal(D, xi);
        for (cplx zeta : zetas) {
            if (!model_domain_contains(p, zeta)) throw DomainError("verify_embedding: zeta outside D(beta, eps)");
            CPoint P = xi + zeta * eta;
            CPoint Z = chart.to_chart(P);
            ++rep.checked;
            bool bad = false;
            double margin = kInf;
            if (!chart.in_box(Z)) {
                ++rep.outside_box;
                bad = true;
            } else {
                margin = chart.defining(Z);
                if (!(margin < 0.0) || !contains(D, P)) {
                    ++rep.outside_domain;
                    bad = true;
                }
            }
            if (bad) ++rep.violations;
            if (margin > rep.worst_margin) {
                rep.worst_margin = margin;
                rep.worst_xi = xi;
                rep.worst_point = P;
                rep.worst_zeta = zeta;
            }
        }
    }
    return rep;
}

std::vector<cplx> sample_model_domain(const ModelDomainParams& p, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> S(0.0, p.eps), T(-p.eps, p.eps);
    std::vector<cplx> out;
    while (static_cast<int>(out.size()) < count) {
        cplx z(S(rng), T(rng));
        if (model_domain_contains(p, z)) out.push_back(z);
    }
    return out;
}

std::vector<CPoint> sample_chart_boundary(const GraphChart& chart, int count, double patch_radius,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-patch_radius, patch_radius);
    int n = chart.dim();
    std::vector<CPoint> out;
    while (static_cast<int>(out.size()) < count) {
        RVec x(2 * n - 1);
        for (int k = 0; k < x.size(); ++k) x[k] = U(rng);
        if (x.norm() >= patch_radius) continue;
        out.push_back(chart.from_chart(chart.boundary_point(x)));
    }
    return out;
}

SandwichResult verify_lipschitz_sandwich(const DomainSpec& D, const GraphChart& chart,
                                         const std::vector<CPoint>& samples) {
    SandwichResult res;
    res.C = 0.0;
    res.max_first_violation = -kInf;
    for (const auto& z : samples) {
        CPoint Z = chart.to_chart(z);
        double Y = vertical_height(chart, Z);
        double d = boundary_distance(D, z).value;
        res.max_first_violation = std::max(res.max_first_violation, d - Y);
        if (d > Y + 1e-9)
            throw DomainError("verify_lipschitz_sandwich: chart inconsistency, delta " + std::to_string(d) +
                              " exceeds Y " + std::to_string(Y) + " at " + to_string(z));
        if (d > 0.0) res.C = std::max(res.C, Y / d);
        ++res.samples;
    }
    return res;
}

// ---- bundled charts ----

GraphChart make_ex21_chart(double radius) {
    GraphChart c;
    c.name = "Ex21_chart";
    c.base = make_point({1.0, 0.0});
    c.U = CMat::Zero(2, 2);
    c.U(0, 1) = 1.0;
    c.U(1, 0) = cplx(0.0, -1.0);
    c.radius = radius;
    c.phi = [](const RVec& x) {
        double s = std::hypot(x[0], x[1]);
        return 1.0 - std::sqrt(1.0 - x[2] * x[2] - s);
    };
    c.grad = [](const RVec& x) -> std::optional<RVec> {
        double s = std::hypot(x[0], x[1]);
        if (s == 0.0) return std::nullopt;
        double A = std::sqrt(1.0 - x[2] * x[2] - s);
        RVec g(3);
        g << x[0] / (2.0 * s * A), x[1] / (2.0 * s * A), x[2] / A;
        return g;
    };
    c.regularity = Regularity::lipschitz;
    c.lipschitz = std::sqrt((0.25 + radius * radius) / (1.0 - radius * radius - radius));
    return c;
}

GraphChart make_ex22_chart(double radius) {
    GraphChart c;
    c.name = "Ex22_chart";
    c.base = CPoint::Zero(2);
    c.U = CMat::Zero(2, 2);
    c.U(0, 1) = 1.0;
    c.U(1, 0) = cplx(0.0, 1.0);
    c.radius = radius;
    c.phi = [](const RVec& x) {
        double s2 = x[0] * x[0] + x[1] * x[1];
        return s2 == 0.0 ? 0.0 : std::exp(-1.0 / (s2 * s2));
    };
    c.grad = [](const RVec& x) -> std::optional<RVec> {
        double s2 = x[0] * x[0] + x[1] * x[1];
        RVec g = RVec::Zero(3);
        if (s2 > 0.0) {
            double f = 4.0 / (s2 * s2 * s2) * std::exp(-1.0 / (s2 * s2));
            g[0] = f * x[0];
            g[1] = f * x[1];
        }
        return g;
    };
    c.regularity = Regularity::c1_dini;
    double s = radius;
    c.lipschitz = 4.0 / std::pow(s, 5) * std::exp(-1.0 / std::pow(s, 4));
    return c;
}

GraphChart make_flat_chart(int n, double radius) {
    GraphChart c;
    c.name = "flat_chart";
    c.base = CPoint::Zero(n);
    c.U = CMat::Identity(n, n);
    c.radius = radius;
    c.phi = [](const RVec&) { return 0.0; };
    c.grad = [n](const RVec&) -> std::optional<RVec> { return RVec::Zero(2 * n - 1); };
    c.regularity = Regularity::c1_dini;
    c.lipschitz = 0.0;
    c.modulus = Modulus::zero(2.0 * std::sqrt(2.0) * radius);
    return c;
}

GraphChart make_plane45_chart(double radius) {
    GraphChart c;
    c.name = "plane45_chart";
    c.base = CPoint::Zero(2);
    c.U = CMat::Identity(2, 2);
    c.radius = radius;
    c.phi = [](const RVec& x) { return x[0]; };
    c.grad = [](const RVec&) -> std::optional<RVec> {
        RVec g = RVec::Zero(3);
        g[0] = 1.0;
        return g;
    };
    c.regularity = Regularity::c1_dini;
    c.lipschitz = 1.0;
    c.modulus = Modulus::zero(2.0 * std::sqrt(2.0) * radius);
    return c;
}

GraphChart make_paraboloid_chart(int n, double radius) {
    GraphChart c;
    c.name = "paraboloid_chart";
    c.base = CPoint::Zero(n);
    c.U = CMat::Identity(n, n);
    c.radius = radius;
    c.phi = [](const RVec& x) { return 0.5 * x.squaredNorm(); };
    c.grad = [](const RVec& x) -> std::optional<RVec> { return x; };
    c.regularity = Regularity::c1_dini;
    c.lipschitz = std::sqrt(2.0) * radius;
    return c;
}

// ---- text formats ----

GraphChart parse_chart(const std::string& text, const std::string& source) {
    KeyValues kv = parse_key_values(text, source);
    GraphChart c;
    c.name = kv.get_or("name", source);
    int n = static_cast<int>(kv.get_double("dimension"));
    if (n < 2 || n > kMaxDim) throw ConfigError(source + ": chart dimension out of range");
    c.base = kv.has("base") ? parse_point(kv.get("base")) : CPoint(CPoint::Zero(n));
    if (c.base.size() != n) throw ConfigError(source + ": base has the wrong dimension");
    c.U = CMat::Identity(n, n);
    if (kv.has("unitary")) {
        auto rows = split(kv.get("unitary"), ';');
        if (static_cast<int>(rows.size()) != n) throw ConfigError(source + ": unitary needs " + std::to_string(n) + " rows");
        for (int i = 0; i < n; ++i) {
            CPoint row = parse_point(rows[i]);
            if (row.size() != n) throw ConfigError(source + ": unitary row has the wrong length");
            c.U.row(i) = row.transpose();
        }
    }
    if ((c.U * c.U.adjoint() - CMat::Identity(n, n)).norm() > 1e-12) throw ConfigError(source + ": matrix is not unitary");
    c.radius = kv.get_double("radius");
    std::vector<std::string> vars;
    for (int k = 1; k <= 2 * n - 1; ++k) vars.push_back("x" + std::to_string(k));
    Expr g = Expr::parse(kv.get("graph"), vars);
    int m = 2 * n - 1;
    c.phi = [g, m](const RVec& x) {
        cplx a[2 * kMaxDim];
        for (int k = 0; k < m; ++k) a[k] = x[k];
        return g.eval(a).real();
    };
    c.grad = [g, m](const RVec& x) -> std::optional<RVec> {
        cplx a[2 * kMaxDim];
        for (int k = 0; k < m; ++k) a[k] = x[k];
        Expr::Jet j = g.eval_jet(a);
        if (!j.smooth) return std::nullopt;
        RVec out(m);
        for (int k = 0; k < m; ++k) out[k] = j.d[2 * k].real();
        return out;
    };
    std::string reg = kv.get_or("regularity", "lipschitz");
    if (reg == "lipschitz")
        c.regularity = Regularity::lipschitz;
    else if (reg == "c1_dini")
        c.regularity = Regularity::c1_dini;
    else
        throw ConfigError(source + ": unknown regularity '" + reg + "'");
    c.lipschitz = kv.get_double_or("lipschitz", 0.0);
    if (kv.has("modulus"))
        c.modulus = Modulus::from_expression(kv.get("modulus"), kv.get_double_or("modulus_end", 2.0 * std::sqrt(2.0) * c.radius));
    return c;
}

Modulus parse_modulus(const std::string& text, const std::string& source) {
    KeyValues kv = parse_key_values(text, source);
    if (kv.has("modulus")) return Modulus::from_expression(kv.get("modulus"), kv.get_double("domain_end"));
    if (kv.has("table")) {
        std::vector<double> r, w;
        for (const auto& row : split(kv.get("table"), ';')) {
            if (row.empty()) continue;
            std::istringstream in(row);
            double a, b;
            if (!(in >> a >> b)) throw ConfigError(source + ": bad table row '" + row + "'");
            r.push_back(a);
            w.push_back(b);
        }
        return Modulus::table(r, w, kv.get_or("name", source));
    }
    throw ConfigError(source + ": modulus needs 'modulus:' or 'table:'");
}

}  // namespace kobex
