#include "kobex/psh.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>

#include "kobex/error.hpp"

namespace kobex {

namespace {

void require_smooth(const PshWitness& u, const CPoint& z) {
    if (u.smooth_locus && !u.smooth_locus(z))
        throw NonSmoothPointError(u.name + ": not smooth at " + to_string(z));
}

// Real second derivative of u along the unit vector e.
double second_derivative(const PshWitness& u, const CPoint& z, const CPoint& e, double h) {
    if (u.gradient) {
        auto dir = [&](const CPoint& p) {
            auto g = u.gradient(p);
            if (!g) throw NonSmoothPointError(u.name + ": gradient undefined near " + to_string(z));
            return herm(e, *g).real();
        };
        return (dir(z + h * e) - dir(z - h * e)) / (2.0 * h);
    }
    // values only: a larger step keeps roundoff below the truncation error
    double H = 10.0 * h;
    return (u.u(z + H * e) - 2.0 * u.u(z) + u.u(z - H * e)) / (H * H);
}

}  // namespace

double levi_form_fd(const PshWitness& u, const CPoint& z, const CPoint& v, double h) {
    require_smooth(u, z);
    double nv = v.norm();
    if (nv == 0.0) return 0.0;
    if (h <= 0.0) h = 1e-5 * (1.0 + z.norm());
    CPoint e = v / nv;
    CPoint ie = cplx(0.0, 1.0) * e;
    return 0.25 * (second_derivative(u, z, e, h) + second_derivative(u, z, ie, h)) * nv * nv;
}

LeviDetail levi_form_detail(const PshWitness& u, const CPoint& z, const CPoint& v) {
    require_smooth(u, z);
    LeviDetail d;
    d.h = 1e-5 * (1.0 + z.norm());
    d.fd = levi_form_fd(u, z, v, d.h);
    d.fd_half = levi_form_fd(u, z, v, 0.5 * d.h);
    if (u.hessian) {
        CMat H = u.hessian(z);
        cplx s = 0.0;
        for (int j = 0; j < v.size(); ++j)
            for (int k = 0; k < v.size(); ++k) s += H(j, k) * v[j] * std::conj(v[k]);
        d.analytic = s.real();
        d.value = s.real();
    } else {
        d.value = (4.0 * d.fd_half - d.fd) / 3.0;
    }
    return d;
}

double levi_form(const PshWitness& u, const CPoint& z, const CPoint& v) {
    require_smooth(u, z);
    if (u.hessian) {
        CMat H = u.hessian(z);
        cplx s = 0.0;
        for (int j = 0; j < v.size(); ++j)
            for (int k = 0; k < v.size(); ++k) s += H(j, k) * v[j] * std::conj(v[k]);
        return s.real();
    }
    double h = 1e-5 * (1.0 + z.norm());
    double a = levi_form_fd(u, z, v, h), b = levi_form_fd(u, z, v, 0.5 * h);
    return (4.0 * b - a) / 3.0;
}

PshReport check_psh(const PshWitness& u, const DomainSpec& D, const std::vector<CPoint>& samples, int random_dirs,
                    std::uint64_t seed) {
    PshReport rep;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    for (const auto& z : samples) {
        require_dim(z, D.dim, "check_psh sample");
        if (u.smooth_locus && !u.smooth_locus(z)) {
            ++rep.nonsmooth_skipped;
            continue;
        }
        if (!(u.u(z) < 0.0)) ++rep.positive_values;
        std::vector<CPoint> dirs;
        for (int k = 0; k < D.dim; ++k) dirs.push_back(unit(D.dim, k));
        for (int k = 0; k < random_dirs; ++k) {
            CPoint v(D.dim);
            for (int j = 0; j < D.dim; ++j) v[j] = cplx(N(rng), N(rng));
            dirs.push_back(v / v.norm());
        }
        for (const auto& v : dirs) {
            double L;
            try {
                L = levi_form(u, z, v);
            } catch (const NonSmoothPointError&) {
                ++rep.nonsmooth_skipped;
                break;
            }
            ++rep.evaluated;
            if (L < rep.threshold) ++rep.violations;
            if (L < rep.min_levi) {
                rep.min_levi = L;
                rep.min_at = z;
                rep.min_dir = v;
            }
        }
    }
    return rep;
}

int dyadic_band_count(const std::vector<HopfSample>& s) {
    std::vector<int> bands;
    for (const auto& x : s) bands.push_back(static_cast<int>(std::floor(std::log2(1.0 / x.delta))));
    std::sort(bands.begin(), bands.end());
    return static_cast<int>(std::unique(bands.begin(), bands.end()) - bands.begin());
}

HopfFit hopf_fit(const std::vector<HopfSample>& fit_set, std::optional<double> fixed_alpha,
                 const std::vector<HopfSample>& holdout) {
    for (const auto& s : fit_set) {
        if (!(s.phi < 0.0)) throw DomainError("hopf_fit: witness is not negative at a sample");
        if (!(s.delta > 0.0)) throw DomainError("hopf_fit: sample on the boundary");
    }
    HopfFit f;
    f.samples = static_cast<int>(fit_set.size());
    f.bands = dyadic_band_count(fit_set);
    if (f.bands < 4) throw FitError("hopf_fit: samples cover " + std::to_string(f.bands) + " dyadic bands, need 4");
    double mx = 0, my = 0;
    for (const auto& s : fit_set) {
        mx += std::log(s.delta);
        my += std::log(-s.phi);
    }
    mx /= f.samples;
    my /= f.samples;
    double sxy = 0, sxx = 0;
    for (const auto& s : fit_set) {
        double dx = std::log(s.delta) - mx;
        sxy += dx * (std::log(-s.phi) - my);
        sxx += dx * dx;
    }
    f.slope = sxx > 0 ? sxy / sxx : 1.0;
    if (fixed_alpha) {
        if (*fixed_alpha < 1.0) throw ConfigError("hopf_fit: alpha must be >= 1");
        f.alpha = *fixed_alpha;
        f.alpha_fixed = true;
    } else {
        f.alpha = std::max(1.0, f.slope);
        f.alpha_fixed = false;
    }
    f.C = std::numeric_limits<double>::infinity();
    for (const auto& s : fit_set) {
        double q = -s.phi / std::pow(s.delta, f.alpha);
        f.C = std::min(f.C, q);
        f.ratio_max = std::max(f.ratio_max, q);
    }
    // keeps the residual non-positive under rounding
    f.C *= 1.0 - 1e-14;
    const auto& eval = holdout.empty() ? fit_set : holdout;
    f.residual = -std::numeric_limits<double>::infinity();
    for (const auto& s : eval) f.residual = std::max(f.residual, s.phi + f.C * std::pow(s.delta, f.alpha));
    return f;
}

HopfFit hopf_fit(const PshWitness& phi, const DomainSpec& D, const std::vector<CPoint>& samples,
                 std::optional<double> fixed_alpha, const std::vector<CPoint>& holdout) {
    auto collect = [&](const std::vector<CPoint>& pts) {
        std::vector<HopfSample> out;
        for (const auto& z : pts) out.push_back({phi.u(z), boundary_distance(D, z).value});
        return out;
    };
    return hopf_fit(collect(samples), fixed_alpha, collect(holdout));
}

Step1Constants step1_constant_ex21() {
    // 6x^2 + 2y - 1 increases in both variables: the sup sits at the corner (1, 1/10)
    double C = 6.0 * 1.0 * 1.0 + 2.0 * 0.1 - 1.0;
    return {C, 9.0 / (5.0 * C)};
}

LagrangeResiduals lagrange_residuals(double x0, double y0, double X, double Y) {
    return {2.0 * X * X * X + (2.0 * y0 - 1.0) * X - x0, (X - x0) - 2.0 * X * (Y - y0)};
}

double lagrange_root(double x0, double y0) {
    auto phi = [&](double X) { return 2.0 * X * X * X + (2.0 * y0 - 1.0) * X - x0; };
    double a = std::max(x0, 1.0 / std::sqrt(6.0)), b = 1.0;
    double fa = phi(a), fb = phi(b);
    if (fa == 0.0) return a;
    if (!(fa < 0.0 && fb > 0.0)) throw DomainError("lagrange_root: no sign change on [x0, 1]");
    auto r = boost::math::tools::bisect(phi, a, b, boost::math::tools::eps_tolerance<double>(52));
    return 0.5 * (r.first + r.second);
}

double min_S(double x0, double y0) {
    double X = lagrange_root(x0, y0);
    return std::hypot(X - x0, 1.0 - X * X - y0);
}

double pushforward_tau(const FiberMap& F, const PshWitness& rho, const CPoint& w) {
    auto fib = F.fiber(w);
    if (fib.empty()) throw DomainError("pushforward_tau: empty fiber at " + to_string(w));
    double t = -std::numeric_limits<double>::infinity();
    for (const auto& z : fib) t = std::max(t, rho.u(z));
    return t;
}

double psi_bound(const Modulus& M, double s, double alpha_star, double C, double y) {
    if (!(y > 0.0)) throw DomainError("psi_bound: y must be positive");
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("psi_bound: s must lie in (0, 1]");
    if (!(alpha_star >= 1.0)) throw ConfigError("psi_bound: alpha_star must be >= 1");
    return C / y * M(C * std::pow(y, s / alpha_star));
}

DiniResult psi_tail(const Modulus& M, double s, double alpha_star, double C, double t) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("psi_tail: s must lie in (0, 1]");
    if (!(alpha_star >= 1.0)) throw ConfigError("psi_tail: alpha_star must be >= 1");
    return dini_integral(M.compose(C, s / alpha_star).scaled(C), t);
}

// ---- bundled ----

PshWitness ex21_rho(double Ct) {
    PshWitness u;
    u.name = "Ex21 rho";
    u.u = [Ct](const CPoint& p) { return Ct * (std::norm(p[0]) + std::abs(p[1]) - 1.0); };
    u.gradient = [Ct](const CPoint& p) -> std::optional<CPoint> {
        double b = std::abs(p[1]);
        if (b == 0.0) return std::nullopt;
        return CPoint(Ct * make_point({2.0 * p[0], p[1] / b}));
    };
    u.hessian = [Ct](const CPoint& p) {
        CMat H = CMat::Zero(2, 2);
        H(0, 0) = Ct;
        H(1, 1) = Ct / (4.0 * std::abs(p[1]));
        return H;
    };
    u.smooth_locus = [](const CPoint& p) { return p[1] != 0.0; };
    return u;
}

PshWitness ex21_u() {
    PshWitness u;
    u.name = "Ex21 u";
    u.u = [](const CPoint& p) { return std::abs(p[0]) + std::abs(p[1]) - 1.0; };
    u.gradient = [](const CPoint& p) -> std::optional<CPoint> {
        double a = std::abs(p[0]), b = std::abs(p[1]);
        if (a == 0.0 || b == 0.0) return std::nullopt;
        return make_point({p[0] / a, p[1] / b});
    };
    u.hessian = [](const CPoint& p) {
        CMat H = CMat::Zero(2, 2);
        H(0, 0) = 1.0 / (4.0 * std::abs(p[0]));
        H(1, 1) = 1.0 / (4.0 * std::abs(p[1]));
        return H;
    };
    u.smooth_locus = [](const CPoint& p) { return p[0] != 0.0 && p[1] != 0.0; };
    return u;
}

double ex22_levi_formula(const CPoint& z) {
    double s = std::abs(z[1]);
    if (s == 0.0) return 0.0;
    double s4 = s * s * s * s;
    return 4.0 * std::pow(s, -6.0) * std::exp(-1.0 / s4) * (1.0 / s4 - 1.0);
}

PshWitness ex22_rho() {
    PshWitness u;
    u.name = "Ex22 rho";
    // f(t) = exp(-1/t^2) composed with t = |w|^2
    u.u = [](const CPoint& p) {
        double t = std::norm(p[1]);
        return (t == 0.0 ? 0.0 : std::exp(-1.0 / (t * t))) - p[0].real();
    };
    u.gradient = [](const CPoint& p) -> std::optional<CPoint> {
        double t = std::norm(p[1]);
        double fp = t == 0.0 ? 0.0 : 2.0 / (t * t * t) * std::exp(-1.0 / (t * t));
        return make_point({-1.0, 2.0 * fp * p[1]});
    };
    u.hessian = [](const CPoint& p) {
        CMat H = CMat::Zero(2, 2);
        H(1, 1) = ex22_levi_formula(p);
        return H;
    };
    return u;
}

PshWitness ball_defining(int n) {
    PshWitness u;
    u.name = "|z|^2 - 1";
    u.u = [](const CPoint& p) { return p.squaredNorm() - 1.0; };
    u.gradient = [](const CPoint& p) -> std::optional<CPoint> { return CPoint(2.0 * p); };
    u.hessian = [n](const CPoint&) { return CMat(CMat::Identity(n, n)); };
    return u;
}

PshWitness scaled(const PshWitness& u, double c) {
    PshWitness s;
    s.name = std::to_string(c) + " * " + u.name;
    auto f = u.u;
    s.u = [f, c](const CPoint& p) { return c * f(p); };
    if (u.gradient) {
        auto g = u.gradient;
        s.gradient = [g, c](const CPoint& p) -> std::optional<CPoint> {
            auto r = g(p);
            if (!r) return std::nullopt;
            return CPoint(c * *r);
        };
    }
    if (u.hessian) {
        auto h = u.hessian;
        s.hessian = [h, c](const CPoint& p) { return CMat(c * h(p)); };
    }
    s.smooth_locus = u.smooth_locus;
    return s;
}

FiberMap ex21_map() {
    FiberMap F;
    F.name = "(z^2, w)";
    F.forward = [](const CPoint& p) { return make_point({p[0] * p[0], p[1]}); };
    F.fiber = [](const CPoint& w) {
        cplx r = std::sqrt(w[0]);
        if (r == 0.0) return std::vector<CPoint>{make_point({0.0, w[1]})};
        return std::vector<CPoint>{make_point({r, w[1]}), make_point({-r, w[1]})};
    };
    F.jacobian = [](const CPoint& p) {
        CMat J = CMat::Zero(2, 2);
        J(0, 0) = 2.0 * p[0];
        J(1, 1) = 1.0;
        return J;
    };
    return F;
}

FiberMap ex22_map() {
    FiberMap F;
    F.name = "(z, w^2)";
    F.forward = [](const CPoint& p) { return make_point({p[0], p[1] * p[1]}); };
    F.fiber = [](const CPoint& w) {
        cplx r = std::sqrt(w[1]);
        if (r == 0.0) return std::vector<CPoint>{make_point({w[0], 0.0})};
        return std::vector<CPoint>{make_point({w[0], r}), make_point({w[0], -r})};
    };
    F.jacobian = [](const CPoint& p) {
        CMat J = CMat::Zero(2, 2);
        J(0, 0) = 1.0;
        J(1, 1) = 2.0 * p[1];
        return J;
    };
    return F;
}

FiberMap identity_map(int n) {
    FiberMap F;
    F.name = "identity";
    F.forward = [](const CPoint& p) { return p; };
    F.fiber = [](const CPoint& w) { return std::vector<CPoint>{w}; };
    F.jacobian = [n](const CPoint&) { return CMat(CMat::Identity(n, n)); };
    return F;
}

}  // namespace kobex
