#include "kobex/bundled.hpp"

#include <boost/math/tools/minima.hpp>
#include <cmath>

#include "kobex/error.hpp"

namespace kobex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimizes f(u) on [lo, hi] by a uniform scan followed by Brent on the best cell.
// Callers pass offsets from a reference point so the tolerance is relative to the offset.
std::pair<double, double> scan_min(const std::function<double(double)>& f, double lo, double hi, int scan = 256) {
    double h = (hi - lo) / scan;
    double fb = kInf, ub = lo;
    int jb = 0;
    for (int j = 0; j <= scan; ++j) {
        double u = lo + j * h;
        double v = f(u);
        if (v < fb) {
            fb = v;
            ub = u;
            jb = j;
        }
    }
    double a = lo + std::max(0, jb - 1) * h, b = lo + std::min(scan, jb + 1) * h;
    if (b > a) {
        auto r = boost::math::tools::brent_find_minima(f, a, b, 48);
        if (r.second < fb) return {r.first, r.second};
    }
    return {ub, fb};
}

cplx phase_of(cplx z) {
    double r = std::abs(z);
    return r > 0.0 ? z / r : cplx(1.0);
}

Constraint ball_constraint(const CPoint& c, double R) {
    Constraint k;
    k.label = "ball";
    k.value = [c, R](const CPoint& z) { return (z - c).squaredNorm() - R * R; };
    k.gradient = [c](const CPoint& z) -> std::optional<CPoint> { return CPoint(2.0 * (z - c)); };
    k.nearest = [c, R](const CPoint& z) {
        CPoint d = z - c;
        double dn = d.norm();
        CPoint dir = dn > 0.0 ? CPoint(d / dn) : unit(static_cast<int>(z.size()), 0);
        return BoundaryHit{R - dn, c + R * dir};
    };
    return k;
}

}  // namespace

Constraint radial_graph_constraint(int n, int j, int k, std::function<double(double)> phi,
                                   std::function<double(double)> dphi, std::string label) {
    Constraint c;
    c.label = std::move(label);
    c.value = [j, k, phi](const CPoint& z) { return phi(std::abs(z[k])) - z[j].real(); };
    c.gradient = [n, j, k, dphi](const CPoint& z) -> std::optional<CPoint> {
        CPoint g = CPoint::Zero(n);
        g[j] = -1.0;
        double s = std::abs(z[k]);
        g[k] = s > 0.0 ? dphi(s) * z[k] / s : cplx(0.0);
        return g;
    };
    c.nearest = [j, k, phi](const CPoint& z) {
        // The nearest point keeps Im z_j, arg w_k and the other coordinates: a curve problem in (Re z_j, |w_k|).
        const double a0 = z[j].real(), s0 = std::abs(z[k]);
        const double d0 = a0 - phi(s0);
        auto f = [&](double u) {
            double s = s0 + u;
            double da = a0 - phi(s);
            return da * da + u * u;
        };
        double lo = std::max(-s0, -d0), hi = d0;
        auto [u, f2] = scan_min(f, lo, hi);
        if (d0 * d0 <= f2) {
            u = 0.0;
            f2 = d0 * d0;
        }
        CPoint p = z;
        double s = s0 + u;
        p[j] = cplx(phi(s), z[j].imag());
        p[k] = s * phase_of(z[k]);
        return BoundaryHit{std::sqrt(f2), p};
    };
    return c;
}

DomainSpec make_ball(int n, double radius) { return make_ball_at(CPoint::Zero(n), radius); }

DomainSpec make_ball_at(const CPoint& center, double radius) {
    DomainSpec D;
    D.dim = static_cast<int>(center.size());
    D.name = D.dim == 2 && center.norm() == 0.0 && radius == 1.0 ? "ball" : "ball_" + std::to_string(D.dim);
    D.constraints.push_back(ball_constraint(center, radius));
    D.convex = true;
    D.reinhardt = center.norm() == 0.0;
    D.bounding_radius = center.norm() + radius;
    return D;
}

DomainSpec make_polydisc(const std::vector<double>& radii) {
    DomainSpec D;
    D.dim = static_cast<int>(radii.size());
    D.name = "polydisc";
    double rb = 0.0;
    for (int k = 0; k < D.dim; ++k) {
        double r = radii[k];
        rb += r * r;
        Constraint c;
        c.label = "|z" + std::to_string(k + 1) + "| < " + std::to_string(r);
        c.value = [k, r](const CPoint& z) { return std::norm(z[k]) - r * r; };
        c.gradient = [k, n = D.dim](const CPoint& z) -> std::optional<CPoint> {
            CPoint g = CPoint::Zero(n);
            g[k] = 2.0 * z[k];
            return g;
        };
        c.nearest = [k, r](const CPoint& z) {
            CPoint p = z;
            p[k] = r * phase_of(z[k]);
            return BoundaryHit{r - std::abs(z[k]), p};
        };
        D.constraints.push_back(c);
    }
    D.convex = true;
    D.reinhardt = true;
    D.bounding_radius = std::sqrt(rb);
    return D;
}

DomainSpec make_halfspace_ball(int n, double radius) {
    DomainSpec D;
    D.dim = n;
    D.name = "halfspace_ball";
    Constraint h;
    h.label = "Re z1 < 0";
    h.value = [](const CPoint& z) { return z[0].real(); };
    h.gradient = [n](const CPoint&) -> std::optional<CPoint> { return unit(n, 0); };
    h.nearest = [](const CPoint& z) {
        CPoint p = z;
        p[0] = cplx(0.0, z[0].imag());
        return BoundaryHit{-z[0].real(), p};
    };
    D.constraints.push_back(h);
    D.constraints.push_back(ball_constraint(CPoint::Zero(n), radius));
    D.convex = true;
    D.bounding_radius = radius;
    return D;
}

DomainSpec make_ex21_D() {
    DomainSpec D;
    D.name = "Ex21_D";
    D.dim = 2;
    Constraint c;
    c.label = "|z|^2 + |w| - 1";
    c.value = [](const CPoint& p) { return std::norm(p[0]) + std::abs(p[1]) - 1.0; };
    c.gradient = [](const CPoint& p) -> std::optional<CPoint> {
        double s = std::abs(p[1]);
        if (s == 0.0) return std::nullopt;
        return make_point({2.0 * p[0], p[1] / s});
    };
    D.constraints.push_back(c);
    D.convex = true;
    D.reinhardt = true;
    D.bounding_radius = 1.0;
    return D;
}

DomainSpec make_ex21_Omega() {
    DomainSpec D;
    D.name = "Ex21_Omega";
    D.dim = 2;
    Constraint c;
    c.label = "|z| + |w| - 1";
    c.value = [](const CPoint& p) { return std::abs(p[0]) + std::abs(p[1]) - 1.0; };
    c.gradient = [](const CPoint& p) -> std::optional<CPoint> {
        double a = std::abs(p[0]), b = std::abs(p[1]);
        if (a == 0.0 || b == 0.0) return std::nullopt;
        return make_point({p[0] / a, p[1] / b});
    };
    D.constraints.push_back(c);
    D.convex = true;
    D.reinhardt = true;
    D.bounding_radius = 1.0;
    return D;
}

DomainSpec make_ex22_D() {
    DomainSpec D;
    D.name = "Ex22_D";
    D.dim = 2;
    auto phi = [](double s) { return s == 0.0 ? 0.0 : std::exp(-1.0 / (s * s * s * s)); };
    auto dphi = [](double s) {
        if (s == 0.0) return 0.0;
        double s4 = s * s * s * s;
        return 4.0 / (s4 * s) * std::exp(-1.0 / s4);
    };
    D.constraints.push_back(radial_graph_constraint(2, 0, 1, phi, dphi, "exp(-1/|w|^4) - Re z"));
    Constraint q;
    q.label = "|z|^2 + |w|^4 - 1";
    q.value = [](const CPoint& p) {
        double s2 = std::norm(p[1]);
        return std::norm(p[0]) + s2 * s2 - 1.0;
    };
    q.gradient = [](const CPoint& p) -> std::optional<CPoint> {
        return make_point({2.0 * p[0], 4.0 * std::norm(p[1]) * p[1]});
    };
    q.nearest = [](const CPoint& p) {
        const double r0 = std::abs(p[0]), s0 = std::abs(p[1]);
        auto f = [&](double s) {
            double r = std::sqrt(std::max(0.0, 1.0 - s * s * s * s));
            return (r - r0) * (r - r0) + (s - s0) * (s - s0);
        };
        auto [s, f2] = scan_min(f, 0.0, 1.0, 512);
        double r = std::sqrt(std::max(0.0, 1.0 - s * s * s * s));
        return BoundaryHit{std::sqrt(f2), make_point({r * phase_of(p[0]), s * phase_of(p[1])})};
    };
    D.constraints.push_back(q);
    D.convex = false;  // exp(-1/s^4) has an inflection at s^4 = 4/5
    D.bounding_radius = std::sqrt(2.0);
    return D;
}

namespace {

DomainSpec ex22_omega_with_radius(double r, const std::string& name) {
    DomainSpec D;
    D.name = name;
    D.dim = 2;
    auto phi = [](double s) { return s == 0.0 ? 0.0 : std::exp(-1.0 / (s * s)); };
    auto dphi = [](double s) { return s == 0.0 ? 0.0 : 2.0 / (s * s * s) * std::exp(-1.0 / (s * s)); };
    D.constraints.push_back(radial_graph_constraint(2, 0, 1, phi, dphi, "exp(-1/|w|^2) - Re z"));
    D.constraints.push_back(ball_constraint(CPoint::Zero(2), r));
    D.convex = r * r < 2.0 / 3.0;
    D.bounding_radius = r;
    return D;
}

}  // namespace

DomainSpec make_ex22_Omega() { return ex22_omega_with_radius(1.0, "Ex22_Omega"); }

DomainSpec make_ex22_Omega_local(double r) { return ex22_omega_with_radius(r, "Ex22_Omega_local"); }

DomainSpec make_ltc_model_local(double a, double r) {
    DomainSpec D;
    D.name = "LTC_model_local";
    D.dim = 2;
    auto phi = [a](double s) { return s == 0.0 ? 0.0 : std::exp(-std::pow(s, -a)); };
    auto dphi = [a](double s) { return s == 0.0 ? 0.0 : a * std::pow(s, -a - 1.0) * std::exp(-std::pow(s, -a)); };
    D.constraints.push_back(radial_graph_constraint(2, 0, 1, phi, dphi, "exp(-|w|^-a) - Re z"));
    D.constraints.push_back(ball_constraint(CPoint::Zero(2), r));
    D.convex = r < std::pow(a / (a + 1.0), 1.0 / a);
    D.bounding_radius = r;
    return D;
}

DomainSpec bundled_domain(const std::string& name) {
    if (name == "ball") return make_ball(2);
    if (name == "polydisc") return make_polydisc({1.0, 1.0});
    if (name == "halfspace_ball") return make_halfspace_ball(2, 1.0);
    if (name == "Ex21_D") return make_ex21_D();
    if (name == "Ex21_Omega") return make_ex21_Omega();
    if (name == "Ex22_D") return make_ex22_D();
    if (name == "Ex22_Omega") return make_ex22_Omega();
    if (name == "Ex22_Omega_local") return make_ex22_Omega_local();
    if (name == "LTC_model_local") return make_ltc_model_local();
    throw ConfigError("unknown bundled domain '" + name + "'");
}

std::vector<std::string> bundled_domain_names() {
    return {"ball", "polydisc", "halfspace_ball", "Ex21_D", "Ex21_Omega",
            "Ex22_D", "Ex22_Omega", "Ex22_Omega_local", "LTC_model_local"};
}

}  // namespace kobex
