#include "kobex/domain.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <random>

#include "kobex/error.hpp"

namespace kobex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using DVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;

double ray_tmax(const DomainSpec& D, const CPoint& z) {
    return std::isfinite(D.bounding_radius) ? z.norm() + D.bounding_radius : kInf;
}

// First t with z + t u outside D; u is a unit vector.
double ray_exit(const DomainSpec& D, const CPoint& z, const CPoint& u, double tmax) {
    auto outside = [&](double t) { return D.defining(z + t * u) >= 0.0; };
    double lo = 0.0, hi;
    if (!std::isfinite(tmax)) {
        hi = 1.0;
        while (!outside(hi)) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e8) throw DomainError(D.name + ": no exit along ray and no bounding radius");
        }
    } else if (D.convex) {
        hi = tmax;
    } else {
        // March first; a non-convex domain may re-enter after the first exit.
        const double step = tmax / 256.0;
        double t = step;
        while (t < tmax && !outside(t)) {
            lo = t;
            t += step;
        }
        hi = std::min(t, tmax);
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (outside(mid)) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Orthonormal basis of the complement of the unit vector u (Householder).
std::vector<DVec> tangent_basis(const DVec& u) {
    const int d = static_cast<int>(u.size());
    DVec e1 = DVec::Zero(d);
    e1[0] = 1.0;
    DVec h = (u[0] > 0.0) ? DVec(u + e1) : DVec(u - e1);
    double hn = h.squaredNorm();
    std::vector<DVec> out;
    for (int k = 1; k < d; ++k) {
        DVec ek = DVec::Zero(d);
        ek[k] = 1.0;
        out.push_back(ek - (2.0 * h.dot(ek) / hn) * h);
    }
    return out;
}

struct SearchState {
    DVec u;
    double f;
    double step;
};

template <class F>
SearchState compass(const F& T, DVec u, double f, double s, double s_min) {
    for (int it = 0; it < 20000 && s > s_min; ++it) {
        auto basis = tangent_basis(u);
        bool moved = false;
        for (const auto& b : basis) {
            for (double sg : {1.0, -1.0}) {
                DVec c = (u + sg * s * b).normalized();
                double fc = T(c);
                if (fc < f) {
                    u = c;
                    f = fc;
                    moved = true;
                    break;
                }
            }
            if (moved) break;
        }
        if (!moved) s *= 0.5;
    }
    return {u, f, s};
}

std::vector<DVec> sobol_directions(int d, int count) {
    std::vector<DVec> out;
    boost::random::sobol eng(static_cast<unsigned>(d));
    eng.discard(static_cast<boost::uintmax_t>(d));  // skip the origin
    const double scale = std::ldexp(1.0, -64);
    while (static_cast<int>(out.size()) < count) {
        DVec g(d);
        for (int k = 0; k < d; ++k) {
            double p = (static_cast<double>(eng()) + 0.5) * scale;
            p = std::clamp(p, 1e-12, 1.0 - 1e-12);
            g[k] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
        }
        if (g.norm() > 1e-12) out.push_back(g.normalized());
    }
    return out;
}

DistanceResult numeric_distance(const DomainSpec& D, const CPoint& z, const DistanceOptions& opt) {
    const int n = D.dim;
    const bool slice = D.reinhardt && opt.use_reinhardt;
    const int d = slice ? n : 2 * n;

    CPoint base = z;
    CPoint phase = CPoint::Ones(n);
    if (slice) {
        for (int k = 0; k < n; ++k) {
            double r = std::abs(z[k]);
            if (r > 0.0) phase[k] = z[k] / r;
            base[k] = r;
        }
    }
    const double tmax = ray_tmax(D, base);
    auto to_dir = [&](const DVec& u) {
        CPoint c(n);
        if (slice) {
            for (int k = 0; k < n; ++k) c[k] = u[k];
        } else {
            for (int k = 0; k < n; ++k) c[k] = cplx(u[2 * k], u[2 * k + 1]);
        }
        return c;
    };
    auto T = [&](const DVec& u) { return ray_exit(D, base, to_dir(u), tmax); };

    std::vector<DVec> starts;
    // Outward gradient of the nearest-to-active constraint, when it is available.
    {
        int best = -1;
        double gmax = -kInf;
        for (std::size_t i = 0; i < D.constraints.size(); ++i) {
            double g = D.constraints[i].value(base);
            if (g > gmax && D.constraints[i].gradient) {
                gmax = g;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) {
            auto gr = D.constraints[best].gradient(base);
            if (gr) {
                DVec g(d);
                for (int k = 0; k < n; ++k) {
                    if (slice) g[k] = (*gr)[k].real();
                    else {
                        g[2 * k] = (*gr)[k].real();
                        g[2 * k + 1] = (*gr)[k].imag();
                    }
                }
                if (g.norm() > 0.0 && g.allFinite()) starts.push_back(g.normalized());
            }
        }
    }
    for (const auto& s : sobol_directions(d, std::max(1, opt.starts - static_cast<int>(starts.size()))))
        starts.push_back(s);

    std::vector<SearchState> coarse;
    if (d == 1) {
        DVec u(1);
        u[0] = 1.0;
        double f1 = T(u);
        DVec m(1);
        m[0] = -1.0;
        double f2 = T(m);
        coarse.push_back(f2 < f1 ? SearchState{m, f2, 0.0} : SearchState{u, f1, 0.0});
    } else {
        for (const auto& s : starts) coarse.push_back(compass(T, s, T(s), 0.5, 1e-2));
    }
    std::vector<int> order(coarse.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return coarse[a].f < coarse[b].f; });

    SearchState best{coarse[order[0]].u, kInf, 0.0};
    int refined = 0;
    std::vector<DVec> seen;
    for (int idx : order) {
        if (refined == 2) break;
        const auto& c = coarse[idx];
        bool dup = false;
        for (const auto& s : seen)
            if ((s - c.u).norm() < 1e-3) dup = true;
        if (dup) continue;
        seen.push_back(c.u);
        SearchState r = (d == 1) ? c : compass(T, c.u, c.f, 1e-2, opt.final_step);
        if (r.f < best.f) best = r;
        ++refined;
    }

    DistanceResult res;
    res.value = best.f;
    double var = 0.0;
    if (d > 1) {
        double s = std::max(best.step, opt.final_step);
        for (const auto& b : tangent_basis(best.u))
            for (double sg : {1.0, -1.0}) var = std::max(var, std::fabs(T((best.u + sg * s * b).normalized()) - best.f));
    }
    res.error_estimate = var + 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + tmax);
    CPoint xi = base + best.f * to_dir(best.u);
    if (slice)
        for (int k = 0; k < n; ++k) xi[k] = xi[k].real() * phase[k];
    res.witness = xi;
    res.converged = std::isfinite(best.f);
    if (!res.converged) throw ConvergenceError(D.name + ": boundary projection did not converge");
    return res;
}

}  // namespace

double DomainSpec::defining(const CPoint& z) const {
    double m = -kInf;
    for (const auto& c : constraints) m = std::max(m, c.value(z));
    return m;
}

bool contains(const DomainSpec& D, const CPoint& z) {
    require_dim(z, D.dim, "contains");
    for (const auto& c : D.constraints)
        if (!(c.value(z) < 0.0)) return false;
    return true;
}

DistanceResult boundary_distance(const DomainSpec& D, const CPoint& z, const DistanceOptions& opt) {
    require_dim(z, D.dim, "boundary_distance");
    if (!all_finite(z)) throw DomainError("boundary_distance: non-finite point");
    double g = D.defining(z);
    if (g > 0.0) throw DomainError(D.name + ": point " + to_string(z) + " is outside the closure");
    if (g == 0.0) {
        DistanceResult r;
        r.witness = z;
        return r;
    }
    bool closed = opt.allow_closed_form && !D.constraints.empty();
    for (const auto& c : D.constraints)
        if (!c.nearest) closed = false;
    if (closed) {
        DistanceResult r;
        r.value = kInf;
        for (const auto& c : D.constraints) {
            BoundaryHit h = c.nearest(z);
            if (h.distance < r.value) {
                r.value = h.distance;
                r.witness = h.point;
            }
        }
        r.closed_form = true;
        r.error_estimate = 1e-13 * (1.0 + z.norm());
        return r;
    }
    return numeric_distance(D, z, opt);
}

CPoint nearest_boundary_point(const DomainSpec& D, const CPoint& z, const DistanceOptions& opt) {
    return boundary_distance(D, z, opt).witness;
}

double exit_radius(const DomainSpec& D, const CPoint& z, const CPoint& u) {
    require_dim(z, D.dim, "exit_radius");
    double un = u.norm();
    if (un == 0.0) throw DomainError("exit_radius: zero direction");
    return ray_exit(D, z, u / un, ray_tmax(D, z));
}

double directional_distance(const DomainSpec& D, const CPoint& z, const CPoint& v, const DirectionalOptions& opt) {
    require_dim(z, D.dim, "directional_distance");
    require_dim(v, D.dim, "directional_distance");
    double vn = v.norm();
    if (vn == 0.0) throw DomainError("directional_distance: v = 0");
    if (!contains(D, z)) throw DomainError(D.name + ": point " + to_string(z) + " is not interior");
    const CPoint vh = v / vn;
    const double tmax = ray_tmax(D, z);
    auto T = [&](double th) { return ray_exit(D, z, std::polar(1.0, th) * vh, tmax); };
    const int K = std::max(opt.phases, 3);
    const double dth = 2.0 * M_PI / K;
    double best = kInf;
    int kb = 0;
    for (int k = 0; k < K; ++k) {
        double t = T(k * dth);
        if (t < best) {
            best = t;
            kb = k;
        }
    }
    if (opt.refine) {
        auto r = boost::math::tools::brent_find_minima(T, (kb - 1) * dth, (kb + 1) * dth, 40);
        best = std::min(best, r.second);
    }
    return best;
}

CPoint inward_normal(const DomainSpec& D, const CPoint& xi, double active_tol) {
    require_dim(xi, D.dim, "inward_normal");
    std::vector<int> active;
    for (std::size_t i = 0; i < D.constraints.size(); ++i)
        if (std::fabs(D.constraints[i].value(xi)) <= active_tol) active.push_back(static_cast<int>(i));
    if (active.empty()) throw DomainError(D.name + ": " + to_string(xi) + " is not a boundary point");
    if (active.size() > 1)
        throw NonSmoothPointError(D.name + ": non-smooth boundary point " + to_string(xi) + " (" +
                                  std::to_string(active.size()) + " active constraints)");
    const Constraint& c = D.constraints[active[0]];
    CPoint g(D.dim);
    if (c.gradient) {
        auto gr = c.gradient(xi);
        if (!gr) throw NonSmoothPointError(D.name + ": non-smooth boundary point " + to_string(xi));
        g = *gr;
    } else {
        // Central differences, with a one-sided cross-check that rejects kinks.
        const double h = 1e-6 * (1.0 + xi.norm());
        const double g0 = c.value(xi);
        for (int k = 0; k < D.dim; ++k) {
            double part[2];
            for (int ri = 0; ri < 2; ++ri) {
                CPoint e = CPoint::Zero(D.dim);
                e[k] = ri == 0 ? cplx(h) : cplx(0.0, h);
                double fp = c.value(xi + e), fm = c.value(xi - e);
                double fwd = (fp - g0) / h, bwd = (g0 - fm) / h;
                if (std::fabs(fwd - bwd) > 1e-3 * (1.0 + std::fabs(fwd) + std::fabs(bwd)))
                    throw NonSmoothPointError(D.name + ": non-smooth boundary point " + to_string(xi));
                part[ri] = (fp - fm) / (2.0 * h);
            }
            g[k] = cplx(part[0], part[1]);
        }
    }
    double gn = g.norm();
    if (!(gn > 0.0) || !std::isfinite(gn))
        throw NonSmoothPointError(D.name + ": degenerate gradient at " + to_string(xi));
    return -g / gn;
}

bool cone_contains(const ConeSpec& c, const CPoint& z) {
    if (std::fabs(c.axis.norm() - 1.0) > 1e-12) throw ConfigError("cone axis must be a unit vector");
    if (!(c.theta > 0.0 && c.theta < M_PI)) throw ConfigError("cone aperture must lie in (0, pi)");
    require_dim(z, static_cast<int>(c.vertex.size()), "cone_contains");
    CPoint d = z - c.vertex;
    double dn = d.norm();
    return herm(d, c.axis).real() > std::cos(c.theta / 2.0) * dn && dn < c.r;
}

namespace {

struct ConePoint {
    double a;  // radius fraction
    double b;  // aperture fraction
    DVec e;    // unit vector in R^{2n-1}
};

std::vector<ConePoint> canonical_cone_points(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<ConePoint> pts;
    pts.reserve(count);
    const int m = 2 * n - 1;
    for (int i = 0; i < count; ++i) {
        ConePoint p;
        // Weighted toward the far rim and the cone wall, where violations show up first.
        p.a = std::sqrt(U(rng));
        p.b = std::pow(U(rng), 0.25);
        if (p.a >= 1.0) p.a = std::nextafter(1.0, 0.0);
        if (p.b >= 1.0) p.b = std::nextafter(1.0, 0.0);
        DVec e(m);
        do {
            for (int k = 0; k < m; ++k) e[k] = N(rng);
        } while (e.norm() < 1e-12);
        p.e = e.normalized();
        pts.push_back(p);
    }
    return pts;
}

}  // namespace

ConeCertificate certify_cone_condition(const DomainSpec& D, const DomainSpec& W, const std::vector<CPoint>& samples,
                                       const CertifyOptions& opt) {
    if (samples.empty()) throw ConfigError("certify_cone_condition: no samples");
    const int n = D.dim;
    ConeCertificate cert;
    struct Frame {
        CPoint xi;
        DVec axis;
        std::vector<DVec> perp;
    };
    std::vector<Frame> frames;
    double dmax = 0.0;
    for (const auto& w : samples) {
        if (!contains(D, w)) throw DomainError("certify_cone_condition: sample outside D");
        CPoint xi = nearest_boundary_point(D, w);
        CPoint v = w - xi;
        double dn = v.norm();
        v /= dn;
        dmax = std::max(dmax, dn);
        cert.witnesses.push_back({w, xi, v});
        DVec ax(2 * n);
        for (int k = 0; k < n; ++k) {
            ax[2 * k] = v[k].real();
            ax[2 * k + 1] = v[k].imag();
        }
        frames.push_back({xi, ax, tangent_basis(ax)});
    }
    const auto pts = canonical_cone_points(n, opt.mc_points, opt.seed);

    auto ok = [&](const Frame& f, double theta, double r) {
        const double half = theta / 2.0;
        for (const auto& p : pts) {
            double ang = p.b * half;
            DVec x = std::cos(ang) * f.axis;
            DVec perp = DVec::Zero(2 * n);
            for (int k = 0; k < 2 * n - 1; ++k) perp += p.e[k] * f.perp[k];
            x += std::sin(ang) * perp;
            x *= p.a * r;
            CPoint q = f.xi;
            for (int k = 0; k < n; ++k) q[k] += cplx(x[2 * k], x[2 * k + 1]);
            if (!contains(D, q) || !contains(W, q)) return false;
        }
        return true;
    };

    const double r0 = opt.radius_factor * dmax * (1.0 + 1e-6);
    std::vector<int> good;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (ok(frames[i], opt.theta_min, r0)) good.push_back(static_cast<int>(i));
        else cert.violating_samples.push_back(static_cast<int>(i));
    }
    cert.violation_count = static_cast<int>(cert.violating_samples.size());
    if (good.empty()) return cert;

    auto all_ok = [&](double theta, double r) {
        for (int i : good)
            if (!ok(frames[i], theta, r)) return false;
        return true;
    };
    double lo = opt.theta_min, hi = M_PI;
    for (int it = 0; it < opt.bisect_iters; ++it) {
        double mid = 0.5 * (lo + hi);
        if (all_ok(mid, r0)) lo = mid;
        else hi = mid;
    }
    cert.theta = lo;

    double rhi = opt.r_max > 0.0 ? opt.r_max
                                 : (std::isfinite(W.bounding_radius) ? 2.0 * W.bounding_radius : 16.0 * r0);
    double rlo = r0;
    if (all_ok(cert.theta, rhi)) {
        rlo = rhi;
    } else {
        for (int it = 0; it < opt.bisect_iters; ++it) {
            double mid = 0.5 * (rlo + rhi);
            if (all_ok(cert.theta, mid)) rlo = mid;
            else rhi = mid;
        }
    }
    cert.r = rlo;
    return cert;
}

std::vector<CPoint> sample_interior(const DomainSpec& D, int count, std::uint64_t seed) {
    if (!std::isfinite(D.bounding_radius)) throw ConfigError(D.name + ": sampling needs a bounding radius");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-D.bounding_radius, D.bounding_radius);
    std::vector<CPoint> out;
    long attempts = 0;
    const long cap = static_cast<long>(count) * 100000L + 1000L;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > cap) throw ConvergenceError(D.name + ": rejection sampling failed");
        CPoint z(D.dim);
        for (int k = 0; k < D.dim; ++k) z[k] = cplx(U(rng), U(rng));
        if (contains(D, z)) out.push_back(z);
    }
    return out;
}

}  // namespace kobex
