#include "kobex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kobex/error.hpp"

namespace kobex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MetricBound make_bound(double value, Side side, const char* method, const CPoint& at, const CPoint& dir) {
    MetricBound b;
    b.value = value;
    b.side = side;
    b.method = method;
    b.at = at;
    b.dir = dir;
    return b;
}

double interior_distance(const DomainSpec& D, const CPoint& z, const char* what) {
    require_dim(z, D.dim, what);
    if (!contains(D, z)) throw DomainError(std::string(what) + ": point not interior " + to_string(z));
    return boundary_distance(D, z).value;
}

int band_of(double delta) { return static_cast<int>(std::floor(std::log2(1.0 / delta))); }

}  // namespace

const char* side_name(Side s) { return s == Side::lower ? "lower" : "upper"; }

double kob_metric_ball_exact(const CPoint& z, const CPoint& v) {
    require_dim(v, static_cast<int>(z.size()), "kob_metric_ball_exact");
    double r2 = z.squaredNorm();
    if (!(r2 < 1.0)) throw DomainError("kob_metric_ball_exact: point outside the ball");
    double q = 1.0 - r2;
    return std::sqrt(q * v.squaredNorm() + std::norm(herm(v, z))) / q;
}

double kob_distance_ball_exact(const CPoint& z1, const CPoint& z2) {
    require_dim(z2, static_cast<int>(z1.size()), "kob_distance_ball_exact");
    double a = z1.squaredNorm(), b = z2.squaredNorm();
    if (!(a < 1.0) || !(b < 1.0)) throw DomainError("kob_distance_ball_exact: point outside the ball");
    double s2 = 1.0 - (1.0 - a) * (1.0 - b) / std::norm(1.0 - herm(z1, z2));
    return std::atanh(std::sqrt(std::clamp(s2, 0.0, 1.0)));
}

std::pair<MetricBound, MetricBound> graham_bounds_from(double delta_zv, const CPoint& z, const CPoint& v) {
    if (!(delta_zv > 0.0)) throw DomainError("graham_bounds: directional distance must be positive");
    double nv = v.norm();
    MetricBound lo = make_bound(nv / (2.0 * delta_zv), Side::lower, "graham_lower", z, v);
    MetricBound hi = make_bound(nv / delta_zv, Side::upper, "graham_upper", z, v);
    lo.constants = hi.constants = {{"delta_zv", delta_zv}};
    return {lo, hi};
}

std::pair<MetricBound, MetricBound> graham_bounds(const DomainSpec& D, const CPoint& z, const CPoint& v,
                                                  const DirectionalOptions& opt) {
    if (!D.convex) throw ConfigError("graham_bounds: " + D.name + " is not declared convex");
    require_dim(z, D.dim, "graham_bounds");
    require_dim(v, D.dim, "graham_bounds");
    if (v.norm() == 0.0) throw DomainError("graham_bounds: v = 0");
    if (!contains(D, z)) throw DomainError("graham_bounds: point not interior");
    return graham_bounds_from(directional_distance(D, z, v, opt), z, v);
}

MetricBound sibony_lower_bound(const PshWitness& u, const CPoint& z, const CPoint& v, double c, double alpha) {
    if (!(c > 0.0) || !(alpha > 0.0)) throw ConfigError("sibony_lower_bound: c and alpha must be positive");
    double uz = u.u(z);
    if (!(uz < 0.0)) throw DomainError("sibony_lower_bound: u(z) >= 0");
    MetricBound b = make_bound(std::sqrt(c / alpha) * v.norm() / std::sqrt(-uz), Side::lower, "sibony", z, v);
    b.constants = {{"c", c}, {"alpha", alpha}, {"u", uz}};
    return b;
}

MetricBound inscribed_ball_upper_bound(const DomainSpec& D, const CPoint& z, const CPoint& v) {
    require_dim(v, D.dim, "inscribed_ball_upper_bound");
    double d = interior_distance(D, z, "inscribed_ball_upper_bound");
    MetricBound b = make_bound(v.norm() / d, Side::upper, "inscribed_ball", z, v);
    b.constants = {{"delta", d}};
    return b;
}

// ---- log-type convexity ----

std::vector<LtcSample> ltc_samples(const DomainSpec& D, const std::vector<std::pair<CPoint, CPoint>>& samples,
                                   const DirectionalOptions& opt) {
    std::vector<LtcSample> out;
    out.reserve(samples.size());
    for (const auto& [z, v] : samples) {
        double d = interior_distance(D, z, "ltc sample");
        out.push_back({d, directional_distance(D, z, v, opt)});
    }
    return out;
}

LtcFit ltc_fit(const std::vector<LtcSample>& samples) {
    if (samples.empty()) throw FitError("ltc_fit: no samples");
    int inner = std::numeric_limits<int>::min();
    std::map<int, int> count;
    for (const auto& s : samples) {
        if (!(s.delta > 0.0 && s.delta < 1.0)) throw DomainError("ltc_fit: sample with delta outside (0, 1)");
        if (!(s.delta_v > 0.0)) throw DomainError("ltc_fit: sample with zero directional distance");
        int b = band_of(s.delta);
        inner = std::max(inner, b);
        ++count[b];
    }
    if (count.size() < 2) throw FitError("ltc_fit: samples cover a single dyadic band");
    const int steps = static_cast<int>(std::lround((kLtcNuMax - kLtcNuMin) / kLtcNuStep));
    for (int k = steps; k >= 0; --k) {
        double nu = kLtcNuMin + k * kLtcNuStep;
        double inner_max = 0.0, outer_max = 0.0;
        for (const auto& s : samples) {
            double p = s.delta_v * std::pow(-std::log(s.delta), 1.0 + nu);
            double& slot = band_of(s.delta) == inner ? inner_max : outer_max;
            slot = std::max(slot, p);
        }
        // the envelope must not keep growing toward the boundary
        if (inner_max > outer_max) continue;
        LtcFit f;
        f.nu = nu;
        f.C = outer_max;
        f.sample_count = static_cast<int>(samples.size());
        f.c = 1.0 / (2.0 * f.C);
        f.bands = static_cast<int>(count.size());
        f.max_violation = ltc_violation(f, samples);
        return f;
    }
    throw FitError("not log-type convex at sampled resolution");
}

LtcFit ltc_fit(const DomainSpec& D, const std::vector<std::pair<CPoint, CPoint>>& samples,
               const DirectionalOptions& opt) {
    if (!D.convex) throw ConfigError("ltc_fit: " + D.name + " is not declared convex");
    return ltc_fit(ltc_samples(D, samples, opt));
}

double ltc_violation(const LtcFit& fit, const std::vector<LtcSample>& samples) {
    double worst = -kInf;
    for (const auto& s : samples)
        worst = std::max(worst, s.delta_v * std::pow(-std::log(s.delta), 1.0 + fit.nu) - fit.C);
    return worst;
}

MetricBound ltc_metric_lower_bound(const LtcFit& fit, const CPoint& w, const CPoint& v, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("ltc_metric_lower_bound: delta must lie in (0, 1)");
    MetricBound b = make_bound(fit.c * v.norm() * std::pow(std::log(1.0 / delta), 1.0 + fit.nu), Side::lower,
                               "ltc_lower", w, v);
    b.constants = {{"c", fit.c}, {"nu", fit.nu}, {"delta", delta}};
    return b;
}

MetricBound convex_distance_lower_bound(double dw, double dw2) {
    if (!(dw > 0.0) || !(dw2 > 0.0)) throw DomainError("convex_distance_lower_bound: distances must be positive");
    MetricBound b = make_bound(0.5 * std::abs(std::log(dw / dw2)), Side::lower, "cvx_dist_lower", CPoint(), CPoint());
    b.constants = {{"delta_w", dw}, {"delta_w2", dw2}};
    return b;
}

MetricBound fr_distance_upper_bound(double d1, double d2, double sep, double C) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw DomainError("fr_distance_upper_bound: distances must be positive");
    if (!(sep >= 0.0)) throw DomainError("fr_distance_upper_bound: negative separation");
    double v = 0.5 * std::log(1.0 / d1) + 0.5 * std::log(1.0 / d2) - 0.5 * std::log(1.0 / (d1 + sep)) -
               0.5 * std::log(1.0 / (d2 + sep)) + C;
    MetricBound b = make_bound(v, Side::upper, "fr_dist_upper", CPoint(), CPoint());
    b.constants = {{"delta1", d1}, {"delta2", d2}, {"sep", sep}, {"C", C}};
    return b;
}

// Raw value; it can be negative, where 0 is the trivial improvement.
MetricBound pair_lower_bound(double d1, double d2, double K) {
    if (!(d1 > 0.0 && d1 <= 1.0) || !(d2 > 0.0 && d2 <= 1.0))
        throw DomainError("pair_lower_bound: distances must lie in (0, 1]");
    MetricBound b = make_bound(0.5 * std::log(1.0 / d1) + 0.5 * std::log(1.0 / d2) - K, Side::lower, "pair_lower",
                               CPoint(), CPoint());
    b.constants = {{"delta1", d1}, {"delta2", d2}, {"K", K}};
    return b;
}

// ---- path estimator ----

double path_distance_upper(const DomainSpec& D, const CPoint& z1, const CPoint& z2, const PathOptions& opt) {
    require_dim(z1, D.dim, "path_distance_upper");
    require_dim(z2, D.dim, "path_distance_upper");
    const int N = opt.segments;
    std::vector<CPoint> P(N + 1);
    for (int i = 0; i <= N; ++i) P[i] = z1 + (static_cast<double>(i) / N) * (z2 - z1);
    auto seg = [&](const CPoint& a, const CPoint& b) {
        CPoint mid = 0.5 * (a + b);
        if (!contains(D, mid)) return kInf;
        double d = boundary_distance(D, mid).value;
        return d > 0.0 ? (b - a).norm() / d : kInf;
    };
    std::vector<double> L(N);
    for (int i = 0; i < N; ++i) L[i] = seg(P[i], P[i + 1]);
    double step = 0.5 * (z2 - z1).norm() / N;
    for (int s = 0; s < opt.sweeps && step > 0.0; ++s, step *= 0.5) {
        for (int i = 1; i < N; ++i) {
            for (int c = 0; c < 2 * D.dim; ++c) {
                cplx e = c % 2 == 0 ? cplx(step, 0.0) : cplx(0.0, step);
                for (double sign : {1.0, -1.0}) {
                    CPoint Q = P[i];
                    Q[c / 2] += sign * e;
                    double a = seg(P[i - 1], Q), b = seg(Q, P[i + 1]);
                    if (a + b < L[i - 1] + L[i]) {
                        P[i] = Q;
                        L[i - 1] = a;
                        L[i] = b;
                        break;
                    }
                }
            }
        }
    }
    double total = 0.0;
    for (double l : L) total += l;
    return total;
}

DistanceEstimator path_estimator(const DomainSpec& D, const PathOptions& opt) {
    return [D, opt](const CPoint& a, const CPoint& b) { return path_distance_upper(D, a, b, opt); };
}

PairConstant fit_pair_constant(const DomainSpec& D, const CPoint& o, const std::vector<CPoint>& Vq,
                               const std::vector<CPoint>& Vxi, const DistanceEstimator& est) {
    if (Vq.empty() || Vxi.empty()) throw FitError("fit_pair_constant: empty sample cloud");
    double gap = kInf;
    for (const auto& a : Vq)
        for (const auto& b : Vxi) gap = std::min(gap, (a - b).norm());
    if (!(gap > 0.0)) throw DomainError("fit_pair_constant: sample clouds overlap");
    auto checked = [&](const CPoint& a, const CPoint& b) {
        double d = est(a, b);
        if (!std::isfinite(d)) throw ConvergenceError("fit_pair_constant: estimator failed on a pair");
        return d;
    };
    std::vector<double> dq, dx;
    for (const auto& a : Vq) dq.push_back(checked(a, o));
    for (const auto& b : Vxi) dx.push_back(checked(o, b));
    PairConstant pc;
    pc.K_prime = -kInf;
    for (std::size_t i = 0; i < Vq.size(); ++i)
        for (std::size_t j = 0; j < Vxi.size(); ++j) {
            pc.K_prime = std::max(pc.K_prime, dq[i] + dx[j] - checked(Vq[i], Vxi[j]));
            ++pc.pairs;
        }
    pc.delta_o = interior_distance(D, o, "fit_pair_constant base point");
    pc.K = std::max(0.0, pc.K_prime - std::log(pc.delta_o));
    return pc;
}

double goldilocks_M(const DomainSpec& D, double r, const MetricLowerSource& lower,
                    const std::vector<std::pair<CPoint, CPoint>>& samples) {
    double M = 0.0;
    for (const auto& [w, v] : samples) {
        double d = interior_distance(D, w, "goldilocks_M");
        if (d > r) continue;
        double L = lower(w, v);
        if (!(L > 0.0)) throw DomainError("goldilocks_M: lower bound vanishes at " + to_string(w));
        M = std::max(M, v.norm() / L);
    }
    return M;
}

Modulus ltc_goldilocks_rate(const LtcFit& fit, double r_end) {
    if (!(r_end > 0.0 && r_end < 1.0)) throw DomainError("ltc_goldilocks_rate: r_end must lie in (0, 1)");
    double c = fit.c, nu = fit.nu;
    return Modulus::closed_form([c, nu](double r) { return std::pow(std::log(1.0 / r), -(1.0 + nu)) / c; }, r_end,
                                "(log 1/r)^-(1+nu)/c");
}

double localization_gap(double K_local, double K_global) { return K_local - K_global; }

double fit_fr_constant(const DomainSpec& D, const std::vector<std::pair<CPoint, CPoint>>& pairs,
                       const DistanceEstimator& est) {
    double C = -kInf;
    for (const auto& [a, b] : pairs) {
        double d1 = interior_distance(D, a, "fit_fr_constant");
        double d2 = interior_distance(D, b, "fit_fr_constant");
        double base = fr_distance_upper_bound(d1, d2, (a - b).norm(), 0.0).value;
        C = std::max(C, est(a, b) - base);
    }
    return C;
}

}  // namespace kobex
