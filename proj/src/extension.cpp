#include "kobex/extension.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kobex/bundled.hpp"
#include "kobex/error.hpp"
#include "kobex/metrics.hpp"

namespace kobex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const CPoint& z) {
    double m = 0.0;
    for (int k = 0; k < z.size(); ++k) m = std::max(m, std::abs(z[k]));
    return m;
}

CPoint normal_step(int n, double t) {
    CPoint e = CPoint::Zero(n);
    e[n - 1] = cplx(0.0, t);
    return e;
}

}  // namespace

CPoint ChartMap::value(const CPoint& Z) const { return map.forward(chart.from_chart(Z)); }

CPoint ChartMap::dZn(const CPoint& Z) const {
    if (!map.jacobian) return dZn_cauchy(Z);
    CMat J = map.jacobian(chart.from_chart(Z));
    CMat Ui = chart.U.adjoint();
    return J * Ui.col(chart.dim() - 1);
}

CPoint ChartMap::dZn_cauchy(const CPoint& Z) const {
    double Y = vertical_height(chart, Z);
    if (!(Y > 0.0)) throw DomainError("dZn_cauchy: point is not above the graph: " + to_string(Z));
    const int N = 32;
    double r = std::min(1e-3, 0.5 * Y);
    const int n = chart.dim();
    CPoint acc = CPoint::Zero(static_cast<int>(value(Z).size()));
    for (int k = 0; k < N; ++k) {
        cplx e = std::polar(1.0, 2.0 * std::numbers::pi * k / N);
        CPoint W = Z;
        W[n - 1] += r * e;
        acc += value(W) / (r * e);
    }
    return acc / static_cast<double>(N);
}

ChartMap chart_map(const GraphChart& chart, const FiberMap& F) {
    if (!F.forward) throw ConfigError("chart_map: map has no forward evaluation");
    return {chart, F};
}

double cauchy_riemann_gap(const ChartMap& m, const CPoint& Z) {
    const int n = m.chart.dim();
    double h = 1e-5 * (1.0 + Z.norm());
    CPoint d = m.dZn(Z);
    CPoint er = CPoint::Zero(n), ei = CPoint::Zero(n);
    er[n - 1] = h;
    ei[n - 1] = cplx(0.0, h);
    CPoint dx = (m.value(Z + er) - m.value(Z - er)) / (2.0 * h);
    CPoint dy = (m.value(Z + ei) - m.value(Z - ei)) / cplx(0.0, 2.0 * h);
    double scale = 1.0 + max_abs(d);
    return std::max(max_abs(dx - d), max_abs(dy - d)) / scale;
}

PsiSpec PsiSpec::power(double coef, double e) {
    if (!(coef >= 0.0)) throw ConfigError("PsiSpec::power: negative coefficient");
    if (!(e >= 0.0 && e < 1.0)) throw ConfigError("PsiSpec::power: exponent must lie in [0, 1)");
    PsiSpec p;
    p.label = std::to_string(coef) + " y^-" + std::to_string(e);
    p.psi = [coef, e](double y) { return coef * std::pow(y, -e); };
    p.tail = [coef, e](double t) { return t <= 0.0 ? 0.0 : coef * std::pow(t, 1.0 - e) / (1.0 - e); };
    return p;
}

PsiSpec PsiSpec::from_modulus(const Modulus& M, double s, double alpha_star, double C) {
    PsiSpec p;
    p.label = "(C/y) M(C y^(s/a*)), M = " + M.label();
    p.psi = [M, s, alpha_star, C](double y) { return psi_bound(M, s, alpha_star, C, y); };
    p.tail = [M, s, alpha_star, C](double t) {
        if (t <= 0.0) return 0.0;
        auto r = psi_tail(M, s, alpha_star, C, t);
        return r.convergent ? r.value : kInf;
    };
    return p;
}

double ex21_sibony_constant() {
    double beta = std::sqrt(0.25 / kDefaultSibonyAlpha) / std::pow(2.0, 0.25);
    return std::max(1.0 / beta, 2.0 * std::sqrt(2.0));
}

PsiSpec ex21_psi(const GraphChart& chart) {
    double C_hopf = 1.0 / (step1_constant_ex21().C_tilde * std::sqrt(2.0));
    double C_chart = std::sqrt(1.0 + chart.lipschitz * chart.lipschitz);
    double C = std::max(C_hopf, C_chart);
    PsiSpec p = PsiSpec::power(ex21_sibony_constant() * std::pow(C, 1.5), 0.5);
    p.label = "Ex21 psi, C = " + std::to_string(C);
    return p;
}

namespace {

struct SimpsonState {
    const std::function<CPoint(double)>& f;
    double err = 0.0;
};

CPoint simpson(double a, double b, const CPoint& fa, const CPoint& fm, const CPoint& fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

CPoint adaptive(SimpsonState& st, double a, double b, const CPoint& fa, const CPoint& fm, const CPoint& fb,
                const CPoint& whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    CPoint flm = st.f(0.5 * (a + m)), frm = st.f(0.5 * (m + b));
    CPoint left = simpson(a, m, fa, flm, fm), right = simpson(m, b, fm, frm, fb);
    CPoint both = left + right;
    double e = max_abs(both - whole) / 15.0;
    if (depth <= 0 || e <= tol) {
        st.err += e;
        return both + (both - whole) / 15.0;
    }
    return adaptive(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

LineIntegral normal_line_integral(const ChartMap& m, const CPoint& xi, double t, double t_prime, const PsiSpec& psi) {
    const int n = m.chart.dim();
    require_dim(xi, n, "normal_line_integral");
    if (!(t > 0.0 && t < t_prime)) throw DomainError("normal_line_integral: need 0 < t < t'");
    if (!m.chart.in_box(xi + normal_step(n, t_prime)))
        throw DomainError("normal_line_integral: segment leaves the chart box at " + to_string(xi));
    if (!(vertical_height(m.chart, xi + normal_step(n, t)) > 0.0))
        throw DomainError("normal_line_integral: segment is not inside D at " + to_string(xi));
    std::function<CPoint(double)> f = [&](double x) { return cplx(0.0, 1.0) * m.dZn(xi + normal_step(n, x)); };
    SimpsonState st{f};
    LineIntegral out;
    out.value = CPoint::Zero(static_cast<int>(m.value(xi + normal_step(n, t_prime)).size()));
    // dyadic panels [t' 2^-k-1, t' 2^-k] keep the integrand's blow-up near t resolved
    double hi = t_prime;
    while (hi > t) {
        double lo = std::max(t, 0.5 * hi);
        CPoint fa = f(lo), fm = f(0.5 * (lo + hi)), fb = f(hi);
        double tol = 1e-13 * (hi - lo) * (1.0 + std::max(max_abs(fm), psi.psi ? psi.psi(lo) : 0.0));
        out.value += adaptive(st, lo, hi, fa, fm, fb, simpson(lo, hi, fa, fm, fb), tol, 40);
        ++out.panels;
        hi = lo;
    }
    out.error = st.err;
    return out;
}

ExtensionResult boundary_value(const ChartMap& m, const CPoint& xi, double t_prime, double tol, const PsiSpec& psi) {
    const int n = m.chart.dim();
    double Y = vertical_height(m.chart, xi);
    if (std::abs(Y) > 1e-10) throw DomainError("boundary_value: point is not on the graph: " + to_string(xi));
    if (!(tol > 0.0)) throw ConfigError("boundary_value: tolerance must be positive");
    ExtensionResult r;
    r.xi = xi;
    r.t_prime = t_prime;
    r.tail_bound = psi.tail(t_prime);
    r.lifted = m.value(xi + normal_step(n, t_prime));
    int k = 0;
    double tk = t_prime;
    while (!(psi.tail(tk) < tol)) {
        if (++k > 60) throw ConvergenceError("boundary_value: psi tail stays above tolerance after 60 halvings");
        tk *= 0.5;
    }
    r.t_final = tk;
    r.truncation = psi.tail(tk);
    r.value = r.lifted;
    if (k > 0) {
        auto I = normal_line_integral(m, xi, tk, t_prime, psi);
        r.value -= I.value;
        r.quad_error = I.error;
    }
    return r;
}

std::vector<CPoint> chart_boundary_grid(const GraphChart& chart, int nx, int ny, double half) {
    if (nx < 2 || ny < 2) throw ConfigError("chart_boundary_grid: need at least 2 nodes per axis");
    const int n = chart.dim();
    std::vector<CPoint> out;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            RVec x = RVec::Zero(2 * n - 1);
            if (n > 1) x[0] = -half + 2.0 * half * i / (nx - 1);
            x[2 * n - 2] = -half + 2.0 * half * j / (ny - 1);
            out.push_back(chart.boundary_point(x));
        }
    return out;
}

double grid_margin(const GraphChart& chart, const std::vector<CPoint>& Zs) {
    const int n = chart.dim();
    double gap = kInf;
    for (const auto& Z : Zs) {
        double reach = std::max({Z.head(n - 1).norm(), std::abs(Z[n - 1].real()), std::abs(Z[n - 1].imag())});
        gap = std::min(gap, chart.radius - reach);
    }
    if (!(gap > 0.0)) throw DomainError("grid_margin: points reach the edge of the chart box");
    return 0.5 * gap;
}

std::vector<ExtensionResult> extend_map(const ChartMap& m, const std::vector<CPoint>& Zs, double tol,
                                        const PsiSpec& psi) {
    double tp = grid_margin(m.chart, Zs);
    std::vector<ExtensionResult> out;
    out.reserve(Zs.size());
    for (const auto& Z : Zs) {
        if (vertical_height(m.chart, Z) > 1e-10) {
            ExtensionResult r;
            r.xi = Z;
            r.value = m.value(Z);
            r.lifted = r.value;
            r.interior = true;
            out.push_back(r);
        } else {
            out.push_back(boundary_value(m, Z, tp, tol, psi));
        }
    }
    return out;
}

ContinuityReport continuity_modulus(const std::vector<ExtensionResult>& results, double tail_scale) {
    ContinuityReport rep;
    std::vector<std::pair<double, double>> dev;  // (|xi1 - xi2|, |F1 - F2|)
    for (std::size_t i = 0; i < results.size(); ++i)
        for (std::size_t j = i + 1; j < results.size(); ++j) {
            const auto& a = results[i];
            const auto& b = results[j];
            double slack = tail_scale * (a.tail_bound + b.tail_bound) + a.truncation + b.truncation + a.quad_error +
                           b.quad_error;
            double excess = -kInf;
            for (int k = 0; k < a.value.size(); ++k) {
                double obs = std::abs(a.value[k] - b.value[k]);
                double bound = slack + std::abs(a.lifted[k] - b.lifted[k]);
                excess = std::max(excess, obs - bound);
            }
            ++rep.pairs;
            if (excess > 1e-12) ++rep.violations;
            rep.worst_excess = rep.pairs == 1 ? excess : std::max(rep.worst_excess, excess);
            dev.emplace_back((a.xi - b.xi).norm(), max_abs(a.value - b.value));
        }
    if (dev.empty()) return rep;
    std::sort(dev.begin(), dev.end());
    double rmin = std::max(dev.front().first, 1e-300), rmax = dev.back().first;
    const int bins = 48;
    std::vector<double> r, w;
    std::size_t idx = 0;
    double run = 0.0;
    for (int b = 0; b < bins; ++b) {
        double rb = rmin * std::pow(rmax / rmin, static_cast<double>(b) / (bins - 1));
        if (b == bins - 1) rb = rmax;
        while (idx < dev.size() && dev[idx].first <= rb) run = std::max(run, dev[idx++].second);
        if (!r.empty() && rb <= r.back()) continue;
        r.push_back(rb);
        w.push_back(run);
    }
    rep.modulus_small = w.front();
    rep.modulus_large = w.back();
    rep.modulus = Modulus::table(r, w, "empirical continuity modulus");
    return rep;
}

CPoint project_to_boundary(const GraphChart& chart, const CPoint& Z) {
    if (!chart.in_box(Z)) throw DomainError("project_to_boundary: point outside the chart box: " + to_string(Z));
    const int n = chart.dim();
    CPoint P = Z;
    P[n - 1] = cplx(Z[n - 1].real(), chart.phi(chart.graph_coords(Z)));
    return P;
}

std::vector<CPoint> cluster_set_sample(const std::function<CPoint(const CPoint&)>& F, const CPoint& p,
                                       const std::vector<std::vector<CPoint>>& sequences, double radius) {
    std::vector<CPoint> limits;
    for (const auto& seq : sequences) {
        if (seq.size() < 2) throw ConfigError("cluster_set_sample: sequences need at least two points");
        if (!((seq.back() - p).norm() < (seq.front() - p).norm()))
            throw DomainError("cluster_set_sample: sequence does not approach " + to_string(p));
        CPoint w = F(seq.back());
        if (!all_finite(w) || w.norm() > 1e6)
            throw ConvergenceError("cluster_set_sample: divergent image sequence");
        limits.push_back(w);
    }
    // single linkage by union-find
    std::vector<int> parent(limits.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < limits.size(); ++i)
        for (std::size_t j = i + 1; j < limits.size(); ++j)
            if ((limits[i] - limits[j]).norm() < radius) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
    std::vector<CPoint> out;
    std::vector<int> roots;
    for (std::size_t i = 0; i < limits.size(); ++i) {
        int r = find(static_cast<int>(i));
        if (std::find(roots.begin(), roots.end(), r) != roots.end()) continue;
        roots.push_back(r);
        CPoint c = CPoint::Zero(limits[i].size());
        int count = 0;
        for (std::size_t j = 0; j < limits.size(); ++j)
            if (find(static_cast<int>(j)) == r) {
                c += limits[j];
                ++count;
            }
        out.push_back(c / static_cast<double>(count));
    }
    return out;
}

DichotomyReport dichotomy_report(const DomainSpec& D, const DomainSpec& Omega, const DichotomySequences& s,
                                 DichotomyMode mode, double tol) {
    const std::size_t N = s.z1.size();
    if (s.z2.size() != N || s.w1.size() != N || s.w2.size() != N)
        throw ConfigError("dichotomy_report: sequences have different lengths");
    if (mode == DichotomyMode::pair && !(s.C0 > 0.0)) throw ConfigError("dichotomy_report: C0 must be positive");
    DichotomyReport rep;
    rep.mode = mode;
    for (std::size_t i = 0; i < N; ++i) {
        DichotomyRow row;
        row.nu = static_cast<int>(i);
        row.dD1 = boundary_distance(D, s.z1[i]).value;
        row.dD2 = boundary_distance(D, s.z2[i]).value;
        row.dO1 = boundary_distance(Omega, s.w1[i]).value;
        row.dO2 = boundary_distance(Omega, s.w2[i]).value;
        row.sep = (s.z1[i] - s.z2[i]).norm();
        row.U = fr_distance_upper_bound(row.dD1, row.dD2, row.sep, s.C).value;
        row.l = 0.5 * std::log(1.0 / (row.dD1 + row.sep)) + 0.5 * std::log(1.0 / (row.dD2 + row.sep));
        row.bridge = std::min(row.dD1 - s.C0 * row.dO1, row.dD2 - s.C0 * row.dO2);
        if (mode == DichotomyMode::pair) {
            row.L = pair_lower_bound(row.dO1, row.dO2, s.K).value;
            row.slack = s.K + s.C - std::log(s.C0) - row.l;
        } else {
            row.L = convex_distance_lower_bound(row.dO1, row.dO2).value;
            row.slack = std::numeric_limits<double>::quiet_NaN();
        }
        row.consistency = row.U - row.L;
        row.consistent = row.consistency >= -tol && (mode == DichotomyMode::convex || row.slack >= -tol);
        if (!row.consistent && rep.first_failure < 0) rep.first_failure = row.nu;
        if (i > 0 && row.l < rep.rows.back().l - tol) rep.l_monotone = false;
        rep.rows.push_back(row);
    }
    if (N > 1) rep.degenerate_flat = std::abs(rep.rows.back().l - rep.rows.front().l) <= tol;
    return rep;
}

DichotomySequences ball_dichotomy_sequences(int terms) {
    if (terms < 2) throw ConfigError("ball_dichotomy_sequences: need at least 2 terms");
    DichotomySequences s;
    std::vector<std::pair<CPoint, CPoint>> pairs;
    for (int nu = 0; nu < terms; ++nu) {
        double a = 0.5 * std::ldexp(1.0, -nu);
        s.z1.push_back(make_point({1.0 - a, 0.0}));
        s.z2.push_back(make_point({(1.0 - a) * std::polar(1.0, a), 0.0}));
        s.w1.push_back(make_point({1.0 - a, 0.0}));
        s.w2.push_back(make_point({0.0, 1.0 - a}));
        pairs.emplace_back(s.z1.back(), s.z2.back());
    }
    DomainSpec B = make_ball(2, 1.0);
    DistanceEstimator exact = [](const CPoint& a, const CPoint& b) { return kob_distance_ball_exact(a, b); };
    s.C = fit_fr_constant(B, pairs, exact);
    s.K = fit_pair_constant(B, CPoint::Zero(2), s.w1, s.w2, exact).K;
    s.C0 = 1.0;
    return s;
}

DichotomySequences ex22_normal_sequences(int terms) {
    if (terms < 2) throw ConfigError("ex22_normal_sequences: need at least 2 terms");
    DichotomySequences s;
    std::vector<std::pair<CPoint, CPoint>> pairs;
    FiberMap F = ex22_map();
    for (int nu = 0; nu < terms; ++nu) {
        double a = 0.25 * std::ldexp(1.0, -nu);
        s.z1.push_back(make_point({a, 0.0}));
        s.z2.push_back(make_point({2.0 * a, 0.0}));
        s.w1.push_back(F.forward(s.z1.back()));
        s.w2.push_back(F.forward(s.z2.back()));
        pairs.emplace_back(s.z1.back(), s.z2.back());
    }
    DomainSpec D = make_ex22_D();
    // straight segments along the normal are already short
    s.C = fit_fr_constant(D, pairs, path_estimator(D, {128, 0}));
    s.C0 = 1.0;
    return s;
}

}  // namespace kobex
