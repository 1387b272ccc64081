// Acceptance run: one PASS/FAIL line per criterion, thresholds fixed below.
#include <boost/math/tools/minima.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "kobex/bundled.hpp"
#include "kobex/domain_io.hpp"
#include "kobex/error.hpp"
#include "kobex/extension.hpp"
#include "kobex/metrics.hpp"
#include "kobex/psh.hpp"
#include "kobex/regularity.hpp"
#include "kobex/scenario.hpp"

using namespace kobex;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSandwichRelTol = 1e-6;
constexpr double kSandwichSeconds = 10.0;
constexpr double kStep1Seconds = 5.0;
constexpr double kOmegaDistTol = 1e-6;
constexpr double kLeviBound = 0.25;
constexpr double kLeviTol = 1e-8;
constexpr double kLeviFormulaRelTol = 1e-4;
constexpr int kTypeOrders = 20;
constexpr double kExtensionTol = 1e-6;
constexpr double kExtensionSeconds = 60.0;
constexpr double kDiniSqrtTol = 1e-6;
constexpr double kDiniLinearTol = 1e-9;
constexpr double kEmbeddingSeconds = 30.0;
constexpr double kSandwichCSlack = 0.05;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

CPoint random_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    CPoint v(n);
    for (int k = 0; k < n; ++k) v[k] = cplx(N(rng), N(rng));
    return v / v.norm();
}

Outcome graham_sandwich() {
    auto t0 = std::chrono::steady_clock::now();
    DomainSpec B = make_ball(2, 1.0);
    std::mt19937_64 rng(101);
    int bad = 0;
    double worst = 0.0;
    for (const auto& z : sample_interior(B, 100, rng())) {
        CPoint v = random_unit(2, rng);
        double d = directional_distance(B, z, v, directional_oracle());
        double k = kob_metric_ball_exact(z, v);
        double lo = v.norm() / (2.0 * d), hi = v.norm() / d;
        worst = std::max({worst, lo / k - 1.0, k / hi - 1.0});
        if (k < lo * (1.0 - kSandwichRelTol) || k > hi * (1.0 + kSandwichRelTol)) ++bad;
    }
    double s = seconds_since(t0);
    return {bad == 0 && s < kSandwichSeconds,
            std::to_string(bad) + " violations, worst relative excess " + fmt("%.2e", worst) + ", " + fmt("%.2f s", s)};
}

// distance from (x0, y0) to the parabola Y = 1 - X^2 by direct minimization over X
double min_S_direct(double x0, double y0) {
    auto S2 = [&](double X) { return (X - x0) * (X - x0) + (1.0 - X * X - y0) * (1.0 - X * X - y0); };
    auto r = boost::math::tools::brent_find_minima(S2, 0.0, 1.0, 52);
    return std::sqrt(std::min({r.second, S2(0.0), S2(1.0)}));
}

Outcome step1_grid() {
    auto t0 = std::chrono::steady_clock::now();
    const double Ct = 9.0 / 26.0;
    int bad = 0, checked = 0;
    double route_gap = 0.0, margin = kInf;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) {
            double x0 = 0.9 + 0.1 * (i + 0.5) / 100.0, y0 = 0.1 * j / 100.0;
            if (x0 * x0 + y0 >= 1.0) continue;
            double S = min_S(x0, y0);
            route_gap = std::max(route_gap, std::abs(S - min_S_direct(x0, y0)));
            double m = S - Ct * std::abs(x0 * x0 + y0 - 1.0);
            margin = std::min(margin, m);
            if (m < 0.0) ++bad;
            ++checked;
        }
    double s = seconds_since(t0);
    bool ok = bad == 0 && route_gap < 1e-9 && s < kStep1Seconds;
    return {ok, std::to_string(checked) + " points, " + std::to_string(bad) + " violations, min margin " +
                    fmt("%.3e", margin) + ", cubic vs direct " + fmt("%.1e", route_gap) + ", " + fmt("%.2f s", s)};
}

Outcome omega_distance() {
    DomainSpec O = make_ex21_Omega();
    DistanceOptions numeric;
    numeric.allow_closed_form = false;
    double worst = 0.0;
    for (const auto& z : sample_interior(O, 1000, 303)) {
        double exact = (1.0 - std::abs(z[0]) - std::abs(z[1])) / std::sqrt(2.0);
        worst = std::max(worst, std::abs(boundary_distance(O, z, numeric).value - exact));
    }
    return {worst <= kOmegaDistTol, "max abs error " + fmt("%.2e", worst)};
}

Outcome levi_lower() {
    PshWitness u = ex21_u();
    std::mt19937_64 rng(404);
    double worst = kInf;
    int n = 0;
    for (const auto& z : sample_interior(make_ex21_Omega(), 1000, rng())) {
        if (z[1] == 0.0 || z[0] == 0.0) continue;
        CPoint v = random_unit(2, rng);
        worst = std::min(worst, levi_form(u, z, v) - kLeviBound);
        ++n;
    }
    return {worst >= -kLeviTol, std::to_string(n) + " points, min (Levi - |v|^2/4) " + fmt("%.3e", worst)};
}

Outcome example22() {
    // (a) finite differences of rho against the closed form, |w| in [0.3, 0.95]
    PshWitness fd = ex22_rho();
    fd.hessian = nullptr;
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> R(0.3, 0.95), T(0.0, 2.0 * M_PI), X(0.0, 0.4);
    double rel = 0.0;
    for (int i = 0; i < 1000; ++i) {
        CPoint z = make_point({cplx(X(rng), X(rng) - 0.2), std::polar(R(rng), T(rng))});
        double f = ex22_levi_formula(z);
        rel = std::max(rel, std::abs(levi_form(fd, z, make_point({0.0, 1.0})) - f) / f);
    }
    // (b)
    DomainSpec D = make_ex22_D();
    auto psh = check_psh(ex22_rho(), D, sample_interior(D, 300, rng()), 4, rng());
    // (c)
    std::vector<int> orders;
    for (int k = 1; k <= kTypeOrders; ++k) orders.push_back(k);
    auto type = infinite_type_check([](double x) { return x == 0.0 ? 0.0 : std::exp(-1.0 / (x * x)); }, orders);
    // (d) samples near the infinite type point 0, spread over distance bands
    std::uniform_real_distribution<double> W(0.0, 0.4), Y(-0.1, 0.1), E(1.0, 5.0);
    std::vector<CPoint> local;
    while (local.size() < 400) {
        cplx w = std::polar(W(rng), T(rng));
        double s = std::abs(w);
        double g = s == 0.0 ? 0.0 : std::exp(-1.0 / std::pow(s, 4));
        CPoint z = make_point({cplx(g + std::pow(10.0, -E(rng)), Y(rng)), w});
        if (contains(D, z)) local.push_back(z);
    }
    auto hopf = hopf_fit(ex22_rho(), D, local, 1.0);
    bool ok = rel <= kLeviFormulaRelTol && psh.violations == 0 && type.pass && hopf.residual <= 0.0;
    return {ok, "(a) rel " + fmt("%.2e", rel) + ", (b) " + std::to_string(psh.violations) +
                    " psh violations, (c) orders 1-20 " + (type.pass ? "pass" : "fail") + ", (d) C " +
                    fmt("%.4f", hopf.C) + " residual " + fmt("%.2e", hopf.residual)};
}

Outcome extension() {
    auto t0 = std::chrono::steady_clock::now();
    GraphChart ch = make_ex21_chart(0.15);
    ChartMap m = chart_map(ch, ex21_map());
    PsiSpec psi = ex21_psi(ch);
    auto grid = chart_boundary_grid(ch, 20, 20, 0.05);
    double tp = grid_margin(ch, grid);
    auto res = extend_map(m, grid, kExtensionTol, psi);
    double err = 0.0, shift = 0.0;
    int cert = 0;
    for (const auto& r : res) {
        CPoint direct = m.value(r.xi);
        auto h = boundary_value(m, r.xi, 0.5 * tp, kExtensionTol, psi);
        for (int k = 0; k < direct.size(); ++k) {
            err = std::max(err, std::abs(r.value[k] - direct[k]));
            shift = std::max(shift, std::abs(r.value[k] - h.value[k]));
            // |F~(xi) - F~(xi + t' e)| <= int_0^t' psi
            if (std::abs(r.value[k] - r.lifted[k]) > r.tail_bound + r.truncation + r.quad_error) ++cert;
        }
    }
    double s = seconds_since(t0);
    bool ok = err <= kExtensionTol && shift <= 2.0 * kExtensionTol && cert == 0 && s < kExtensionSeconds;
    return {ok, std::to_string(res.size()) + " points, max error " + fmt("%.2e", err) + ", t' shift " +
                    fmt("%.2e", shift) + ", " + std::to_string(cert) + " certificate failures, " + fmt("%.2f s", s)};
}

Outcome dini() {
    auto sq = dini_integral(Modulus::from_expression("sqrt(r)", 1.0), 1.0);
    auto lin = dini_integral(Modulus::from_expression("r", 1.0), 1.0);
    auto lg = dini_integral(Modulus::from_expression("1/(1+abs(log(r)))", 1.0), 1.0);
    struct Comp {
        const char* w;
        double kappa, m, eps;
    };
    int comp_fail = 0;
    for (const auto& c : {Comp{"sqrt(r)", 2.0, 0.5, 0.25}, Comp{"r", 3.0, 1.0, 0.25},
                          Comp{"1/(1+abs(log(r)))^2", 2.0, 0.5, 0.1}}) {
        Modulus w = Modulus::from_expression(c.w, 1.0);
        Modulus cw = w.compose(c.kappa, c.m);
        if (!dini_integral(w, c.eps).convergent || !dini_integral(cw, std::min(c.eps, 0.5 * cw.domain_end())).convergent)
            ++comp_fail;
    }
    double e1 = std::abs(sq.value - 2.0), e2 = std::abs(lin.value - 1.0);
    bool ok = sq.convergent && e1 <= kDiniSqrtTol && lin.convergent && e2 <= kDiniLinearTol && !lg.convergent &&
              comp_fail == 0;
    return {ok, "sqrt err " + fmt("%.1e", e1) + ", linear err " + fmt("%.1e", e2) + ", log " +
                    (lg.convergent ? "convergent" : "divergent") + ", " + std::to_string(comp_fail) +
                    " composite failures"};
}

Outcome embedding() {
    auto t0 = std::chrono::steady_clock::now();
    const double radius = 0.5;
    GraphChart ch = make_ex22_chart(radius);
    DomainSpec D = make_ex22_D();
    std::mt19937_64 rng(808);
    std::vector<double> rg;
    for (int k = 0; k <= 40; ++k) rg.push_back(radius * std::pow(10.0, -4.0 + 4.0 * k / 40.0));
    Modulus w = estimate_modulus(ch, sample_chart_pairs(ch, 4000, radius, rng()), rg);
    auto p = select_embedding_params(w, 1.0, 0.25);
    auto xis = sample_chart_boundary(ch, 100, 0.2, rng());
    auto rep = verify_embedding(D, ch, xis, p, sample_model_domain(p, 100, rng()));
    auto wide = p;
    wide.eps *= 2.0;
    auto ctl = verify_embedding(D, ch, xis, wide, sample_model_domain(wide, 100, rng()));
    double s = seconds_since(t0);
    bool ok = rep.checked == 10000 && rep.violations == 0 && ctl.violations >= 1 && s < kEmbeddingSeconds;
    return {ok, std::to_string(rep.checked) + " pairs, " + std::to_string(rep.violations) +
                    " violations, doubled eps gives " + std::to_string(ctl.violations) + ", " + fmt("%.2f s", s)};
}

Outcome dichotomy() {
    auto s = ball_dichotomy_sequences(20);
    DomainSpec B = make_ball(2, 1.0);
    auto r = dichotomy_report(B, B, s, DichotomyMode::pair);
    bool grows = r.l_monotone && r.rows.back().l > r.rows.front().l;
    return {grows && r.first_failure >= 0, "l from " + fmt("%.3f", r.rows.front().l) + " to " +
                                               fmt("%.3f", r.rows.back().l) + ", consistency fails from nu = " +
                                               std::to_string(r.first_failure)};
}

Outcome lipschitz_sandwich() {
    struct Case {
        const char* name;
        GraphChart chart;
        DomainSpec D;
    };
    std::vector<Case> cases = {
        {"ex21", make_ex21_chart(0.15), make_ex21_D()},
        {"ex22", make_ex22_chart(0.5), make_ex22_D()},
        {"flat", make_flat_chart(2, 0.5),
         parse_domain("name: flat_ball\ndimension: 2\nconstraint: -Im(z2)\n"
                      "constraint: |z1|^2 + |z2|^2 - 1\nconvex: true\nbounding_radius: 1\n")},
        {"paraboloid", make_paraboloid_chart(2, 0.5),
         parse_domain("name: paraboloid_ball\ndimension: 2\nconstraint: (|z1|^2 + Re(z2)^2)/2 - Im(z2)\n"
                      "constraint: |z1|^2 + |z2|^2 - 1\nconvex: true\nbounding_radius: 1\n")},
    };
    bool ok = true;
    std::string detail;
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> E(0.0, 3.0);
    for (const auto& c : cases) {
        std::vector<CPoint> zs;
        for (const auto& xi : sample_chart_boundary(c.chart, 300, 0.25 * c.chart.radius, rng())) {
            CPoint Z = c.chart.to_chart(xi);
            Z[1] += cplx(0.0, 0.25 * c.chart.radius * std::pow(10.0, -E(rng)));
            CPoint z = c.chart.from_chart(Z);
            if (contains(c.D, z)) zs.push_back(z);
        }
        auto r = verify_lipschitz_sandwich(c.D, c.chart, zs);
        double cap = std::sqrt(1.0 + c.chart.lipschitz * c.chart.lipschitz) + kSandwichCSlack;
        ok = ok && r.max_first_violation <= 0.0 && r.C >= 1.0 && r.C <= cap;
        detail += std::string(detail.empty() ? "" : ", ") + c.name + " C " + fmt("%.4f", r.C) + " (cap " +
                  fmt("%.4f", cap) + ")";
    }
    return {ok, detail};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {"1 convex metric sandwich on the ball", graham_sandwich},
        {"2 Lagrange grid bound for |z|^2 + |w| < 1", step1_grid},
        {"3 distance closed form on |z| + |w| < 1", omega_distance},
        {"4 Levi lower bound of |z| + |w| - 1", levi_lower},
        {"5 flat boundary point: Levi formula, psh, infinite type, Hopf", example22},
        {"6 extension oracle for (z^2, w)", extension},
        {"7 Dini suite", dini},
        {"8 model domain embedding", embedding},
        {"9 distance dichotomy on the ball", dichotomy},
        {"10 chart distance sandwich", lipschitz_sandwich},
    };
    int failed = 0;
    for (const auto& c : all) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("raised: ") + e.what()};
        }
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria pass\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
