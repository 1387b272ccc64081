#include "kobex/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "kobex/bundled.hpp"
#include "kobex/domain_io.hpp"
#include "kobex/error.hpp"
#include "kobex/expression.hpp"
#include "kobex/extension.hpp"
#include "kobex/metrics.hpp"
#include "kobex/psh.hpp"
#include "kobex/regularity.hpp"

namespace kobex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Ctx {
    std::uint64_t seed = 1;
    std::optional<double> tol;
};

// Stage arguments with defaults; effective values are copied into the record.
class Args {
public:
    Args(const Stage& s, Record& rec, const Ctx& ctx) : s_(s), rec_(rec), ctx_(ctx) {}

    std::string str(const std::string& key, const std::string& def) {
        used_.insert(key);
        auto it = s_.args.find(key);
        std::string v = it == s_.args.end() ? def : it->second;
        rec_.params.emplace_back(key, v);
        return v;
    }
    double num(const std::string& key, double def) {
        auto it = s_.args.find(key);
        double v = it == s_.args.end() ? def : parse_double(it->second, s_.label + "." + key);
        used_.insert(key);
        rec_.params.emplace_back(key, fmt(v));
        return v;
    }
    int integer(const std::string& key, int def) {
        double v = num(key, def);
        if (v != std::floor(v) || v < 0) throw ConfigError(s_.label + "." + key + " must be a non-negative integer");
        return static_cast<int>(v);
    }
    // run override > scenario/stage value > default
    double tol(double def) {
        used_.insert("tol");
        double v = def;
        auto it = s_.args.find("tol");
        if (it != s_.args.end()) v = parse_double(it->second, s_.label + ".tol");
        if (ctx_.tol) v = *ctx_.tol;
        rec_.params.emplace_back("tol", fmt(v));
        return v;
    }
    void finish() const {
        for (const auto& [k, v] : s_.args)
            if (!used_.count(k)) throw ConfigError(s_.label + ": unknown argument '" + k + "' for " + s_.op);
    }

private:
    static std::string fmt(double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }
    const Stage& s_;
    Record& rec_;
    const Ctx& ctx_;
    std::set<std::string> used_;
};

using OpFn = void (*)(Args&, const Ctx&, Record&);

struct OpInfo {
    const char* name;
    const char* anchor;
    const char* summary;
    OpFn fn;
};

CPoint random_direction(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    CPoint v(n);
    for (int k = 0; k < n; ++k) v[k] = cplx(N(rng), N(rng));
    return v / v.norm();
}

// ---- ops ----

void op_graham_sandwich(Args& a, const Ctx& ctx, Record& rec) {
    std::string dom = a.str("domain", "ball");
    int count = a.integer("count", 100);
    int phases = a.integer("phases", 4096);
    double tol = a.tol(1e-6);
    if (dom != "ball") throw ConfigError("graham_sandwich: the exact oracle is available for the unit ball only");
    DomainSpec D = make_ball(2, 1.0);
    std::mt19937_64 rng(ctx.seed);
    auto zs = sample_interior(D, count, rng());
    int violations = 0;
    double lo_ratio = kInf, hi_ratio = 0.0;
    Table t{"sandwich", {"lower", "exact", "upper"}, {}};
    for (const auto& z : zs) {
        CPoint v = random_direction(2, rng);
        double dzv = directional_distance(D, z, v, {phases, false});
        auto [lo, hi] = graham_bounds_from(dzv, z, v);
        double k = kob_metric_ball_exact(z, v);
        if (k < lo.value * (1.0 - tol) || k > hi.value * (1.0 + tol)) ++violations;
        lo_ratio = std::min(lo_ratio, k / lo.value);
        hi_ratio = std::max(hi_ratio, k / hi.value);
        t.rows.push_back({lo.value, k, hi.value});
    }
    rec.value("samples", count);
    rec.value("min_exact_over_lower", lo_ratio);
    rec.value("max_exact_over_upper", hi_ratio);
    rec.tables.push_back(t);
    rec.check("violations", violations, Relation::eq, 0);
    rec.check("min_exact_over_lower", lo_ratio, Relation::ge, 1.0 - tol);
    rec.check("max_exact_over_upper", hi_ratio, Relation::le, 1.0 + tol);
}

void op_lagrange_grid(Args& a, const Ctx&, Record& rec) {
    int n = a.integer("n", 100);
    auto k = step1_constant_ex21();
    int checked = 0, violations = 0;
    double min_margin = kInf, max_res = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x0 = 0.9 + 0.1 * (i + 0.5) / n;
            double y0 = 0.1 * j / n;
            if (x0 * x0 + y0 >= 1.0) continue;
            double X = lagrange_root(x0, y0);
            max_res = std::max(max_res, std::abs(lagrange_residuals(x0, y0, X, 1.0 - X * X).r1));
            double margin = min_S(x0, y0) - k.C_tilde * std::abs(x0 * x0 + y0 - 1.0);
            ++checked;
            if (margin < 0.0) ++violations;
            min_margin = std::min(min_margin, margin);
        }
    rec.value("C", k.C);
    rec.value("C_tilde", k.C_tilde);
    rec.value("checked", checked);
    rec.value("min_margin", min_margin);
    rec.check("cubic_residual", max_res, Relation::le, 1e-12);
    rec.check("C_tilde_gap", std::abs(k.C_tilde - 9.0 / 26.0), Relation::le, 1e-15);
    rec.check("violations", violations, Relation::eq, 0);
}

void op_omega_distance(Args& a, const Ctx& ctx, Record& rec) {
    int count = a.integer("count", 1000);
    double tol = a.tol(1e-6);
    DomainSpec Om = make_ex21_Omega();
    DistanceOptions numeric;
    numeric.allow_closed_form = false;
    double worst = 0.0;
    for (const auto& z : sample_interior(Om, count, ctx.seed)) {
        double exact = (1.0 - std::abs(z[0]) - std::abs(z[1])) / std::sqrt(2.0);
        worst = std::max(worst, std::abs(boundary_distance(Om, z, numeric).value - exact));
    }
    rec.value("samples", count);
    rec.check("max_abs_error", worst, Relation::le, tol);
}

void op_levi_lower(Args& a, const Ctx& ctx, Record& rec) {
    int count = a.integer("count", 1000);
    double bound = a.num("bound", 0.25);
    double tol = a.tol(1e-8);
    PshWitness u = ex21_u();
    DomainSpec Om = make_ex21_Omega();
    std::mt19937_64 rng(ctx.seed);
    double worst = kInf;
    int used = 0;
    for (const auto& z : sample_interior(Om, count, rng())) {
        if (!u.smooth_locus(z)) continue;
        CPoint v = random_direction(2, rng);
        worst = std::min(worst, levi_form(u, z, v) - bound * v.squaredNorm());
        ++used;
    }
    rec.value("samples", used);
    rec.check("min_levi_minus_bound", worst, Relation::ge, -tol);
}

PshWitness witness_by_name(const std::string& name) {
    if (name == "ex21_rho") return ex21_rho(step1_constant_ex21().C_tilde);
    if (name == "ex21_u") return ex21_u();
    if (name == "ex22_rho") return ex22_rho();
    if (name == "ball") return ball_defining(2);
    throw ConfigError("unknown witness '" + name + "'");
}

void op_psh_check(Args& a, const Ctx& ctx, Record& rec) {
    PshWitness u = witness_by_name(a.str("witness", "ex22_rho"));
    DomainSpec D = resolve_domain(a.str("domain", "Ex22_D"));
    int count = a.integer("count", 500);
    int dirs = a.integer("dirs", 4);
    std::mt19937_64 rng(ctx.seed);
    auto zs = sample_interior(D, count, rng());
    auto r = check_psh(u, D, zs, dirs, rng());
    rec.value("evaluated", r.evaluated);
    rec.value("nonsmooth_skipped", r.nonsmooth_skipped);
    rec.value("min_levi", r.min_levi);
    rec.check("violations", r.violations, Relation::eq, 0);
    rec.check("nonnegative_values", r.positive_values, Relation::eq, 0);
}

void op_levi_formula(Args& a, const Ctx& ctx, Record& rec) {
    int count = a.integer("count", 1000);
    double wmin = a.num("w_min", 0.3), wmax = a.num("w_max", 0.95);
    double tol = a.tol(1e-4);
    PshWitness u = ex22_rho();
    u.hessian = nullptr;  // force the finite-difference route
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> R(wmin, wmax), T(0.0, 2.0 * M_PI), X(0.0, 0.4);
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
        CPoint z = make_point({cplx(X(rng), X(rng) - 0.2), std::polar(R(rng), T(rng))});
        double f = ex22_levi_formula(z);
        double fd = levi_form(u, z, unit(2, 1));
        worst = std::max(worst, std::abs(fd - f) / std::abs(f));
    }
    rec.value("samples", count);
    rec.check("max_rel_error", worst, Relation::le, tol);
}

// Points of Ex22 D near 0 spread over several dyadic distance bands.
std::vector<CPoint> ex22_local_samples(int count, std::uint64_t seed) {
    DomainSpec D = make_ex22_D();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> R(0.0, 0.4), T(0.0, 2.0 * M_PI), Y(-0.1, 0.1), E(1.0, 5.0);
    std::vector<CPoint> out;
    while (static_cast<int>(out.size()) < count) {
        cplx w = std::polar(R(rng), T(rng));
        double s = std::abs(w);
        double g = s == 0.0 ? 0.0 : std::exp(-1.0 / std::pow(s, 4));
        CPoint z = make_point({cplx(g + std::pow(10.0, -E(rng)), Y(rng)), w});
        if (contains(D, z)) out.push_back(z);
    }
    return out;
}

void op_hopf_quotient(Args& a, const Ctx& ctx, Record& rec) {
    int count = a.integer("count", 400);
    DomainSpec D = make_ex22_D();
    PshWitness rho = ex22_rho();
    auto zs = ex22_local_samples(count, ctx.seed);
    std::vector<double> delta;
    double CH = kInf;
    for (const auto& z : zs) {
        delta.push_back(boundary_distance(D, z).value);
        CH = std::min(CH, delta.back() / -rho.u(z));
    }
    CH *= 1.0 - 1e-14;
    double bridge = -kInf;
    std::vector<HopfSample> hs;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        double phi = CH * rho.u(zs[i]);
        bridge = std::max(bridge, -delta[i] - phi);
        hs.push_back({phi, delta[i]});
    }
    auto fit = hopf_fit(hs, 1.0);
    rec.value("C_H", CH);
    rec.value("hopf_C", fit.C);
    rec.value("bands", fit.bands);
    rec.value("slope", fit.slope);
    rec.check("C_H", CH, Relation::gt, 0.0);
    rec.check("lower_bridge", bridge, Relation::le, 0.0);
    rec.check("hopf_residual", fit.residual, Relation::le, 0.0);
}

std::vector<int> parse_orders(const std::string& s) {
    std::vector<int> out;
    for (const auto& part : split(s, ',')) {
        auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(static_cast<int>(parse_double(part, "orders")));
        } else {
            int lo = static_cast<int>(parse_double(part.substr(0, dash), "orders"));
            int hi = static_cast<int>(parse_double(part.substr(dash + 1), "orders"));
            for (int k = lo; k <= hi; ++k) out.push_back(k);
        }
    }
    return out;
}

void op_infinite_type(Args& a, const Ctx&, Record& rec) {
    std::string text = a.str("phi", "exp(-1/x^2)");
    auto orders = parse_orders(a.str("orders", "1-20"));
    std::string expect = a.str("expect", "infinite");
    Expr e = Expr::parse(text, {"x"});
    auto phi = [&](double x) {
        cplx arg = x;
        return e.eval_real(&arg);
    };
    auto r = infinite_type_check(phi, orders);
    Table t{"ratios", {"k", "x=1e-1", "x=1e-2", "x=1e-3", "pass"}, {}};
    int failing = 0;
    for (const auto& o : r.orders) {
        t.rows.push_back({double(o.k), o.ratios[0], o.ratios[1], o.ratios[2], o.pass ? 1.0 : 0.0});
        failing += o.pass ? 0 : 1;
    }
    rec.tables.push_back(t);
    rec.value("finite_type_bound", r.finite_type_bound);
    if (expect == "infinite")
        rec.check("failing_orders", failing, Relation::eq, 0);
    else if (expect == "finite")
        rec.check("failing_orders", failing, Relation::ge, 1);
    else
        throw ConfigError("infinite_type: expect must be infinite or finite");
}

void op_extension_oracle(Args& a, const Ctx&, Record& rec) {
    int grid = a.integer("grid", 20);
    double half = a.num("half", 0.05);
    double radius = a.num("chart_radius", 0.15);
    double tol = a.tol(1e-6);
    GraphChart chart = make_ex21_chart(radius);
    ChartMap m = chart_map(chart, ex21_map());
    double ct = ex21_sibony_constant();
    double C = std::max(1.0 / (step1_constant_ex21().C_tilde * std::sqrt(2.0)),
                        std::sqrt(1.0 + chart.lipschitz * chart.lipschitz));
    PsiSpec psi = ex21_psi(chart);
    // second route: the same psi through the Dini integral of M(t) = c~ sqrt(t)
    Modulus M = Modulus::closed_form([ct](double t) { return ct * std::sqrt(t); }, 1.0, "c~ sqrt(t)");
    PsiSpec psi_mod = PsiSpec::from_modulus(M, 1.0, 1.0, C);

    auto Zs = chart_boundary_grid(chart, grid, grid, half);
    double tp = grid_margin(chart, Zs);
    auto res = extend_map(m, Zs, tol, psi);
    double max_err = 0.0, max_shift = 0.0, max_trunc = 0.0, max_quad = 0.0;
    int cert_viol = 0, psi_viol = 0;
    for (const auto& r : res) {
        CPoint direct = m.value(r.xi);
        for (int k = 0; k < direct.size(); ++k) max_err = std::max(max_err, std::abs(r.value[k] - direct[k]));
        auto half_run = boundary_value(m, r.xi, 0.5 * tp, tol, psi);
        for (int k = 0; k < direct.size(); ++k)
            max_shift = std::max(max_shift, std::abs(r.value[k] - half_run.value[k]));
        for (int k = 0; k < direct.size(); ++k)
            if (std::abs(r.value[k] - r.lifted[k]) > r.tail_bound + r.truncation + r.quad_error) ++cert_viol;
        for (int j = 0; j <= 20; ++j) {
            double y = tp * std::ldexp(1.0, -j);
            CPoint W = r.xi;
            W[1] += cplx(0.0, y);
            if (m.dZn(W).norm() > psi.psi(y)) ++psi_viol;
        }
        max_trunc = std::max(max_trunc, r.truncation);
        max_quad = std::max(max_quad, r.quad_error);
    }
    double cr = 0.0;
    for (const auto& r : res) {
        CPoint W = r.xi;
        W[1] += cplx(0.0, 0.5 * tp);
        cr = std::max(cr, cauchy_riemann_gap(m, W));
    }
    auto cont = continuity_modulus(res);
    double tail_gap = std::abs(psi.tail(tp) - psi_mod.tail(tp)) / psi.tail(tp);
    rec.value("points", static_cast<double>(res.size()));
    rec.value("t_prime", tp);
    rec.value("psi_C", C);
    rec.value("sibony_constant", ct);
    rec.value("tail_at_t_prime", psi.tail(tp));
    rec.value("max_truncation", max_trunc);
    rec.value("max_quad_error", max_quad);
    rec.value("modulus_small", cont.modulus_small);
    rec.value("modulus_large", cont.modulus_large);
    rec.check("max_abs_error", max_err, Relation::le, tol);
    rec.check("t_prime_shift", max_shift, Relation::le, 2.0 * tol);
    rec.check("tail_certificate_violations", cert_viol, Relation::eq, 0);
    rec.check("psi_dominance_violations", psi_viol, Relation::eq, 0);
    rec.check("continuity_violations", cont.violations, Relation::eq, 0);
    rec.check("cauchy_riemann_gap", cr, Relation::le, 1e-6);
    rec.check("psi_tail_route_gap", tail_gap, Relation::le, 1e-6);
}

void op_dini(Args& a, const Ctx&, Record& rec) {
    std::string text = a.str("modulus", "sqrt(r)");
    double eps = a.num("eps", 1.0);
    std::string expect = a.str("expect", "2");
    double tol = a.tol(1e-6);
    auto r = dini_integral(Modulus::from_expression(text, std::max(eps, 1.0)), eps);
    rec.value("convergent", r.convergent ? 1 : 0);
    rec.value("value", r.value);
    rec.value("tail", r.tail);
    rec.value("exponent", r.exponent);
    if (expect == "divergent") {
        rec.check("convergent", r.convergent ? 1 : 0, Relation::eq, 0);
    } else if (expect == "convergent") {
        rec.check("convergent", r.convergent ? 1 : 0, Relation::eq, 1);
    } else {
        rec.check("convergent", r.convergent ? 1 : 0, Relation::eq, 1);
        rec.check("abs_error", std::abs(r.value - parse_double(expect, "expect")), Relation::le, tol);
    }
}

void op_dini_compose(Args& a, const Ctx&, Record& rec) {
    std::string text = a.str("modulus", "sqrt(r)");
    double kappa = a.num("kappa", 2.0), mexp = a.num("m", 0.5), eps = a.num("eps", 0.25);
    Modulus w = Modulus::from_expression(text, 1.0);
    auto base = dini_integral(w, eps);
    Modulus c = w.compose(kappa, mexp);
    auto comp = dini_integral(c, std::min(eps, 0.5 * c.domain_end()));
    rec.value("base_value", base.value);
    rec.value("composite_value", comp.value);
    rec.check("base_convergent", base.convergent ? 1 : 0, Relation::eq, 1);
    rec.check("composite_convergent", comp.convergent ? 1 : 0, Relation::eq, 1);
}

void op_embedding(Args& a, const Ctx& ctx, Record& rec) {
    int nxi = a.integer("xi", 100), nzeta = a.integer("zeta", 100);
    double radius = a.num("chart_radius", 0.5), patch = a.num("patch", 0.2), rV = a.num("r_V", 0.25);
    double m = a.num("m", 1.0);
    GraphChart chart = make_ex22_chart(radius);
    DomainSpec D = make_ex22_D();
    std::mt19937_64 rng(ctx.seed);
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(radius * std::pow(10.0, -4.0 + 4.0 * k / 40.0));
    Modulus w = estimate_modulus(chart, sample_chart_pairs(chart, 4000, radius, rng()), grid);
    auto p = select_embedding_params(w, m, rV);
    auto xis = sample_chart_boundary(chart, nxi, patch, rng());
    auto zetas = sample_model_domain(p, nzeta, rng());
    auto rep = verify_embedding(D, chart, xis, p, zetas);
    ModelDomainParams wide = p;
    wide.eps *= 2.0;
    auto ctl = verify_embedding(D, chart, xis, wide, sample_model_domain(wide, nzeta, rng()));
    rec.value("beta", p.beta);
    rec.value("eps", p.eps);
    rec.value("modulus_at_end", w(radius));
    rec.value("checked", rep.checked);
    rec.value("worst_margin", rep.worst_margin);
    rec.value("control_outside_box", ctl.outside_box);
    rec.value("control_outside_domain", ctl.outside_domain);
    rec.check("violations", rep.violations, Relation::eq, 0);
    rec.check("control_violations", ctl.violations, Relation::ge, 1);
}

void op_dichotomy(Args& a, const Ctx&, Record& rec) {
    std::string demo = a.str("demo", "ball");
    int terms = a.integer("terms", 20);
    DichotomyReport r;
    if (demo == "ball") {
        auto s = ball_dichotomy_sequences(terms);
        DomainSpec B = make_ball(2, 1.0);
        r = dichotomy_report(B, B, s, DichotomyMode::pair);
        rec.value("C", s.C);
        rec.value("K", s.K);
    } else if (demo == "ex22") {
        auto s = ex22_normal_sequences(terms);
        r = dichotomy_report(make_ex22_D(), make_ex22_Omega(), s, DichotomyMode::convex);
        rec.value("C", s.C);
    } else {
        throw ConfigError("dichotomy: demo must be ball or ex22");
    }
    Table t{"dichotomy", {"nu", "delta_D1", "delta_D2", "sep", "delta_O1", "delta_O2", "U", "L", "l", "bridge",
                          "consistency", "slack", "consistent"}, {}};
    for (const auto& row : r.rows)
        t.rows.push_back({double(row.nu), row.dD1, row.dD2, row.sep, row.dO1, row.dO2, row.U, row.L, row.l,
                          row.bridge, row.consistency, row.slack, row.consistent ? 1.0 : 0.0});
    rec.tables.push_back(t);
    rec.value("l_first", r.rows.front().l);
    rec.value("l_last", r.rows.back().l);
    rec.value("first_failure", r.first_failure);
    rec.check("l_monotone", r.l_monotone ? 1 : 0, Relation::eq, 1);
    rec.check("l_growth", r.rows.back().l - r.rows.front().l, Relation::gt, 0.0);
    if (demo == "ball")
        rec.check("first_failure", r.first_failure, Relation::ge, 0);
    else
        rec.check("first_failure", r.first_failure, Relation::eq, -1);
}

struct ChartCase {
    GraphChart chart;
    DomainSpec D;
};

ChartCase chart_case(const std::string& name) {
    if (name == "ex21") return {make_ex21_chart(0.15), make_ex21_D()};
    if (name == "ex22") return {make_ex22_chart(0.5), make_ex22_D()};
    if (name == "flat")
        return {make_flat_chart(2, 0.5),
                parse_domain("name: flat_ball\ndimension: 2\nconstraint: -Im(z2)\n"
                             "constraint: |z1|^2 + |z2|^2 - 1\nconvex: true\nbounding_radius: 1\n",
                             "flat")};
    if (name == "paraboloid")
        return {make_paraboloid_chart(2, 0.5),
                parse_domain("name: paraboloid_ball\ndimension: 2\n"
                             "constraint: (|z1|^2 + Re(z2)^2)/2 - Im(z2)\n"
                             "constraint: |z1|^2 + |z2|^2 - 1\nconvex: true\nbounding_radius: 1\n",
                             "paraboloid")};
    throw ConfigError("unknown chart '" + name + "'");
}

void op_lipschitz_sandwich(Args& a, const Ctx& ctx, Record& rec) {
    auto cc = chart_case(a.str("chart", "ex21"));
    int count = a.integer("count", 1000);
    double tol = a.tol(0.05);
    const GraphChart& ch = cc.chart;
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> E(0.0, 3.0);
    auto base = sample_chart_boundary(ch, count, 0.25 * ch.radius, rng());
    std::vector<CPoint> zs;
    for (const auto& xi : base) {
        CPoint Z = ch.to_chart(xi);
        Z[ch.dim() - 1] += cplx(0.0, 0.25 * ch.radius * std::pow(10.0, -E(rng)));
        CPoint z = ch.from_chart(Z);
        if (contains(cc.D, z)) zs.push_back(z);
    }
    auto r = verify_lipschitz_sandwich(cc.D, ch, zs);
    double cap = std::sqrt(1.0 + ch.lipschitz * ch.lipschitz);
    rec.value("samples", r.samples);
    rec.value("lipschitz", ch.lipschitz);
    rec.value("C", r.C);
    rec.check("max_delta_minus_Y", r.max_first_violation, Relation::le, 1e-9);
    rec.check("C_lower", r.C, Relation::ge, 1.0 - 1e-9);
    rec.check("C_upper", r.C, Relation::le, cap + tol);
}

const std::vector<OpInfo>& registry() {
    static const std::vector<OpInfo> ops = {
        {"graham_sandwich", "convex-metric-sandwich", "|v|/(2 delta(z;v)) <= k(z;v) <= |v|/delta(z;v) on the ball",
         op_graham_sandwich},
        {"lagrange_grid", "lagrange-cubic", "min S from the cubic root dominates C~ |x0^2 + y0 - 1|", op_lagrange_grid},
        {"omega_distance", "target-distance-closed-form", "numeric delta vs (1 - |z| - |w|)/sqrt 2", op_omega_distance},
        {"levi_lower", "levi-lower-bound-smooth-points", "Levi form of |z| + |w| - 1 at least |v|^2/4",
         op_levi_lower},
        {"psh_check", "psh-witness", "Levi form non-negative on samples", op_psh_check},
        {"levi_formula", "levi-formula", "finite-difference Levi form vs the closed form", op_levi_formula},
        {"hopf_quotient", "hopf-quotient", "C = inf delta/|rho| and the alpha = 1 Hopf fit", op_hopf_quotient},
        {"infinite_type", "infinite-type", "phi(x)/x^k -> 0 for every tested k", op_infinite_type},
        {"extension_oracle", "normal-line-extension", "boundary values by normal-line integration vs direct F",
         op_extension_oracle},
        {"dini", "dini-integral", "int_0^eps w(r)/r dr or a divergence verdict", op_dini},
        {"dini_compose", "dini-composite", "w(kappa r^m) stays Dini", op_dini_compose},
        {"embedding", "model-domain-embedding", "xi + zeta eta in D for zeta in D(beta, eps)", op_embedding},
        {"dichotomy", "distance-dichotomy", "upper and lower distance bounds along boundary sequences",
         op_dichotomy},
        {"lipschitz_sandwich", "chart-distance-sandwich", "delta <= Y <= C delta on a chart",
         op_lipschitz_sandwich},
    };
    return ops;
}

const OpInfo& find_op(const std::string& name) {
    for (const auto& o : registry())
        if (name == o.name) return o;
    throw ConfigError("unknown operation '" + name + "'");
}

}  // namespace

std::vector<std::string> operation_names() {
    std::vector<std::string> out;
    for (const auto& o : registry()) out.push_back(o.name);
    return out;
}

bool has_operation(const std::string& op) {
    for (const auto& o : registry())
        if (op == o.name) return true;
    return false;
}

InfiniteTypeReport infinite_type_check(const std::function<double(double)>& phi, const std::vector<int>& orders) {
    if (orders.empty()) throw ConfigError("infinite_type_check: no orders given");
    if (phi(0.0) != 0.0) throw DomainError("infinite_type_check: phi(0) must vanish");
    InfiniteTypeReport rep;
    const double xs[3] = {1e-1, 1e-2, 1e-3};
    for (int k : orders) {
        if (k < 1) throw ConfigError("infinite_type_check: orders must be positive");
        TypeOrder o;
        o.k = k;
        for (double x : xs) o.ratios.push_back(std::abs(phi(x)) / std::pow(x, k));
        o.pass = o.ratios[1] <= o.ratios[0] && o.ratios[2] <= o.ratios[1] && o.ratios[2] <= 1e-8;
        if (!o.pass) {
            rep.pass = false;
            if (rep.finite_type_bound == 0) rep.finite_type_bound = k;
        }
        rep.orders.push_back(o);
    }
    return rep;
}

Report run_scenario(const Scenario& s, const RunOptions& opt) {
    for (const auto& st : s.stages) find_op(st.op);
    Report rep;
    rep.scenario = s.name;
    rep.seed = opt.seed.value_or(s.seed);
    std::mt19937_64 master(rep.seed);
    Ctx ctx;
    ctx.tol = opt.tol ? opt.tol : s.tolerance;
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& st : s.stages) {
        Record rec;
        rec.stage = st.label;
        rec.op = st.op;
        ctx.seed = master();
        rec.params.emplace_back("seed", std::to_string(ctx.seed));
        Args args(st, rec, ctx);
        try {
            find_op(st.op).fn(args, ctx, rec);
            args.finish();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            rec.error = e.what();
        }
        rep.records.push_back(std::move(rec));
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<StageAnchor> explain(const Scenario& s) {
    std::vector<StageAnchor> out;
    for (const auto& st : s.stages) {
        const auto& o = find_op(st.op);
        out.push_back({st.label, st.op, o.anchor, o.summary});
    }
    return out;
}

}  // namespace kobex
