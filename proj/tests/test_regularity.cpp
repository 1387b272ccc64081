#include <doctest.h>

#include <cmath>
#include <random>

#include "kobex/bundled.hpp"
#include "kobex/error.hpp"
#include "kobex/regularity.hpp"

using namespace kobex;

namespace {

Modulus power_modulus(double a, double end = 1.0) {
    return Modulus::closed_form([a](double r) { return std::pow(r, a); }, end, "r^a");
}

}  // namespace

TEST_CASE("Dini integrals of power and log moduli") {
    // int_0^1 r^(a-1) dr = 1/a
    for (double a : {1.0, 0.5, 0.25}) {
        auto d = dini_integral(power_modulus(a), 1.0);
        CHECK(d.convergent);
        CHECK(d.value == doctest::Approx(1.0 / a).epsilon(1e-6));
    }
    // int_0^eps r^(a-1) dr = eps^a / a
    CHECK(dini_integral(power_modulus(0.5), 0.01).value == doctest::Approx(0.2).epsilon(1e-6));

    // substituting u = log 1/r gives int_0^inf (1+u)^-2 du = 1
    auto log2 = Modulus::from_expression("1/(1+abs(log(r)))^2", 1.0);
    auto d2 = dini_integral(log2, 1.0);
    CHECK(d2.convergent);
    CHECK(d2.value == doctest::Approx(1.0).epsilon(1e-4));

    auto log1 = Modulus::from_expression("1/(1+abs(log(r)))", 1.0);
    CHECK_FALSE(dini_integral(log1, 1.0).convergent);
    CHECK_FALSE(dini_integral(Modulus::from_expression("1/(1+abs(log(r)))^0.5", 1.0), 1.0).convergent);

    auto z = dini_integral(Modulus::zero(1.0), 1.0);
    CHECK(z.convergent);
    CHECK(z.value == 0.0);
}

TEST_CASE("property: Dini levels are additive over the dyadic split") {
    auto w = power_modulus(0.3);
    auto d = dini_integral(w, 0.5);
    REQUIRE(d.levels.size() >= 2);
    // level k covers [eps 2^-k-1, eps 2^-k], where the integral is eps^a 2^-ka (1 - 2^-a)/a
    for (std::size_t k = 0; k < 5; ++k) {
        double expect = std::pow(0.5 * std::ldexp(1.0, -static_cast<int>(k)), 0.3) * (1.0 - std::pow(2.0, -0.3)) / 0.3;
        CHECK(d.levels[k] == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("compose and scale") {
    auto w = power_modulus(0.5, 4.0);
    auto c = w.compose(2.0, 0.5);
    for (double r : {0.01, 0.1, 0.5}) CHECK(c(r) == doctest::Approx(std::sqrt(2.0 * std::sqrt(r))));
    // sqrt(2) r^(1/4) has Dini integral 4 sqrt 2 on [0, 1]
    CHECK(dini_integral(c, 1.0).value == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-6));
    CHECK(w.scaled(3.0)(0.25) == doctest::Approx(1.5));
}

TEST_CASE("tables: running max and interpolation") {
    auto t = Modulus::table({0.5, 1.0, 2.0}, {1.0, 0.5, 3.0}, "t");
    CHECK(t.table_r().front() == 0.0);
    CHECK(t(0.25) == doctest::Approx(0.5));
    CHECK(t(1.0) == doctest::Approx(1.0));  // running max replaced 0.5
    CHECK(t(1.5) == doctest::Approx(2.0));
}

TEST_CASE("property: subadditive envelope majorizes and is subadditive") {
    auto sq = power_modulus(2.0);
    auto e = sq.subadditive_envelope();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 0.5);
    for (int i = 0; i < 200; ++i) {
        double a = U(rng), b = U(rng);
        CHECK(e(a) >= sq(a) - 1e-12);
        CHECK(e(a + b) <= e(a) + e(b) + 1e-12);
    }
    // least concave majorant of r^2 on [0, 1] is r
    CHECK(e(0.3) == doctest::Approx(0.3).epsilon(1e-3));
}

TEST_CASE("property: h_inverse inverts h_integral") {
    auto lin = power_modulus(1.0, 10.0);
    CHECK(h_integral(lin, 0.4) == doctest::Approx(0.08));
    CHECK(h_integral(lin, -0.4) == doctest::Approx(0.08));
    CHECK(h_inverse(lin, 0.08) == doctest::Approx(0.4).epsilon(1e-9));
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> U(1e-4, 0.9);
    for (const auto& w : {power_modulus(0.5), power_modulus(1.7), Modulus::from_expression("1/(1+abs(log(r)))^2", 1.0)}) {
        for (int i = 0; i < 50; ++i) {
            double t = U(rng);
            CHECK(h_inverse(w, h_integral(w, t)) == doctest::Approx(t).epsilon(1e-7));
        }
    }
    CHECK(std::isinf(h_inverse(Modulus::zero(1.0), 0.1)));
    CHECK(std::isinf(h_inverse(power_modulus(1.0, 1.0), 1.0)));  // h(1) = 1/2
}

TEST_CASE("embedding parameters for a linear modulus") {
    // h(t) = t^2/2, so x/h^-1(x) = sqrt(x/2) < 1/beta means x < 2/beta^2 = 1/16 for m = 1
    auto p = select_embedding_params(power_modulus(1.0, 10.0), 1.0, 0.5);
    CHECK(p.beta == doctest::Approx(4.0 * std::sqrt(2.0)));
    CHECK(p.beta_rule == "1/beta <= m/(4 sqrt 2)");
    CHECK(p.eps <= 1.0 / 16.0);
    CHECK(p.eps >= (1.0 / 16.0) * (1.0 - std::ldexp(1.0, -10)));
    CHECK(p.eps_rule == "x/h^-1(x) < 1/beta");
    // a large m drops beta to its floor and the r_V constraint binds
    auto q = select_embedding_params(power_modulus(1.0, 10.0), 100.0, 0.01);
    CHECK(q.beta > 1.0);
    CHECK(q.beta_rule == "beta > 1");
    CHECK(q.eps_rule == "sqrt(2) eps < r_V");
    CHECK(std::sqrt(2.0) * q.eps < 0.01);
    CHECK_THROWS_AS(select_embedding_params(power_modulus(1.0), 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(select_embedding_params(power_modulus(1.0), 1.0, -1.0), DomainError);
}

TEST_CASE("property: model domain samples satisfy the membership test") {
    auto p = select_embedding_params(power_modulus(0.5, 1.0), 1.0, 0.5);
    for (cplx z : sample_model_domain(p, 300, 4)) CHECK(model_domain_contains(p, z));
    CHECK(model_domain_contains(p, cplx(0.5 * p.eps, 0.0)));
    CHECK_FALSE(model_domain_contains(p, cplx(-0.1 * p.eps, 0.0)));
    CHECK_FALSE(model_domain_contains(p, cplx(0.5 * p.eps, p.eps)));
}

TEST_CASE("bundled charts agree with their domains") {
    auto r = check_chart(make_ex21_D(), make_ex21_chart(), 300, 1);
    CHECK(r.isometry_error < 1e-12);
    CHECK(r.interior_violations == 0);
    CHECK(r.interior_checked > 0);
    CHECK(r.boundary_max_error < 1e-10);
    auto s = check_chart(make_ex22_D(), make_ex22_chart(), 300, 2);
    CHECK(s.interior_violations == 0);
    CHECK(s.boundary_max_error < 1e-10);
}

TEST_CASE("sampled boundary points lie on the graph") {
    auto ch = make_ex22_chart();
    for (const auto& xi : sample_chart_boundary(ch, 50, 0.1, 5)) {
        CHECK(std::abs(vertical_height(ch, ch.to_chart(xi))) < 1e-12);
        CHECK(std::abs(make_ex22_D().defining(xi)) < 1e-10);
    }
}

TEST_CASE("Lipschitz sandwich on the ex22 chart") {
    auto ch = make_ex22_chart();
    DomainSpec D = make_ex22_D();
    std::vector<CPoint> zs;
    int i = 0;
    for (const auto& xi : sample_chart_boundary(ch, 40, 0.1, 6)) {
        CPoint Z = ch.to_chart(xi);
        Z[1] += cplx(0.0, std::pow(10.0, -1.0 - (i++ % 3)));
        zs.push_back(ch.from_chart(Z));
    }
    auto r = verify_lipschitz_sandwich(D, ch, zs);
    CHECK(r.samples == 40);
    CHECK(r.max_first_violation <= 1e-9);
    CHECK(r.C >= 1.0 - 1e-9);
    CHECK(r.C <= std::sqrt(1.0 + ch.lipschitz * ch.lipschitz) + 1e-6);
}

TEST_CASE("estimated gradient modulus of the paraboloid is r") {
    auto ch = make_paraboloid_chart(2);
    auto pairs = sample_chart_pairs(ch, 2000, 0.2, 9);
    auto w = estimate_modulus(ch, pairs, {0.05, 0.1, 0.2});
    CHECK(w(0.05) <= 0.05 + 1e-12);
    CHECK(w(0.2) <= 0.2 + 1e-12);
    CHECK(w(0.2) >= 0.15);
    CHECK_THROWS_AS(estimate_modulus(make_ex21_chart(), pairs, {0.1}), ConfigError);
    CHECK_THROWS_AS(estimate_modulus(ch, pairs, {}), ConfigError);
}

TEST_CASE("chart and modulus text formats") {
    GraphChart t = parse_chart(
        "name: para\n"
        "dimension: 2\n"
        "radius: 0.5\n"
        "graph: (x1^2 + x2^2 + x3^2)/2\n"
        "regularity: c1_dini\n"
        "lipschitz: 0.7072\n");
    GraphChart b = make_paraboloid_chart(2);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-0.4, 0.4);
    for (int i = 0; i < 20; ++i) {
        RVec x(3);
        for (int k = 0; k < 3; ++k) x[k] = U(rng);
        CHECK(t.phi(x) == doctest::Approx(b.phi(x)).epsilon(1e-14));
        auto g = t.grad(x);
        REQUIRE(g.has_value());
        CHECK((*g - *b.grad(x)).norm() < 1e-14);
    }
    CHECK(t.regularity == Regularity::c1_dini);
    CHECK_THROWS_AS(parse_chart("dimension: 2\nradius: 0.5\ngraph: x1\nregularity: smooth\n"), ConfigError);
    CHECK_THROWS_AS(parse_chart("dimension: 2\nradius: 0.5\ngraph: x1\nunitary: 1, 1; 0, 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_chart("dimension: 9\nradius: 0.5\ngraph: x1\n"), ConfigError);

    Modulus m = parse_modulus("modulus: sqrt(r)\ndomain_end: 1\n");
    CHECK(m(0.25) == doctest::Approx(0.5));
    Modulus tab = parse_modulus("name: tab\ntable: 0.5 1; 1 1.5\n");
    CHECK(tab(0.25) == doctest::Approx(0.5));
    CHECK(tab(0.75) == doctest::Approx(1.25));
    CHECK_THROWS_AS(parse_modulus("name: empty\n"), ConfigError);
    CHECK_THROWS_AS(parse_modulus("table: 0.5\n"), ConfigError);
}
