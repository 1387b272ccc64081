#include <doctest.h>

#include <cmath>
#include <random>

#include "kobex/bundled.hpp"
#include "kobex/domain.hpp"
#include "kobex/domain_io.hpp"
#include "kobex/error.hpp"

using namespace kobex;

namespace {

// Directional distance of the unit ball: the exit radius minimized over phases is
// -|<z,u>| + sqrt(|<z,u>|^2 + 1 - |z|^2) with u = v/|v|.
double ball_directional_oracle(const CPoint& z, const CPoint& v) {
    CPoint u = v / v.norm();
    double c = std::abs(herm(z, u));
    return -c + std::sqrt(c * c + 1.0 - z.squaredNorm());
}

CPoint random_point(std::mt19937_64& rng, int n, double r) {
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    CPoint z(n);
    for (int k = 0; k < n; ++k) z[k] = cplx(N(rng), N(rng));
    return z / z.norm() * (r * std::pow(U(rng), 1.0 / (2 * n)));
}

}  // namespace

TEST_CASE("ball distance: closed form and numeric search agree") {
    DomainSpec B = make_ball(2, 1.0);
    DistanceOptions numeric;
    numeric.allow_closed_form = false;
    numeric.use_reinhardt = false;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 40; ++i) {
        CPoint z = random_point(rng, 2, 0.95);
        double exact = 1.0 - z.norm();
        CHECK(boundary_distance(B, z).value == doctest::Approx(exact).epsilon(1e-12));
        CHECK(boundary_distance(B, z, numeric).value == doctest::Approx(exact).epsilon(1e-7));
    }
}

TEST_CASE("Ex21 D distance matches the modulus-plane oracle") {
    // frozen from a high-precision Lagrange solve in the (|z|, |w|) plane
    DomainSpec D = make_ex21_D();
    CHECK(boundary_distance(D, make_point({0.3, 0.2})).value == doctest::Approx(0.505583121577217).epsilon(1e-7));
    CHECK(boundary_distance(D, make_point({cplx(0.0, 0.5), 0.1})).value ==
          doctest::Approx(0.391584985667147).epsilon(1e-7));
    CHECK(boundary_distance(D, make_point({0.0, 0.5})).value == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("Ex21 Omega distance equals (1 - |z| - |w|)/sqrt 2") {
    DomainSpec O = make_ex21_Omega();
    DistanceOptions numeric;
    numeric.allow_closed_form = false;
    for (const auto& z : sample_interior(O, 60, 3)) {
        double exact = (1.0 - std::abs(z[0]) - std::abs(z[1])) / std::sqrt(2.0);
        CHECK(boundary_distance(O, z, numeric).value == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("property: distance is attained by a boundary point and no boundary sample is closer") {
    std::mt19937_64 rng(5);
    for (const auto& name : {"Ex21_D", "Ex21_Omega", "Ex22_D", "polydisc"}) {
        DomainSpec D = bundled_domain(name);
        for (const auto& z : sample_interior(D, 15, rng())) {
            auto r = boundary_distance(D, z);
            CHECK(r.value > 0.0);
            CHECK((r.witness - z).norm() == doctest::Approx(r.value).epsilon(1e-6));
            CHECK(std::abs(D.defining(r.witness)) < 1e-6);
            // rays never exit before the distance
            for (int k = 0; k < 8; ++k) {
                CPoint u = random_point(rng, D.dim, 1.0);
                u /= u.norm();
                CHECK(exit_radius(D, z, u) >= r.value * (1.0 - 1e-7));
            }
        }
    }
}

TEST_CASE("directional distance on the ball matches the phase-minimized exit radius") {
    DomainSpec B = make_ball(2, 1.0);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 30; ++i) {
        CPoint z = random_point(rng, 2, 0.9);
        CPoint v = random_point(rng, 2, 1.0);
        double oracle = ball_directional_oracle(z, v);
        CHECK(directional_distance(B, z, v) == doctest::Approx(oracle).epsilon(1e-8));
        // the brute-force phase scan can only overshoot the minimum
        double brute = directional_distance(B, z, v, directional_oracle());
        CHECK(brute >= oracle * (1.0 - 1e-12));
        CHECK(brute == doctest::Approx(oracle).epsilon(1e-6));
        // property: delta(z; v) >= delta(z), and only the direction of v matters
        CHECK(directional_distance(B, z, v) >= (1.0 - z.norm()) * (1.0 - 1e-9));
        CHECK(directional_distance(B, z, 3.0 * v) == doctest::Approx(directional_distance(B, z, v)));
    }
}

TEST_CASE("contains agrees with the sign of the defining function") {
    std::mt19937_64 rng(2);
    for (const auto& name : bundled_domain_names()) {
        DomainSpec D = bundled_domain(name);
        for (int i = 0; i < 200; ++i) {
            CPoint z = random_point(rng, D.dim, 1.2);
            CHECK(contains(D, z) == (D.defining(z) < 0.0));
        }
    }
}

TEST_CASE("sample_interior is seeded and stays inside") {
    DomainSpec D = make_ex22_D();
    auto a = sample_interior(D, 50, 9), b = sample_interior(D, 50, 9);
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(contains(D, a[i]));
        CHECK((a[i] - b[i]).norm() == 0.0);
    }
}

TEST_CASE("inward normal of the ball is -xi") {
    DomainSpec B = make_ball(2, 1.0);
    CPoint xi = make_point({cplx(0.6, 0.0), cplx(0.0, 0.8)});
    CHECK((inward_normal(B, xi) + xi).norm() < 1e-6);
}

TEST_CASE("dimension and domain errors") {
    DomainSpec B = make_ball(2, 1.0);
    CHECK_THROWS_AS(boundary_distance(B, make_point({0.1})), DimensionError);
    CHECK_THROWS_AS(boundary_distance(B, make_point({2.0, 0.0})), DomainError);
    CHECK_THROWS_AS(bundled_domain("no-such-domain"), ConfigError);
}

TEST_CASE("cone condition on the ball") {
    DomainSpec B = make_ball(2, 1.0);
    DomainSpec W = make_ball(2, 1.5);
    auto samples = sample_interior(make_ball(2, 0.9), 40, 4);
    CertifyOptions opt;
    opt.mc_points = 2000;
    auto cert = certify_cone_condition(B, W, samples, opt);
    CHECK(cert.violation_count == 0);
    CHECK(cert.theta > 0.0);
    CHECK(cert.theta < M_PI);
    CHECK(cert.r > 0.0);
    for (const auto& w : cert.witnesses) {
        ConeSpec c{w.xi, w.v, cert.theta, cert.r};
        CHECK(cone_contains(c, w.w));
    }
}

TEST_CASE("domain files: text twin reproduces the bundled domain") {
    DomainSpec t = parse_domain(
        "name: ex21_text\n"
        "dimension: 2\n"
        "variables: z, w\n"
        "constraint: |z|^2 + |w| - 1\n"
        "reinhardt: true\n"
        "bounding_radius: 1\n");
    DomainSpec b = make_ex21_D();
    for (const auto& z : sample_interior(b, 20, 8)) {
        CHECK(contains(t, z));
        CHECK(boundary_distance(t, z).value == doctest::Approx(boundary_distance(b, z).value).epsilon(1e-6));
    }
    CHECK_THROWS_AS(parse_domain("name: x\nconstraint: |z1| - 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_domain("name: x\ndimension: 1\nconstraint: |q| - 1\n"), ConfigError);
}

TEST_CASE("bundled domain files load by name") {
    for (const auto& name : {"ball2", "Ex21_D", "Ex21_Omega", "Ex22_D", "Ex22_Omega"}) {
        DomainSpec D = resolve_domain(data_dir() + "/domains/" + name + ".dom");
        CHECK(D.dim == 2);
        DomainSpec ref = std::string(name) == "ball2" ? make_ball(2, 1.0) : bundled_domain(name);
        for (const auto& z : sample_interior(ref, 20, 12)) CHECK(contains(D, z));
    }
}
