#include <doctest.h>

#include <cmath>
#include <random>

#include "kobex/bundled.hpp"
#include "kobex/error.hpp"
#include "kobex/metrics.hpp"
#include "kobex/psh.hpp"

using namespace kobex;

namespace {

CPoint gaussian(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> N;
    CPoint z(n);
    for (int k = 0; k < n; ++k) z[k] = cplx(N(rng), N(rng));
    return z;
}

CPoint in_ball(std::mt19937_64& rng, int n, double r) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    CPoint z = gaussian(rng, n);
    return z / z.norm() * (r * std::pow(U(rng), 1.0 / (2 * n)));
}

}  // namespace

TEST_CASE("ball metric: normalization and disc restriction") {
    CPoint o = CPoint::Zero(2);
    CHECK(kob_metric_ball_exact(o, make_point({0.3, cplx(0.0, 0.4)})) == doctest::Approx(0.5));
    // along a diameter the ball metric is the Poincare metric 1/(1 - x^2)
    for (double x : {0.1, 0.5, 0.9}) {
        CHECK(kob_metric_ball_exact(make_point({x, 0.0}), make_point({1.0, 0.0})) ==
              doctest::Approx(1.0 / (1.0 - x * x)));
        CHECK(kob_distance_ball_exact(o, make_point({x, 0.0})) == doctest::Approx(std::atanh(x)));
    }
    // frozen from a 30-digit evaluation of the pseudo-hyperbolic formula
    CHECK(kob_distance_ball_exact(make_point({0.3, 0.1}), make_point({-0.2, 0.4})) ==
          doctest::Approx(0.625491663285773).epsilon(1e-13));
}

TEST_CASE("property: ball distance is a metric, invariant under unitary maps") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        CPoint a = in_ball(rng, 2, 0.97), b = in_ball(rng, 2, 0.97), c = in_ball(rng, 2, 0.97);
        double ab = kob_distance_ball_exact(a, b), ba = kob_distance_ball_exact(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab <= kob_distance_ball_exact(a, c) + kob_distance_ball_exact(c, b) + 1e-10);
        cplx e = std::polar(1.0, 0.7);
        CMat U(2, 2);
        U << e * 0.6, 0.8, -0.8 * e, 0.6;
        U.row(1) *= std::conj(e);
        CHECK(kob_distance_ball_exact(U * a, U * b) == doctest::Approx(ab).epsilon(1e-9));
    }
}

TEST_CASE("property: Graham and Sibony bounds bracket the ball metric") {
    DomainSpec B = make_ball(2, 1.0);
    PshWitness u = ball_defining(2);
    std::mt19937_64 rng(13);
    for (int i = 0; i < 60; ++i) {
        CPoint z = in_ball(rng, 2, 0.95), v = gaussian(rng, 2);
        double k = kob_metric_ball_exact(z, v);
        auto [lo, hi] = graham_bounds(B, z, v);
        CHECK(lo.side == Side::lower);
        CHECK(hi.side == Side::upper);
        CHECK(lo.value <= k * (1.0 + 1e-9));
        CHECK(k <= hi.value * (1.0 + 1e-9));
        CHECK(hi.value == doctest::Approx(2.0 * lo.value));
        // Levi form of |z|^2 - 1 is |v|^2, so c = 1
        CHECK(sibony_lower_bound(u, z, v, 1.0).value <= k * (1.0 + 1e-12));
        CHECK(inscribed_ball_upper_bound(B, z, v).value >= k * (1.0 - 1e-9));
    }
}

TEST_CASE("graham bounds reject non-convex domains") {
    DomainSpec D = make_ex22_D();
    CHECK_THROWS_AS(graham_bounds(D, make_point({0.1, 0.1}), make_point({1.0, 0.0})), ConfigError);
}

TEST_CASE("ltc_fit recovers a synthetic log-type law") {
    // delta_v = 0.3 |log delta|^-(1 + 0.52); the grid value just below 0.52 is 0.5
    std::vector<LtcSample> s;
    for (int k = 2; k < 40; ++k) {
        double d = std::ldexp(1.0, -k) * 1.3;
        s.push_back({d, 0.3 * std::pow(-std::log(d), -1.52)});
    }
    auto f = ltc_fit(s);
    double C = 0.3 * std::pow(-std::log(1.3 / 4.0), -0.02);  // attained at the outermost sample
    CHECK(f.nu == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.C == doctest::Approx(C).epsilon(1e-12));
    CHECK(f.c == doctest::Approx(1.0 / (2.0 * C)).epsilon(1e-12));
    CHECK(ltc_violation(f, s) <= 1e-12);
    std::vector<LtcSample> one = {{0.01, 0.1}, {0.011, 0.1}};
    CHECK_THROWS_AS(ltc_fit(one), FitError);
}

TEST_CASE("ltc_fit on the local log-type model domain") {
    // tangential discs at (x, 0) have radius |log x|^-2, so nu = 1
    DomainSpec D = make_ltc_model_local(0.5, 0.1);
    std::vector<std::pair<CPoint, CPoint>> pairs;
    for (int k = 0; k < 12; ++k) pairs.push_back({make_point({std::ldexp(1e-3, -k), 0.0}), make_point({0.0, 1.0})});
    auto f = ltc_fit(D, pairs);
    CHECK(f.nu >= 0.9);
    CHECK(f.nu <= 1.0 + 1e-9);
    // held out: deeper points obey the fitted envelope
    std::vector<std::pair<CPoint, CPoint>> deep;
    for (int k = 12; k < 20; ++k) deep.push_back({make_point({std::ldexp(1e-3, -k), 0.0}), make_point({0.0, 1.0})});
    CHECK(ltc_violation(f, ltc_samples(D, deep)) <= 1e-9);
}

TEST_CASE("ltc_fit rejects the exp(-1/|w|^2) target") {
    // tangential discs have radius (log 1/x)^-1/2, so the envelope grows for every nu
    DomainSpec O = make_ex22_Omega_local();
    std::vector<std::pair<CPoint, CPoint>> pairs;
    for (int k = 0; k < 12; ++k) pairs.push_back({make_point({std::ldexp(1e-3, -k), 0.0}), make_point({0.0, 1.0})});
    CHECK_THROWS_AS(ltc_fit(O, pairs), FitError);
}

TEST_CASE("distance bounds: closed forms and errors") {
    CHECK(convex_distance_lower_bound(0.1, 0.4).value == doctest::Approx(0.5 * std::log(4.0)));
    auto u = fr_distance_upper_bound(0.1, 0.2, 0.3, 1.5);
    CHECK(u.value == doctest::Approx(0.5 * std::log(0.4 / 0.1) + 0.5 * std::log(0.5 / 0.2) + 1.5));
    CHECK(pair_lower_bound(0.01, 0.01, 10.0).value < 0.0);  // raw value, not clamped
    CHECK_THROWS_AS(pair_lower_bound(0.0, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(fr_distance_upper_bound(0.1, 0.1, -1.0, 0.0), DomainError);
}

TEST_CASE("property: path estimator dominates the ball distance") {
    DomainSpec B = make_ball(2, 1.0);
    std::mt19937_64 rng(21);
    for (int i = 0; i < 10; ++i) {
        CPoint a = in_ball(rng, 2, 0.9), b = in_ball(rng, 2, 0.9);
        double K = kob_distance_ball_exact(a, b);
        double P = path_distance_upper(B, a, b, {64, 2});
        CHECK(P >= K * (1.0 - 1e-6));
        CHECK(P <= 2.5 * K + 0.5);
    }
}

TEST_CASE("fitted constants certify the exact ball distance") {
    DomainSpec B = make_ball(2, 1.0);
    DistanceEstimator exact = [](const CPoint& a, const CPoint& b) { return kob_distance_ball_exact(a, b); };
    std::vector<std::pair<CPoint, CPoint>> pairs;
    std::mt19937_64 rng(4);
    for (int i = 0; i < 30; ++i) pairs.push_back({in_ball(rng, 2, 0.99), in_ball(rng, 2, 0.99)});
    double C = fit_fr_constant(B, pairs, exact);
    for (const auto& [a, b] : pairs) {
        double ub = fr_distance_upper_bound(1.0 - a.norm(), 1.0 - b.norm(), (a - b).norm(), C).value;
        CHECK(exact(a, b) <= ub + 1e-12);
    }
    std::vector<CPoint> Vq, Vx;
    for (int k = 1; k < 8; ++k) {
        double r = 1.0 - std::ldexp(1.0, -k);
        Vq.push_back(make_point({r, 0.0}));
        Vx.push_back(make_point({0.0, r}));
    }
    auto pc = fit_pair_constant(B, CPoint::Zero(2), Vq, Vx, exact);
    CHECK(pc.K >= pc.K_prime);  // delta(o) = 1, so K = max(0, K')
    for (const auto& q : Vq)
        for (const auto& x : Vx)
            CHECK(exact(q, x) >= pair_lower_bound(1.0 - q.norm(), 1.0 - x.norm(), pc.K).value - 1e-12);
    CHECK_THROWS_AS(fit_pair_constant(B, CPoint::Zero(2), Vq, Vq, exact), DomainError);
}

TEST_CASE("goldilocks quantities") {
    LtcFit f;
    f.nu = 0.5;
    f.c = 2.0;
    Modulus M = ltc_goldilocks_rate(f, 0.5);
    CHECK(M(0.1) == doctest::Approx(std::pow(std::log(10.0), -1.5) / 2.0));
    DomainSpec B = make_ball(2, 1.0);
    std::vector<std::pair<CPoint, CPoint>> s = {{make_point({0.95, 0.0}), make_point({1.0, 0.0})},
                                                {make_point({0.5, 0.0}), make_point({1.0, 0.0})}};
    MetricLowerSource lower = [](const CPoint& w, const CPoint& v) { return kob_metric_ball_exact(w, v); };
    CHECK(goldilocks_M(B, 0.1, lower, s) == doctest::Approx(1.0 - 0.95 * 0.95));
    CHECK(localization_gap(1.5, 1.0) == doctest::Approx(0.5));
}
