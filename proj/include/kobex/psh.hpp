#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kobex/domain.hpp"
#include "kobex/regularity.hpp"

namespace kobex {

struct PshWitness {
    std::string name;
    std::function<double(const CPoint&)> u;
    // H_jk = d^2 u / dz_j dzbar_k; empty means finite differences.
    std::function<CMat(const CPoint&)> hessian;
    // du/dx_k + i du/dy_k; used by the finite-difference Levi form. Empty: second differences of u.
    std::function<std::optional<CPoint>(const CPoint&)> gradient;
    // Empty means smooth everywhere.
    std::function<bool(const CPoint&)> smooth_locus;
};

struct LeviDetail {
    double value = 0.0;  // analytic when available, else the finite-difference value
    std::optional<double> analytic;
    double fd = 0.0;       // step h
    double fd_half = 0.0;  // step h/2
    double h = 0.0;
};

// sum_jk H_jk v_j conj(v_k)
double levi_form(const PshWitness& u, const CPoint& z, const CPoint& v);
LeviDetail levi_form_detail(const PshWitness& u, const CPoint& z, const CPoint& v);
// Finite differences only, step h (0 means 1e-5 (1 + |z|)).
double levi_form_fd(const PshWitness& u, const CPoint& z, const CPoint& v, double h = 0.0);

struct PshReport {
    int evaluated = 0;
    int violations = 0;
    int nonsmooth_skipped = 0;
    int positive_values = 0;  // samples where u >= 0
    double min_levi = std::numeric_limits<double>::infinity();
    CPoint min_at, min_dir;
    double threshold = -1e-8;
};

// Levi form along e_1..e_n and `random_dirs` seeded unit directions at every sample.
PshReport check_psh(const PshWitness& u, const DomainSpec& D, const std::vector<CPoint>& samples,
                    int random_dirs = 4, std::uint64_t seed = 1);

struct HopfFit {
    double C = 0.0;
    double alpha = 1.0;
    bool alpha_fixed = true;
    double slope = 0.0;      // least-squares slope of log|phi| against log delta
    double residual = 0.0;   // max phi + C delta^alpha over the evaluation set
    double ratio_max = 0.0;  // max |phi|/delta^alpha, for reference
    int bands = 0;
    int samples = 0;
};

struct HopfSample {
    double phi;    // value of the witness, < 0
    double delta;  // boundary distance
};

// fixed_alpha empty: fit mode. Residual is evaluated on `holdout` when given.
HopfFit hopf_fit(const std::vector<HopfSample>& fit_set, std::optional<double> fixed_alpha,
                 const std::vector<HopfSample>& holdout = {});
HopfFit hopf_fit(const PshWitness& phi, const DomainSpec& D, const std::vector<CPoint>& samples,
                 std::optional<double> fixed_alpha, const std::vector<CPoint>& holdout = {});
int dyadic_band_count(const std::vector<HopfSample>& s);

struct Step1Constants {
    double C;
    double C_tilde;
};
Step1Constants step1_constant_ex21();

struct LagrangeResiduals {
    double r1;
    double r2;
};
LagrangeResiduals lagrange_residuals(double x0, double y0, double X, double Y);
// Root of 2X^3 + (2y0 - 1)X - x0 in (x0, 1).
double lagrange_root(double x0, double y0);
// sqrt((X - x0)^2 + (Y - y0)^2) at the Lagrange root, Y = 1 - X^2.
double min_S(double x0, double y0);

struct FiberMap {
    std::string name;
    std::function<CPoint(const CPoint&)> forward;
    std::function<std::vector<CPoint>(const CPoint&)> fiber;
    // J_jk = dF_j/dz_k; optional.
    std::function<CMat(const CPoint&)> jacobian;
};

double pushforward_tau(const FiberMap& F, const PshWitness& rho, const CPoint& w);

// psi(y) = (C/y) M(C y^(s/alpha_star))
double psi_bound(const Modulus& M, double s, double alpha_star, double C, double y);
// int_0^t psi, as the Dini integral of y -> C M(C y^(s/alpha_star)).
DiniResult psi_tail(const Modulus& M, double s, double alpha_star, double C, double t);

// Bundled witnesses and maps.
PshWitness ex21_rho(double C_tilde);          // C~ (|z|^2 + |w| - 1)
PshWitness ex21_u();                          // |z| + |w| - 1
PshWitness ex22_rho();                        // exp(-1/|w|^4) - Re z
PshWitness ball_defining(int n);              // |z|^2 - 1
PshWitness scaled(const PshWitness& u, double c);
FiberMap ex21_map();                          // (z^2, w)
FiberMap ex22_map();                          // (z, w^2)
FiberMap identity_map(int n);

// d^2/dw dwbar of exp(-1/|w|^4)
double ex22_levi_formula(const CPoint& z);

}  // namespace kobex
