#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kobex/domain.hpp"
#include "kobex/psh.hpp"
#include "kobex/regularity.hpp"

namespace kobex {

// F~ = F o (U^p)^-1, evaluated in chart coordinates.
struct ChartMap {
    GraphChart chart;
    FiberMap map;

    CPoint value(const CPoint& Z) const;
    // dF~/dZ_n: chain rule through the Jacobian when present, else Cauchy differentiation.
    CPoint dZn(const CPoint& Z) const;
    // Cauchy integral on the circle of radius min(1e-3, Y(Z)/2) in the Z_n variable.
    CPoint dZn_cauchy(const CPoint& Z) const;
};

ChartMap chart_map(const GraphChart& chart, const FiberMap& F);
// Max relative gap between the derivative oracle and central complex differences at Z.
double cauchy_riemann_gap(const ChartMap& m, const CPoint& Z);

// Derivative bound psi and its tail t -> int_0^t psi.
struct PsiSpec {
    std::string label;
    std::function<double(double)> psi;
    std::function<double(double)> tail;

    // psi(y) = coef y^-e with 0 <= e < 1
    static PsiSpec power(double coef, double e);
    // psi(y) = (C/y) M(C y^(s/alpha_star)); tail from the Dini integral.
    static PsiSpec from_modulus(const Modulus& M, double s, double alpha_star, double C);
};

// Sibony constant of the target {|z| + |w| < 1}, max(1/beta, 2 sqrt 2) with beta = sqrt(c/alpha) / 2^(1/4), c = 1/4.
double ex21_sibony_constant();
// psi(y) = (C/y) c~ sqrt(C y); C covers the chart sandwich and the Hopf step for {|z|^2 + |w| < 1}.
PsiSpec ex21_psi(const GraphChart& chart);

struct LineIntegral {
    CPoint value;
    double error = 0.0;
    int panels = 0;
};

// int_t^t' i dF~_j/dZ_n (xi + x e) dx, e = (0, ..., 0, i), on dyadic panels toward t.
LineIntegral normal_line_integral(const ChartMap& m, const CPoint& xi, double t, double t_prime, const PsiSpec& psi);

struct ExtensionResult {
    CPoint xi;
    CPoint value;
    double t_prime = 0.0;
    double t_final = 0.0;     // last ladder rung
    double tail_bound = 0.0;  // int_0^t' psi
    double truncation = 0.0;  // int_0^t_final psi
    double quad_error = 0.0;
    CPoint lifted;            // F~(xi + t' e)
    bool interior = false;    // interior grid point: value is F~ itself
};

ExtensionResult boundary_value(const ChartMap& m, const CPoint& xi, double t_prime, double tol, const PsiSpec& psi);

// Boundary points with Im Z1 = 0 on an nx x ny grid over (Re Z1, Re Z_n) in [-half, half]^2.
std::vector<CPoint> chart_boundary_grid(const GraphChart& chart, int nx, int ny, double half);
// Half the distance from the points to the edge of the chart box.
double grid_margin(const GraphChart& chart, const std::vector<CPoint>& Zs);

std::vector<ExtensionResult> extend_map(const ChartMap& m, const std::vector<CPoint>& Zs, double tol,
                                        const PsiSpec& psi);

struct ContinuityReport {
    int pairs = 0;
    int violations = 0;        // observed deviation above the three-term bound
    double worst_excess = 0.0; // max observed - bound
    Modulus modulus;           // r -> max deviation over pairs at distance <= r
    double modulus_small = 0.0;
    double modulus_large = 0.0;
};

// tail_scale multiplies the psi tail budget in the bound 2 tail(t') + |F~(W1) - F~(W2)|.
ContinuityReport continuity_modulus(const std::vector<ExtensionResult>& results, double tail_scale = 1.0);

CPoint project_to_boundary(const GraphChart& chart, const CPoint& Z);

std::vector<CPoint> cluster_set_sample(const std::function<CPoint(const CPoint&)>& F, const CPoint& p,
                                       const std::vector<std::vector<CPoint>>& sequences, double radius = 1e-3);

enum class DichotomyMode { pair, convex };

struct DichotomySequences {
    std::vector<CPoint> z1, z2;  // in D
    std::vector<CPoint> w1, w2;  // images
    double C = 0.0;              // upper bound constant of the source distance
    double K = 0.0;              // lower bound constant of the target distance
    double C0 = 1.0;             // Hopf constant of the target
};

struct DichotomyRow {
    int nu = 0;
    double dD1 = 0, dD2 = 0, sep = 0, dO1 = 0, dO2 = 0;
    double U = 0, L = 0, l = 0;
    double bridge = 0;       // min_j delta_D(z_j) - C0 delta_Omega(w_j)
    double consistency = 0;  // U - L
    double slack = 0;        // K + C - log C0 - l (pair mode)
    bool consistent = true;
};

struct DichotomyReport {
    DichotomyMode mode = DichotomyMode::pair;
    std::vector<DichotomyRow> rows;
    int first_failure = -1;
    bool l_monotone = true;
    bool degenerate_flat = false;
};

DichotomyReport dichotomy_report(const DomainSpec& D, const DomainSpec& Omega, const DichotomySequences& s,
                                 DichotomyMode mode, double tol = 1e-9);

// Ball sequences converging to (1,0) whose images go to (1,0) and (0,1).
DichotomySequences ball_dichotomy_sequences(int terms);
// Sequences in {Re z > exp(-1/|w|^4)} along the inward normal at p = 0, mapped by (z, w^2).
DichotomySequences ex22_normal_sequences(int terms);

}  // namespace kobex
