#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kobex/domain.hpp"

namespace kobex {

DomainSpec make_ball(int n, double radius = 1.0);
DomainSpec make_ball_at(const CPoint& center, double radius);
DomainSpec make_polydisc(const std::vector<double>& radii);
// {Re z1 < 0} intersected with B(0, radius)
DomainSpec make_halfspace_ball(int n, double radius);

// {|z|^2 + |w| < 1}
DomainSpec make_ex21_D();
// {|z| + |w| < 1}
DomainSpec make_ex21_Omega();
// {Re z > phi(|w|^2)} and {|z|^2 + |w|^4 < 1}, phi(x) = exp(-1/x^2)
DomainSpec make_ex22_D();
// {Re z > phi(|w|)} and B(0,1)
DomainSpec make_ex22_Omega();
// Ex22 Omega intersected with B(0, r); convex for r^2 < 2/3.
DomainSpec make_ex22_Omega_local(double r = 0.5);
// {Re z > exp(-|w|^-a)} and B(0, r); convex for |w| < (a/(a+1))^(1/a).
DomainSpec make_ltc_model_local(double a = 0.5, double r = 0.1);

// Constraint phi(|w_k|) - Re z_j with a 1-D nearest-point reduction.
Constraint radial_graph_constraint(int n, int j, int k, std::function<double(double)> phi,
                                   std::function<double(double)> dphi, std::string label);

DomainSpec bundled_domain(const std::string& name);
std::vector<std::string> bundled_domain_names();

}  // namespace kobex
