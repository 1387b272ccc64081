#pragma once

#include <Eigen/Dense>
#include <complex>
#include <initializer_list>
#include <string>

namespace kobex {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 8;

// Points of C^n with n <= kMaxDim; storage is inline, no heap.
using CPoint = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

CPoint make_point(std::initializer_list<cplx> coords);
CPoint unit(int n, int k);

// <a,b> = sum a_k conj(b_k)
inline cplx herm(const CPoint& a, const CPoint& b) {
    cplx s = 0.0;
    for (int k = 0; k < a.size(); ++k) s += a[k] * std::conj(b[k]);
    return s;
}

inline double norm(const CPoint& z) { return z.norm(); }

// Real layout (Re z1, Im z1, Re z2, Im z2, ...).
RVec to_real(const CPoint& z);
CPoint from_real(const RVec& x);

bool all_finite(const CPoint& z);
void require_dim(const CPoint& z, int n, const char* what);

std::string to_string(const CPoint& z);

}  // namespace kobex
