#include "kobex/cpoint.hpp"

#include <cmath>
#include <cstdio>

#include "kobex/error.hpp"

namespace kobex {

CPoint make_point(std::initializer_list<cplx> coords) {
    if (coords.size() == 0 || coords.size() > static_cast<std::size_t>(kMaxDim))
        throw DimensionError("point dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    CPoint z(static_cast<int>(coords.size()));
    int k = 0;
    for (cplx c : coords) z[k++] = c;
    return z;
}

CPoint unit(int n, int k) {
    CPoint e = CPoint::Zero(n);
    e[k] = 1.0;
    return e;
}

RVec to_real(const CPoint& z) {
    RVec x(2 * z.size());
    for (int k = 0; k < z.size(); ++k) {
        x[2 * k] = z[k].real();
        x[2 * k + 1] = z[k].imag();
    }
    return x;
}

CPoint from_real(const RVec& x) {
    CPoint z(x.size() / 2);
    for (int k = 0; k < z.size(); ++k) z[k] = cplx(x[2 * k], x[2 * k + 1]);
    return z;
}

bool all_finite(const CPoint& z) {
    for (int k = 0; k < z.size(); ++k)
        if (!std::isfinite(z[k].real()) || !std::isfinite(z[k].imag())) return false;
    return true;
}

void require_dim(const CPoint& z, int n, const char* what) {
    if (z.size() != n)
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(n) + ", got " +
                             std::to_string(z.size()));
}

std::string to_string(const CPoint& z) {
    std::string s = "(";
    char buf[64];
    for (int k = 0; k < z.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%.10g%+.10gi", k ? ", " : "", z[k].real(), z[k].imag());
        s += buf;
    }
    return s + ")";
}

}  // namespace kobex
