#pragma once

#include <functional>

#include "quadrics/quadric_system.hpp"

namespace quadrics::test {

// central finite difference of a scalar function at x
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
    Vector g(x.size());
    for (long i = 0; i < x.size(); ++i) {
        Vector hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        g[i] = (f(hi) - f(lo)) / (2.0 * h);
    }
    return g;
}

// central finite difference of a vector-valued function; row k is d f_k / d x
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
    const Vector f0 = f(x);
    Matrix jac(f0.size(), x.size());
    for (long i = 0; i < x.size(); ++i) {
        Vector hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        jac.col(i) = (f(hi) - f(lo)) / (2.0 * h);
    }
    return jac;
}

inline double rel_error(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double rel_error(const Matrix& got, const Matrix& want) {
    return (got - want).norm() / std::max(1.0, want.norm());
}

inline double rel_error(const Vector& got, const Vector& want) {
    return (got - want).norm() / std::max(1.0, want.norm());
}

} // namespace quadrics::test
