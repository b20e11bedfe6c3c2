#pragma once

// Shared fixtures: the reference geometry used across the suite (unit-area box
// with mean level density 1) and small numeric oracles kept deliberately
// independent of the library implementations they check.

#include <cmath>
#include <numbers>
#include <vector>

#include <billiard/billiard.hpp>

namespace testing_fixtures {

inline billiard::RectangleBilliard ref_box() {
    return {std::numbers::pi / 3.0, 3.0 / std::numbers::pi, 2.0 * std::numbers::pi};
}

inline billiard::Point ref_position() { return {0.622482, 0.275835}; }

inline billiard::RectImpurity ref_impurity(double u1) {
    billiard::RectImpurity imp;
    imp.center = ref_position();
    imp.dlx = 3.53830e-2;
    imp.dly = 3.14023e-2;
    imp.u1 = u1;
    return imp;
}

// Midpoint-rule quadrature of f over the box on an nx x ny grid of cell
// centers.  For products of the box sine modes this rule is exact up to
// rounding once nx, ny exceed the mode index sums.
template <class F>
double midpoint_quad2d(const billiard::RectangleBilliard& b, std::size_t nx, std::size_t ny,
                       F&& f) {
    const double hx = b.lx / static_cast<double>(nx);
    const double hy = b.ly / static_cast<double>(ny);
    double sum = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
        const double y = (static_cast<double>(j) + 0.5) * hy;
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = (static_cast<double>(i) + 0.5) * hx;
            sum += f(x, y);
        }
    }
    return sum * hx * hy;
}

// Midpoint-rule quadrature of f over [lo, hi] with n points.
template <class F>
double midpoint_quad1d(double lo, double hi, std::size_t n, F&& f) {
    const double h = (hi - lo) / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += f(lo + (static_cast<double>(i) + 0.5) * h);
    return sum * h;
}

}  // namespace testing_fixtures
