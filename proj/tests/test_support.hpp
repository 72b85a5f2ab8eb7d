// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "qpat/grid.hpp"
#include "qpat/rng.hpp"

namespace qpat::testing {

/// Samples f(x, y) at the nodes of a 2D grid.
inline ScalarField sample(const GridGeometry& g, const std::function<double(double, double)>& f)
{
    std::vector<double> values(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto idx = g.unravel(n);
        values[n] = f(g.coordinate(0, idx[0]), g.coordinate(1, idx[1]));
    }
    return ScalarField(g, std::move(values));
}

inline ScalarField random_field(const GridGeometry& g, XorShift64Star& rng, double lo, double hi)
{
    std::vector<double> values(g.size());
    for (auto& v : values) {
        v = rng.uniform(lo, hi);
    }
    return ScalarField(g, std::move(values));
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b)
{
    double worst = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        worst = std::max(worst, std::abs(a[n] - b[n]));
    }
    return worst;
}

/// Composite trapezoid of f on [a, b] with `panels` panels.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int panels)
{
    const double h = (b - a) / panels;
    double sum = 0.5 * (f(a) + f(b));
    for (int k = 1; k < panels; ++k) {
        sum += f(a + k * h);
    }
    return sum * h;
}

}  // namespace qpat::testing
