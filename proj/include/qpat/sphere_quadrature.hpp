// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace qpat {

struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
GaussLegendre gauss_legendre(std::size_t n);

using Vec3 = std::array<double, 3>;

/// Product rule on the unit sphere: `order` Gauss-Legendre nodes in the
/// polar cosine times 2*order uniform azimuths. Exact for polynomials of
/// degree < 2*order.
struct SphereRule {
    std::vector<Vec3> points;
    std::vector<double> weights;
};

SphereRule sphere_rule(std::size_t order);

/// Integral over S^2 of <s, dir>^2.
double sphere_second_moment(std::size_t order, const Vec3& direction);
/// Integral over S^2 of <s, dir> s; equals (4 pi / 3) dir.
Vec3 sphere_projection_moment(std::size_t order, const Vec3& direction);
/// Integral over S^2 of <s, dir>, which vanishes.
double sphere_first_moment(std::size_t order, const Vec3& direction);

/// Largest |sphere_second_moment - 4 pi / 3| over a fixed set of directions
/// (the three axes and four oblique unit vectors). Requires order >= 2.
double sphere_moment_check(std::size_t order);

}  // namespace qpat
