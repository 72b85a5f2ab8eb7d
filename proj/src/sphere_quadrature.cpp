// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/sphere_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpat/error.hpp"

namespace qpat {

namespace {

Vec3 normalized(Vec3 v)
{
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / norm, v[1] / norm, v[2] / norm};
}

double dot(const Vec3& a, const Vec3& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

GaussLegendre gauss_legendre(std::size_t n)
{
    if (n == 0) {
        throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre order must be >= 1");
    }
    GaussLegendre rule{std::vector<double>(n), std::vector<double>(n)};
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n starting from the Tricomi approximation.
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double derivative = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            derivative = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / derivative;
            x -= step;
            if (std::abs(step) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

SphereRule sphere_rule(std::size_t order)
{
    if (order < 2) {
        throw Error(ErrorCode::InvalidArgument, "sphere quadrature order must be >= 2");
    }
    const GaussLegendre polar = gauss_legendre(order);
    const std::size_t azimuths = 2 * order;
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(azimuths);
    SphereRule rule;
    for (std::size_t i = 0; i < order; ++i) {
        const double z = polar.nodes[i];
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (std::size_t k = 0; k < azimuths; ++k) {
            const double phi = dphi * static_cast<double>(k);
            rule.points.push_back({r * std::cos(phi), r * std::sin(phi), z});
            rule.weights.push_back(polar.weights[i] * dphi);
        }
    }
    return rule;
}

double sphere_second_moment(std::size_t order, const Vec3& direction)
{
    const SphereRule rule = sphere_rule(order);
    const Vec3 d = normalized(direction);
    double total = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double c = dot(rule.points[q], d);
        total += rule.weights[q] * c * c;
    }
    return total;
}

Vec3 sphere_projection_moment(std::size_t order, const Vec3& direction)
{
    const SphereRule rule = sphere_rule(order);
    const Vec3 d = normalized(direction);
    Vec3 total{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double c = dot(rule.points[q], d);
        for (int k = 0; k < 3; ++k) {
            total[k] += rule.weights[q] * c * rule.points[q][k];
        }
    }
    return total;
}

double sphere_first_moment(std::size_t order, const Vec3& direction)
{
    const SphereRule rule = sphere_rule(order);
    const Vec3 d = normalized(direction);
    double total = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        total += rule.weights[q] * dot(rule.points[q], d);
    }
    return total;
}

double sphere_moment_check(std::size_t order)
{
    static const Vec3 directions[] = {
        {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0},   {1.0, 1.0, 1.0},
        {1.0, -2.0, 0.5}, {-0.3, 0.7, -0.2}, {0.9, 0.1, -1.4},
    };
    const double exact = 4.0 * std::numbers::pi / 3.0;
    double worst = 0.0;
    for (const auto& d : directions) {
        worst = std::max(worst, std::abs(sphere_second_moment(order, d) - exact));
    }
    return worst;
}

}  // namespace qpat
