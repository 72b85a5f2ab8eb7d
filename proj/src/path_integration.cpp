// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/path_integration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "qpat/error.hpp"

namespace qpat {

namespace {

struct Walker {
    const GradientField2D& gradient;
    const Mask& mask;
    std::size_t ny;
    double h0;
    double h1;

    /// Value at `to` given the value at the 4-neighbour `from`.
    double step(std::size_t from, std::size_t to, double value) const
    {
        if (to + ny == from || from + ny == to) {
            const double sign = to > from ? 1.0 : -1.0;
            return value + sign * 0.5 * h0 * (gradient.axis0[from] + gradient.axis0[to]);
        }
        const double sign = to > from ? 1.0 : -1.0;
        return value + sign * 0.5 * h1 * (gradient.axis1[from] + gradient.axis1[to]);
    }

    /// Integrates outward from `start` along a line in both directions.
    void sweep(const GridLine& line, std::size_t start_k, std::vector<double>& value,
               Mask& reached) const
    {
        for (std::size_t k = start_k + 1; k < line.count && mask.contains(line[k]); ++k) {
            value[line[k]] = step(line[k - 1], line[k], value[line[k - 1]]);
            reached.values[line[k]] = 1;
        }
        for (std::size_t k = start_k; k-- > 0 && mask.contains(line[k]);) {
            value[line[k]] = step(line[k + 1], line[k], value[line[k + 1]]);
            reached.values[line[k]] = 1;
        }
    }
};

void require_2d(const GradientField2D& gradient, const Mask& mask)
{
    const auto& g = mask.geometry;
    if (g.rank() != 2) {
        throw Error(ErrorCode::InvalidGeometry, "path integration is 2D only");
    }
    require_same_geometry(g, gradient.axis0.geometry(), "gradient axis 0");
    require_same_geometry(g, gradient.axis1.geometry(), "gradient axis 1");
}

std::size_t anchor_index(const GridGeometry& g, GridNode2D anchor)
{
    if (anchor.i >= g.dim(0) || anchor.j >= g.dim(1)) {
        throw Error(ErrorCode::AnchorOutsideSupport, "anchor lies outside the grid");
    }
    return anchor.i * g.dim(1) + anchor.j;
}

template <class Visit>
void for_each_neighbour(const GridGeometry& g, std::size_t n, Visit&& visit)
{
    const std::size_t ny = g.dim(1);
    const std::size_t i = n / ny;
    const std::size_t j = n % ny;
    if (i > 0) visit(n - ny);
    if (i + 1 < g.dim(0)) visit(n + ny);
    if (j > 0) visit(n - 1);
    if (j + 1 < ny) visit(n + 1);
}

}  // namespace

ScalarField staircase_integrate(const GradientField2D& gradient, const Mask& mask,
                                GridNode2D anchor, double anchor_value, StaircaseOrder order,
                                Mask& reached)
{
    require_2d(gradient, mask);
    const auto& g = mask.geometry;
    const std::size_t start = anchor_index(g, anchor);
    if (!mask.contains(start)) {
        throw Error(ErrorCode::AnchorOutsideSupport, "anchor is not in the integration mask");
    }
    const Walker walker{gradient, mask, g.dim(1), g.spacing(0), g.spacing(1)};
    const std::size_t first_axis = order == StaircaseOrder::AxisZeroFirst ? 0 : 1;
    const std::size_t second_axis = 1 - first_axis;

    std::vector<double> value(g.size(), 0.0);
    reached = Mask::empty(g);
    value[start] = anchor_value;
    reached.values[start] = 1;

    const GridLine spine = g.line(first_axis, g.transverse_index(first_axis, start));
    const std::size_t anchor_k = first_axis == 0 ? anchor.i : anchor.j;
    walker.sweep(spine, anchor_k, value, reached);

    const std::size_t branch_k = first_axis == 0 ? anchor.j : anchor.i;
    for (std::size_t k = 0; k < spine.count; ++k) {
        const std::size_t root = spine[k];
        if (!reached.contains(root)) {
            continue;
        }
        walker.sweep(g.line(second_axis, g.transverse_index(second_axis, root)), branch_k, value,
                     reached);
    }
    return ScalarField(g, std::move(value));
}

PathIntegral gradient_path_integrate(const GradientField2D& gradient, const Mask& mask,
                                     GridNode2D anchor, double anchor_value)
{
    require_2d(gradient, mask);
    const auto& g = mask.geometry;
    Mask reached_a;
    Mask reached_b;
    const ScalarField a = staircase_integrate(gradient, mask, anchor, anchor_value,
                                              StaircaseOrder::AxisZeroFirst, reached_a);
    const ScalarField b = staircase_integrate(gradient, mask, anchor, anchor_value,
                                              StaircaseOrder::AxisOneFirst, reached_b);

    PathIntegral result;
    std::vector<double> value(g.size(), 0.0);
    Mask done = Mask::empty(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const bool in_a = reached_a.contains(n);
        const bool in_b = reached_b.contains(n);
        if (in_a && in_b) {
            value[n] = 0.5 * (a[n] + b[n]);
            result.max_path_discrepancy = std::max(result.max_path_discrepancy, std::abs(a[n] - b[n]));
            ++result.averaged_nodes;
        } else if (in_a || in_b) {
            value[n] = in_a ? a[n] : b[n];
            ++result.single_path_nodes;
        } else {
            continue;
        }
        done.values[n] = 1;
    }

    const Walker walker{gradient, mask, g.dim(1), g.spacing(0), g.spacing(1)};
    std::deque<std::size_t> queue;
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (done.contains(n)) {
            queue.push_back(n);
        }
    }
    while (!queue.empty()) {
        const std::size_t n = queue.front();
        queue.pop_front();
        for_each_neighbour(g, n, [&](std::size_t m) {
            if (mask.contains(m) && !done.contains(m)) {
                value[m] = walker.step(n, m, value[n]);
                done.values[m] = 1;
                ++result.flood_nodes;
                queue.push_back(m);
            }
        });
    }

    for (std::size_t n = 0; n < g.size(); ++n) {
        if (mask.contains(n) && !done.contains(n)) {
            throw Error(ErrorCode::DisconnectedMask,
                        "mask node " + std::to_string(n) + " is not connected to the anchor");
        }
    }
    result.potential = ScalarField(g, std::move(value));
    return result;
}

Mask connected_component(const Mask& mask, GridNode2D anchor)
{
    const auto& g = mask.geometry;
    Mask component = Mask::empty(g);
    if (g.rank() != 2 || anchor.i >= g.dim(0) || anchor.j >= g.dim(1)) {
        return component;
    }
    const std::size_t start = anchor.i * g.dim(1) + anchor.j;
    if (!mask.contains(start)) {
        return component;
    }
    std::deque<std::size_t> queue{start};
    component.values[start] = 1;
    while (!queue.empty()) {
        const std::size_t n = queue.front();
        queue.pop_front();
        for_each_neighbour(g, n, [&](std::size_t m) {
            if (mask.contains(m) && !component.contains(m)) {
                component.values[m] = 1;
                queue.push_back(m);
            }
        });
    }
    return component;
}

}  // namespace qpat
