// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "qpat/grid.hpp"

namespace qpat {

/// Components of a gradient along grid axes 0 and 1 of a 2D grid.
struct GradientField2D {
    ScalarField axis0;
    ScalarField axis1;
};

struct GridNode2D {
    std::size_t i = 0;
    std::size_t j = 0;
};

enum class StaircaseOrder {
    AxisZeroFirst, ///< walk along axis 0 from the anchor, then along axis 1
    AxisOneFirst,  ///< walk along axis 1 from the anchor, then along axis 0
};

/// Trapezoid integration of `gradient` along one staircase family starting
/// at `anchor`. Paths stop where they leave the mask; `reached` marks the
/// nodes this family could get to. Unreached nodes hold 0.
ScalarField staircase_integrate(const GradientField2D& gradient, const Mask& mask,
                                GridNode2D anchor, double anchor_value, StaircaseOrder order,
                                Mask& reached);

struct PathIntegral {
    ScalarField potential;              ///< 0 outside the mask
    double max_path_discrepancy = 0.0;  ///< max |axis0-first - axis1-first|
    std::size_t averaged_nodes = 0;     ///< reached by both staircases
    std::size_t single_path_nodes = 0;  ///< reached by exactly one staircase
    std::size_t flood_nodes = 0;        ///< filled by breadth-first fallback
};

/// Potential whose gradient matches `gradient` on a connected mask. Nodes
/// reached by both staircase families take the mean of the two; nodes
/// neither reaches are filled breadth-first from integrated neighbours.
/// Throws AnchorOutsideSupport or DisconnectedMask.
PathIntegral gradient_path_integrate(const GradientField2D& gradient, const Mask& mask,
                                     GridNode2D anchor, double anchor_value);

/// Nodes of `mask` 4-connected to `anchor` (empty if the anchor is outside).
Mask connected_component(const Mask& mask, GridNode2D anchor);

}  // namespace qpat
