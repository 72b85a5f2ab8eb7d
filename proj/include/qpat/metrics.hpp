// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "qpat/grid.hpp"

namespace qpat {

/// Error norms of a reconstruction against ground truth, over the whole grid
/// and over a mask. Relative errors fall back to the absolute L2 error when
/// the truth norm on that set is zero; `truth_l2` lets callers tell.
struct MetricsReport {
    double rel_l2 = 0.0;
    double max_abs = 0.0;
    double truth_l2 = 0.0;
    std::size_t count = 0;

    double masked_rel_l2 = 0.0;
    double masked_max_abs = 0.0;
    double masked_truth_l2 = 0.0;
    std::size_t masked_count = 0;
};

MetricsReport field_metrics(const ScalarField& recon, const ScalarField& truth, const Mask& mask);

}  // namespace qpat
