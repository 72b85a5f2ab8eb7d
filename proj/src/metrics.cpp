// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "qpat/error.hpp"

namespace qpat {

namespace {

struct Accumulator {
    double diff2 = 0.0;
    double truth2 = 0.0;
    double max_abs = 0.0;
    std::size_t count = 0;

    void add(double r, double t)
    {
        const double d = r - t;
        diff2 += d * d;
        truth2 += t * t;
        max_abs = std::max(max_abs, std::abs(d));
        ++count;
    }

    double rel_l2() const
    {
        const double diff = std::sqrt(diff2);
        const double truth = std::sqrt(truth2);
        return truth > 0.0 ? diff / truth : diff;
    }
};

}  // namespace

MetricsReport field_metrics(const ScalarField& recon, const ScalarField& truth, const Mask& mask)
{
    require_same_geometry(recon.geometry(), truth.geometry(), "metrics");
    require_same_geometry(recon.geometry(), mask.geometry, "metrics mask");
    if (mask.count() == 0) {
        throw Error(ErrorCode::EmptyMask, "metrics need a nonempty mask");
    }

    Accumulator all;
    Accumulator masked;
    for (std::size_t n = 0; n < recon.size(); ++n) {
        all.add(recon[n], truth[n]);
        if (mask.contains(n)) {
            masked.add(recon[n], truth[n]);
        }
    }

    MetricsReport report;
    report.rel_l2 = all.rel_l2();
    report.max_abs = all.max_abs;
    report.truth_l2 = std::sqrt(all.truth2);
    report.count = all.count;
    report.masked_rel_l2 = masked.rel_l2();
    report.masked_max_abs = masked.max_abs;
    report.masked_truth_l2 = std::sqrt(masked.truth2);
    report.masked_count = masked.count;
    return report;
}

}  // namespace qpat
