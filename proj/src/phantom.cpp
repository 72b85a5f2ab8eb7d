// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpat/error.hpp"
#include "qpat/rng.hpp"

namespace qpat {

namespace {

void require(bool ok, const std::string& message)
{
    if (!ok) {
        throw Error(ErrorCode::InvalidArgument, message);
    }
}

void validate_coefficients(const Coefficients& c, const std::string& prefix)
{
    require(std::isfinite(c.gamma) && c.gamma > 0.0, prefix + "gamma must be > 0");
    require(std::isfinite(c.mu_a) && c.mu_a >= 0.0, prefix + "mu_a must be >= 0");
    require(std::isfinite(c.mu_s) && c.mu_s >= 0.0, prefix + "mu_s must be >= 0");
}

void validate_range(const Range& r, const std::string& name)
{
    require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo >= 0.0 && r.hi >= r.lo,
            name + " range must satisfy 0 <= lo <= hi");
}

struct Blob {
    std::array<double, 3> centre{};
    double width = 0.0;
    Coefficients amplitude;
};

}  // namespace

Phantom::Phantom(ScalarField gamma, ScalarField mu_a, ScalarField mu_s)
    : gamma_(std::move(gamma)), mu_a_(std::move(mu_a)), mu_s_(std::move(mu_s))
{
    require_same_geometry(gamma_.geometry(), mu_a_.geometry(), "phantom mu_a");
    require_same_geometry(gamma_.geometry(), mu_s_.geometry(), "phantom mu_s");
    require(gamma_.min() > 0.0, "phantom gamma must be > 0 everywhere");
    require(mu_a_.min() >= 0.0, "phantom mu_a must be >= 0 everywhere");
    require(mu_s_.min() >= 0.0, "phantom mu_s must be >= 0 everywhere");
}

ScalarField Phantom::mu_t() const
{
    std::vector<double> values(mu_a_.size());
    for (std::size_t n = 0; n < values.size(); ++n) {
        values[n] = mu_a_[n] + mu_s_[n];
    }
    return ScalarField(geometry(), std::move(values));
}

ScalarField Phantom::gamma_mu_a() const
{
    std::vector<double> values(mu_a_.size());
    for (std::size_t n = 0; n < values.size(); ++n) {
        values[n] = gamma_[n] * mu_a_[n];
    }
    return ScalarField(geometry(), std::move(values));
}

std::string_view to_string(PhantomKind kind)
{
    switch (kind) {
    case PhantomKind::Uniform: return "uniform";
    case PhantomKind::GaussianBlobs: return "gaussian-blobs";
    case PhantomKind::Slab: return "slab";
    case PhantomKind::Checker: return "checker";
    }
    return "uniform";
}

PhantomKind parse_phantom_kind(std::string_view name)
{
    for (auto kind : {PhantomKind::Uniform, PhantomKind::GaussianBlobs, PhantomKind::Slab,
                      PhantomKind::Checker}) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown phantom kind '" + std::string(name) + "'");
}

void validate(const PhantomSpec& spec)
{
    require(spec.geometry.size() > 0, "phantom geometry is empty");
    validate_coefficients(spec.inside, "");
    validate_coefficients(spec.background, "background ");
    switch (spec.kind) {
    case PhantomKind::Uniform:
        break;
    case PhantomKind::Slab:
        require(spec.slab_axis < spec.geometry.rank(), "slab axis out of range");
        require(spec.slab_lo >= 0.0 && spec.slab_hi <= 1.0 && spec.slab_lo <= spec.slab_hi,
                "slab band must satisfy 0 <= lo <= hi <= 1");
        break;
    case PhantomKind::Checker:
        require(spec.checker_cells >= 1, "checker cells must be >= 1");
        break;
    case PhantomKind::GaussianBlobs:
        validate_range(spec.blob_gamma, "blob gamma");
        validate_range(spec.blob_mu_a, "blob mu_a");
        validate_range(spec.blob_mu_s, "blob mu_s");
        validate_range(spec.blob_width, "blob width");
        require(spec.blob_width.lo > 0.0, "blob width must be > 0");
        require(spec.blob_margin >= 0.0 && spec.blob_margin < 0.5,
                "blob margin must lie in [0, 0.5)");
        break;
    }
}

Phantom make_phantom(const PhantomSpec& spec)
{
    validate(spec);
    const auto& geometry = spec.geometry;
    const std::size_t rank = geometry.rank();
    std::vector<double> gamma(geometry.size());
    std::vector<double> mu_a(geometry.size());
    std::vector<double> mu_s(geometry.size());

    auto assign = [&](std::size_t n, const Coefficients& c) {
        gamma[n] = c.gamma;
        mu_a[n] = c.mu_a;
        mu_s[n] = c.mu_s;
    };

    switch (spec.kind) {
    case PhantomKind::Uniform:
        for (std::size_t n = 0; n < geometry.size(); ++n) {
            assign(n, spec.inside);
        }
        break;

    case PhantomKind::Slab: {
        const std::size_t axis = spec.slab_axis;
        const double length = geometry.extent(axis);
        const double tol = 1e-12 * length;
        const double lo = geometry.origin()[axis] + spec.slab_lo * length - tol;
        const double hi = geometry.origin()[axis] + spec.slab_hi * length + tol;
        for (std::size_t n = 0; n < geometry.size(); ++n) {
            const double x = geometry.coordinate(axis, geometry.unravel(n)[axis]);
            assign(n, (x >= lo && x <= hi) ? spec.inside : spec.background);
        }
        break;
    }

    case PhantomKind::Checker:
        for (std::size_t n = 0; n < geometry.size(); ++n) {
            const auto index = geometry.unravel(n);
            std::size_t parity = 0;
            for (std::size_t k = 0; k < rank; ++k) {
                const std::size_t cell = std::min(
                    spec.checker_cells - 1, index[k] * spec.checker_cells / (geometry.dim(k) - 1));
                parity += cell;
            }
            assign(n, parity % 2 == 0 ? spec.inside : spec.background);
        }
        break;

    case PhantomKind::GaussianBlobs: {
        double min_extent = geometry.extent(0);
        for (std::size_t k = 1; k < rank; ++k) {
            min_extent = std::min(min_extent, geometry.extent(k));
        }
        // Draw order is fixed: per blob, centre axes in order, then width,
        // then gamma, mu_a, mu_s amplitudes.
        XorShift64Star rng(spec.seed);
        std::vector<Blob> blobs(spec.blob_count);
        for (auto& blob : blobs) {
            for (std::size_t k = 0; k < rank; ++k) {
                const double frac = rng.uniform(spec.blob_margin, 1.0 - spec.blob_margin);
                blob.centre[k] = geometry.origin()[k] + frac * geometry.extent(k);
            }
            blob.width = rng.uniform(spec.blob_width.lo, spec.blob_width.hi) * min_extent;
            blob.amplitude.gamma = rng.uniform(spec.blob_gamma.lo, spec.blob_gamma.hi);
            blob.amplitude.mu_a = rng.uniform(spec.blob_mu_a.lo, spec.blob_mu_a.hi);
            blob.amplitude.mu_s = rng.uniform(spec.blob_mu_s.lo, spec.blob_mu_s.hi);
        }
        for (std::size_t n = 0; n < geometry.size(); ++n) {
            const auto index = geometry.unravel(n);
            Coefficients c = spec.background;
            for (const auto& blob : blobs) {
                double r2 = 0.0;
                for (std::size_t k = 0; k < rank; ++k) {
                    const double d = geometry.coordinate(k, index[k]) - blob.centre[k];
                    r2 += d * d;
                }
                const double g = std::exp(-0.5 * r2 / (blob.width * blob.width));
                c.gamma += blob.amplitude.gamma * g;
                c.mu_a += blob.amplitude.mu_a * g;
                c.mu_s += blob.amplitude.mu_s * g;
            }
            assign(n, c);
        }
        break;
    }
    }

    return Phantom(ScalarField(geometry, std::move(gamma)), ScalarField(geometry, std::move(mu_a)),
                   ScalarField(geometry, std::move(mu_s)));
}

}  // namespace qpat
