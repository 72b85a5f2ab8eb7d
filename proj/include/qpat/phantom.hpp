// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "qpat/grid.hpp"

namespace qpat {

/// Ground-truth parameter triple. mu_t = mu_a + mu_s is derived.
class Phantom {
public:
    Phantom(ScalarField gamma, ScalarField mu_a, ScalarField mu_s);

    const GridGeometry& geometry() const { return gamma_.geometry(); }
    const ScalarField& gamma() const { return gamma_; }
    const ScalarField& mu_a() const { return mu_a_; }
    const ScalarField& mu_s() const { return mu_s_; }

    ScalarField mu_t() const;
    ScalarField gamma_mu_a() const;

private:
    ScalarField gamma_;
    ScalarField mu_a_;
    ScalarField mu_s_;
};

enum class PhantomKind { Uniform, GaussianBlobs, Slab, Checker };

std::string_view to_string(PhantomKind kind);
PhantomKind parse_phantom_kind(std::string_view name);

struct Coefficients {
    double gamma = 1.0;
    double mu_a = 0.0;
    double mu_s = 0.0;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Generator description. Which fields matter depends on `kind`:
///  - uniform: `inside` everywhere.
///  - slab: `inside` on the band slab_lo..slab_hi (fractions of the extent
///    along slab_axis, closed interval), `background` elsewhere.
///  - checker: `inside` on even cells of a checker_cells^d board,
///    `background` on odd cells.
///  - gaussian-blobs: `background` plus blob_count isotropic Gaussians whose
///    centres, widths and amplitudes are drawn from the ranges with `seed`.
///    Widths and centre margins are fractions of the smallest extent.
struct PhantomSpec {
    PhantomKind kind = PhantomKind::Uniform;
    GridGeometry geometry;
    Coefficients inside;
    Coefficients background;

    std::size_t slab_axis = 0;
    double slab_lo = 0.25;
    double slab_hi = 0.75;

    std::size_t checker_cells = 4;

    std::size_t blob_count = 4;
    std::uint64_t seed = 1;
    Range blob_gamma{0.0, 0.0};
    Range blob_mu_a{0.2, 0.5};
    Range blob_mu_s{0.0, 0.3};
    Range blob_width{0.05, 0.12};
    double blob_margin = 0.2;
};

/// Throws Error(InvalidArgument) naming the offending parameter.
void validate(const PhantomSpec& spec);

Phantom make_phantom(const PhantomSpec& spec);

}  // namespace qpat
