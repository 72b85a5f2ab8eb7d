// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/recon.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qpat/error.hpp"

namespace qpat {

namespace {

void require_pair(const IlluminationDataSet& data)
{
    validate(data);
    if (data.pressures.size() != 2) {
        throw Error(ErrorCode::BeamPairMismatch,
                    "single-scattering reconstruction needs exactly two illuminations");
    }
    validate_opposite(data.beams[0], data.beams[1], data.geometry());
}

double trapezoid(const ScalarField& f, const GridLine& line, double h)
{
    double total = 0.0;
    for (std::size_t k = 1; k < line.count; ++k) {
        total += 0.5 * h * (f[line[k - 1]] + f[line[k]]);
    }
    return total;
}

}  // namespace

SupportMask support_mask(const ScalarField& first, const ScalarField& second,
                         std::optional<double> epsilon)
{
    require_same_geometry(first.geometry(), second.geometry(), "support mask");
    std::vector<double> product(first.size());
    double largest = 0.0;
    for (std::size_t n = 0; n < product.size(); ++n) {
        product[n] = first[n] * second[n];
        largest = std::max(largest, product[n]);
    }
    SupportMask support{Mask::empty(first.geometry()), epsilon.value_or(1e-12 * largest)};
    if (!(support.epsilon >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "support threshold must be >= 0");
    }
    for (std::size_t n = 0; n < product.size(); ++n) {
        support.mask.values[n] = product[n] > support.epsilon ? 1 : 0;
    }
    return support;
}

MuTRecovery recover_mu_t(const IlluminationDataSet& data, std::optional<double> epsilon)
{
    require_pair(data);
    if (epsilon && !(*epsilon > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
    }
    const auto& geometry = data.geometry();
    const ScalarField& p1 = data.pressures[0];
    const ScalarField& p2 = data.pressures[1];
    SupportMask support = support_mask(p1, p2, epsilon);
    const Mask& omega = support.mask;
    if (omega.count() == 0) {
        throw Error(ErrorCode::EmptySupport, "P1 * P2 exceeds the threshold nowhere");
    }

    const Beam& beam = data.beams[0];
    const double h = geometry.spacing(beam.axis);
    const double half_sign = 0.5 * beam.sign;

    // Log quotient only on the support; both factors exceed the floor there.
    std::vector<double> quotient(geometry.size(), 0.0);
    for (std::size_t n = 0; n < geometry.size(); ++n) {
        if (omega.contains(n)) {
            quotient[n] = std::log(p2[n]) - std::log(p1[n]);
        }
    }

    Diagnostics diag;
    diag.support_nodes = omega.count();
    diag.epsilon = support.epsilon;
    std::vector<double> mu(geometry.size(), 0.0);
    for (std::size_t t = 0; t < geometry.line_count(beam.axis); ++t) {
        const GridLine line = geometry.line(beam.axis, t);
        auto inside = [&](std::size_t k) { return k < line.count && omega.contains(line[k]); };
        auto q = [&](std::size_t k) { return quotient[line[k]]; };
        for (std::size_t k = 0; k < line.count; ++k) {
            if (!inside(k)) {
                continue;
            }
            const bool left = k > 0 && inside(k - 1);
            const bool right = inside(k + 1);
            double derivative = 0.0;
            if (left && right) {
                derivative = (q(k + 1) - q(k - 1)) / (2.0 * h);
                ++diag.central_nodes;
            } else if (right) {
                derivative = inside(k + 2) ? (-3.0 * q(k) + 4.0 * q(k + 1) - q(k + 2)) / (2.0 * h)
                                           : (q(k + 1) - q(k)) / h;
                ++diag.one_sided_nodes;
            } else if (left) {
                derivative = (k >= 2 && inside(k - 2))
                                 ? (3.0 * q(k) - 4.0 * q(k - 1) + q(k - 2)) / (2.0 * h)
                                 : (q(k) - q(k - 1)) / h;
                ++diag.one_sided_nodes;
            } else {
                ++diag.undefined_nodes;
                continue;
            }
            mu[line[k]] = half_sign * derivative;
        }
    }

    bool first = true;
    for (std::size_t n = 0; n < geometry.size(); ++n) {
        if (!omega.contains(n)) {
            continue;
        }
        if (mu[n] < 0.0) {
            ++diag.negative_mu_t_nodes;
        }
        diag.min_mu_t = first ? mu[n] : std::min(diag.min_mu_t, mu[n]);
        first = false;
    }
    return MuTRecovery{ScalarField(geometry, std::move(mu)), std::move(support), diag};
}

ScalarField recover_gamma_mu_a(const IlluminationDataSet& data, const ScalarField& mu_t,
                               const SupportMask& support)
{
    require_pair(data);
    const auto& geometry = data.geometry();
    require_same_geometry(geometry, mu_t.geometry(), "recovered mu_t");
    require_same_geometry(geometry, support.mask.geometry, "support mask");

    const Beam& first = data.beams[0];
    const Beam& second = data.beams[1];
    const double h = geometry.spacing(first.axis);
    std::vector<double> out(geometry.size(), 0.0);
    for (std::size_t t = 0; t < geometry.line_count(first.axis); ++t) {
        const GridLine line = geometry.line(first.axis, t);
        const double boost = std::exp(0.5 * trapezoid(mu_t, line, h));
        const double initial = first.profile[t] * second.profile[t];
        for (std::size_t k = 0; k < line.count; ++k) {
            const std::size_t n = line[k];
            out[n] = std::sqrt(data.pressures[0][n] * data.pressures[1][n] / initial) * boost;
        }
    }
    return ScalarField(geometry, std::move(out));
}

ScalarField recover_gamma_mu_a_with_transmission(const IlluminationDataSet& data,
                                                 TransmissionPairing pairing)
{
    require_pair(data);
    if (!data.transmissions) {
        throw Error(ErrorCode::TransmissionRequired,
                    "this formula needs the fluences transmitted behind the object");
    }
    const auto& geometry = data.geometry();
    const Beam& first = data.beams[0];
    const Beam& second = data.beams[1];
    const Profile& through_first = (*data.transmissions)[0];
    const Profile& through_second = (*data.transmissions)[1];
    for (const Profile* p : {&through_first, &through_second}) {
        for (double v : *p) {
            if (!(v > 0.0)) {
                throw Error(ErrorCode::NonPositiveProfile, "transmitted fluence must be > 0");
            }
        }
    }

    std::vector<double> out(geometry.size(), 0.0);
    for (std::size_t t = 0; t < geometry.line_count(first.axis); ++t) {
        const GridLine line = geometry.line(first.axis, t);
        const double denominator = pairing == TransmissionPairing::FirstInitialSecondTransmitted
                                       ? first.profile[t] * through_second[t]
                                       : through_first[t] * second.profile[t];
        for (std::size_t k = 0; k < line.count; ++k) {
            const std::size_t n = line[k];
            out[n] = std::sqrt(data.pressures[0][n] * data.pressures[1][n] / denominator);
        }
    }
    return ScalarField(geometry, std::move(out));
}

ReconstructionResult reconstruct_single_scatter(const IlluminationDataSet& data,
                                                const RecoveryOptions& options)
{
    require_pair(data);
    if (!(options.smoothing_width >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "smoothing width must be >= 0");
    }
    IlluminationDataSet work = data;
    if (options.smoothing_width > 0.0) {
        for (auto& p : work.pressures) {
            p = gaussian_smooth(p, options.smoothing_width);
        }
    }
    MuTRecovery mu = recover_mu_t(work, options.epsilon);
    mu.diagnostics.smoothing_width = options.smoothing_width;

    ReconstructionResult result{mu.mu_t, recover_gamma_mu_a(work, mu.mu_t, mu.support),
                                std::nullopt, mu.support, mu.diagnostics};
    if (work.transmissions) {
        result.gamma_mu_a_transmission = recover_gamma_mu_a_with_transmission(work);
    }
    return result;
}

ReconstructionResult recover_sectional(const IlluminationDataSet& data,
                                       const RecoveryOptions& options)
{
    validate(data);
    if (data.geometry().rank() != 2) {
        throw Error(ErrorCode::InvalidGeometry, "sectional data lives on a 2D illumination plane");
    }
    for (const auto& beam : data.beams) {
        if (beam.axis != 0) {
            throw Error(ErrorCode::UnsupportedDirection,
                        "sectional beams must travel along +/-x (grid axis 0)");
        }
    }
    return reconstruct_single_scatter(data, options);
}

ScalarField gaussian_smooth(const ScalarField& field, double width)
{
    if (!(width >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "smoothing width must be >= 0");
    }
    if (width == 0.0) {
        return field;
    }
    const auto& geometry = field.geometry();
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * width));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    for (std::ptrdiff_t m = -radius; m <= radius; ++m) {
        kernel[static_cast<std::size_t>(m + radius)] =
            std::exp(-0.5 * static_cast<double>(m * m) / (width * width));
    }

    std::vector<double> current(field.values().begin(), field.values().end());
    std::vector<double> next(current.size());
    for (std::size_t axis = 0; axis < geometry.rank(); ++axis) {
        for (std::size_t t = 0; t < geometry.line_count(axis); ++t) {
            const GridLine line = geometry.line(axis, t);
            const auto count = static_cast<std::ptrdiff_t>(line.count);
            for (std::ptrdiff_t k = 0; k < count; ++k) {
                double sum = 0.0;
                double weight = 0.0;
                for (std::ptrdiff_t m = std::max<std::ptrdiff_t>(0, k - radius);
                     m <= std::min(count - 1, k + radius); ++m) {
                    const double w = kernel[static_cast<std::size_t>(m - k + radius)];
                    sum += w * current[line[static_cast<std::size_t>(m)]];
                    weight += w;
                }
                next[line[static_cast<std::size_t>(k)]] = sum / weight;
            }
        }
        std::swap(current, next);
    }
    return ScalarField(geometry, std::move(current));
}

QuotientResult recover_diffusion_quotient(std::span<const ScalarField> pressures, GridNode2D anchor,
                                          double anchor_value, const QuotientOptions& options)
{
    if (pressures.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no pressure fields");
    }
    const GridGeometry& g = pressures[0].geometry();
    if (g.rank() != 2) {
        throw Error(ErrorCode::InvalidGeometry, "the quotient method is implemented in 2D");
    }
    for (const auto& p : pressures) {
        require_same_geometry(g, p.geometry(), "diffusion pressures");
    }
    if (pressures.size() < 3) {
        throw Error(ErrorCode::DegenerateIlluminations,
                    "need N >= 3 illuminations so that N-1 quotient gradients can span the plane");
    }
    if (!(anchor_value > 0.0) || !std::isfinite(anchor_value)) {
        throw Error(ErrorCode::InvalidArgument, "anchor value sigma*phi^2 must be > 0");
    }
    if (!(options.condition_cap >= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "condition cap must be >= 1");
    }

    const std::size_t nx = g.dim(0);
    const std::size_t ny = g.dim(1);
    const double hx = g.spacing(0);
    const double hy = g.spacing(1);
    const ScalarField& reference = pressures.back();
    const std::size_t count = pressures.size() - 1;

    if (anchor.i >= nx || anchor.j >= ny) {
        throw Error(ErrorCode::AnchorOutsideSupport, "anchor lies outside the grid");
    }
    const double floor = options.support_floor * reference.max();
    auto supported = [&](std::size_t n) { return reference[n] > floor && reference[n] > 0.0; };
    if (!supported(anchor.i * ny + anchor.j)) {
        throw Error(ErrorCode::AnchorOutsideSupport, "P_N vanishes at the anchor");
    }

    std::vector<std::vector<double>> quotients(count, std::vector<double>(g.size(), 0.0));
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (supported(n)) {
            for (std::size_t i = 0; i < count; ++i) {
                quotients[i][n] = pressures[i][n] / reference[n];
            }
        }
    }

    QuotientDiagnostics diag;
    diag.condition_cap = options.condition_cap;
    std::vector<double> w0(g.size(), 0.0);
    std::vector<double> w1(g.size(), 0.0);
    Mask conditioned = Mask::empty(g);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
        for (std::size_t j = 1; j + 1 < ny; ++j) {
            const std::size_t n = i * ny + j;
            ++diag.interior_nodes;
            if (!(supported(n) && supported(n - ny) && supported(n + ny) && supported(n - 1) &&
                  supported(n + 1))) {
                ++diag.ill_conditioned_nodes;
                continue;
            }
            // Normal equations of the (N-1) x 2 system G w = -laplace(u).
            double a = 0.0;
            double b = 0.0;
            double c = 0.0;
            double r0 = 0.0;
            double r1 = 0.0;
            double scale = 0.0;
            for (const auto& u : quotients) {
                const double g0 = (u[n + ny] - u[n - ny]) / (2.0 * hx);
                const double g1 = (u[n + 1] - u[n - 1]) / (2.0 * hy);
                const double lap = (u[n + ny] - 2.0 * u[n] + u[n - ny]) / (hx * hx) +
                                   (u[n + 1] - 2.0 * u[n] + u[n - 1]) / (hy * hy);
                a += g0 * g0;
                b += g0 * g1;
                c += g1 * g1;
                r0 -= g0 * lap;
                r1 -= g1 * lap;
                scale = std::max(scale, std::abs(u[n]));
            }
            const double mean = 0.5 * (a + c);
            const double spread = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
            const double largest = mean + spread;
            const double smallest = mean - spread;
            const double resolution = 1e-12 * scale / std::min(hx, hy);
            const bool ok = smallest > 0.0 && std::sqrt(largest) > resolution &&
                            std::sqrt(largest / smallest) <= options.condition_cap;
            if (!ok) {
                ++diag.ill_conditioned_nodes;
                continue;
            }
            const double det = a * c - b * b;
            w0[n] = (c * r0 - b * r1) / det;
            w1[n] = (a * r1 - b * r0) / det;
            conditioned.values[n] = 1;
            ++diag.well_conditioned_nodes;
        }
    }
    if (diag.well_conditioned_nodes == 0) {
        throw Error(ErrorCode::DegenerateIlluminations,
                    "quotient gradients fail to span the plane at every node");
    }
    if (!conditioned.contains(anchor.i * ny + anchor.j)) {
        throw Error(ErrorCode::AnchorOutsideSupport,
                    "the anchor is not a well-conditioned interior node");
    }

    Mask mask = connected_component(conditioned, anchor);
    diag.disconnected_nodes = conditioned.count() - mask.count();

    GradientField2D grad{ScalarField(g, std::move(w0)), ScalarField(g, std::move(w1))};
    const PathIntegral log_density = gradient_path_integrate(grad, mask, anchor, std::log(anchor_value));
    diag.max_path_discrepancy = log_density.max_path_discrepancy;

    std::vector<double> v(g.size(), 0.0);
    std::vector<double> comb1(g.size(), 0.0);
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (mask.contains(n)) {
            v[n] = std::exp(0.5 * log_density.potential[n]);
            comb1[n] = reference[n] / v[n];
        }
    }
    std::vector<double> comb2(g.size(), 0.0);
    Mask comb2_mask = Mask::empty(g);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
        for (std::size_t j = 1; j + 1 < ny; ++j) {
            const std::size_t n = i * ny + j;
            if (mask.contains(n) && mask.contains(n - ny) && mask.contains(n + ny) &&
                mask.contains(n - 1) && mask.contains(n + 1)) {
                const double lap = (v[n + ny] - 2.0 * v[n] + v[n - ny]) / (hx * hx) +
                                   (v[n + 1] - 2.0 * v[n] + v[n - 1]) / (hy * hy);
                comb2[n] = lap / v[n];
                comb2_mask.values[n] = 1;
            }
        }
    }

    return QuotientResult{ScalarField(g, std::move(v)),
                          ScalarField(g, std::move(comb1)),
                          ScalarField(g, std::move(comb2)),
                          std::move(grad),
                          std::move(mask),
                          std::move(comb2_mask),
                          diag};
}

}  // namespace qpat
