// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/single_scatter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpat/error.hpp"

namespace qpat {

namespace {

/// Trapezoid running integral along one line, walked in the beam's
/// direction of travel. `out` receives the integral at each node.
void cumulative_line(const ScalarField& mu_t, const GridLine& line, int sign, double h,
                     std::vector<double>& out)
{
    double total = 0.0;
    double previous = 0.0;
    for (std::size_t step = 0; step < line.count; ++step) {
        const std::size_t k = sign > 0 ? step : line.count - 1 - step;
        const double value = mu_t[line[k]];
        if (step > 0) {
            total += 0.5 * h * (previous + value);
        }
        out[line[k]] = total;
        previous = value;
    }
}

double line_integral(const ScalarField& mu_t, const GridLine& line, double h)
{
    double total = 0.0;
    for (std::size_t k = 1; k < line.count; ++k) {
        total += 0.5 * h * (mu_t[line[k - 1]] + mu_t[line[k]]);
    }
    return total;
}

}  // namespace

std::array<double, 3> Beam::direction() const
{
    std::array<double, 3> d{};
    d.at(axis) = static_cast<double>(sign);
    return d;
}

Beam make_beam(const GridGeometry& geometry, std::size_t axis, int sign, double value)
{
    if (axis >= geometry.rank()) {
        throw Error(ErrorCode::UnsupportedDirection, "beam axis out of range");
    }
    return Beam{axis, sign, Profile(geometry.line_count(axis), value)};
}

Beam beam_from_direction(std::span<const double> direction, Profile profile)
{
    std::size_t axis = direction.size();
    int sign = 0;
    for (std::size_t k = 0; k < direction.size(); ++k) {
        if (direction[k] == 0.0) {
            continue;
        }
        if (axis != direction.size() || std::abs(direction[k]) != 1.0) {
            throw Error(ErrorCode::UnsupportedDirection,
                        "only axis-aligned unit beam directions are supported");
        }
        axis = k;
        sign = direction[k] > 0.0 ? 1 : -1;
    }
    if (sign == 0) {
        throw Error(ErrorCode::UnsupportedDirection, "beam direction is the zero vector");
    }
    return Beam{axis, sign, std::move(profile)};
}

void validate_beam(const Beam& beam, const GridGeometry& geometry)
{
    if (beam.axis >= geometry.rank() || (beam.sign != 1 && beam.sign != -1)) {
        throw Error(ErrorCode::UnsupportedDirection, "beam must travel along +/- a grid axis");
    }
    if (beam.profile.size() != geometry.line_count(beam.axis)) {
        throw Error(ErrorCode::InvalidArgument,
                    "beam profile has " + std::to_string(beam.profile.size()) +
                        " samples, the entry plane has " +
                        std::to_string(geometry.line_count(beam.axis)));
    }
    for (double v : beam.profile) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::NonPositiveProfile, "initial beam profile must be > 0");
        }
    }
}

void validate_opposite(const Beam& first, const Beam& second, const GridGeometry& geometry)
{
    validate_beam(first, geometry);
    validate_beam(second, geometry);
    if (first.axis != second.axis || first.sign != -second.sign) {
        throw Error(ErrorCode::BeamPairMismatch, "beams must travel in exactly opposite directions");
    }
}

void validate(const IlluminationDataSet& data)
{
    if (data.pressures.empty() || data.beams.size() != data.pressures.size()) {
        throw Error(ErrorCode::InvalidArgument,
                    "dataset needs N >= 1 pressures with one beam each");
    }
    if (data.transmissions && data.transmissions->size() != data.pressures.size()) {
        throw Error(ErrorCode::InvalidArgument, "dataset needs one transmission per beam");
    }
    const auto& geometry = data.geometry();
    for (std::size_t i = 0; i < data.pressures.size(); ++i) {
        require_same_geometry(geometry, data.pressures[i].geometry(), "dataset pressures");
        validate_beam(data.beams[i], geometry);
        if (data.pressures[i].min() < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "pressure fields must be >= 0");
        }
        if (data.transmissions &&
            (*data.transmissions)[i].size() != geometry.line_count(data.beams[i].axis)) {
            throw Error(ErrorCode::InvalidArgument, "transmission profile has the wrong length");
        }
    }
}

ScalarField attenuation_field(const ScalarField& mu_t, const Beam& beam)
{
    const auto& geometry = mu_t.geometry();
    if (beam.axis >= geometry.rank() || (beam.sign != 1 && beam.sign != -1)) {
        throw Error(ErrorCode::UnsupportedDirection, "beam must travel along +/- a grid axis");
    }
    std::vector<double> out(geometry.size());
    const double h = geometry.spacing(beam.axis);
    for (std::size_t t = 0; t < geometry.line_count(beam.axis); ++t) {
        cumulative_line(mu_t, geometry.line(beam.axis, t), beam.sign, h, out);
    }
    return ScalarField(geometry, std::move(out));
}

double attenuation_integral(const ScalarField& mu_t, const Beam& beam, std::size_t flat)
{
    const auto& geometry = mu_t.geometry();
    if (beam.axis >= geometry.rank() || (beam.sign != 1 && beam.sign != -1)) {
        throw Error(ErrorCode::UnsupportedDirection, "beam must travel along +/- a grid axis");
    }
    const GridLine line = geometry.line(beam.axis, geometry.transverse_index(beam.axis, flat));
    const std::size_t target = (flat - line.offset) / line.stride;
    const double h = geometry.spacing(beam.axis);
    double total = 0.0;
    if (beam.sign > 0) {
        for (std::size_t k = 1; k <= target; ++k) {
            total += 0.5 * h * (mu_t[line[k - 1]] + mu_t[line[k]]);
        }
    } else {
        for (std::size_t k = line.count - 1; k > target; --k) {
            total += 0.5 * h * (mu_t[line[k]] + mu_t[line[k - 1]]);
        }
    }
    return total;
}

ScalarField fluence(const ScalarField& mu_t, const Beam& beam)
{
    const auto& geometry = mu_t.geometry();
    validate_beam(beam, geometry);
    std::vector<double> values = attenuation_field(mu_t, beam).release();
    for (std::size_t t = 0; t < geometry.line_count(beam.axis); ++t) {
        const GridLine line = geometry.line(beam.axis, t);
        for (std::size_t k = 0; k < line.count; ++k) {
            values[line[k]] = beam.profile[t] * std::exp(-values[line[k]]);
        }
    }
    return ScalarField(geometry, std::move(values));
}

Profile transmission(const ScalarField& mu_t, const Beam& beam)
{
    const auto& geometry = mu_t.geometry();
    validate_beam(beam, geometry);
    const double h = geometry.spacing(beam.axis);
    Profile out(geometry.line_count(beam.axis));
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = beam.profile[t] * std::exp(-line_integral(mu_t, geometry.line(beam.axis, t), h));
    }
    return out;
}

IlluminationDataSet synthesize_pressures(const Phantom& phantom, const Beam& first,
                                         const Beam& second)
{
    const auto& geometry = phantom.geometry();
    validate_opposite(first, second, geometry);
    const ScalarField mu_t = phantom.mu_t();
    const ScalarField absorbed = phantom.gamma_mu_a();

    IlluminationDataSet data;
    data.transmissions.emplace();
    for (const Beam* beam : {&first, &second}) {
        std::vector<double> p = fluence(mu_t, *beam).release();
        for (std::size_t n = 0; n < p.size(); ++n) {
            p[n] *= absorbed[n];
        }
        data.beams.push_back(*beam);
        data.pressures.emplace_back(geometry, std::move(p));
        data.transmissions->push_back(transmission(mu_t, *beam));
    }
    return data;
}

ScalarField transport_residual(const ScalarField& mu_t, const Beam& beam,
                               const ScalarField& fluence_field)
{
    const auto& geometry = mu_t.geometry();
    require_same_geometry(geometry, fluence_field.geometry(), "transport residual");
    validate_beam(beam, geometry);
    const double h = geometry.spacing(beam.axis);
    std::vector<double> out(geometry.size(), 0.0);
    for (std::size_t t = 0; t < geometry.line_count(beam.axis); ++t) {
        const GridLine line = geometry.line(beam.axis, t);
        for (std::size_t k = 1; k + 1 < line.count; ++k) {
            const double derivative =
                (fluence_field[line[k + 1]] - fluence_field[line[k - 1]]) / (2.0 * h);
            out[line[k]] = beam.sign * derivative + mu_t[line[k]] * fluence_field[line[k]];
        }
    }
    return ScalarField(geometry, std::move(out));
}

double recurrence_residual(const ScalarField& mu_t, const Beam& beam, const ScalarField& fluence_field)
{
    const auto& geometry = mu_t.geometry();
    require_same_geometry(geometry, fluence_field.geometry(), "recurrence residual");
    validate_beam(beam, geometry);
    const double h = geometry.spacing(beam.axis);
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t t = 0; t < geometry.line_count(beam.axis); ++t) {
        const GridLine line = geometry.line(beam.axis, t);
        auto node = [&](std::size_t k) { return beam.sign > 0 ? line[k] : line[line.count - 1 - k]; };
        scale = std::max(scale, std::abs(fluence_field[node(0)]));
        worst = std::max(worst, std::abs(fluence_field[node(0)] - beam.profile[t]));
        for (std::size_t k = 1; k < line.count; ++k) {
            const double step = std::exp(-0.5 * h * (mu_t[node(k - 1)] + mu_t[node(k)]));
            worst = std::max(worst, std::abs(fluence_field[node(k)] - step * fluence_field[node(k - 1)]));
            scale = std::max(scale, std::abs(fluence_field[node(k)]));
        }
    }
    return scale > 0.0 ? worst / scale : worst;
}

}  // namespace qpat
