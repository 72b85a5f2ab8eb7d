// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qpat/grid.hpp"
#include "qpat/phantom.hpp"

namespace qpat {

/// Samples over the plane transverse to a beam axis, indexed like
/// GridGeometry::line transverse indices.
using Profile = std::vector<double>;

/// Parallel beam with photons travelling along sign * e_axis. The profile is
/// the initial fluence on the entry plane and must be strictly positive.
struct Beam {
    std::size_t axis = 0;
    int sign = 1;
    Profile profile;

    std::array<double, 3> direction() const;
};

/// Uniform-profile beam sized for `geometry`.
Beam make_beam(const GridGeometry& geometry, std::size_t axis, int sign, double value = 1.0);
/// Builds a beam from a direction vector; anything but +/- a unit axis is
/// rejected with UnsupportedDirection.
Beam beam_from_direction(std::span<const double> direction, Profile profile);

void validate_beam(const Beam& beam, const GridGeometry& geometry);
/// Throws BeamPairMismatch unless the beams share an axis with opposite signs.
void validate_opposite(const Beam& first, const Beam& second, const GridGeometry& geometry);

/// Internal pressures for N illuminations, plus optional transmitted
/// fluences measured behind the object (one profile per beam).
struct IlluminationDataSet {
    std::vector<Beam> beams;
    std::vector<ScalarField> pressures;
    std::optional<std::vector<Profile>> transmissions;

    const GridGeometry& geometry() const { return pressures.at(0).geometry(); }
};

void validate(const IlluminationDataSet& data);

/// Cumulative trapezoid integral of mu_t from the entry face up to every
/// node along the beam. The grid boundary stands in for -infinity.
ScalarField attenuation_field(const ScalarField& mu_t, const Beam& beam);
double attenuation_integral(const ScalarField& mu_t, const Beam& beam, std::size_t flat);

ScalarField fluence(const ScalarField& mu_t, const Beam& beam);
/// Fluence leaving the grid through the exit face, per transverse line.
Profile transmission(const ScalarField& mu_t, const Beam& beam);

/// P0_i = gamma * mu_a * fluence_i for an opposite beam pair. Transmissions
/// are filled in from the full-line attenuation.
IlluminationDataSet synthesize_pressures(const Phantom& phantom, const Beam& first,
                                         const Beam& second);

/// <theta, grad fluence> + mu_t * fluence with central differences along the
/// beam; zero on the first and last node of every line.
ScalarField transport_residual(const ScalarField& mu_t, const Beam& beam,
                               const ScalarField& fluence_field);

/// Largest deviation of `fluence_field` from the discrete Beer-Lambert
/// recurrence phi_{k+1} = phi_k exp(-h (mu_k + mu_{k+1}) / 2) and the entry
/// condition, relative to the largest fluence value.
double recurrence_residual(const ScalarField& mu_t, const Beam& beam, const ScalarField& fluence_field);

}  // namespace qpat
