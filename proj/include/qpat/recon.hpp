// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "qpat/grid.hpp"
#include "qpat/path_integration.hpp"
#include "qpat/single_scatter.hpp"

namespace qpat {

/// Discrete support: nodes where P1 * P2 > epsilon.
struct SupportMask {
    Mask mask;
    double epsilon = 0.0;
};

/// Default epsilon is 1e-12 times the largest node value of P1 * P2.
SupportMask support_mask(const ScalarField& first, const ScalarField& second,
                         std::optional<double> epsilon = std::nullopt);

struct RecoveryOptions {
    std::optional<double> epsilon;
    /// Gaussian pre-smoothing width in cells applied to the pressures; 0 is off.
    double smoothing_width = 0.0;
};

struct Diagnostics {
    std::size_t support_nodes = 0;
    std::size_t central_nodes = 0;
    std::size_t one_sided_nodes = 0;  ///< derivative stencil touches the support edge
    std::size_t undefined_nodes = 0;  ///< support nodes with no in-support neighbour on the ray
    std::size_t negative_mu_t_nodes = 0;
    double min_mu_t = 0.0;
    double epsilon = 0.0;
    double smoothing_width = 0.0;
};

struct MuTRecovery {
    ScalarField mu_t;
    SupportMask support;
    Diagnostics diagnostics;
};

/// mu_t = 1/2 <theta, grad log(P2 / P1)> on the support, 0 elsewhere, with
/// theta the travel direction of the first beam. Central differences inside
/// the support, second-order one-sided differences at its edge along the
/// ray. Needs exactly two opposite beams.
MuTRecovery recover_mu_t(const IlluminationDataSet& data, std::optional<double> epsilon = std::nullopt);

/// gamma*mu_a = sqrt(P1 P2 / (F1 F2)) * exp(1/2 * line integral of mu_t),
/// F_i the initial beam profiles. Relies on mu_t vanishing off the support.
ScalarField recover_gamma_mu_a(const IlluminationDataSet& data, const ScalarField& mu_t,
                               const SupportMask& support);

enum class TransmissionPairing {
    FirstInitialSecondTransmitted, ///< sqrt(P1 P2 / (F1_initial F2_transmitted))
    FirstTransmittedSecondInitial, ///< sqrt(P1 P2 / (F1_transmitted F2_initial))
};

/// gamma*mu_a from the transmitted fluences; needs no mu_t field.
ScalarField recover_gamma_mu_a_with_transmission(
    const IlluminationDataSet& data,
    TransmissionPairing pairing = TransmissionPairing::FirstInitialSecondTransmitted);

struct ReconstructionResult {
    ScalarField mu_t;
    ScalarField gamma_mu_a;
    std::optional<ScalarField> gamma_mu_a_transmission;
    SupportMask support;
    Diagnostics diagnostics;
};

/// Full single-scattering pipeline: optional smoothing, mu_t, both gamma*mu_a
/// variants (the transmission one only when transmissions are present).
ReconstructionResult reconstruct_single_scatter(const IlluminationDataSet& data,
                                                const RecoveryOptions& options = {});

/// In-plane reconstruction for sectional imaging: 2D data, beams along +/-x
/// (grid axis 0).
ReconstructionResult recover_sectional(const IlluminationDataSet& data,
                                       const RecoveryOptions& options = {});

/// Separable Gaussian filter, `width` in cells, renormalised at the edges.
ScalarField gaussian_smooth(const ScalarField& field, double width);

// Diffusion model -----------------------------------------------------------

struct QuotientOptions {
    double condition_cap = 1e6;
    /// Nodes need P_N > support_floor * max(P_N).
    double support_floor = 1e-12;
};

struct QuotientDiagnostics {
    std::size_t interior_nodes = 0;
    std::size_t well_conditioned_nodes = 0;
    std::size_t ill_conditioned_nodes = 0;
    std::size_t disconnected_nodes = 0;
    double max_path_discrepancy = 0.0;
    double condition_cap = 0.0;
};

struct QuotientResult {
    ScalarField v;             ///< sqrt(sigma) * phi_N on the mask
    ScalarField comb1;         ///< P_N / v = gamma mu_a / sqrt(sigma)
    ScalarField comb2;         ///< laplace(v) / v = mu_a / sigma + laplace(sqrt sigma) / sqrt sigma
    GradientField2D grad_log;  ///< grad log(sigma phi_N^2)
    Mask mask;                 ///< nodes where v and comb1 are defined
    Mask comb2_mask;           ///< mask nodes whose four neighbours are in the mask
    QuotientDiagnostics diagnostics;
};

/// Diffusion quotient method. u_i = P_i / P_N satisfy
/// <grad log(sigma phi_N^2), grad u_i> = -laplace(u_i); the gradient is found
/// per node by least squares over i < N, integrated from `anchor` where
/// sigma phi_N^2 = anchor_value, and turned into the two recoverable
/// combinations. Needs N >= 3 on a 2D grid.
QuotientResult recover_diffusion_quotient(std::span<const ScalarField> pressures, GridNode2D anchor,
                                          double anchor_value, const QuotientOptions& options = {});

}  // namespace qpat
