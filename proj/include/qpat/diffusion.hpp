// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>

#include "qpat/grid.hpp"
#include "qpat/phantom.hpp"

namespace qpat {

/// Dirichlet fluence scale * exp(rate * <direction, x - centre>) on the
/// rectangle boundary. rate = 0 gives a constant illumination.
struct BoundaryIllumination {
    double scale = 1.0;
    double rate = 0.0;
    std::array<double, 2> direction{1.0, 0.0};
    std::array<double, 2> centre{0.0, 0.0};

    double operator()(double x, double y) const;
};

/// div(sigma grad phi) = mu_a phi on a 2D rectangle with Dirichlet fluence
/// on the boundary nodes. Interior values of boundary_fluence are ignored.
struct DiffusionProblem {
    GridGeometry geometry;
    ScalarField mu_a;
    ScalarField sigma;
    ScalarField boundary_fluence;
};

void validate(const DiffusionProblem& problem);

/// sigma = 1 / (3 (mu_a + (1 - theta1/3) mu_s)).
ScalarField diffusion_coefficient(const Phantom& phantom, double theta1 = 0.0);
ScalarField boundary_field(const GridGeometry& geometry, const BoundaryIllumination& light);
DiffusionProblem make_diffusion_problem(const Phantom& phantom, const BoundaryIllumination& light,
                                        double theta1 = 0.0);

struct SolverOptions {
    double tolerance = 1e-10;       ///< relative residual ||b - A phi|| / ||b||
    std::size_t max_iterations = 0; ///< 0 picks 20 * unknowns
};

struct DiffusionSolution {
    ScalarField fluence;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Five-point finite differences, harmonic face averages of sigma, solved by
/// Jacobi-preconditioned conjugate gradients on the interior unknowns.
DiffusionSolution solve_diffusion(const DiffusionProblem& problem, const SolverOptions& options = {});

/// Relative residual of the discrete system for an arbitrary candidate.
double diffusion_residual(const DiffusionProblem& problem, const ScalarField& fluence);

/// Discrete net flux sum of sigma d(phi)/dn over the faces joining interior
/// and boundary nodes; `scale` receives the sum of absolute face fluxes.
double boundary_flux_sum(const DiffusionProblem& problem, const ScalarField& fluence,
                         double* scale = nullptr);

}  // namespace qpat
