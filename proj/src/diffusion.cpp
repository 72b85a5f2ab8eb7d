// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/diffusion.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "qpat/error.hpp"

namespace qpat {

namespace {

/// Face couplings sigma_face / h^2 of the five-point operator.
/// ax[n] couples node n=(i,j) with (i+1,j); ay[n] couples n with (i,j+1).
struct Stencil {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> ax;
    std::vector<double> ay;
    std::vector<double> diag;

    explicit Stencil(const DiffusionProblem& problem)
        : nx(problem.geometry.dim(0)), ny(problem.geometry.dim(1)), ax(nx * ny, 0.0),
          ay(nx * ny, 0.0), diag(nx * ny, 0.0)
    {
        const double hx2 = problem.geometry.spacing(0) * problem.geometry.spacing(0);
        const double hy2 = problem.geometry.spacing(1) * problem.geometry.spacing(1);
        const auto& s = problem.sigma;
        auto harmonic = [](double a, double b) { return 2.0 * a * b / (a + b); };
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t n = i * ny + j;
                if (i + 1 < nx) {
                    ax[n] = harmonic(s[n], s[n + ny]) / hx2;
                }
                if (j + 1 < ny) {
                    ay[n] = harmonic(s[n], s[n + 1]) / hy2;
                }
            }
        }
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            for (std::size_t j = 1; j + 1 < ny; ++j) {
                const std::size_t n = i * ny + j;
                diag[n] = ax[n] + ax[n - ny] + ay[n] + ay[n - 1] + problem.mu_a[n];
            }
        }
    }

    bool interior(std::size_t i, std::size_t j) const
    {
        return i > 0 && j > 0 && i + 1 < nx && j + 1 < ny;
    }

    /// (A x)_n on interior nodes using every entry of x, boundary included.
    double apply_at(const std::vector<double>& x, std::size_t n) const
    {
        return diag[n] * x[n] - ax[n] * x[n + ny] - ax[n - ny] * x[n - ny] - ay[n] * x[n + 1] -
               ay[n - 1] * x[n - 1];
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

double BoundaryIllumination::operator()(double x, double y) const
{
    return scale *
           std::exp(rate * (direction[0] * (x - centre[0]) + direction[1] * (y - centre[1])));
}

void validate(const DiffusionProblem& problem)
{
    const auto& g = problem.geometry;
    if (g.rank() != 2 || g.dim(0) < 4 || g.dim(1) < 4) {
        throw Error(ErrorCode::InvalidGeometry, "diffusion solves need a 2D grid of at least 4x4");
    }
    require_same_geometry(g, problem.mu_a.geometry(), "diffusion mu_a");
    require_same_geometry(g, problem.sigma.geometry(), "diffusion sigma");
    require_same_geometry(g, problem.boundary_fluence.geometry(), "diffusion boundary");
    if (!(problem.sigma.min() > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "nonpositive sigma");
    }
    if (problem.mu_a.min() < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "mu_a must be >= 0");
    }
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.is_boundary(n) && problem.boundary_fluence[n] < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "boundary fluence must be >= 0");
        }
    }
}

ScalarField diffusion_coefficient(const Phantom& phantom, double theta1)
{
    std::vector<double> sigma(phantom.geometry().size());
    const double reduction = 1.0 - theta1 / 3.0;
    for (std::size_t n = 0; n < sigma.size(); ++n) {
        const double attenuation = phantom.mu_a()[n] + reduction * phantom.mu_s()[n];
        if (!(attenuation > 0.0)) {
            throw Error(ErrorCode::InvalidArgument,
                        "nonpositive sigma: mu_a + mu_s' must be > 0 everywhere");
        }
        sigma[n] = 1.0 / (3.0 * attenuation);
    }
    return ScalarField(phantom.geometry(), std::move(sigma));
}

ScalarField boundary_field(const GridGeometry& geometry, const BoundaryIllumination& light)
{
    if (geometry.rank() != 2) {
        throw Error(ErrorCode::InvalidGeometry, "boundary illuminations are 2D only");
    }
    std::vector<double> values(geometry.size(), 0.0);
    for (std::size_t n = 0; n < geometry.size(); ++n) {
        if (geometry.is_boundary(n)) {
            const auto index = geometry.unravel(n);
            values[n] = light(geometry.coordinate(0, index[0]), geometry.coordinate(1, index[1]));
        }
    }
    return ScalarField(geometry, std::move(values));
}

DiffusionProblem make_diffusion_problem(const Phantom& phantom, const BoundaryIllumination& light,
                                        double theta1)
{
    DiffusionProblem problem{phantom.geometry(), phantom.mu_a(),
                             diffusion_coefficient(phantom, theta1),
                             boundary_field(phantom.geometry(), light)};
    validate(problem);
    return problem;
}

DiffusionSolution solve_diffusion(const DiffusionProblem& problem, const SolverOptions& options)
{
    validate(problem);
    const Stencil stencil(problem);
    const std::size_t nx = stencil.nx;
    const std::size_t ny = stencil.ny;
    const std::size_t total = nx * ny;

    // x holds the full grid; boundary entries are the Dirichlet data and stay
    // fixed, interior entries are the CG unknowns.
    std::vector<double> x(total, 0.0);
    for (std::size_t n = 0; n < total; ++n) {
        if (problem.geometry.is_boundary(n)) {
            x[n] = problem.boundary_fluence[n];
        }
    }

    std::vector<double> b(total, 0.0);
    std::vector<double> lifted = x;
    for (std::size_t i = 1; i + 1 < nx; ++i) {
        for (std::size_t j = 1; j + 1 < ny; ++j) {
            const std::size_t n = i * ny + j;
            // Only boundary neighbours contribute, since interior x is zero.
            b[n] = -stencil.apply_at(lifted, n);
        }
    }
    const double b_norm = std::sqrt(dot(b, b));
    if (b_norm == 0.0) {
        return DiffusionSolution{ScalarField(problem.geometry, std::move(x)), 0, 0.0};
    }

    const std::size_t unknowns = (nx - 2) * (ny - 2);
    const std::size_t max_iterations =
        options.max_iterations > 0 ? options.max_iterations : 20 * unknowns;

    std::vector<double> interior_x(total, 0.0);
    auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            for (std::size_t j = 1; j + 1 < ny; ++j) {
                const std::size_t n = i * ny + j;
                out[n] = stencil.apply_at(v, n);
            }
        }
    };

    std::vector<double> r(total, 0.0);
    std::vector<double> z(total, 0.0);
    std::vector<double> p(total, 0.0);
    std::vector<double> q(total, 0.0);
    std::size_t iterations = 0;
    double relative = 1.0;

    // Restarted PCG: the loop ends on the recursive residual, the outer check
    // recomputes the true residual so drift cannot pass silently.
    while (iterations < max_iterations) {
        apply(interior_x, q);
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            for (std::size_t j = 1; j + 1 < ny; ++j) {
                const std::size_t n = i * ny + j;
                r[n] = b[n] - q[n];
            }
        }
        relative = std::sqrt(dot(r, r)) / b_norm;
        if (relative <= options.tolerance) {
            break;
        }
        for (std::size_t n = 0; n < total; ++n) {
            z[n] = stencil.diag[n] > 0.0 ? r[n] / stencil.diag[n] : 0.0;
        }
        p = z;
        double rz = dot(r, z);
        const double target = 0.1 * options.tolerance * b_norm;
        while (iterations < max_iterations) {
            apply(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) {
                throw Error(ErrorCode::SolverFailure,
                            "operator lost positive definiteness, residual " +
                                std::to_string(relative));
            }
            const double alpha = rz / pq;
            for (std::size_t n = 0; n < total; ++n) {
                interior_x[n] += alpha * p[n];
                r[n] -= alpha * q[n];
            }
            ++iterations;
            if (std::sqrt(dot(r, r)) <= target) {
                break;
            }
            for (std::size_t n = 0; n < total; ++n) {
                z[n] = stencil.diag[n] > 0.0 ? r[n] / stencil.diag[n] : 0.0;
            }
            const double rz_next = dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t n = 0; n < total; ++n) {
                p[n] = z[n] + beta * p[n];
            }
        }
    }
    if (relative > options.tolerance) {
        throw Error(ErrorCode::SolverFailure, "CG stopped after " + std::to_string(iterations) +
                                                  " iterations with relative residual " +
                                                  std::to_string(relative));
    }

    for (std::size_t n = 0; n < total; ++n) {
        if (!problem.geometry.is_boundary(n)) {
            x[n] = interior_x[n];
        }
    }
    return DiffusionSolution{ScalarField(problem.geometry, std::move(x)), iterations, relative};
}

double diffusion_residual(const DiffusionProblem& problem, const ScalarField& fluence)
{
    validate(problem);
    require_same_geometry(problem.geometry, fluence.geometry(), "diffusion residual");
    const Stencil stencil(problem);
    std::vector<double> full(fluence.values().begin(), fluence.values().end());
    std::vector<double> lifted(full.size(), 0.0);
    for (std::size_t n = 0; n < full.size(); ++n) {
        if (problem.geometry.is_boundary(n)) {
            lifted[n] = problem.boundary_fluence[n];
        }
    }
    double r2 = 0.0;
    double b2 = 0.0;
    for (std::size_t i = 1; i + 1 < stencil.nx; ++i) {
        for (std::size_t j = 1; j + 1 < stencil.ny; ++j) {
            const std::size_t n = i * stencil.ny + j;
            const double residual = stencil.apply_at(full, n);
            const double rhs = stencil.apply_at(lifted, n);
            r2 += residual * residual;
            b2 += rhs * rhs;
        }
    }
    return b2 > 0.0 ? std::sqrt(r2 / b2) : std::sqrt(r2);
}

double boundary_flux_sum(const DiffusionProblem& problem, const ScalarField& fluence, double* scale)
{
    validate(problem);
    const Stencil stencil(problem);
    const std::size_t nx = stencil.nx;
    const std::size_t ny = stencil.ny;
    const double hx = problem.geometry.spacing(0);
    const double hy = problem.geometry.spacing(1);
    double sum = 0.0;
    double magnitude = 0.0;
    // Face flux sigma * (phi_boundary - phi_interior) / h times face length,
    // i.e. coupling * h^2 / h * h_other = coupling * hx * hy.
    auto add = [&](double coupling, std::size_t boundary, std::size_t inner) {
        const double flux = coupling * hx * hy * (fluence[boundary] - fluence[inner]);
        sum += flux;
        magnitude += std::abs(flux);
    };
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const std::size_t n = i * ny + j;
            if (i + 1 < nx && stencil.interior(i, j) != stencil.interior(i + 1, j) &&
                (j > 0 && j + 1 < ny)) {
                const bool n_inner = stencil.interior(i, j);
                add(stencil.ax[n], n_inner ? n + ny : n, n_inner ? n : n + ny);
            }
            if (j + 1 < ny && stencil.interior(i, j) != stencil.interior(i, j + 1) &&
                (i > 0 && i + 1 < nx)) {
                const bool n_inner = stencil.interior(i, j);
                add(stencil.ay[n], n_inner ? n + 1 : n, n_inner ? n : n + 1);
            }
        }
    }
    if (scale != nullptr) {
        *scale = magnitude;
    }
    return sum;
}

}  // namespace qpat
