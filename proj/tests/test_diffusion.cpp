// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qpat/diffusion.hpp"
#include "qpat/error.hpp"
#include "qpat/sphere_quadrature.hpp"
#include "test_support.hpp"

using namespace qpat;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected qpat::Error");
    return ErrorCode::InvalidArgument;
}

DiffusionProblem constant_problem(const GridGeometry& g, double mu_a, double sigma, ScalarField boundary)
{
    return {g, ScalarField::filled(g, mu_a), ScalarField::filled(g, sigma), std::move(boundary)};
}

// sigma k^2 = mu_a makes cosh(k (x - 1/2)) an exact solution.
double cosh_error(std::size_t n)
{
    const double k = 2.0;
    const GridGeometry g = GridGeometry::uniform({n, n});
    auto exact = [&](double x, double) { return std::cosh(k * (x - 0.5)); };
    const DiffusionProblem problem = constant_problem(g, 1.0 / 3.0, 1.0 / (3.0 * k * k), testing::sample(g, exact));
    const ScalarField phi = solve_diffusion(problem).fluence;
    return testing::max_abs_diff(phi, testing::sample(g, exact));
}

}  // namespace

TEST_CASE("diffusion coefficient from the phantom")
{
    const GridGeometry g = GridGeometry::uniform({4, 4});
    const Phantom p(ScalarField::filled(g, 1.0), ScalarField::filled(g, 0.1), ScalarField::filled(g, 10.0));
    CHECK(diffusion_coefficient(p)[5] == doctest::Approx(1.0 / (3.0 * 10.1)).epsilon(1e-15));
    CHECK(diffusion_coefficient(p, 0.9)[5] == doctest::Approx(1.0 / (3.0 * (0.1 + 0.7 * 10.0))).epsilon(1e-15));
}

TEST_CASE("property: unit boundary data without absorption gives unit fluence")
{
    XorShift64Star rng(8);
    for (int trial = 0; trial < 8; ++trial) {
        const GridGeometry g = GridGeometry::uniform({8 + std::size_t(rng.next() % 16), 8 + std::size_t(rng.next() % 16)});
        const DiffusionProblem problem{g, ScalarField::filled(g, 0.0), testing::random_field(g, rng, 0.05, 2.0),
                                       ScalarField::filled(g, 1.0)};
        const DiffusionSolution solution = solve_diffusion(problem);
        for (double v : solution.fluence.values()) {
            CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
        }
        CHECK(solution.relative_residual <= 1e-10);
    }
}

TEST_CASE("one-dimensional cosh solution converges at second order")
{
    const double coarse = cosh_error(17);
    const double fine = cosh_error(33);
    CHECK(coarse < 1e-3);
    CHECK(coarse / fine > 3.7);
    CHECK(coarse / fine < 4.3);
}

TEST_CASE("plane-wave illumination is an exact continuum solution")
{
    const GridGeometry g = GridGeometry::uniform({33, 33});
    const double sigma = 0.05;
    const double rate = 2.0;
    const BoundaryIllumination light{1.0, rate, {0.6, 0.8}, {0.5, 0.5}};
    const DiffusionProblem problem = constant_problem(g, sigma * rate * rate, sigma, boundary_field(g, light));
    const ScalarField phi = solve_diffusion(problem).fluence;
    const ScalarField exact = testing::sample(g, [&](double x, double y) { return light(x, y); });
    CHECK(testing::max_abs_diff(phi, exact) < 1e-3);
}

TEST_CASE("property: the solver is linear in the boundary data")
{
    XorShift64Star rng(19);
    const GridGeometry g = GridGeometry::uniform({20, 24});
    const ScalarField mu_a = testing::random_field(g, rng, 0.0, 2.0);
    const ScalarField sigma = testing::random_field(g, rng, 0.02, 0.5);
    for (int trial = 0; trial < 4; ++trial) {
        const ScalarField b1 = testing::random_field(g, rng, 0.0, 1.0);
        const ScalarField b2 = testing::random_field(g, rng, 0.0, 1.0);
        const double a = rng.uniform(0.1, 3.0);
        std::vector<double> combined(g.size());
        for (std::size_t n = 0; n < g.size(); ++n) {
            combined[n] = b1[n] + a * b2[n];
        }
        const ScalarField p1 = solve_diffusion({g, mu_a, sigma, b1}).fluence;
        const ScalarField p2 = solve_diffusion({g, mu_a, sigma, b2}).fluence;
        const ScalarField p12 = solve_diffusion({g, mu_a, sigma, ScalarField(g, combined)}).fluence;
        for (std::size_t n = 0; n < g.size(); ++n) {
            CHECK(p12[n] == doctest::Approx(p1[n] + a * p2[n]).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("property: maximum principle and flux balance")
{
    XorShift64Star rng(23);
    for (int trial = 0; trial < 6; ++trial) {
        const GridGeometry g = GridGeometry::uniform({10 + std::size_t(rng.next() % 20), 10 + std::size_t(rng.next() % 20)});
        const ScalarField sigma = testing::random_field(g, rng, 0.05, 1.0);
        const ScalarField boundary = testing::random_field(g, rng, 0.5, 2.0);
        const ScalarField absorbing = solve_diffusion({g, testing::random_field(g, rng, 0.0, 3.0), sigma, boundary}).fluence;
        CHECK(absorbing.max() <= boundary.max() + 1e-9);
        CHECK(absorbing.min() >= 0.0);

        const DiffusionProblem lossless{g, ScalarField::filled(g, 0.0), sigma, boundary};
        double scale = 0.0;
        const double net = boundary_flux_sum(lossless, solve_diffusion(lossless).fluence, &scale);
        CHECK(std::abs(net) <= 1e-8 * scale);
    }
}

TEST_CASE("residual of the exact discrete solution is at solver tolerance")
{
    const GridGeometry g = GridGeometry::uniform({24, 24});
    const DiffusionProblem problem = constant_problem(g, 0.5, 0.1, ScalarField::filled(g, 1.0));
    const DiffusionSolution s = solve_diffusion(problem);
    CHECK(diffusion_residual(problem, s.fluence) <= 1e-10);
    CHECK(diffusion_residual(problem, ScalarField::filled(g, 1.0)) > 1e-3);
}

TEST_CASE("diffusion problem validation")
{
    const GridGeometry g = GridGeometry::uniform({6, 6});
    std::vector<double> sigma(g.size(), 0.1);
    sigma[14] = 0.0;
    CHECK(code_of([&] {
              solve_diffusion({g, ScalarField::filled(g, 0.0), ScalarField(g, sigma), ScalarField::filled(g, 1.0)});
          }) == ErrorCode::InvalidArgument);
    const GridGeometry cube = GridGeometry::uniform({6, 6, 6});
    CHECK(code_of([&] { solve_diffusion(constant_problem(cube, 0.1, 0.1, ScalarField::filled(cube, 1.0))); }) ==
          ErrorCode::InvalidGeometry);
    CHECK(code_of([&] {
              solve_diffusion(constant_problem(GridGeometry::uniform({40, 40}), 0.1, 0.1,
                                               ScalarField::filled(GridGeometry::uniform({40, 40}), 1.0)),
                              {1e-10, 1});
          }) == ErrorCode::SolverFailure);
}

// Sphere quadrature --------------------------------------------------------------

TEST_CASE("three-point Gauss-Legendre rule")
{
    const GaussLegendre rule = gauss_legendre(3);
    REQUIRE(rule.nodes.size() == 3);
    CHECK(rule.nodes[0] == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-15));
    CHECK(rule.nodes[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(rule.weights[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
    CHECK(rule.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("property: Gauss-Legendre integrates monomials below degree 2n")
{
    for (std::size_t n = 1; n <= 24; ++n) {
        const GaussLegendre rule = gauss_legendre(n);
        for (std::size_t p = 0; p < 2 * n; ++p) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                sum += rule.weights[k] * std::pow(rule.nodes[k], static_cast<double>(p));
            }
            const double exact = p % 2 == 0 ? 2.0 / static_cast<double>(p + 1) : 0.0;
            CHECK(sum == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("sphere moments")
{
    const double four_pi_third = 4.0 * std::numbers::pi / 3.0;
    for (std::size_t order : {2u, 3u, 8u, 20u}) {
        const Vec3 dir{0.48, -0.6, 0.64};
        CHECK(sphere_second_moment(order, dir) == doctest::Approx(four_pi_third).epsilon(1e-12));
        CHECK(std::abs(sphere_first_moment(order, dir)) < 1e-12);
        const Vec3 m = sphere_projection_moment(order, dir);
        for (int c = 0; c < 3; ++c) {
            CHECK(m[c] == doctest::Approx(four_pi_third * dir[c]).epsilon(1e-12).scale(1.0));
        }
        CHECK(sphere_moment_check(order) < 1e-12);
    }
    double area = 0.0;
    for (double w : sphere_rule(5).weights) {
        area += w;
    }
    CHECK(area == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-14));
    CHECK(code_of([] { sphere_rule(1); }) == ErrorCode::InvalidArgument);
}
