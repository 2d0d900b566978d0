// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "sdl/resolvent.hpp"
#include "test_util.hpp"

using namespace sdl;
using sdl::test::random_field;

TEST_CASE("resolvent: diagonal cases match the symbol oracle") {
    TorusGrid grid(2, 16);
    SpectralField rhs(grid, FieldRank::scalar, false);
    rhs.at(0, grid.linear_index({3, -2, 0})) = 1.0;
    const double lambda = 7.0;

    auto sol = resolvent_solve(DriftSpec::zero(grid), lambda, rhs, 1e-12);
    REQUIRE(sol.converged);
    const double k2 = 13.0;
    REQUIRE(std::abs(sol.u.at(0, grid.linear_index({3, -2, 0})) -
                     1.0 / (lambda + two_pi * two_pi * k2)) < 1e-12);

    const std::array<double, 3> c{0.9, 0.4, 0.0};
    auto csol = resolvent_solve(constant_drift(grid, c), lambda, rhs, 1e-12);
    REQUIRE(csol.converged);
    const std::complex<double> denom(lambda + two_pi * two_pi * k2,
                                     -two_pi * (c[0] * 3.0 + c[1] * -2.0));
    REQUIRE(std::abs(csol.u.at(0, grid.linear_index({3, -2, 0})) - 1.0 / denom) < 1e-10);
}

TEST_CASE("resolvent: residual contract on GFF drift solves") {
    TorusGrid grid(2, 32);
    auto xi = sample_gff(grid, 17);
    auto drift = gff_curl_drift(xi, 1.5);
    for (double lambda : {2.0, 16.0, 128.0}) {
        for (std::uint64_t seed : {1u, 2u}) {
            auto rhs = random_field(grid, FieldRank::scalar, 40 + seed, 1.0, 10);
            const double tol = 1e-10;
            auto sol = resolvent_solve(drift, lambda, rhs, tol);
            REQUIRE(sol.converged);
            REQUIRE(sol.residual_h_minus1 <= tol * sol.rhs_h_minus1);
            // H^1 stability: ||u||_{H^1} <= C ||rhs||_{H^{-1}} with C modest.
            REQUIRE(sobolev_norm(sol.u, 1.0) <= 3.0 * sobolev_norm(rhs, -1.0));
        }
    }
}

TEST_CASE("injectivity probe: identity for b = 0, skew part cannot shrink sigma_min") {
    TorusGrid grid(2, 8);
    auto probe0 = injectivity_probe(DriftSpec::zero(grid), 3.0);
    REQUIRE(probe0.method == "dense_svd");
    REQUIRE(probe0.sigma_min == Catch::Approx(1.0).margin(1e-12));

    auto xi = sample_gff(grid, 5);
    auto drift = gff_curl_drift(xi, 1.2);
    for (double lambda : {1.0, 8.0, 64.0}) {
        auto probe = injectivity_probe(drift, lambda);
        REQUIRE(probe.sigma_min >= 1.0 - 1e-8);
    }
}

TEST_CASE("injectivity probe: b2 dip at small lambda recovers as lambda grows") {
    TorusGrid grid(2, 8);
    DriftSpec drift = DriftSpec::zero(grid);
    auto v0 = random_field(grid, FieldRank::scalar, 3, 1.0, 2);
    SpectralField b2(grid, FieldRank::vector, true);
    for (int a = 0; a < 2; ++a) {
        auto da = apply_multiplier(v0, partial_derivative(a));
        for (std::size_t m = 0; m < b2.modes(); ++m) b2.at(a, m) = 3.0 * da.at(0, m);
    }
    // Normalize the perturbation so its sup norm is moderate; the
    // relative-boundedness gain then kicks in over the lambda sweep.
    const double sup = lebesgue_norm(b2, std::numeric_limits<double>::infinity());
    b2 *= 3.0 / sup;
    drift.slices[0].b2 = b2;
    std::vector<double> sig;
    for (double lambda : {1.0, 16.0, 256.0, 4096.0})
        sig.push_back(injectivity_probe(drift, lambda).sigma_min);
    REQUIRE(sig.front() < 0.9);              // visible dip at small lambda
    REQUIRE(sig.back() > sig.front());       // recovery with lambda
    REQUIRE(sig.back() > 0.9);               // asymptotically near identity
}

TEST_CASE("inverse-power path agrees with dense SVD") {
    TorusGrid grid(2, 8);
    auto xi = sample_gff(grid, 5);
    auto drift = gff_curl_drift(xi, 1.2);
    DriftSpec mixed = drift;
    auto v0 = random_field(grid, FieldRank::scalar, 13, 1.0, 2);
    SpectralField b2(grid, FieldRank::vector, true);
    for (int a = 0; a < 2; ++a) {
        auto da = apply_multiplier(v0, partial_derivative(a));
        for (std::size_t m = 0; m < b2.modes(); ++m) b2.at(a, m) = 0.2 * da.at(0, m);
    }
    mixed.slices[0].b2 = b2;
    const double lambda = 6.0;
    auto dense = injectivity_probe(mixed, lambda);
    auto iter = injectivity_probe(mixed, lambda, GeneratorForm::divergence_out, 0);
    REQUIRE(dense.method == "dense_svd");
    REQUIRE(iter.method == "inverse_power");
    REQUIRE(iter.sigma_min == Catch::Approx(dense.sigma_min).epsilon(1e-5));
}

TEST_CASE("non-convergence reporting carries a residual history") {
    TorusGrid grid(2, 8);
    auto xi = sample_gff(grid, 5);
    auto drift = gff_curl_drift(xi, 1.2);
    auto rhs = random_field(grid, FieldRank::scalar, 4, 1.0, 3);
    auto sol = resolvent_solve(drift, 4.0, rhs, 1e-14, GeneratorForm::divergence_out, 2, 2);
    REQUIRE_FALSE(sol.converged);
    REQUIRE(sol.residual_history.size() >= 2);
}
