// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "sdl/dealias.hpp"
#include "sdl/drift_library.hpp"
#include "sdl/dyadic.hpp"
#include "sdl/mollify.hpp"
#include "test_util.hpp"

using namespace sdl;
using sdl::test::random_field;

TEST_CASE("kernel: positivity, unit mass, normalized transform, tail decay") {
    for (int d : {1, 2, 3}) {
        const auto& k = MollifierKernel::shared(d);
        REQUIRE(k.mass_quadrature() == Catch::Approx(1.0).margin(1e-10));
        REQUIRE(k.fourier(0.0) == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(k.density(0.0) > 0.0);
        REQUIRE(k.density(1.0) == 0.0);
        // |rho_hat| <= 1 with superpolynomial decay; the table clamp at its
        // far end only drops values below ~1e-10.
        double sup = 0.0;
        for (double r = 0.0; r < 63.0; r += 0.37) sup = std::max(sup, std::abs(k.fourier(r)));
        REQUIRE(sup <= 1.0 + 1e-9);
        REQUIRE(std::abs(k.fourier(60.0)) < 1e-10);
    }
}

TEST_CASE("kernel transform matches a direct two-dimensional quadrature oracle") {
    const auto& k2 = MollifierKernel::shared(2);
    // Midpoint quadrature of int rho(x) cos(2 pi r x1) dx over the unit ball.
    auto oracle = [](double r) {
        const int M = 2000;
        double num = 0.0, den = 0.0;
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) {
                const double x = -1.0 + (i + 0.5) * 2.0 / M;
                const double y = -1.0 + (j + 0.5) * 2.0 / M;
                const double r2 = x * x + y * y;
                if (r2 >= 1.0) continue;
                const double v = std::exp(-1.0 / (1.0 - r2));
                num += v * std::cos(two_pi * r * x);
                den += v;
            }
        return num / den;
    };
    for (double r : {0.6, 1.7, 3.3})
        REQUIRE(k2.fourier(r) == Catch::Approx(oracle(r)).margin(1e-8));
}

TEST_CASE("mollify_space: constants exact, band-limited convergence monotone beyond n = 4") {
    TorusGrid grid(2, 16);
    SpectralField c(grid, FieldRank::scalar, true);
    c.at(0, 0) = 7.5;
    for (int n : {1, 2, 4, 19}) {
        auto mc = mollify_space(c, n);
        REQUIRE(std::abs(mc.at(0, 0) - 7.5) < 1e-12);
        REQUIRE(l2_norm(mc) == Catch::Approx(7.5).margin(1e-12));
    }

    auto b = random_field(grid, FieldRank::vector, 8, 1.0, 5);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {4, 8, 16, 32, 64}) {
        auto diff = mollify_space(b, n) - b;
        const double err = l2_norm(diff);
        REQUIRE(err < prev);
        prev = err;
    }
    REQUIRE(prev < 1e-2 * l2_norm(b));
}

TEST_CASE("mollify_space: positivity on grid-nonnegative fields") {
    TorusGrid grid(1, 16);
    const auto& k1 = MollifierKernel::shared(1);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto g = random_field(grid, FieldRank::scalar, seed, 1.0, 3);
        auto gs = real_samples(g);
        std::vector<double> sq(gs.size());
        for (std::size_t j = 0; j < gs.size(); ++j) sq[j] = gs[j] * gs[j];
        auto f = forward_transform(grid, FieldRank::scalar, sq);
        for (int n : {2, 4, 8}) {
            auto ms = real_samples(mollify_space(f, n));
            for (double v : ms) REQUIRE(v >= -1e-10);
        }

        // The direct convolution quadrature (nonnegative sampled kernel, the
        // independent oracle) converges to the spectral values as its own
        // sampling grid refines; compare on the coarse nodes at n = 4.
        auto spectral = real_samples(mollify_space(f, 4));
        double prev = std::numeric_limits<double>::infinity();
        for (int fine : {32, 64, 128}) {
            TorusGrid gf(1, fine);
            auto up = real_samples(zero_pad(f, fine / 16));
            std::vector<double> w(static_cast<std::size_t>(fine));
            double wm = 0.0;
            for (int j = 0; j < fine; ++j) {
                double x = static_cast<double>(j) / fine;
                x = std::min(x, 1.0 - x);
                w[static_cast<std::size_t>(j)] = k1.density(x * 4.0);
                wm += w[static_cast<std::size_t>(j)];
            }
            double worst = 0.0;
            const int stride = fine / 16;
            for (int i = 0; i < 16; ++i) {
                double direct = 0.0;
                for (int j = 0; j < fine; ++j)
                    direct += w[static_cast<std::size_t>(j)] / wm *
                              up[static_cast<std::size_t>(((i * stride - j) % fine + fine) % fine)];
                REQUIRE(direct >= -1e-12);
                worst = std::max(worst, std::abs(direct - spectral[static_cast<std::size_t>(i)]));
            }
            REQUIRE(worst < prev);
            prev = worst;
        }
        REQUIRE(prev < 2e-4);
    }
}

TEST_CASE("mollification commutes with drift_from_A and helmholtz (all multipliers)") {
    TorusGrid grid(2, 16);
    auto psi = random_field(grid, FieldRank::scalar, 55);
    SpectralField A(grid, FieldRank::matrix, true);
    for (std::size_t m = 0; m < A.modes(); ++m) {
        A.at(0, 1, m) = -psi.at(0, m);
        A.at(1, 0, m) = psi.at(0, m);
    }
    auto route1 = mollify_space(drift_from_A(A), 5);
    auto route2 = drift_from_A(mollify_space(A, 5));
    for (std::size_t i = 0; i < route1.coeffs.size(); ++i)
        REQUIRE(std::abs(route1.coeffs[i] - route2.coeffs[i]) <=
                1e-15 * (1.0 + std::abs(route1.coeffs[i])));
}

TEST_CASE("uniform-in-n bound: L2-based norms contract, sup over n finite") {
    TorusGrid grid(2, 32);
    auto b = random_field(grid, FieldRank::vector, 66);
    const double l2 = l2_norm(b);
    const double b012 = b012_norm(b, 2.0);
    const double binf = b012_norm(b, std::numeric_limits<double>::infinity());
    for (int n : {1, 2, 4, 8, 16, 32, 64}) {
        auto bn = mollify_space(b, n);
        REQUIRE(l2_norm(bn) <= l2 * (1.0 + 1e-10));
        // p = 2: every block contracts exactly by Parseval and |rho_hat| <= 1.
        REQUIRE(b012_norm(bn, 2.0) <= b012 * (1.0 + 1e-10));
        // p = inf: collocation quadrature of Young's inequality; small slack.
        REQUIRE(b012_norm(bn, std::numeric_limits<double>::infinity()) <= binf * (1.0 + 1e-6) + 1e-9);
    }
}

TEST_CASE("mollify_time: static replication, spike spreading, resolution guard") {
    TorusGrid grid(2, 8);
    auto base = random_field(grid, FieldRank::vector, 77, 1.0, 2);

    // Static drift replicated over time stays static after mollification.
    DriftSpec rep{grid, "rep", {}, {}, {}};
    const int m = 33;
    const double T = 1.0;
    for (int i = 0; i < m; ++i) {
        rep.times.push_back(T * i / (m - 1));
        rep.slices.push_back(DriftSlice{std::nullopt, std::nullopt, base, {0.1, -0.2, 0.0}});
    }
    auto molli = mollify_time(rep, 8);
    REQUIRE(molli.times.size() == rep.times.size());
    auto ref = molli.slices[m / 2];
    for (int i = m / 4; i < 3 * m / 4; ++i) { // interior, away from the zero extension
        auto diff = *molli.slices[i].b2 - *ref.b2;
        REQUIRE(l2_norm(diff) < 1e-12 * std::max(1.0, l2_norm(*ref.b2)));
        REQUIRE(molli.slices[i].mean[0] == Catch::Approx(0.1).margin(1e-12));
    }

    // Single time-slice spike spreads over ~2/n and preserves interior mass.
    DriftSpec spike{grid, "spike", {}, {}, {}};
    for (int i = 0; i < m; ++i) {
        spike.times.push_back(T * i / (m - 1));
        DriftSlice s;
        SpectralField f(grid, FieldRank::vector, true);
        if (i == m / 2) f.at(0, 0) = 1.0; // unit mean-mode pulse at one slice
        s.b2 = f;
        spike.slices.push_back(s);
    }
    const int n = 8;
    auto sm = mollify_time(spike, n);
    const double dt = T / (m - 1);
    double mass = 0.0;
    int support = 0;
    for (int i = 0; i < m; ++i) {
        const double v = sm.slices[i].b2->at(0, 0).real();
        mass += v;
        if (std::abs(v) > 1e-14) ++support;
        if (std::abs(spike.times[i] - spike.times[m / 2]) > 1.0 / n + 1e-12)
            REQUIRE(std::abs(v) < 1e-14); // support within the kernel window
    }
    REQUIRE(support > 1);
    REQUIRE(mass == Catch::Approx(1.0).margin(1e-10)); // discrete convolution preserves mass
    (void)dt;

    // Time step coarser than 1/(2n) is refused.
    REQUIRE_THROWS_AS(mollify_time(rep, 64), std::runtime_error);
}

TEST_CASE("mollified drift converges in the library norms (decreasing beyond n = 4)") {
    TorusGrid grid(2, 32);
    auto xi = sample_gff(grid, 11);
    auto drift = gff_curl_drift(xi, 1.5);
    auto b = drift.total_field();
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {4, 8, 16, 32}) {
        auto bn = mollify_space(b, n);
        const double err = besov_norm(bn - b, {-1.0, 2.0, 2.0});
        REQUIRE(err < prev);
        prev = err;
    }
}
