// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_TESTS_TEST_UTIL_HPP
#define SDL_TESTS_TEST_UTIL_HPP

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "sdl/field.hpp"
#include "sdl/rng.hpp"

namespace sdl::test {

/// Random real band-limited field: independent Gaussian coefficients with a
/// spectral decay |k|^{-decay}, Hermitian-paired, zero Nyquist shell. This is
/// the generic "random field" used across the suite.
inline SpectralField random_field(const TorusGrid& grid, FieldRank rank, std::uint64_t seed,
                                  double decay = 1.0, int max_wave = -1) {
    Rng rng(seed);
    SpectralField f(grid, rank, true);
    const int half = grid.modes_per_axis / 2;
    if (max_wave < 0 || max_wave > half - 1) max_wave = half - 1;
    const std::size_t n = f.modes();
    for (int c = 0; c < f.ncomp(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            auto k = grid.wavevector(i);
            bool ok = true;
            for (int a = 0; a < grid.dim; ++a)
                if (std::abs(k[a]) > max_wave) ok = false;
            if (!ok) continue;
            const double k2 = k[0] * double(k[0]) + k[1] * double(k[1]) + k[2] * double(k[2]);
            const double amp = std::pow(1.0 + k2, -decay / 2.0);
            f.at(c, i) = {amp * rng.normal(), amp * rng.normal()};
        }
        // Hermitian-symmetrize: keep (u(k) + conj(u(-k)))/2.
        SpectralField sym(grid, FieldRank::scalar, true);
        for (std::size_t i = 0; i < n; ++i) {
            auto k = grid.wavevector(i);
            std::array<int, 3> mk{-k[0], -k[1], -k[2]};
            const std::size_t j = grid.linear_index(mk);
            sym.at(0, i) = 0.5 * (f.at(c, i) + std::conj(f.at(c, j)));
        }
        for (std::size_t i = 0; i < n; ++i) f.at(c, i) = sym.at(0, i);
    }
    return f;
}

inline SpectralField random_mean_zero_field(const TorusGrid& grid, FieldRank rank,
                                            std::uint64_t seed, double decay = 1.0) {
    auto f = random_field(grid, rank, seed, decay);
    for (int c = 0; c < f.ncomp(); ++c) f.at(c, 0) = 0.0;
    return f;
}

/// Direct DFT sum, the independent oracle for forward_transform.
inline std::complex<double> dft_oracle(const TorusGrid& grid, const std::vector<double>& samples,
                                       const std::array<int, 3>& k) {
    std::complex<double> acc = 0.0;
    const int N = grid.modes_per_axis;
    const std::size_t n = grid.points();
    for (std::size_t j = 0; j < n; ++j) {
        double phase = 0.0;
        std::size_t rest = j;
        for (int a = grid.dim - 1; a >= 0; --a) {
            const int ja = static_cast<int>(rest % static_cast<std::size_t>(N));
            rest /= static_cast<std::size_t>(N);
            phase += static_cast<double>(k[a]) * ja / N;
        }
        acc += samples[j] * std::complex<double>(std::cos(two_pi * phase), -std::sin(two_pi * phase));
    }
    return acc / static_cast<double>(n);
}

/// Collocation samples of cos(2 pi k . x) on the grid.
inline std::vector<double> cosine_samples(const TorusGrid& grid, const std::array<int, 3>& k) {
    const int N = grid.modes_per_axis;
    std::vector<double> s(grid.points());
    for (std::size_t j = 0; j < s.size(); ++j) {
        double phase = 0.0;
        std::size_t rest = j;
        for (int a = grid.dim - 1; a >= 0; --a) {
            const int ja = static_cast<int>(rest % static_cast<std::size_t>(N));
            rest /= static_cast<std::size_t>(N);
            phase += static_cast<double>(k[a]) * ja / N;
        }
        s[j] = std::cos(two_pi * phase);
    }
    return s;
}

} // namespace sdl::test

#endif
