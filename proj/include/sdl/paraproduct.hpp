// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_PARAPRODUCT_HPP
#define SDL_PARAPRODUCT_HPP

#include <vector>

#include "sdl/dealias.hpp"
#include "sdl/dyadic.hpp"

namespace sdl {

struct ParaproductParts {
    SpectralField low_high;  // f < g
    SpectralField resonant;  // f . g
    SpectralField high_low;  // f > g
};

/// Bony decomposition f*g = (f<g) + (f.g) + (f>g) with
///   f<g = sum_j (Pi_{<= j-2} f)(Delta_j g),
///   f.g = sum_{|i-i'|<=1} (Delta_i f)(Delta_{i'} g),
///   f>g = g<f.
/// Every pairwise product is formed on the 2x padded grid, so the identity is
/// exact up to roundoff after the common truncation.
inline ParaproductParts paraproduct_split(const SpectralField& f, const SpectralField& g) {
    if (f.grid != g.grid) throw std::invalid_argument("paraproduct_split: grid mismatch");
    if (f.rank != FieldRank::scalar || g.rank != FieldRank::scalar)
        throw std::invalid_argument("paraproduct_split: scalar fields required");
    DyadicPartition part(f.grid);
    const int jmax = part.j_max;

    std::vector<SpectralField> fb, gb;
    fb.reserve(jmax + 2);
    gb.reserve(jmax + 2);
    for (int j = -1; j <= jmax; ++j) {
        fb.push_back(lp_block(f, j));
        gb.push_back(lp_block(g, j));
    }
    auto block = [&](std::vector<SpectralField>& v, int j) -> SpectralField& { return v[j + 1]; };

    // Prefix sums Pi_{<= j} = sum_{i <= j} Delta_i.
    std::vector<SpectralField> fpre(fb), gpre(gb);
    for (int j = 0; j <= jmax; ++j) {
        block(fpre, j) += block(fpre, j - 1);
        block(gpre, j) += block(gpre, j - 1);
    }

    ParaproductParts out{SpectralField(f.grid, FieldRank::scalar, f.real_flag && g.real_flag),
                         SpectralField(f.grid, FieldRank::scalar, f.real_flag && g.real_flag),
                         SpectralField(f.grid, FieldRank::scalar, f.real_flag && g.real_flag)};

    for (int j = 1; j <= jmax; ++j) {
        out.low_high += dealiased_product(block(fpre, j - 2), block(gb, j));
        out.high_low += dealiased_product(block(gpre, j - 2), block(fb, j));
    }
    for (int i = -1; i <= jmax; ++i)
        for (int ip = std::max(-1, i - 1); ip <= std::min(jmax, i + 1); ++ip)
            out.resonant += dealiased_product(block(fb, i), block(gb, ip));
    return out;
}

/// The constant bounded by the square-norm estimate: for vector b,
/// || |b|^2 ||_{B^0_{p,1}} / ||b||^2_{B^0_{2p,1,2}}, with |b|^2 formed on the
/// padded grid. Returns 0 for b = 0.
inline double square_norm_ratio(const SpectralField& b, double p) {
    if (b.rank == FieldRank::scalar)
        throw std::invalid_argument("square_norm_ratio: vector field expected");
    const double denom = b012_norm(b, 2.0 * p);
    if (denom == 0.0) return 0.0;
    const double num = b01_norm(dealiased_square_magnitude(b), p);
    return num / (denom * denom);
}

} // namespace sdl

#endif
