// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_DEALIAS_HPP
#define SDL_DEALIAS_HPP

#include "sdl/field.hpp"

namespace sdl {

// Quadratic terms are evaluated on a 2x zero-padded grid: with both factors
// band-limited to |k_i| <= N/2 the product is exactly representable on the
// fine grid, so the padded product is the exact coefficient convolution.

/// Embed coefficients into a grid with factor x modes per axis.
inline SpectralField zero_pad(const SpectralField& f, int factor = 2) {
    TorusGrid fine(f.grid.dim, f.grid.modes_per_axis * factor);
    SpectralField out(fine, f.rank, f.real_flag);
    const std::size_t n = f.modes();
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = f.grid.wavevector(i);
        const std::size_t j = fine.linear_index(k);
        for (int c = 0; c < f.ncomp(); ++c) out.at(c, j) = f.at(c, i);
    }
    return out;
}

/// Project onto the coarse mode set. The coarse Nyquist shell K with some
/// k_i = N/2 folds the fine +-N/2 conjugate representatives together, which
/// keeps real fields real; interior modes are copied.
inline SpectralField truncate_to(const SpectralField& f, const TorusGrid& coarse) {
    SpectralField out(coarse, f.rank, f.real_flag);
    const int half = coarse.modes_per_axis / 2;
    const std::size_t n = out.modes();
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = coarse.wavevector(i);
        int nyquist_axes[3];
        int nny = 0;
        for (int a = 0; a < coarse.dim; ++a)
            if (k[a] == half) nyquist_axes[nny++] = a;
        for (int m = 0; m < (1 << nny); ++m) {
            auto kk = k;
            for (int b = 0; b < nny; ++b)
                if ((m >> b) & 1) kk[nyquist_axes[b]] = -half;
            const std::size_t j = f.grid.linear_index(kk);
            for (int c = 0; c < f.ncomp(); ++c) out.at(c, i) += f.at(c, j);
        }
    }
    return out;
}

/// Dealiased pointwise product of scalar fields, result band-limited back to
/// the input grid.
inline SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
    if (a.grid != b.grid) throw std::invalid_argument("dealiased_product: grid mismatch");
    if (a.rank != FieldRank::scalar || b.rank != FieldRank::scalar)
        throw std::invalid_argument("dealiased_product: scalar fields required");
    auto fa = zero_pad(a);
    auto fb = zero_pad(b);
    auto sa = inverse_transform(fa, 0);
    auto sb = inverse_transform(fb, 0);
    for (std::size_t i = 0; i < sa.size(); ++i) sa[i] *= sb[i];
    SpectralField prod(fa.grid, FieldRank::scalar, a.real_flag && b.real_flag);
    std::copy(sa.begin(), sa.end(), prod.comp(0));
    forward_component(fa.grid, prod.comp(0));
    return truncate_to(prod, a.grid);
}

/// Dealiased |b|^2 = sum_i (b^i)^2 for a vector (or matrix, Frobenius) field.
inline SpectralField dealiased_square_magnitude(const SpectralField& b) {
    auto fine = zero_pad(b);
    std::vector<std::complex<double>> acc(fine.modes(), 0.0);
    for (int c = 0; c < b.ncomp(); ++c) {
        auto s = inverse_transform(fine, c);
        for (std::size_t i = 0; i < s.size(); ++i) acc[i] += s[i] * s[i];
    }
    SpectralField out(fine.grid, FieldRank::scalar, b.real_flag);
    std::copy(acc.begin(), acc.end(), out.comp(0));
    forward_component(fine.grid, out.comp(0));
    return truncate_to(out, b.grid);
}

} // namespace sdl

#endif
