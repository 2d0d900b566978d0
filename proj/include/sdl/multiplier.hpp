// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_MULTIPLIER_HPP
#define SDL_MULTIPLIER_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "sdl/field.hpp"

namespace sdl {

enum class ZeroMode { keep, annihilate };

/// Scalar Fourier multiplier: output coefficients are symbol(k) * u_hat(k),
/// applied per component. The symbol is evaluated lazily per wavenumber;
/// zero_mode = annihilate forces the k = 0 output coefficient to 0.
struct Multiplier {
    std::function<std::complex<double>(const std::array<int, 3>&, int dim)> symbol;
    ZeroMode zero_mode = ZeroMode::keep;
};

inline SpectralField apply_multiplier(const SpectralField& f, const Multiplier& m) {
    SpectralField out(f.grid, f.rank, f.real_flag);
    const std::size_t n = f.modes();
    std::vector<std::complex<double>> sym(n);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
        auto k = f.grid.wavevector(i);
        const bool zero = k[0] == 0 && k[1] == 0 && k[2] == 0;
        if (zero && m.zero_mode == ZeroMode::annihilate) {
            sym[i] = 0.0;
            continue;
        }
        sym[i] = m.symbol(k, f.grid.dim);
        if (!std::isfinite(sym[i].real()) || !std::isfinite(sym[i].imag())) finite = false;
    }
    if (!finite) throw std::runtime_error("apply_multiplier: non-finite symbol value");
    for (int c = 0; c < f.ncomp(); ++c) {
        const auto* src = f.comp(c);
        auto* dst = out.comp(c);
        for (std::size_t i = 0; i < n; ++i) dst[i] = sym[i] * src[i];
    }
    // A symbol with m(-k) = conj(m(k)) preserves Hermitian symmetry; symbols
    // that break it (odd derivatives acting on Nyquist content) still carry
    // real_flag, which tests assert via hermitian_defect where it matters.
    return out;
}

inline double wavevector_norm2(const std::array<int, 3>& k, int dim) {
    double k2 = 0.0;
    for (int a = 0; a < dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
    return k2;
}

/// d/dx_axis, symbol 2 pi i k_axis.
inline Multiplier partial_derivative(int axis) {
    return {[axis](const std::array<int, 3>& k, int) {
                return std::complex<double>(0.0, two_pi * k[axis]);
            },
            ZeroMode::keep};
}

/// Laplacian, symbol -4 pi^2 |k|^2.
inline Multiplier laplacian() {
    return {[](const std::array<int, 3>& k, int dim) {
                return std::complex<double>(-two_pi * two_pi * wavevector_norm2(k, dim), 0.0);
            },
            ZeroMode::keep};
}

/// Inverse Laplacian with the zero mode annihilated.
inline Multiplier inv_laplacian() {
    return {[](const std::array<int, 3>& k, int dim) {
                return std::complex<double>(-1.0 / (two_pi * two_pi * wavevector_norm2(k, dim)),
                                            0.0);
            },
            ZeroMode::annihilate};
}

/// Fractional Laplacian (-Delta)^alpha, symbol 1_{|k|>0} (2 pi |k|)^{2 alpha}.
inline Multiplier frac_laplacian(double alpha) {
    return {[alpha](const std::array<int, 3>& k, int dim) {
                const double r = two_pi * std::sqrt(wavevector_norm2(k, dim));
                return std::complex<double>(std::pow(r, 2.0 * alpha), 0.0);
            },
            ZeroMode::annihilate};
}

/// Bessel smoothing (1 - Delta)^{-beta}, symbol (1 + 4 pi^2 |k|^2)^{-beta}.
inline Multiplier bessel_pow(double beta) {
    return {[beta](const std::array<int, 3>& k, int dim) {
                return std::complex<double>(
                    std::pow(1.0 + two_pi * two_pi * wavevector_norm2(k, dim), -beta), 0.0);
            },
            ZeroMode::keep};
}

/// log(1 - Delta)^{-alpha}: multiplication by (log(1 + 4 pi^2 |k|^2))^{-alpha}
/// for k != 0. At k = 0 the literal symbol is singular (log 1 = 0); we define
/// the zero-mode value as 0. The generating field of the GFF example has no
/// zero mode, so this convention never changes a constructed drift.
inline Multiplier log_inv_laplacian(double alpha) {
    return {[alpha](const std::array<int, 3>& k, int dim) {
                const double l = std::log(1.0 + two_pi * two_pi * wavevector_norm2(k, dim));
                return std::complex<double>(std::pow(l, -alpha), 0.0);
            },
            ZeroMode::annihilate};
}

/// Component-mixing multiplier: for each k the output component vector is
/// symbol(k) (an out_ncomp x in_ncomp matrix, row-major) times the input
/// component vector. Used by the Helmholtz-type operations.
struct MatrixMultiplier {
    FieldRank in_rank;
    FieldRank out_rank;
    std::function<void(const std::array<int, 3>&, int dim, std::complex<double>* m)> symbol;
    ZeroMode zero_mode = ZeroMode::keep;
};

inline SpectralField apply_multiplier(const SpectralField& f, const MatrixMultiplier& m) {
    if (f.rank != m.in_rank) throw std::invalid_argument("apply_multiplier: rank mismatch");
    SpectralField out(f.grid, m.out_rank, f.real_flag);
    const int nin = f.ncomp();
    const int nout = out.ncomp();
    std::vector<std::complex<double>> sym(static_cast<std::size_t>(nin) * nout);
    const std::size_t n = f.modes();
    for (std::size_t i = 0; i < n; ++i) {
        auto k = f.grid.wavevector(i);
        const bool zero = k[0] == 0 && k[1] == 0 && k[2] == 0;
        if (zero && m.zero_mode == ZeroMode::annihilate) continue;
        m.symbol(k, f.grid.dim, sym.data());
        for (int r = 0; r < nout; ++r) {
            std::complex<double> acc = 0.0;
            for (int c = 0; c < nin; ++c) acc += sym[static_cast<std::size_t>(r) * nin + c] * f.at(c, i);
            out.at(r, i) = acc;
        }
    }
    return out;
}

} // namespace sdl

#endif
