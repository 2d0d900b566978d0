// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_HELMHOLTZ_HPP
#define SDL_HELMHOLTZ_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sdl/multiplier.hpp"

namespace sdl {

// Index conventions. The antisymmetric potential A is a matrix field stored
// row-major, entry (i,j) at component i*dim+j, with
//     A_ij = inv_laplacian(d_i b^j - d_j b^i),
// and the divergence-free part is recovered as the column divergence
//     b^i = sum_j d_j A_ji,
// which together with V = inv_laplacian(div b) and the zero mode reproduces b
// coefficient-wise. On the torus the zero mode is split off explicitly, so no
// low-frequency regularity issue arises.

struct HelmholtzParts {
    SpectralField A;              // antisymmetric matrix potential
    SpectralField V;              // scalar potential, mean-free
    std::array<double, 3> mean{}; // b_hat(0)
};

inline HelmholtzParts helmholtz_decompose(const SpectralField& b) {
    if (b.rank != FieldRank::vector)
        throw std::invalid_argument("helmholtz_decompose: vector field expected");
    const int dim = b.grid.dim;
    HelmholtzParts out{SpectralField(b.grid, FieldRank::matrix, b.real_flag),
                       SpectralField(b.grid, FieldRank::scalar, b.real_flag),
                       {0.0, 0.0, 0.0}};
    const std::size_t n = b.modes();
    for (int a = 0; a < dim; ++a) out.mean[a] = b.at(a, 0).real();
    for (std::size_t m = 1; m < n; ++m) {
        const auto k = b.grid.wavevector(m);
        double k2 = 0.0;
        for (int a = 0; a < dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
        if (k2 == 0.0) continue; // only the true zero mode is skipped
        const double inv_lap = -1.0 / (two_pi * two_pi * k2);
        std::complex<double> div = 0.0;
        for (int a = 0; a < dim; ++a)
            div += std::complex<double>(0.0, two_pi * k[a]) * b.at(a, m);
        out.V.at(0, m) = inv_lap * div;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                const std::complex<double> curl =
                    std::complex<double>(0.0, two_pi * k[i]) * b.at(j, m) -
                    std::complex<double>(0.0, two_pi * k[j]) * b.at(i, m);
                out.A.at(i, j, m) = inv_lap * curl;
            }
    }
    return out;
}

/// Max antisymmetry defect |A_ij + A_ji| over coefficients.
inline double antisymmetry_defect(const SpectralField& A) {
    if (A.rank != FieldRank::matrix)
        throw std::invalid_argument("antisymmetry_defect: matrix field expected");
    double worst = 0.0;
    const int dim = A.grid.dim;
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j)
            for (std::size_t m = 0; m < A.modes(); ++m)
                worst = std::max(worst, std::abs(A.at(i, j, m) + A.at(j, i, m)));
    return worst;
}

/// b(A): b^i = sum_j d_j A_ji. Throws if A is not antisymmetric; the output is
/// divergence-free by the symbol algebra (symmetric k_i k_j against
/// antisymmetric A_ij).
inline SpectralField drift_from_A(const SpectralField& A, double antisym_tol = 1e-10) {
    if (A.rank != FieldRank::matrix)
        throw std::invalid_argument("drift_from_A: matrix field expected");
    double scale = 0.0;
    for (const auto& c : A.coeffs) scale = std::max(scale, std::abs(c));
    if (antisymmetry_defect(A) > antisym_tol * std::max(1.0, scale))
        throw std::invalid_argument("drift_from_A: potential is not antisymmetric");
    const int dim = A.grid.dim;
    SpectralField b(A.grid, FieldRank::vector, A.real_flag);
    for (std::size_t m = 0; m < A.modes(); ++m) {
        const auto k = A.grid.wavevector(m);
        for (int i = 0; i < dim; ++i) {
            std::complex<double> acc = 0.0;
            for (int j = 0; j < dim; ++j)
                acc += std::complex<double>(0.0, two_pi * k[j]) * A.at(j, i, m);
            b.at(i, m) = acc;
        }
    }
    return b;
}

/// Max |divergence| coefficient of a vector field (unnormalized).
inline double divergence_linf_coeff(const SpectralField& b) {
    double worst = 0.0;
    for (std::size_t m = 0; m < b.modes(); ++m) {
        const auto k = b.grid.wavevector(m);
        std::complex<double> div = 0.0;
        for (int a = 0; a < b.grid.dim; ++a)
            div += std::complex<double>(0.0, two_pi * k[a]) * b.at(a, m);
        worst = std::max(worst, std::abs(div));
    }
    return worst;
}

inline SpectralField divergence_field(const SpectralField& b) {
    SpectralField d(b.grid, FieldRank::scalar, b.real_flag);
    for (std::size_t m = 0; m < b.modes(); ++m) {
        const auto k = b.grid.wavevector(m);
        std::complex<double> div = 0.0;
        for (int a = 0; a < b.grid.dim; ++a)
            div += std::complex<double>(0.0, two_pi * k[a]) * b.at(a, m);
        d.at(0, m) = div;
    }
    return d;
}

/// One time slice of a drift b = b1 + b2 + mean, with b1 held either as an
/// antisymmetric potential or as raw divergence-free coefficients.
struct DriftSlice {
    std::optional<SpectralField> A;      // matrix potential for b1
    std::optional<SpectralField> b1_raw; // divergence-free vector field
    std::optional<SpectralField> b2;     // gradient-type part
    std::array<double, 3> mean{0.0, 0.0, 0.0};
};

/// A drift specification: static (one slice) or time-sampled.
struct DriftSpec {
    TorusGrid grid;
    std::string id = "drift";
    std::vector<double> times;      // empty for static
    std::vector<DriftSlice> slices; // size >= 1
    std::vector<std::string> warnings;

    bool is_static() const { return times.empty(); }

    static DriftSpec zero(const TorusGrid& grid) {
        DriftSpec d{grid, "zero", {}, {DriftSlice{}}, {}};
        return d;
    }

    /// Divergence-free part of a slice as a vector field.
    SpectralField b1_field(std::size_t slice = 0) const {
        const auto& s = slices.at(slice);
        if (s.A) return drift_from_A(*s.A);
        if (s.b1_raw) return *s.b1_raw;
        return SpectralField(grid, FieldRank::vector, true);
    }

    /// Full drift field of a slice, b1 + b2 + mean.
    SpectralField total_field(std::size_t slice = 0) const {
        auto b = b1_field(slice);
        const auto& s = slices.at(slice);
        if (s.b2) b += *s.b2;
        for (int a = 0; a < grid.dim; ++a) b.at(a, 0) += s.mean[a];
        return b;
    }

    bool divergence_free() const {
        for (std::size_t i = 0; i < slices.size(); ++i) {
            const auto& s = slices[i];
            if (s.b2 && l2_norm(*s.b2) > 0.0) return false;
            if (s.b1_raw && divergence_linf_coeff(*s.b1_raw) > 1e-10) return false;
        }
        return true;
    }

    /// RawCoeffs invariant: ||div b1||_{H^{-2}} <= 1e-8 ||b1||_{H^{-1}}.
    void validate() const {
        if (slices.empty()) throw std::invalid_argument("DriftSpec: no slices");
        if (!times.empty() && times.size() != slices.size())
            throw std::invalid_argument("DriftSpec: times/slices mismatch");
        for (const auto& s : slices) {
            if (s.A && antisymmetry_defect(*s.A) > 1e-8 * std::max(1.0, lebesgue_norm(*s.A, 2.0)))
                throw std::invalid_argument("DriftSpec: potential A not antisymmetric");
            if (s.b1_raw) {
                const double div = sobolev_norm(divergence_field(*s.b1_raw), -2.0);
                const double ref = sobolev_norm(*s.b1_raw, -1.0);
                if (div > 1e-8 * std::max(ref, 1e-300))
                    throw std::invalid_argument("DriftSpec: raw b1 is not divergence-free");
            }
        }
    }
};

} // namespace sdl

#endif
