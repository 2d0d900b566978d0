// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_DYADIC_HPP
#define SDL_DYADIC_HPP

#include <cmath>
#include <vector>

#include "sdl/field.hpp"

namespace sdl {

/// Littlewood-Paley block system on the truncated mode set.
///
/// Profile geometry (Bahouri-Chemin-Danchin style): psi is the C-infinity
/// transition
///     psi(r) = 1 for r <= 1,   psi(r) = 0 for r >= 4/3,
///     psi(r) = q(t) / (q(t) + q(1-t)) with t = (4/3 - r) * 3, q(t) = e^{-1/t},
/// and
///     chi(r) = psi(r),   phi(r) = psi(r/2) - psi(r),
/// so phi is supported in the annulus [1, 8/3] (inside the usual [3/4, 8/3])
/// and the partition telescopes exactly:
///     chi(r) + sum_{j=0}^{J} phi(2^{-j} r) = psi(2^{-J-1} r),
/// which equals 1 on every resolvable wavenumber once J = j_max.
struct DyadicPartition {
    int j_max;

    explicit DyadicPartition(const TorusGrid& grid)
        : j_max(static_cast<int>(std::ceil(std::log2(grid.modes_per_axis / 2.0))) + 1) {}

    static double psi(double r) {
        if (r <= 1.0) return 1.0;
        if (r >= 4.0 / 3.0) return 0.0;
        const double t = (4.0 / 3.0 - r) * 3.0;
        const double qa = std::exp(-1.0 / t);
        const double qb = std::exp(-1.0 / (1.0 - t));
        return qa / (qa + qb);
    }

    static double chi(double r) { return psi(r); }
    static double phi(double r) { return psi(r / 2.0) - psi(r); }

    /// Symbol of the block Delta_j (j = -1 is the low-frequency block).
    double block_symbol(int j, double kabs) const {
        return j < 0 ? chi(kabs) : phi(std::ldexp(kabs, -j));
    }

    /// Symbol of the tail projection Pi_{>= j} = 1 - (chi + sum_{i<j} phi_i),
    /// by telescoping = 1 - psi(2^{-j} |k|) for j >= 0 and 1 for j = -1.
    double tail_symbol(int j, double kabs) const {
        return j < 0 ? 1.0 : 1.0 - psi(std::ldexp(kabs, -j));
    }
};

namespace detail {

template <typename SymbolFn>
inline SpectralField apply_radial_weight(const SpectralField& u, SymbolFn&& w) {
    SpectralField out(u.grid, u.rank, u.real_flag);
    const std::size_t n = u.modes();
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = u.grid.wavevector(i);
        double k2 = 0.0;
        for (int a = 0; a < u.grid.dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
        const double weight = w(std::sqrt(k2));
        for (int c = 0; c < u.ncomp(); ++c) out.at(c, i) = weight * u.at(c, i);
    }
    return out;
}

} // namespace detail

/// The j-th Littlewood-Paley block of u (j >= -1).
inline SpectralField lp_block(const SpectralField& u, int j) {
    DyadicPartition part(u.grid);
    return detail::apply_radial_weight(u, [&](double r) { return part.block_symbol(j, r); });
}

/// Tail projection Pi_{>= j} u.
inline SpectralField lp_tail(const SpectralField& u, int j) {
    DyadicPartition part(u.grid);
    return detail::apply_radial_weight(u, [&](double r) { return part.tail_symbol(j, r); });
}

struct BesovParams {
    double s = 0.0;
    double p = 2.0;
    double q = 2.0;
};

/// Nonhomogeneous Besov norm (sum_{j >= -1} 2^{sjq} ||Delta_j u||_{L^p}^q)^{1/q},
/// sup over j for q = infinity.
inline double besov_norm(const SpectralField& u, const BesovParams& params) {
    DyadicPartition part(u.grid);
    double acc = 0.0;
    double sup = 0.0;
    for (int j = -1; j <= part.j_max; ++j) {
        const double lp = lebesgue_norm(lp_block(u, j), params.p);
        const double weighted = std::pow(2.0, params.s * j) * lp;
        if (std::isinf(params.q))
            sup = std::max(sup, weighted);
        else
            acc += std::pow(weighted, params.q);
    }
    return std::isinf(params.q) ? sup : std::pow(acc, 1.0 / params.q);
}

/// ||u||_{B^0_{p,1}} = sum_j ||Delta_j u||_{L^p}.
inline double b01_norm(const SpectralField& u, double p) {
    return besov_norm(u, {0.0, p, 1.0});
}

/// The square-tail norm ||u||_{B^0_{p,1,2}} = (sum_j ||Pi_{>=j} u||_{B^0_{p,1}}^2)^{1/2}
/// with j running over -1 .. j_max. The j = -1 term alone is ||u||_{B^0_{p,1}}
/// since Pi_{>=-1} u = u, which gives the embedding ordering for free.
inline double b012_norm(const SpectralField& u, double p) {
    DyadicPartition part(u.grid);
    double acc = 0.0;
    for (int j = -1; j <= part.j_max; ++j) {
        const double t = b01_norm(lp_tail(u, j), p);
        acc += t * t;
    }
    return std::sqrt(acc);
}

/// Mixed-in-time norm L^q_T of per-slice values by trapezoid quadrature on the
/// stored slice times (max over slices for q = infinity).
inline double mixed_time_norm(const std::vector<double>& times, const std::vector<double>& values,
                              double q) {
    if (times.size() != values.size() || times.empty())
        throw std::invalid_argument("mixed_time_norm: times/values mismatch");
    if (std::isinf(q)) {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }
    if (times.size() == 1) return values[0] * std::pow(times[0], 1.0 / q); // degenerate static case
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double dt = times[i + 1] - times[i];
        acc += 0.5 * dt * (std::pow(values[i], q) + std::pow(values[i + 1], q));
    }
    return std::pow(acc, 1.0 / q);
}

} // namespace sdl

#endif
