// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_DRIFT_LIBRARY_HPP
#define SDL_DRIFT_LIBRARY_HPP

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdl/helmholtz.hpp"
#include "sdl/mollify.hpp"
#include "sdl/rng.hpp"

namespace sdl {

/// Massless Gaussian free field on T^2: xi_hat(0) = 0 and for k != 0
/// xi_hat(k) = gamma_k / (2 pi |k|), gamma_k = (a_k + i b_k)/sqrt(2) with
/// independent standard normals and the Hermitian pairing
/// gamma_{-k} = conj(gamma_k). The Nyquist shell is zeroed so derivative
/// algebra stays real. gamma_k is drawn from a per-mode stream seeded by
/// (seed, k), so the sample at resolution 2N restricts to the sample at N:
/// refinement studies see one field at increasing resolution.
inline SpectralField sample_gff(const TorusGrid& grid, std::uint64_t seed) {
    if (grid.dim != 2) throw std::invalid_argument("sample_gff: dim = 2 required");
    SpectralField xi(grid, FieldRank::scalar, true);
    const int half = grid.modes_per_axis / 2;
    const std::size_t n = grid.points();
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = grid.wavevector(i);
        if (k[0] == 0 && k[1] == 0) continue;
        if (std::abs(k[0]) == half || std::abs(k[1]) == half) continue; // Nyquist shell dropped
        // Canonical representative: first nonzero component positive.
        const bool canonical = k[0] > 0 || (k[0] == 0 && k[1] > 0);
        if (!canonical) continue;
        const std::uint64_t stream = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k[0]))
                                      << 32) |
                                     static_cast<std::uint64_t>(static_cast<std::uint32_t>(k[1]));
        Rng rng(seed, stream);
        const double a = rng.normal();
        const double b = rng.normal();
        const double scale = 1.0 / (two_pi * std::sqrt(wavevector_norm2(k, 2)));
        const std::complex<double> gamma(a / std::sqrt(2.0), b / std::sqrt(2.0));
        xi.at(0, i) = scale * gamma;
        xi.at(0, grid.linear_index({-k[0], -k[1], 0})) = scale * std::conj(gamma);
    }
    return xi;
}

/// Drift of the log-regularized GFF example: A12 = -A21 = -log(1-Delta)^{-alpha} xi,
/// b = b(A) = grad^perp log(1-Delta)^{-alpha} xi, divergence-free.
inline DriftSpec gff_curl_drift(const SpectralField& xi, double alpha) {
    if (xi.grid.dim != 2) throw std::invalid_argument("gff_curl_drift: dim = 2 required");
    auto w = apply_multiplier(xi, log_inv_laplacian(alpha));
    SpectralField A(xi.grid, FieldRank::matrix, xi.real_flag);
    for (std::size_t m = 0; m < w.modes(); ++m) {
        A.at(0, 1, m) = -w.at(0, m);
        A.at(1, 0, m) = w.at(0, m);
    }
    DriftSpec d{xi.grid, "gff_curl", {}, {DriftSlice{A, std::nullopt, std::nullopt, {}}}, {}};
    return d;
}

/// Smooth divergence-free shear b(x) = (amp sin(2 pi x2), 0, 0) (needs dim >= 2).
inline DriftSpec shear_drift(const TorusGrid& grid, double amp = 1.0) {
    if (grid.dim < 2) throw std::invalid_argument("shear_drift: dim >= 2 required");
    SpectralField b1(grid, FieldRank::vector, true);
    b1.at(0, grid.linear_index({0, 1, 0})) = std::complex<double>(0.0, -0.5 * amp);
    b1.at(0, grid.linear_index({0, -1, 0})) = std::complex<double>(0.0, 0.5 * amp);
    DriftSpec d{grid, "shear", {}, {DriftSlice{std::nullopt, b1, std::nullopt, {}}}, {}};
    return d;
}

/// Constant drift (mean mode only).
inline DriftSpec constant_drift(const TorusGrid& grid, const std::array<double, 3>& c) {
    DriftSpec d{grid, "constant", {}, {DriftSlice{}}, {}};
    d.slices[0].mean = c;
    return d;
}

/// Torus distance of two points (min over integer shifts per axis).
inline double torus_distance(const double* x, const double* y, int dim) {
    double acc = 0.0;
    for (int a = 0; a < dim; ++a) {
        double d = std::abs(x[a] - y[a]);
        d = std::min(d, 1.0 - d);
        acc += d * d;
    }
    return std::sqrt(acc);
}

/// Smooth window supported in a ball: w = exp(-t^2 / (1 - t^2)) for
/// t = r/radius < 1, so w(0) = 1 at the center.
inline double smooth_window(double r, double radius) {
    const double t = r / radius;
    if (t >= 1.0) return 0.0;
    return std::exp(-t * t / (1.0 - t * t));
}

struct PointSingularity {
    SpectralField A;
    std::array<double, 3> center{0.5, 0.5, 0.5};
    std::vector<std::string> warnings;
    double truncated_l2_mass = 0.0; // L2 mass above |k| > N/4 (resolution ledger)
};

/// Windowed point singularity A(x) = w(x) |x - x0|^{-alpha} B with the window
/// supported in the ball of radius 1/4 around x0 = (1/2,...,1/2). Sampled on
/// the grid (distance clamped at half a cell, the documented grid-scale
/// truncation) and transformed; the Nyquist shell is zeroed so odd-derivative
/// algebra stays real.
inline PointSingularity point_singularity_A(const TorusGrid& grid, double alpha,
                                            const std::vector<double>& B_upper) {
    if (grid.dim < 2) throw std::invalid_argument("point_singularity_A: dim >= 2 required");
    const int dim = grid.dim;
    const std::size_t need = dim == 2 ? 1 : 3; // upper-triangle entries of antisymmetric B
    if (B_upper.size() != need)
        throw std::invalid_argument("point_singularity_A: wrong number of B entries");
    PointSingularity out;
    if (alpha >= dim / 2.0)
        out.warnings.push_back("alpha >= dim/2: field leaves L^2 under grid refinement");
    const int N = grid.modes_per_axis;
    std::array<double, 3> x0{0.5, 0.5, 0.5};
    out.center = x0;
    std::vector<double> profile(grid.points());
    const double clamp = 0.5 / N;
    for (std::size_t j = 0; j < profile.size(); ++j) {
        std::array<double, 3> x{0.0, 0.0, 0.0};
        std::size_t rest = j;
        for (int a = dim - 1; a >= 0; --a) {
            x[a] = static_cast<double>(rest % static_cast<std::size_t>(N)) / N;
            rest /= static_cast<std::size_t>(N);
        }
        const double r = std::max(torus_distance(x.data(), x0.data(), dim), clamp);
        profile[j] = smooth_window(r, 0.25) * std::pow(r, -alpha);
    }
    auto scalar = forward_transform(grid, FieldRank::scalar, profile);
    // Resolution ledger + Nyquist cleanup.
    const int half = N / 2;
    double high = 0.0;
    for (std::size_t m = 0; m < scalar.modes(); ++m) {
        const auto k = grid.wavevector(m);
        if (std::abs(k[0]) == half || std::abs(k[1]) == half || std::abs(k[2]) == half)
            scalar.at(0, m) = 0.0;
        if (wavevector_norm2(k, dim) > (N / 4.0) * (N / 4.0)) high += std::norm(scalar.at(0, m));
    }
    out.truncated_l2_mass = std::sqrt(high);
    SpectralField A(grid, FieldRank::matrix, true);
    auto assign = [&](int i, int j, double bij) {
        for (std::size_t m = 0; m < A.modes(); ++m) {
            A.at(i, j, m) = bij * scalar.at(0, m);
            A.at(j, i, m) = -bij * scalar.at(0, m);
        }
    };
    if (dim == 2) {
        assign(0, 1, B_upper[0]);
    } else {
        assign(0, 1, B_upper[0]);
        assign(0, 2, B_upper[1]);
        assign(1, 2, B_upper[2]);
    }
    out.A = std::move(A);
    return out;
}

struct MorreyField {
    SpectralField A;
    std::vector<int> kept;               // indices n whose bump is grid-resolvable
    int dropped = 0;                     // unresolvable bumps silently dropped
    std::vector<double> centered_exact;  // eps_n^{-2} alpha_n^2 per kept bump
    std::vector<double> centered_grid;   // same functional by grid quadrature
    std::vector<std::array<double, 3>> centers;
};

/// Morrey counterexample field |A| = sum_n alpha_n sqrt(rho^{eps_n})(. - 2^{-n} v),
/// A = |A| B. Bumps narrower than two grid cells are dropped (counted in the
/// report). Requires eps_n <= 2^{-n-3} so supports stay disjoint.
inline MorreyField morrey_counterexample_A(const TorusGrid& grid,
                                           const std::vector<double>& alpha_seq,
                                           const std::vector<double>& eps_seq,
                                           const std::array<double, 3>& v,
                                           const std::vector<double>& B_upper) {
    if (grid.dim < 2) throw std::invalid_argument("morrey_counterexample_A: dim >= 2 required");
    if (alpha_seq.size() != eps_seq.size())
        throw std::invalid_argument("morrey_counterexample_A: sequence length mismatch");
    const int dim = grid.dim;
    const int N = grid.modes_per_axis;
    const auto& kernel = MollifierKernel::shared(dim);
    MorreyField out;
    for (std::size_t n = 0; n < eps_seq.size(); ++n) {
        if (eps_seq[n] > std::pow(2.0, -static_cast<double>(n + 1) - 3.0) + 1e-12)
            throw std::invalid_argument("morrey_counterexample_A: eps_n > 2^{-n-3}");
    }

    std::vector<double> profile(grid.points(), 0.0);
    for (std::size_t n = 0; n < eps_seq.size(); ++n) {
        const double eps = eps_seq[n];
        const double alpha = alpha_seq[n];
        if (eps < 2.0 / N) {
            ++out.dropped;
            continue;
        }
        const double scale = std::pow(2.0, -static_cast<double>(n + 1));
        std::array<double, 3> center{0.5 + scale * v[0], 0.5 + scale * v[1],
                                     0.5 + scale * v[2]};
        // Centers are offset from (1/2,...) rather than 0 so that the "origin"
        // of the construction is an interior grid point; K = {(1/2,...)}.
        for (int a = 0; a < 3; ++a) center[a] -= std::floor(center[a]);
        out.kept.push_back(static_cast<int>(n + 1));
        out.centers.push_back(center);
        double grid_quad = 0.0;
        for (std::size_t j = 0; j < profile.size(); ++j) {
            std::array<double, 3> x{0.0, 0.0, 0.0};
            std::size_t rest = j;
            for (int a = dim - 1; a >= 0; --a) {
                x[a] = static_cast<double>(rest % static_cast<std::size_t>(N)) / N;
                rest /= static_cast<std::size_t>(N);
            }
            const double r = torus_distance(x.data(), center.data(), dim);
            if (r >= eps) continue;
            const double val =
                alpha * std::sqrt(std::pow(eps, -dim) * kernel.density(r / eps));
            profile[j] += val;
            grid_quad += val * val;
        }
        grid_quad /= static_cast<double>(grid.points());
        out.centered_exact.push_back(alpha * alpha / (eps * eps));
        out.centered_grid.push_back(grid_quad / (eps * eps));
    }
    auto scalar = forward_transform(grid, FieldRank::scalar, profile);
    const int half = N / 2;
    for (std::size_t m = 0; m < scalar.modes(); ++m) {
        const auto k = grid.wavevector(m);
        if (std::abs(k[0]) == half || std::abs(k[1]) == half || std::abs(k[2]) == half)
            scalar.at(0, m) = 0.0;
    }
    const std::size_t need = dim == 2 ? 1 : 3;
    if (B_upper.size() != need)
        throw std::invalid_argument("morrey_counterexample_A: wrong number of B entries");
    SpectralField A(grid, FieldRank::matrix, true);
    auto assign = [&](int i, int j, double bij) {
        for (std::size_t m = 0; m < A.modes(); ++m) {
            A.at(i, j, m) = bij * scalar.at(0, m);
            A.at(j, i, m) = -bij * scalar.at(0, m);
        }
    };
    if (dim == 2) {
        assign(0, 1, B_upper[0]);
    } else {
        assign(0, 1, B_upper[0]);
        assign(0, 2, B_upper[1]);
        assign(1, 2, B_upper[2]);
    }
    out.A = std::move(A);
    return out;
}

// ---------------------------------------------------------------------------
// N-particle lift. The lifted drift lives on T^{d N}; for d N <= 3 it can be
// materialized on a grid, otherwise it is kept as a sparse coefficient map
// with only direct-sum evaluation downstream.

constexpr int kMaxProductDim = 9;

struct ProductMode {
    std::array<int, kMaxProductDim> k{};
    std::vector<std::complex<double>> coeff; // per component
};

struct ProductDrift {
    int dim = 0; // d * nparticles
    int base_dim = 0;
    int nparticles = 0;
    std::vector<ProductMode> modes;

    /// Exact Fourier sum at a point of T^{dim}.
    std::vector<double> evaluate(const double* x) const {
        std::vector<double> out(static_cast<std::size_t>(dim), 0.0);
        for (const auto& m : modes) {
            double phase = 0.0;
            for (int a = 0; a < dim; ++a) phase += m.k[a] * x[a];
            const std::complex<double> e(std::cos(two_pi * phase), std::sin(two_pi * phase));
            for (int c = 0; c < dim; ++c) out[static_cast<std::size_t>(c)] += (m.coeff[c] * e).real();
        }
        return out;
    }

    /// Max |divergence| coefficient: sum_c 2 pi i k_c coeff_c per mode.
    double divergence_linf_coeff() const {
        double worst = 0.0;
        for (const auto& m : modes) {
            std::complex<double> div = 0.0;
            for (int c = 0; c < dim; ++c)
                div += std::complex<double>(0.0, two_pi * m.k[c]) * m.coeff[c];
            worst = std::max(worst, std::abs(div));
        }
        return worst;
    }
};

/// Sparse lift of an interaction field: particle k feels sum_{l != k} b(x^k - x^l).
/// Every base mode m contributes, for each ordered pair (k, l), one product
/// mode with wavevector m at slot k and -m at slot l.
inline ProductDrift particle_lift_coeffs(const SpectralField& base_b, int nparticles,
                                         std::size_t mode_budget = (std::size_t{1} << 22)) {
    if (base_b.rank != FieldRank::vector)
        throw std::invalid_argument("particle_lift: vector base field expected");
    if (nparticles < 2 || nparticles > 3)
        throw std::invalid_argument("particle_lift: nparticles in {2,3}");
    const int d = base_b.grid.dim;
    const int D = d * nparticles;
    if (D > kMaxProductDim) throw std::invalid_argument("particle_lift: product dim too large");

    std::size_t active = 0;
    for (std::size_t m = 0; m < base_b.modes(); ++m)
        for (int c = 0; c < d; ++c)
            if (std::abs(base_b.at(c, m)) > 0.0) {
                ++active;
                break;
            }
    const std::size_t total = active * static_cast<std::size_t>(nparticles) * (nparticles - 1);
    if (total > mode_budget)
        throw std::runtime_error(
            "particle_lift: mode budget exceeded (" + std::to_string(total) + " > " +
            std::to_string(mode_budget) + " product modes); coarsen the base drift");

    ProductDrift out;
    out.dim = D;
    out.base_dim = d;
    out.nparticles = nparticles;
    for (std::size_t m = 0; m < base_b.modes(); ++m) {
        const auto kv = base_b.grid.wavevector(m);
        bool nonzero = false;
        for (int c = 0; c < d; ++c) nonzero = nonzero || std::abs(base_b.at(c, m)) > 0.0;
        if (!nonzero) continue;
        const bool is_zero_mode = kv[0] == 0 && kv[1] == 0 && kv[2] == 0;
        for (int pk = 0; pk < nparticles; ++pk)
            for (int pl = 0; pl < nparticles; ++pl) {
                if (pk == pl) continue;
                ProductMode pm;
                pm.coeff.assign(static_cast<std::size_t>(D), 0.0);
                for (int a = 0; a < d; ++a) {
                    pm.k[pk * d + a] += kv[a];
                    pm.k[pl * d + a] -= kv[a];
                }
                for (int a = 0; a < d; ++a) pm.coeff[static_cast<std::size_t>(pk * d + a)] = base_b.at(a, m);
                // The zero base mode appears once per ordered pair; it folds
                // into the product zero mode like every other entry.
                (void)is_zero_mode;
                out.modes.push_back(std::move(pm));
            }
    }
    return out;
}

struct ProductPotentialMode {
    std::array<int, kMaxProductDim> k{};
    std::vector<std::complex<double>> entry; // row-major D x D
};

struct ProductPotential {
    int dim = 0;
    std::vector<ProductPotentialMode> modes;

    /// Entries with one wavevector may be split across several stored modes
    /// (one per particle pair); accumulate per kappa before checking A + A^T = 0.
    double antisymmetry_defect() const {
        std::map<std::array<int, kMaxProductDim>, std::vector<std::complex<double>>> acc;
        for (const auto& m : modes) {
            auto& slot = acc[m.k];
            if (slot.empty()) slot.assign(m.entry.size(), 0.0);
            for (std::size_t c = 0; c < m.entry.size(); ++c) slot[c] += m.entry[c];
        }
        double worst = 0.0;
        for (const auto& [k, entry] : acc)
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j)
                    worst = std::max(worst,
                                     std::abs(entry[static_cast<std::size_t>(i) * dim + j] +
                                              entry[static_cast<std::size_t>(j) * dim + i]));
        return worst;
    }

    /// Column divergence b^j = sum_i d_i A_ij at coefficient level.
    ProductDrift drift() const {
        ProductDrift out;
        out.dim = dim;
        for (const auto& m : modes) {
            ProductMode pm;
            pm.k = m.k;
            pm.coeff.assign(static_cast<std::size_t>(dim), 0.0);
            for (int j = 0; j < dim; ++j) {
                std::complex<double> acc = 0.0;
                for (int i = 0; i < dim; ++i)
                    acc += std::complex<double>(0.0, two_pi * m.k[i]) *
                           m.entry[static_cast<std::size_t>(i) * dim + j];
                pm.coeff[static_cast<std::size_t>(j)] = acc;
            }
            out.modes.push_back(std::move(pm));
        }
        return out;
    }
};

/// Potential lift for an even antisymmetric base A: block (k,i),(l,j) is
/// +- A_ij(x_l - x_k) for l != k (diagonal blocks vanish; A(0) of the even
/// field would be constant and drops out of the drift anyway). The sign is
/// fixed so that the column divergence of the lift equals the lifted
/// interaction drift, i.e. drift(lift(A)) == lift(drift(A)). Requires the
/// base A to be even, else the lift is not antisymmetric.
inline ProductPotential particle_lift_potential(const SpectralField& base_A, int nparticles,
                                                std::size_t mode_budget = (std::size_t{1} << 22)) {
    if (base_A.rank != FieldRank::matrix)
        throw std::invalid_argument("particle_lift_potential: matrix base field expected");
    const int d = base_A.grid.dim;
    const int D = d * nparticles;
    if (D > kMaxProductDim)
        throw std::invalid_argument("particle_lift_potential: product dim too large");
    // Evenness check: A_hat(-k) = A_hat(k).
    for (std::size_t m = 0; m < base_A.modes(); ++m) {
        const auto kv = base_A.grid.wavevector(m);
        const std::size_t mm = base_A.grid.linear_index({-kv[0], -kv[1], -kv[2]});
        for (int c = 0; c < base_A.ncomp(); ++c)
            if (std::abs(base_A.at(c, m) - base_A.at(c, mm)) >
                1e-10 * std::max(1.0, std::abs(base_A.at(c, m))))
                throw std::invalid_argument("particle_lift_potential: base A must be even");
    }
    std::size_t active = 0;
    for (std::size_t m = 0; m < base_A.modes(); ++m)
        for (int c = 0; c < base_A.ncomp(); ++c)
            if (std::abs(base_A.at(c, m)) > 0.0) {
                ++active;
                break;
            }
    if (active * nparticles * (nparticles - 1) > mode_budget)
        throw std::runtime_error("particle_lift_potential: mode budget exceeded");

    ProductPotential out;
    out.dim = D;
    for (std::size_t m = 0; m < base_A.modes(); ++m) {
        const auto kv = base_A.grid.wavevector(m);
        bool nonzero = false;
        for (int c = 0; c < base_A.ncomp(); ++c) nonzero = nonzero || std::abs(base_A.at(c, m)) > 0.0;
        if (!nonzero) continue;
        for (int pk = 0; pk < nparticles; ++pk)
            for (int pl = 0; pl < nparticles; ++pl) {
                if (pk == pl) continue;
                ProductPotentialMode pm;
                pm.entry.assign(static_cast<std::size_t>(D) * D, 0.0);
                // -A_ij(x_l - x_k): wavevector +m at slot l, -m at slot k.
                for (int a = 0; a < d; ++a) {
                    pm.k[pl * d + a] += kv[a];
                    pm.k[pk * d + a] -= kv[a];
                }
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        pm.entry[static_cast<std::size_t>(pk * d + i) * D + (pl * d + j)] =
                            -base_A.at(i, j, m);
                out.modes.push_back(std::move(pm));
            }
    }
    return out;
}

/// Materialize a sparse lifted drift on a dense grid when dim <= 3.
inline DriftSpec materialize_product_drift(const ProductDrift& pd, int modes_per_axis,
                                           const std::string& id) {
    if (pd.dim > 3)
        throw std::invalid_argument("materialize_product_drift: product dim > 3 has no grid");
    TorusGrid grid(pd.dim, modes_per_axis);
    SpectralField b(grid, FieldRank::vector, true);
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    const int half = modes_per_axis / 2;
    for (const auto& m : pd.modes) {
        bool fits = true;
        std::array<int, 3> kv{0, 0, 0};
        for (int a = 0; a < pd.dim; ++a) {
            kv[a] = m.k[a];
            if (kv[a] <= -half || kv[a] > half) fits = false;
        }
        if (!fits)
            throw std::runtime_error("materialize_product_drift: lifted mode exceeds grid");
        const std::size_t idx = grid.linear_index(kv);
        const bool zero = kv[0] == 0 && kv[1] == 0 && kv[2] == 0;
        for (int c = 0; c < pd.dim; ++c) {
            if (zero)
                mean[c] += m.coeff[static_cast<std::size_t>(c)].real();
            else
                b.at(c, idx) += m.coeff[static_cast<std::size_t>(c)];
        }
    }
    DriftSpec d{grid, id, {}, {DriftSlice{std::nullopt, std::nullopt, std::nullopt, mean}}, {}};
    // The lifted field splits into divergence-free + gradient parts exactly as
    // its base does; store it raw if divergence-free, else as b2.
    SpectralField bcopy = b;
    if (divergence_linf_coeff(b) <= 1e-10 * std::max(1.0, l2_norm(b)))
        d.slices[0].b1_raw = std::move(bcopy);
    else
        d.slices[0].b2 = std::move(bcopy);
    return d;
}

} // namespace sdl

#endif
