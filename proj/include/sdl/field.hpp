// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_FIELD_HPP
#define SDL_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdl/fft.hpp"
#include "sdl/grid.hpp"

namespace sdl {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class FieldRank { scalar, vector, matrix };

inline int rank_components(FieldRank rank, int dim) {
    switch (rank) {
        case FieldRank::scalar: return 1;
        case FieldRank::vector: return dim;
        case FieldRank::matrix: return dim * dim;
    }
    return 1;
}

/// Truncated Fourier representation of a periodic field on the unit torus.
///
/// Coefficients are stored component-major, each component a row-major array
/// over FFT-ordered wavenumbers. Fields are treated as immutable values by all
/// operations in this library: functions take const refs and return fresh
/// fields. real_flag records the Hermitian-symmetry contract
/// u_hat(-k) = conj(u_hat(k)); it is asserted by tests, not enforced here.
struct SpectralField {
    TorusGrid grid;
    FieldRank rank = FieldRank::scalar;
    bool real_flag = true;
    std::vector<std::complex<double>> coeffs; // [comp][k], k row-major FFT order

    SpectralField() = default;
    SpectralField(const TorusGrid& g, FieldRank r, bool real = true)
        : grid(g), rank(r), real_flag(real),
          coeffs(static_cast<std::size_t>(rank_components(r, g.dim)) * g.points()) {}

    int ncomp() const { return rank_components(rank, grid.dim); }
    std::size_t modes() const { return grid.points(); }

    std::complex<double>* comp(int c) { return coeffs.data() + static_cast<std::size_t>(c) * modes(); }
    const std::complex<double>* comp(int c) const {
        return coeffs.data() + static_cast<std::size_t>(c) * modes();
    }

    std::complex<double>& at(int c, std::size_t k) { return comp(c)[k]; }
    const std::complex<double>& at(int c, std::size_t k) const { return comp(c)[k]; }

    /// Matrix-rank accessor, row i / column j.
    std::complex<double>& at(int i, int j, std::size_t k) { return comp(i * grid.dim + j)[k]; }
    const std::complex<double>& at(int i, int j, std::size_t k) const {
        return comp(i * grid.dim + j)[k];
    }

    SpectralField& operator+=(const SpectralField& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
        real_flag = real_flag && o.real_flag;
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
        real_flag = real_flag && o.real_flag;
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& c : coeffs) c *= s;
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    void require_same_shape(const SpectralField& o) const {
        if (grid != o.grid || rank != o.rank)
            throw std::invalid_argument("SpectralField: shape mismatch");
    }
};

/// Forward transform of one component: u_hat(k) = N^{-dim} sum_j u(x_j) e^{-2 pi i k x_j}.
inline void forward_component(const TorusGrid& grid, std::complex<double>* data) {
    FftEngine::transform(grid, data, FFTW_FORWARD);
    const double scale = 1.0 / static_cast<double>(grid.points());
    for (std::size_t i = 0; i < grid.points(); ++i) data[i] *= scale;
}

/// Inverse transform of one component (synthesis sum, no scaling).
inline void inverse_component(const TorusGrid& grid, std::complex<double>* data) {
    FftEngine::transform(grid, data, FFTW_BACKWARD);
}

/// Build a field from real collocation samples; sample index order is the
/// same row-major layout as the coefficients.
inline SpectralField forward_transform(const TorusGrid& grid, FieldRank rank,
                                       const std::vector<double>& samples) {
    SpectralField f(grid, rank, true);
    const std::size_t n = grid.points();
    if (samples.size() != n * static_cast<std::size_t>(f.ncomp()))
        throw std::invalid_argument("forward_transform: sample array shape mismatch");
    for (int c = 0; c < f.ncomp(); ++c) {
        auto* dst = f.comp(c);
        for (std::size_t i = 0; i < n; ++i) dst[i] = samples[c * n + i];
        forward_component(grid, dst);
    }
    return f;
}

inline SpectralField forward_transform(const TorusGrid& grid, FieldRank rank,
                                       const std::vector<std::complex<double>>& samples) {
    SpectralField f(grid, rank, false);
    const std::size_t n = grid.points();
    if (samples.size() != n * static_cast<std::size_t>(f.ncomp()))
        throw std::invalid_argument("forward_transform: sample array shape mismatch");
    for (int c = 0; c < f.ncomp(); ++c) {
        auto* dst = f.comp(c);
        std::copy(samples.begin() + static_cast<std::ptrdiff_t>(c * n),
                  samples.begin() + static_cast<std::ptrdiff_t>((c + 1) * n), dst);
        forward_component(grid, dst);
    }
    return f;
}

/// Collocation samples of one component (complex).
inline std::vector<std::complex<double>> inverse_transform(const SpectralField& f, int c = 0) {
    std::vector<std::complex<double>> out(f.comp(c), f.comp(c) + f.modes());
    inverse_component(f.grid, out.data());
    return out;
}

/// Real collocation samples of one component (imaginary part discarded).
inline std::vector<double> real_samples(const SpectralField& f, int c = 0) {
    auto z = inverse_transform(f, c);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
    return out;
}

/// Real collocation samples of all components, component-major.
inline std::vector<double> real_samples_all(const SpectralField& f) {
    std::vector<double> out;
    out.reserve(f.coeffs.size());
    for (int c = 0; c < f.ncomp(); ++c) {
        auto s = real_samples(f, c);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

/// Grid quadrature Lebesgue norm, p in [1, inf]. Pointwise magnitude is the
/// Euclidean (Frobenius) norm over components. p = inf returns the max over
/// collocation samples. Documented bias for smooth fields: O(N^{-2}) against
/// the exact integral (collocation quadrature, no dealiasing).
inline double lebesgue_norm(const SpectralField& f, double p) {
    if (p < 1.0) throw std::invalid_argument("lebesgue_norm: p must be >= 1");
    const std::size_t n = f.modes();
    std::vector<double> mag2(n, 0.0);
    for (int c = 0; c < f.ncomp(); ++c) {
        auto s = inverse_transform(f, c);
        for (std::size_t i = 0; i < n; ++i) mag2[i] += std::norm(s[i]);
    }
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : mag2) m = std::max(m, v);
        return std::sqrt(m);
    }
    double acc = 0.0;
    for (double v : mag2) acc += std::pow(v, p / 2.0);
    return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

/// l2 coefficient norm; by Parseval this is the L2 norm of the field.
inline double l2_norm(const SpectralField& f) {
    double acc = 0.0;
    for (const auto& c : f.coeffs) acc += std::norm(c);
    return std::sqrt(acc);
}

/// L2 pairing <f, g> = sum_k f_hat(k) conj(g_hat(k)), summed over components.
/// For real fields this equals the integral of the pointwise product.
inline std::complex<double> inner_l2(const SpectralField& f, const SpectralField& g) {
    f.require_same_shape(g);
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) acc += f.coeffs[i] * std::conj(g.coeffs[i]);
    return acc;
}

/// Sobolev norm with weight (1 + 4 pi^2 |k|^2)^s.
inline double sobolev_norm(const SpectralField& f, double s) {
    const std::size_t n = f.modes();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto k = f.grid.wavevector(i);
        double k2 = 0.0;
        for (int a = 0; a < f.grid.dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
        const double w = std::pow(1.0 + two_pi * two_pi * k2, s);
        for (int c = 0; c < f.ncomp(); ++c) acc += w * std::norm(f.at(c, i));
    }
    return std::sqrt(acc);
}

enum class EvalMode { direct_sum, grid_interp };

/// Exact truncated Fourier sum at arbitrary points. Cost is O(points * modes);
/// refuses when that product exceeds the budget.
inline std::vector<double> evaluate_direct(const SpectralField& f, int c,
                                           const std::vector<std::array<double, 3>>& points,
                                           std::size_t op_budget = (std::size_t{1} << 28)) {
    const std::size_t n = f.modes();
    if (n * points.size() > op_budget)
        throw std::runtime_error("evaluate_direct: mode count x point count exceeds budget");
    const int N = f.grid.modes_per_axis;
    const int dim = f.grid.dim;
    // Per-axis twiddle table e^{2 pi i k x_a} for each point would still be
    // O(modes) per point; factorize the sum axis by axis instead.
    std::vector<double> out(points.size(), 0.0);
    std::vector<std::complex<double>> tw(static_cast<std::size_t>(dim) * N);
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        for (int a = 0; a < dim; ++a)
            for (int idx = 0; idx < N; ++idx) {
                const double phase = two_pi * f.grid.freq(idx) * points[pi][a];
                tw[static_cast<std::size_t>(a) * N + idx] = {std::cos(phase), std::sin(phase)};
            }
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> w = f.at(c, k);
            std::size_t rest = k;
            for (int a = dim - 1; a >= 0; --a) {
                const int idx = static_cast<int>(rest % static_cast<std::size_t>(N));
                rest /= static_cast<std::size_t>(N);
                w *= tw[static_cast<std::size_t>(a) * N + idx];
            }
            acc += w;
        }
        out[pi] = acc.real();
    }
    return out;
}

/// Multilinear interpolation of the collocation samples of one component.
/// Construct once per field; evaluation wraps coordinates into [0,1).
class GridInterpolator {
  public:
    GridInterpolator(const SpectralField& f, int c) : grid_(f.grid), samples_(real_samples(f, c)) {}
    explicit GridInterpolator(const TorusGrid& grid, std::vector<double> samples)
        : grid_(grid), samples_(std::move(samples)) {}

    double operator()(const double* x) const {
        const int N = grid_.modes_per_axis;
        const int dim = grid_.dim;
        int base[3];
        double w[3];
        for (int a = 0; a < dim; ++a) {
            double xa = x[a] - std::floor(x[a]);
            double g = xa * N;
            int i0 = static_cast<int>(g);
            if (i0 >= N) i0 = 0;
            base[a] = i0;
            w[a] = g - static_cast<double>(i0);
        }
        double acc = 0.0;
        const int corners = 1 << dim;
        for (int m = 0; m < corners; ++m) {
            double weight = 1.0;
            std::size_t idx = 0;
            for (int a = 0; a < dim; ++a) {
                const int bit = (m >> a) & 1;
                weight *= bit ? w[a] : 1.0 - w[a];
                const int ia = (base[a] + bit) % N;
                idx = idx * static_cast<std::size_t>(N) + static_cast<std::size_t>(ia);
            }
            acc += weight * samples_[idx];
        }
        return acc;
    }

    const TorusGrid& grid() const { return grid_; }

  private:
    TorusGrid grid_;
    std::vector<double> samples_;
};

inline std::vector<double> evaluate_at(const SpectralField& f, int c,
                                       const std::vector<std::array<double, 3>>& points,
                                       EvalMode mode) {
    if (mode == EvalMode::direct_sum) return evaluate_direct(f, c, points);
    GridInterpolator interp(f, c);
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = interp(points[i].data());
    return out;
}

/// Max Hermitian-symmetry defect |u_hat(-k) - conj(u_hat(k))| over all
/// components. -k is reduced mod N, so a pure Nyquist slot (self-paired)
/// contributes its imaginary part.
inline double hermitian_defect(const SpectralField& f) {
    double worst = 0.0;
    const std::size_t n = f.modes();
    for (std::size_t i = 0; i < n; ++i) {
        auto k = f.grid.wavevector(i);
        std::array<int, 3> mk{0, 0, 0};
        for (int a = 0; a < f.grid.dim; ++a) mk[a] = -k[a];
        const std::size_t j = f.grid.linear_index(mk);
        for (int c = 0; c < f.ncomp(); ++c)
            worst = std::max(worst, std::abs(f.at(c, j) - std::conj(f.at(c, i))));
    }
    return worst;
}

} // namespace sdl

#endif
