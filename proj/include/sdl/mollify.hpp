// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_MOLLIFY_HPP
#define SDL_MOLLIFY_HPP

#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

#include "sdl/helmholtz.hpp"
#include "sdl/multiplier.hpp"

namespace sdl {

// The mollifier is the standard compactly supported positive bump
//     rho(x) = c_d exp(-1 / (1 - |x|^2)) on |x| < 1, 0 outside,
// normalized to unit mass; rho^n = n^d rho(n x) for static fields, with the
// one-dimensional profile reused in time. Mollification acts as the exact
// Fourier multiplier rho_hat(|k| / n) (Poisson summation: the coefficients of
// the periodization of rho^n at integer k are the continuum transform at k/n).
//
// rho_hat is radial; per dimension it is tabulated as
//     rho_hat_d(r) = int P_d(t) cos(2 pi r t) dt / int P_d,
// where P_d(t) = int rho(t, y) dy over y in R^{d-1} is the (smooth, compactly
// supported) one-dimensional projection of the bump. The t-integral is done
// by composite Gauss-Legendre, the table is cubic-interpolated with spacing
// chosen so the interpolation error stays below 1e-9, and the symbol is
// clamped to 0 beyond the table range where |rho_hat| < 1e-12.

namespace detail {

inline double bump_profile(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

/// 16-point Gauss-Legendre nodes/weights on [-1, 1].
struct Gauss16 {
    static constexpr double x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                    0.9445750230732326, 0.9894009349916499};
    static constexpr double w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                    0.0622535239386479, 0.0271524594117541};
};

template <typename F>
double gauss_panel(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
        acc += Gauss16::w[i] * (f(c + h * Gauss16::x[i]) + f(c - h * Gauss16::x[i]));
    }
    return acc * h;
}

template <typename F>
double gauss_composite(F&& f, double a, double b, int panels) {
    double acc = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) acc += gauss_panel(f, a + p * h, a + (p + 1) * h);
    return acc;
}

} // namespace detail

class MollifierKernel {
  public:
    explicit MollifierKernel(int dim) : dim_(dim) {
        build_projection();
        build_table();
    }

    int dim() const { return dim_; }

    /// Normalized bump value rho(x) for |x| = r (unit mass over R^dim).
    double density(double r) const { return norm_const_ * detail::bump_profile(r * r); }

    /// Unit-mass check by radial quadrature with a panel count different from
    /// the one used for normalization.
    double mass_quadrature() const {
        const double surf = surface_area(dim_);
        return surf * detail::gauss_composite(
                          [&](double s) { return density(s) * std::pow(s, dim_ - 1); }, 0.0, 1.0,
                          97);
    }

    /// rho_hat(r), normalized so rho_hat(0) = 1; cubic table interpolation.
    double fourier(double r) const {
        r = std::abs(r);
        const double g = r / table_step_;
        const auto i = static_cast<std::size_t>(g);
        if (i + 2 >= table_.size()) return 0.0;
        const double t = g - static_cast<double>(i);
        // Catmull-Rom through the four surrounding nodes; even extension of
        // the radial profile supplies the node left of r = 0.
        const double a = i == 0 ? table_[1] : table_[i - 1];
        const double p1 = table_[i];
        const double p2 = table_[i + 1];
        const double p3 = table_[i + 2];
        return 0.5 * ((2.0 * p1) + (-a + p2) * t + (2.0 * a - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                      (-a + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
    }

    /// Multiplier for b -> rho^n * b (periodized convolution).
    Multiplier multiplier(int n) const {
        const MollifierKernel* self = this;
        return {[self, n](const std::array<int, 3>& k, int dim) {
                    const double r = std::sqrt(wavevector_norm2(k, dim)) / n;
                    return std::complex<double>(self->fourier(r), 0.0);
                },
                ZeroMode::keep};
    }

    static const MollifierKernel& shared(int dim) {
        static std::mutex mu;
        static std::unique_ptr<MollifierKernel> cache[7];
        std::lock_guard<std::mutex> lock(mu);
        if (dim < 1 || dim > 6) throw std::invalid_argument("MollifierKernel: dim out of range");
        if (!cache[dim]) cache[dim] = std::make_unique<MollifierKernel>(dim);
        return *cache[dim];
    }

    static double surface_area(int d) {
        // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
        return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
    }

  private:
    int dim_;
    double norm_const_ = 1.0;
    double table_step_ = 0.0025;
    double r_max_ = 64.0;
    std::vector<double> table_;
    std::vector<double> proj_nodes_, proj_vals_; // P_dim at Gauss nodes on [0, 1]

    void build_projection() {
        // P_d(t) = |S^{d-2}| int_0^{sqrt(1-t^2)} e^{-1/(1-t^2-s^2)} s^{d-2} ds
        // (even in t; for d = 1 it is the profile itself).
        const int panels = 96;
        proj_nodes_.clear();
        proj_vals_.clear();
        const double h = 1.0 / panels;
        for (int p = 0; p < panels; ++p) {
            const double a = p * h, b = (p + 1) * h;
            const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
            for (int i = 0; i < 8; ++i) {
                for (double sgn : {1.0, -1.0}) {
                    const double t = c + sgn * hw * detail::Gauss16::x[i];
                    proj_nodes_.push_back(t);
                    proj_vals_.push_back(hw * detail::Gauss16::w[i] * projection_at(t));
                }
            }
        }
        // Normalize so the projection integrates (with weights) to 1/2 on
        // [0, 1] (P is even and has unit mass when rho does).
        double mass = 0.0;
        for (double v : proj_vals_) mass += v;
        for (double& v : proj_vals_) v /= 2.0 * mass;
        // Normalization constant of rho itself (unit mass in R^dim).
        const double raw = surface_area(dim_) *
                           detail::gauss_composite(
                               [&](double s) {
                                   return detail::bump_profile(s * s) * std::pow(s, dim_ - 1);
                               },
                               0.0, 1.0, 64);
        norm_const_ = 1.0 / raw;
    }

    double projection_at(double t) const {
        const double rem = 1.0 - t * t;
        if (rem <= 0.0) return 0.0;
        if (dim_ == 1) return detail::bump_profile(t * t);
        const double lim = std::sqrt(rem);
        const double surf = dim_ == 2 ? 2.0 : surface_area(dim_ - 1);
        return surf * detail::gauss_composite(
                          [&](double s) {
                              return detail::bump_profile(t * t + s * s) * std::pow(s, dim_ - 2);
                          },
                          0.0, lim, 48);
    }

    void build_table() {
        const auto count = static_cast<std::size_t>(r_max_ / table_step_) + 4;
        table_.assign(count, 0.0);
        // T(r) = 2 sum_i w_i P(t_i) cos(2 pi r t_i); recursive rotation over r
        // avoids count * nodes trig calls.
        for (std::size_t j = 0; j < proj_nodes_.size(); ++j) {
            const double t = proj_nodes_[j];
            const double wv = 2.0 * proj_vals_[j];
            const double dphi = two_pi * table_step_ * t;
            const double cd = std::cos(dphi), sd = std::sin(dphi);
            double c = 1.0, s = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                table_[i] += wv * c;
                const double cn = c * cd - s * sd;
                s = s * cd + c * sd;
                c = cn;
            }
        }
        const double t0 = table_[0];
        for (double& v : table_) v /= t0;
    }
};

/// Spatial mollification b^n = rho^n * b as an exact Fourier multiplier.
inline SpectralField mollify_space(const SpectralField& f, int n) {
    if (n < 1) throw std::invalid_argument("mollify_space: n >= 1 required");
    return apply_multiplier(f, MollifierKernel::shared(f.grid.dim).multiplier(n));
}

inline DriftSlice mollify_space(const DriftSlice& s, int n, const TorusGrid& grid) {
    DriftSlice out;
    if (s.A) out.A = mollify_space(*s.A, n);
    if (s.b1_raw) out.b1_raw = mollify_space(*s.b1_raw, n);
    if (s.b2) out.b2 = mollify_space(*s.b2, n);
    out.mean = s.mean; // rho_hat(0) = 1
    (void)grid;
    return out;
}

/// Mollify a drift in space (all slices).
inline DriftSpec mollify_space(const DriftSpec& d, int n) {
    DriftSpec out = d;
    out.id = d.id + "/mollify" + std::to_string(n);
    for (auto& s : out.slices) s = mollify_space(s, n, d.grid);
    return out;
}

/// Discrete convolution in time with the 1-d bump at scale 1/n, zero-extended
/// outside the sampled window, composed with spatial mollification. Time
/// samples must be uniform with step <= 1/(2n).
inline DriftSpec mollify_time(const DriftSpec& path, int n) {
    if (path.is_static()) {
        auto out = mollify_space(path, n);
        return out;
    }
    const std::size_t m = path.times.size();
    if (m < 2) throw std::invalid_argument("mollify_time: need at least two samples");
    const double dt = path.times[1] - path.times[0];
    for (std::size_t i = 0; i + 1 < m; ++i)
        if (std::abs(path.times[i + 1] - path.times[i] - dt) > 1e-9 * std::max(1.0, dt))
            throw std::invalid_argument("mollify_time: time samples not uniform");
    if (dt > 0.5 / n)
        throw std::runtime_error("mollify_time: time step coarser than 1/(2n)");
    const auto& kernel = MollifierKernel::shared(1);
    const int radius = static_cast<int>(std::floor(1.0 / (n * dt)));
    std::vector<double> w(2 * radius + 1, 0.0);
    double mass = 0.0;
    for (int j = -radius; j <= radius; ++j) {
        w[j + radius] = kernel.density(std::abs(j * dt * n)) * n * dt;
        mass += w[j + radius];
    }
    for (double& x : w) x /= mass; // discrete unit mass

    DriftSpec out = path;
    out.id = path.id + "/mollify_t" + std::to_string(n);
    auto combine = [&](auto&& get_field) {
        std::vector<SpectralField> res;
        for (std::size_t i = 0; i < m; ++i) {
            SpectralField acc = get_field(i);
            acc *= 0.0;
            for (int j = -radius; j <= radius; ++j) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) - j;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(m)) continue; // zero extension
                auto term = get_field(static_cast<std::size_t>(src));
                term *= w[j + radius];
                acc += term;
            }
            res.push_back(std::move(acc));
        }
        return res;
    };

    const auto& first = path.slices.front();
    for (const auto& s : path.slices) {
        if (bool(s.A) != bool(first.A) || bool(s.b1_raw) != bool(first.b1_raw) ||
            bool(s.b2) != bool(first.b2))
            throw std::invalid_argument("mollify_time: slices must share one representation");
    }
    if (first.A) {
        auto r = combine([&](std::size_t i) { return *path.slices[i].A; });
        for (std::size_t i = 0; i < m; ++i) out.slices[i].A = std::move(r[i]);
    }
    if (first.b1_raw) {
        auto r = combine([&](std::size_t i) { return *path.slices[i].b1_raw; });
        for (std::size_t i = 0; i < m; ++i) out.slices[i].b1_raw = std::move(r[i]);
    }
    if (first.b2) {
        auto r = combine([&](std::size_t i) { return *path.slices[i].b2; });
        for (std::size_t i = 0; i < m; ++i) out.slices[i].b2 = std::move(r[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::array<double, 3> mean{0.0, 0.0, 0.0};
        for (int j = -radius; j <= radius; ++j) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) - j;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(m)) continue;
            for (int a = 0; a < path.grid.dim; ++a)
                mean[a] += w[j + radius] * path.slices[static_cast<std::size_t>(src)].mean[a];
        }
        out.slices[i].mean = mean;
    }
    return mollify_space(out, n);
}

} // namespace sdl

#endif
