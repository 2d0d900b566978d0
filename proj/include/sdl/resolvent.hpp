// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_RESOLVENT_HPP
#define SDL_RESOLVENT_HPP

#include <complex>
#include <string>
#include <vector>

#include <lapacke.h>

#include "sdl/drift_library.hpp"
#include "sdl/kbe.hpp"
#include "sdl/rng.hpp"

namespace sdl {

// The resolvent equation (lambda - L) u = rhs is solved matrix-free in the
// symmetrically preconditioned geometry
//     T y = D^{-1/2} rhs,   u = D^{-1/2} y,   T = D^{-1/2}(lambda - L) D^{-1/2},
// with D = diag(lambda + 4 pi^2 |k|^2) = (lambda - Delta). T is the identity
// plus a skew part (divergence-free drift) plus a compact perturbation (b2),
// mirroring the H^1 / H^{-1} geometry of the a priori resolvent bound; GMRES
// in the plain coefficient inner product on y is GMRES in that geometry.

struct ResolventSolution {
    double lambda = 0.0;
    SpectralField u;
    SpectralField rhs;
    double residual_h_minus1 = 0.0;
    double rhs_h_minus1 = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;
};

namespace detail {

using cvec = std::vector<std::complex<double>>;

inline double cnorm(const cvec& v) {
    double acc = 0.0;
    for (const auto& z : v) acc += std::norm(z);
    return std::sqrt(acc);
}

inline std::complex<double> cdot(const cvec& a, const cvec& b) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

/// Preconditioned operator y -> D^{-1/2} (lambda - L) D^{-1/2} y.
class WeightedResolventOp {
  public:
    WeightedResolventOp(const GeneratorOperator& op, double lambda, GeneratorForm form,
                        std::size_t slice)
        : op_(op), lambda_(lambda), form_(form), slice_(slice), grid_(op.grid) {
        const std::size_t n = grid_.points();
        dinv_sqrt_.resize(n);
        for (std::size_t m = 0; m < n; ++m) {
            const auto k = grid_.wavevector(m);
            dinv_sqrt_[m] = 1.0 / std::sqrt(lambda + two_pi * two_pi * wavevector_norm2(k, grid_.dim));
        }
    }

    const std::vector<double>& dinv_sqrt() const { return dinv_sqrt_; }
    const TorusGrid& grid() const { return grid_; }

    cvec apply(const cvec& y) const { return apply_impl(y, false); }
    cvec apply_adjoint(const cvec& y) const { return apply_impl(y, true); }

  private:
    const GeneratorOperator& op_;
    double lambda_;
    GeneratorForm form_;
    std::size_t slice_;
    TorusGrid grid_;
    std::vector<double> dinv_sqrt_;

    cvec apply_impl(const cvec& y, bool adjoint) const {
        const std::size_t n = grid_.points();
        SpectralField f(grid_, FieldRank::scalar, false);
        for (std::size_t m = 0; m < n; ++m) f.at(0, m) = y[m] * dinv_sqrt_[m];
        SpectralField Lf(grid_, FieldRank::scalar, false);
        if (!adjoint) {
            Lf = apply_generator(op_, f, form_, slice_);
        } else {
            // L = Delta + S + P with S skew and P = rest.grad. The real-field
            // adjoints Delta, -S, -div(rest .) are also the complex-matrix
            // adjoints (the coefficient matrices of real fields satisfy
            // conj(M^T) = these expressions directly).
            Lf = apply_generator_adjoint(op_, f, form_, slice_);
        }
        cvec out(n);
        for (std::size_t m = 0; m < n; ++m)
            out[m] = (lambda_ * f.at(0, m) - Lf.at(0, m)) * dinv_sqrt_[m];
        return out;
    }

    static SpectralField apply_generator_adjoint(const GeneratorOperator& op,
                                                 const SpectralField& u, GeneratorForm form,
                                                 std::size_t slice) {
        // Adjoint in L^2: Delta* = Delta, div(A grad .)* = -div(A grad .) for
        // antisymmetric A == div(A^T grad .); (rest.grad)* = -div(rest .),
        // (div(bd .))* = -bd.grad for divergence-free bd.
        const auto& gs = op.slices.at(slice);
        auto lap = apply_multiplier(u, laplacian());
        GeneratorOperator skew_only = op;
        for (auto& s : skew_only.slices) s.rest *= 0.0;
        auto skew = apply_generator(skew_only, u, GeneratorForm::divergence_out, slice) -
                    apply_multiplier(u, laplacian());
        // rest-part adjoint: -div(rest u), dealiased.
        const int dim = op.grid.dim;
        auto rest_fine = detail::padded_samples(gs.rest);
        auto u_fine = inverse_transform(zero_pad(u), 0);
        SpectralField div_term(op.grid, FieldRank::scalar, u.real_flag);
        for (int i = 0; i < dim; ++i) {
            std::vector<std::complex<double>> prod(u_fine.size());
            for (std::size_t m = 0; m < prod.size(); ++m) prod[m] = rest_fine[i][m] * u_fine[m];
            auto pf = detail::from_padded_samples(std::move(prod), op.grid, u.real_flag);
            div_term += apply_multiplier(pf, partial_derivative(i));
        }
        (void)form; // both forms share one adjoint on band-limited data
        return lap - skew - div_term;
    }
};

} // namespace detail

/// Matrix-free restarted GMRES on the preconditioned fixed-point geometry.
/// On non-convergence the solution so far is returned with converged = false
/// and the residual history (a meaningful signal near non-injectivity).
inline ResolventSolution resolvent_solve(const DriftSpec& drift, double lambda,
                                         const SpectralField& rhs, double tol = 1e-10,
                                         GeneratorForm form = GeneratorForm::divergence_out,
                                         int max_iterations = 400, int restart = 60) {
    if (lambda <= 0.0) throw std::invalid_argument("resolvent_solve: lambda > 0 required");
    if (rhs.grid != drift.grid || rhs.rank != FieldRank::scalar)
        throw std::invalid_argument("resolvent_solve: rhs shape mismatch");
    GeneratorOperator op(drift);
    detail::WeightedResolventOp T(op, lambda, form, 0);
    const std::size_t n = rhs.modes();

    detail::cvec g(n);
    for (std::size_t m = 0; m < n; ++m) g[m] = rhs.at(0, m) * T.dinv_sqrt()[m];
    const double gnorm = detail::cnorm(g);
    // The convergence contract is stated in H^{-1}; the preconditioned l2
    // residual controls it up to a sqrt(lambda) weight ratio, so tighten.
    tol /= std::sqrt(std::max(1.0, lambda));

    ResolventSolution sol;
    sol.lambda = lambda;
    sol.rhs = rhs;
    sol.rhs_h_minus1 = sobolev_norm(rhs, -1.0);

    detail::cvec y(n, 0.0);
    int iters = 0;
    double resid = gnorm;
    sol.residual_history.push_back(gnorm > 0 ? 1.0 : 0.0);
    if (gnorm == 0.0) {
        sol.converged = true;
    } else {
        while (iters < max_iterations) {
            // Arnoldi with modified Gram-Schmidt.
            detail::cvec r = T.apply(y);
            for (std::size_t m = 0; m < n; ++m) r[m] = g[m] - r[m];
            const double beta = detail::cnorm(r);
            resid = beta;
            sol.residual_history.push_back(beta / gnorm);
            if (beta <= tol * gnorm) {
                sol.converged = true;
                break;
            }
            const int kmax = std::min(restart, max_iterations - iters);
            std::vector<detail::cvec> V;
            V.reserve(static_cast<std::size_t>(kmax) + 1);
            {
                detail::cvec v0 = r;
                for (auto& z : v0) z /= beta;
                V.push_back(std::move(v0));
            }
            std::vector<std::vector<std::complex<double>>> H(
                static_cast<std::size_t>(kmax) + 1,
                std::vector<std::complex<double>>(static_cast<std::size_t>(kmax), 0.0));
            std::vector<std::complex<double>> cs(static_cast<std::size_t>(kmax)),
                sn(static_cast<std::size_t>(kmax));
            std::vector<std::complex<double>> s(static_cast<std::size_t>(kmax) + 1, 0.0);
            s[0] = beta;
            int k = 0;
            for (; k < kmax; ++k) {
                ++iters;
                detail::cvec w = T.apply(V[static_cast<std::size_t>(k)]);
                for (int i = 0; i <= k; ++i) {
                    const auto h = detail::cdot(V[static_cast<std::size_t>(i)], w);
                    H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = h;
                    for (std::size_t m = 0; m < n; ++m) w[m] -= h * V[static_cast<std::size_t>(i)][m];
                }
                const double hnext = detail::cnorm(w);
                H[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(k)] = hnext;
                if (hnext > 0.0) {
                    detail::cvec vk = w;
                    for (auto& z : vk) z /= hnext;
                    V.push_back(std::move(vk));
                }
                // Apply accumulated Givens rotations to the new column.
                for (int i = 0; i < k; ++i) {
                    const auto t1 = cs[static_cast<std::size_t>(i)] *
                                        H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                                    sn[static_cast<std::size_t>(i)] *
                                        H[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(k)];
                    const auto t2 = -std::conj(sn[static_cast<std::size_t>(i)]) *
                                        H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                                    std::conj(cs[static_cast<std::size_t>(i)]) *
                                        H[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(k)];
                    H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = t1;
                    H[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(k)] = t2;
                }
                const auto hkk = H[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
                const double hk1 = hnext;
                const double denom = std::sqrt(std::norm(hkk) + hk1 * hk1);
                if (denom == 0.0) {
                    cs[static_cast<std::size_t>(k)] = 1.0;
                    sn[static_cast<std::size_t>(k)] = 0.0;
                } else {
                    cs[static_cast<std::size_t>(k)] = hkk / denom;
                    sn[static_cast<std::size_t>(k)] = hk1 / denom;
                }
                H[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] =
                    std::conj(cs[static_cast<std::size_t>(k)]) * hkk +
                    sn[static_cast<std::size_t>(k)] * hk1;
                H[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(k)] = 0.0;
                s[static_cast<std::size_t>(k) + 1] =
                    -std::conj(sn[static_cast<std::size_t>(k)]) * s[static_cast<std::size_t>(k)];
                s[static_cast<std::size_t>(k)] =
                    std::conj(cs[static_cast<std::size_t>(k)]) * s[static_cast<std::size_t>(k)];
                resid = std::abs(s[static_cast<std::size_t>(k) + 1]);
                sol.residual_history.push_back(resid / gnorm);
                if (resid <= tol * gnorm || hnext == 0.0) {
                    ++k;
                    break;
                }
            }
            // Back substitution and update.
            std::vector<std::complex<double>> alpha(static_cast<std::size_t>(k), 0.0);
            for (int i = k - 1; i >= 0; --i) {
                std::complex<double> acc = s[static_cast<std::size_t>(i)];
                for (int j = i + 1; j < k; ++j)
                    acc -= H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                           alpha[static_cast<std::size_t>(j)];
                alpha[static_cast<std::size_t>(i)] =
                    acc / H[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
            }
            for (int i = 0; i < k; ++i)
                for (std::size_t m = 0; m < n; ++m)
                    y[m] += alpha[static_cast<std::size_t>(i)] * V[static_cast<std::size_t>(i)][m];
            if (resid <= tol * gnorm) {
                sol.converged = true;
                break;
            }
        }
        // Final residual in the preconditioned norm.
        detail::cvec r = T.apply(y);
        for (std::size_t m = 0; m < n; ++m) r[m] = g[m] - r[m];
        resid = detail::cnorm(r);
        sol.converged = resid <= tol * std::max(gnorm, 1e-300);
    }

    sol.u = SpectralField(rhs.grid, FieldRank::scalar, rhs.real_flag);
    for (std::size_t m = 0; m < n; ++m) sol.u.at(0, m) = y[m] * T.dinv_sqrt()[m];
    sol.iterations = iters;

    // Residual contract in the discrete H^{-1} norm.
    auto Lu = apply_generator(op, sol.u, form, 0);
    SpectralField res_field = rhs;
    for (std::size_t m = 0; m < n; ++m)
        res_field.at(0, m) = lambda * sol.u.at(0, m) - Lu.at(0, m) - rhs.at(0, m);
    sol.residual_h_minus1 = sobolev_norm(res_field, -1.0);
    return sol;
}

struct SigmaMinEstimate {
    double sigma_min = 0.0;
    std::string method; // "dense_svd" or "inverse_power"
    int iterations = 0;
    bool converged = true;
};

/// Smallest singular value of T = D^{-1/2}(lambda - L_N) D^{-1/2} on the
/// truncated mode set: dense SVD (values only) up to dense_threshold modes,
/// inverse-power iteration on the normal operator T* T above it.
inline SigmaMinEstimate injectivity_probe(const DriftSpec& drift, double lambda,
                                          GeneratorForm form = GeneratorForm::divergence_out,
                                          std::size_t dense_threshold = 4096,
                                          std::size_t mode_budget = (std::size_t{1} << 14)) {
    GeneratorOperator op(drift);
    detail::WeightedResolventOp T(op, lambda, form, 0);
    const std::size_t n = drift.grid.points();
    if (n > mode_budget)
        throw std::runtime_error("injectivity_probe: mode count exceeds the budget");

    // Work on the sub-Nyquist mode set: the dealiased products truncate
    // strictly below the Nyquist shell, so the shell rows of the drift part
    // vanish while shell columns would not, faking a non-skew coupling. The
    // drift itself has no shell content, so the shell-free block is the
    // faithful truncated operator.
    std::vector<std::size_t> free_idx;
    const int half = drift.grid.modes_per_axis / 2;
    for (std::size_t m = 0; m < n; ++m) {
        const auto k = drift.grid.wavevector(m);
        bool shell = false;
        for (int a = 0; a < drift.grid.dim; ++a) shell = shell || k[a] == half;
        if (!shell) free_idx.push_back(m);
    }
    const std::size_t ns = free_idx.size();

    SigmaMinEstimate out;
    if (n <= dense_threshold) {
        out.method = "dense_svd";
        std::vector<std::complex<double>> M(ns * ns);
        detail::cvec e(n, 0.0);
        for (std::size_t c = 0; c < ns; ++c) {
            e[free_idx[c]] = 1.0;
            auto col = T.apply(e);
            e[free_idx[c]] = 0.0;
            for (std::size_t r = 0; r < ns; ++r) M[c * ns + r] = col[free_idx[r]]; // column-major
        }
        std::vector<double> sv(ns);
        const auto info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(ns),
                                         static_cast<lapack_int>(ns),
                                         reinterpret_cast<lapack_complex_double*>(M.data()),
                                         static_cast<lapack_int>(ns), sv.data(), nullptr, 1,
                                         nullptr, 1);
        if (info != 0) throw std::runtime_error("injectivity_probe: zgesdd failed");
        out.sigma_min = sv[ns - 1];
        return out;
    }

    out.method = "inverse_power";
    // Inverse power iteration on T*T with CG solves (T*T is Hermitian PD);
    // the shell-free subspace is invariant under T and T*.
    Rng rng(4242);
    detail::cvec x(n, 0.0);
    for (std::size_t m : free_idx) x[m] = std::complex<double>(rng.normal(), rng.normal());
    double xn = detail::cnorm(x);
    for (auto& z : x) z /= xn;
    auto normal_apply = [&](const detail::cvec& v) { return T.apply_adjoint(T.apply(v)); };

    double sigma = 0.0, prev_sigma = -1.0;
    const int max_power = 40;
    for (int it = 0; it < max_power; ++it) {
        // CG solve (T*T) z = x.
        detail::cvec z(n, 0.0), r = x, p = x;
        double rs = detail::cnorm(r);
        rs *= rs;
        const double rs0 = rs;
        int cg = 0;
        for (; cg < 600; ++cg) {
            auto Ap = normal_apply(p);
            const double denom = detail::cdot(p, Ap).real();
            if (denom <= 0.0) break;
            const double a = rs / denom;
            for (std::size_t m = 0; m < n; ++m) {
                z[m] += a * p[m];
                r[m] -= a * Ap[m];
            }
            double rs_new = detail::cnorm(r);
            rs_new *= rs_new;
            if (rs_new <= 1e-22 * rs0) {
                rs = rs_new;
                break;
            }
            const double beta = rs_new / rs;
            rs = rs_new;
            for (std::size_t m = 0; m < n; ++m) p[m] = r[m] + beta * p[m];
        }
        out.iterations += cg;
        const double zn = detail::cnorm(z);
        if (!(zn > 0.0) || !std::isfinite(zn)) {
            out.converged = false;
            out.sigma_min = sigma;
            return out;
        }
        for (auto& w : z) w /= zn;
        x = std::move(z);
        auto Tx = T.apply(x);
        sigma = detail::cnorm(Tx);
        if (prev_sigma > 0.0 && std::abs(sigma - prev_sigma) <= 1e-8 * sigma) {
            out.sigma_min = sigma;
            return out;
        }
        prev_sigma = sigma;
    }
    out.sigma_min = sigma;
    out.converged = false;
    return out;
}

} // namespace sdl

#endif
