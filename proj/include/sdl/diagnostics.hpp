// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_DIAGNOSTICS_HPP
#define SDL_DIAGNOSTICS_HPP

#include <fstream>
#include <string>
#include <vector>

#include "sdl/dyadic.hpp"
#include "sdl/kbe.hpp"
#include "sdl/report.hpp"
#include "sdl/sde.hpp"
#include "sdl/stats.hpp"

namespace sdl {

// Statistical witnesses. Constants the underlying estimates leave implicit
// are calibrated once on the Brownian baseline (b = 0), frozen, and reused
// across drifts with a documented 1.5x headroom; that turns the
// "constant independent of b" claims into falsifiable checks.

namespace detail {

/// Direct Fourier sum over the nonzero modes only; exact and cheap for
/// band-limited fields.
inline std::vector<double> evaluate_sparse(const SpectralField& f,
                                           const std::vector<std::array<double, 3>>& pts) {
    std::vector<std::pair<std::array<int, 3>, std::complex<double>>> modes;
    for (std::size_t m = 0; m < f.modes(); ++m)
        if (std::abs(f.at(0, m)) > 0.0) modes.emplace_back(f.grid.wavevector(m), f.at(0, m));
    std::vector<double> out(pts.size(), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::complex<double> acc = 0.0;
        for (const auto& [k, c] : modes) {
            double phase = 0.0;
            for (int a = 0; a < f.grid.dim; ++a) phase += k[a] * pts[i][a];
            acc += c * std::complex<double>(std::cos(two_pi * phase), std::sin(two_pi * phase));
        }
        out[i] = acc.real();
    }
    return out;
}

inline std::vector<std::array<double, 3>> terminal_positions(const Ensemble& ens) {
    std::vector<std::array<double, 3>> pts(static_cast<std::size_t>(ens.n_paths),
                                           {0.0, 0.0, 0.0});
    const std::size_t last = ens.saved() - 1;
    for (int p = 0; p < ens.n_paths; ++p)
        for (int a = 0; a < ens.grid.dim; ++a)
            pts[static_cast<std::size_t>(p)][a] = ens.wrapped_at(p, last, a);
    return pts;
}

} // namespace detail

/// Gradient of a scalar field as a vector field.
inline SpectralField gradient_field(const SpectralField& f) {
    SpectralField g(f.grid, FieldRank::vector, f.real_flag);
    for (int a = 0; a < f.grid.dim; ++a) {
        auto da = apply_multiplier(f, partial_derivative(a));
        for (std::size_t m = 0; m < f.modes(); ++m) g.at(a, m) = da.at(0, m);
    }
    return g;
}

/// |grad f|^2 as a dealiased scalar field.
inline SpectralField grad_squared_field(const SpectralField& f) {
    return dealiased_square_magnitude(gradient_field(f));
}

/// Mixed-time norm ||grad f||_{L^q_T L^p} of a (possibly time-sampled) field
/// over [0, T].
inline double grad_mixed_norm(const TimeScalarField& f, double T, double q, double p) {
    if (f.times.empty()) {
        const double c = lebesgue_norm(gradient_field(f.slices[0]), p);
        return std::isinf(q) ? c : c * std::pow(T, 1.0 / q);
    }
    std::vector<double> vals;
    for (const auto& s : f.slices) vals.push_back(lebesgue_norm(gradient_field(s), p));
    return mixed_time_norm(f.times, vals, q);
}

inline double h_minus1_mixed_norm(const TimeScalarField& f, double T) {
    if (f.times.empty()) return sobolev_norm(f.slices[0], -1.0) * std::sqrt(T);
    std::vector<double> vals;
    for (const auto& s : f.slices) vals.push_back(sobolev_norm(s, -1.0));
    return mixed_time_norm(f.times, vals, 2.0);
}

/// Bank builders for the simulation request.
inline FunctionalSpec laplacian_functional(const std::string& name, const TimeScalarField& f) {
    FunctionalSpec spec;
    spec.kind = FunctionalSpec::Kind::time_integral;
    spec.name = name;
    spec.scalar.times = f.times;
    for (const auto& s : f.slices) spec.scalar.slices.push_back(apply_multiplier(s, laplacian()));
    return spec;
}

inline FunctionalSpec plain_functional(const std::string& name, const TimeScalarField& f) {
    FunctionalSpec spec;
    spec.kind = FunctionalSpec::Kind::time_integral;
    spec.name = name;
    spec.scalar = f;
    return spec;
}

/// (d_s + Delta + b . grad) f along the drift actually simulated; for static
/// f and drift the time derivative vanishes. Time-sampled f uses centred
/// differences of the sampled slices for d_s.
inline FunctionalSpec generator_functional(const std::string& name, const DriftSpec& drift,
                                           const TimeScalarField& f) {
    GeneratorOperator op(drift);
    FunctionalSpec spec;
    spec.kind = FunctionalSpec::Kind::time_integral;
    spec.name = name;
    spec.scalar.times = f.times;
    for (std::size_t i = 0; i < f.slices.size(); ++i) {
        const double t = f.times.empty() ? 0.0 : f.times[i];
        auto phi = apply_generator(op, f.slices[i], GeneratorForm::divergence_out,
                                   op.slice_index(t));
        if (!f.times.empty() && f.slices.size() > 1) {
            const std::size_t lo = i == 0 ? 0 : i - 1;
            const std::size_t hi = i + 1 == f.slices.size() ? i : i + 1;
            auto ddt = f.slices[hi] - f.slices[lo];
            ddt *= 1.0 / (f.times[hi] - f.times[lo]);
            phi += ddt;
        }
        spec.scalar.slices.push_back(std::move(phi));
    }
    return spec;
}

inline FunctionalSpec grad_squared_functional(const std::string& name, const TimeScalarField& f) {
    FunctionalSpec spec;
    spec.kind = FunctionalSpec::Kind::time_integral;
    spec.name = name;
    spec.scalar.times = f.times;
    for (const auto& s : f.slices) spec.scalar.slices.push_back(grad_squared_field(s));
    return spec;
}

inline FunctionalSpec ito_functional(const std::string& name,
                                     const std::vector<TimeScalarField>& a_components) {
    FunctionalSpec spec;
    spec.kind = FunctionalSpec::Kind::ito_integral;
    spec.name = name;
    spec.vector_f = a_components;
    return spec;
}

// ---------------------------------------------------------------------------

/// Ito-trick witness: E[sup_{t<=T} |int_0^t Delta f|^p] against
/// C T^{p(1/2 - 1/q)} ||grad f||^p_{L^q_T L^p}. With calibrated_C = 0 the call
/// calibrates: the report carries the measured constant and passes. Otherwise
/// the verdict requires the statistic within headroom * C * (scaling), the
/// drift-independence claim made falsifiable.
inline DiagnosticsReport ito_trick_check(const Ensemble& ens, const TimeScalarField& f,
                                         const std::string& functional_name, double p, double q,
                                         double calibrated_C = 0.0, double headroom = 1.5) {
    if (!ens.uniform_start || !ens.div_free_drift)
        throw std::invalid_argument(
            "ito_trick_check: requires a stationary (uniform) start and divergence-free drift");
    const auto& fr = ens.functional(functional_name);
    const double T = ens.times.back();
    std::vector<double> sup_p(fr.running_sup.size());
    for (std::size_t i = 0; i < sup_p.size(); ++i) sup_p[i] = std::pow(fr.running_sup[i], p);
    const auto ms = mean_se(sup_p);
    const double scaling =
        std::pow(T, p * (0.5 - (std::isinf(q) ? 0.0 : 1.0 / q))) *
        std::pow(grad_mixed_norm(f, T, q, p), p);

    DiagnosticsReport rep;
    rep.name = "ito_trick";
    rep.standard_error = ms.se;
    rep.metadata["p"] = p;
    rep.metadata["q"] = std::isinf(q) ? -1.0 : q;
    rep.metadata["T"] = T;
    rep.metadata["n_paths"] = ens.n_paths;
    rep.metadata["scaling"] = scaling;
    rep.metadata["drift"] = ens.drift_id;
    if (calibrated_C <= 0.0) {
        rep.statistic = ms.mean / scaling; // the measured constant
        rep.bound_or_target = rep.statistic;
        rep.verdict = Verdict::pass;
        rep.metadata["calibration"] = true;
    } else {
        rep.statistic = ms.mean;
        rep.bound_or_target = headroom * calibrated_C * scaling;
        rep.verdict = rep.statistic <= rep.bound_or_target + 3.0 * ms.se ? Verdict::pass
                                                                         : Verdict::fail;
        rep.metadata["calibration"] = false;
        rep.metadata["calibrated_C"] = calibrated_C;
        rep.metadata["headroom"] = headroom;
    }
    return rep;
}

/// T-scaling of the Ito-trick statistic from the checkpoint table: log-log
/// fit of E[sup^p] against T, compared with the exponent p(1/2 - 1/q).
inline DiagnosticsReport ito_scaling_check(const Ensemble& ens,
                                           const std::string& functional_name, double p, double q,
                                           double rel_tol = 0.2) {
    const auto& fr = ens.functional(functional_name);
    if (fr.checkpoint_times.size() < 3)
        throw std::invalid_argument("ito_scaling_check: need >= 3 checkpoints");
    std::vector<double> lx, ly;
    for (std::size_t c = 0; c < fr.checkpoint_times.size(); ++c) {
        if (fr.checkpoint_times[c] <= 0.0) continue;
        std::vector<double> sup_p(fr.running_sup_at[c].size());
        for (std::size_t i = 0; i < sup_p.size(); ++i)
            sup_p[i] = std::pow(fr.running_sup_at[c][i], p);
        lx.push_back(std::log(fr.checkpoint_times[c]));
        ly.push_back(std::log(mean_se(sup_p).mean));
    }
    const auto fit = linear_fit(lx, ly);
    const double expected = p * (0.5 - (std::isinf(q) ? 0.0 : 1.0 / q));
    DiagnosticsReport rep;
    rep.name = "ito_trick_scaling";
    rep.statistic = fit.slope;
    rep.bound_or_target = expected;
    rep.verdict = std::abs(fit.slope - expected) <= rel_tol * std::abs(expected) ? Verdict::pass
                                                                                 : Verdict::fail;
    rep.metadata["checkpoints"] = fr.checkpoint_times;
    rep.metadata["rel_tol"] = rel_tol;
    rep.metadata["drift"] = ens.drift_id;
    return rep;
}

/// Incompressibility witness: wrapped-position histograms per saved time.
/// statistic = worst (max bin probability / bin Lebesgue mass), the proxy for
/// the domination constant M; for uniform starts a chi-square p-value against
/// uniform is attached per time. The pass band for the max-ratio is
/// calibrated from its null distribution: the max over B bins of a
/// Poisson(n/B) count sits near 1 + sqrt(2 ln B) sigma, so the band is
/// 1 +- (sqrt(2 ln B) + 3) sqrt(B/n). (A fixed band like [0.8, 1.25] would
/// reject the null itself at 1e4 paths and 16^2 bins.)
inline DiagnosticsReport incompressibility_check(const Ensemble& ens, int bins_per_axis = 16,
                                                 double p_threshold = 0.01) {
    const int dim = ens.grid.dim;
    std::size_t nbins = 1;
    for (int a = 0; a < dim; ++a) nbins *= static_cast<std::size_t>(bins_per_axis);
    DiagnosticsReport rep;
    rep.name = "incompressibility";
    rep.metadata["bins_per_axis"] = bins_per_axis;
    rep.metadata["drift"] = ens.drift_id;
    auto& times_meta = rep.metadata["times"] = nlohmann::json::array();

    double worst_ratio = 0.0;
    double min_p = 1.0;
    for (std::size_t s = 0; s < ens.saved(); ++s) {
        std::vector<std::size_t> counts(nbins, 0);
        for (int p = 0; p < ens.n_paths; ++p) {
            std::size_t idx = 0;
            for (int a = 0; a < dim; ++a) {
                auto cell = static_cast<int>(ens.wrapped_at(p, s, a) * bins_per_axis);
                if (cell >= bins_per_axis) cell = bins_per_axis - 1;
                idx = idx * static_cast<std::size_t>(bins_per_axis) + static_cast<std::size_t>(cell);
            }
            ++counts[idx];
        }
        std::size_t maxc = 0;
        for (auto c : counts) maxc = std::max(maxc, c);
        const double ratio = static_cast<double>(maxc) / static_cast<double>(ens.n_paths) *
                             static_cast<double>(nbins);
        worst_ratio = std::max(worst_ratio, ratio);
        nlohmann::json row;
        row["t"] = ens.times[s];
        row["density_ratio"] = ratio;
        if (ens.uniform_start) {
            const auto cs = chi_square_uniform(counts);
            row["chi2_p"] = cs.pvalue;
            if (s > 0) min_p = std::min(min_p, cs.pvalue); // t = 0 is the sampler, not the flow
        }
        times_meta.push_back(row);
    }
    rep.statistic = worst_ratio;
    rep.bound_or_target = ratio_band_hi;
    rep.metadata["p_threshold"] = p_threshold;
    if (ens.uniform_start && ens.div_free_drift) {
        rep.metadata["min_chi2_p"] = min_p;
        rep.verdict = (min_p > p_threshold && worst_ratio <= ratio_band_hi &&
                       worst_ratio >= ratio_band_lo)
                          ? Verdict::pass
                          : Verdict::fail;
    } else {
        rep.verdict = Verdict::inconclusive;
    }
    return rep;
}

/// Energy-estimate witness: for each bank member, the 95th percentile of
/// sup_t |int_0^t f| divided by ||f||_{L^2_T H^{-1}}; the max ratio is the
/// statistic, compared against a calibrated constant when given.
inline DiagnosticsReport energy_estimate_check(
    const Ensemble& ens, const std::vector<std::pair<std::string, TimeScalarField>>& bank,
    double calibrated_C = 0.0, double headroom = 2.0) {
    const double T = ens.times.back();
    double worst = 0.0;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [name, f] : bank) {
        const auto& fr = ens.functional(name);
        const double q95 = percentile(fr.running_sup, 0.95);
        const double denom = h_minus1_mixed_norm(f, T);
        const double ratio = q95 / std::max(denom, 1e-300);
        worst = std::max(worst, ratio);
        rows.push_back({{"functional", name}, {"q95", q95}, {"h_minus1", denom}, {"ratio", ratio}});
    }
    DiagnosticsReport rep;
    rep.name = "energy_estimate";
    rep.statistic = worst;
    rep.metadata["bank"] = rows;
    rep.metadata["drift"] = ens.drift_id;
    if (calibrated_C <= 0.0) {
        rep.bound_or_target = worst;
        rep.verdict = Verdict::pass;
        rep.metadata["calibration"] = true;
    } else {
        rep.bound_or_target = headroom * calibrated_C;
        rep.verdict = worst <= rep.bound_or_target ? Verdict::pass : Verdict::fail;
        rep.metadata["calibration"] = false;
        rep.metadata["calibrated_C"] = calibrated_C;
        rep.metadata["headroom"] = headroom;
    }
    return rep;
}

/// Martingale witness: M^f_T = f(T, X_T) - f(0, X_0) - int (d_s + Delta +
/// b.grad) f, zero mean within 3 SE and second moment qv_factor * E int
/// |grad f|^2 within 3 SE of the paired difference.
inline DiagnosticsReport martingale_check(const Ensemble& ens, const TimeScalarField& f,
                                          const std::string& generator_name,
                                          const std::string& grad2_name) {
    const auto& gen = ens.functional(generator_name);
    const auto& grad2 = ens.functional(grad2_name);
    const double T = ens.times.back();

    // Endpoint evaluations by exact sparse Fourier sums.
    std::vector<std::array<double, 3>> x0(static_cast<std::size_t>(ens.n_paths));
    for (int p = 0; p < ens.n_paths; ++p)
        for (int a = 0; a < ens.grid.dim; ++a)
            x0[static_cast<std::size_t>(p)][a] = ens.wrapped_at(p, 0, a);
    auto xT = detail::terminal_positions(ens);
    const auto fT = detail::evaluate_sparse(f.slices[f.slice_index(T)], xT);
    const auto f0 = detail::evaluate_sparse(f.slices[f.slice_index(0.0)], x0);

    std::vector<double> M(static_cast<std::size_t>(ens.n_paths));
    for (std::size_t i = 0; i < M.size(); ++i) M[i] = fT[i] - f0[i] - gen.value[i];
    const auto ms = mean_se(M);

    std::vector<double> diff(M.size());
    const double qv = ens.config.qv_factor;
    for (std::size_t i = 0; i < M.size(); ++i) diff[i] = M[i] * M[i] - qv * grad2.value[i];
    const auto ds = mean_se(diff);

    DiagnosticsReport rep;
    rep.name = "martingale";
    rep.statistic = ms.mean;
    rep.bound_or_target = 0.0;
    rep.standard_error = ms.se;
    const bool mean_ok = std::abs(ms.mean) <= 3.0 * ms.se;
    const bool qv_ok = std::abs(ds.mean) <= 3.0 * ds.se;
    rep.verdict = mean_ok && qv_ok ? Verdict::pass : Verdict::fail;
    rep.metadata["qv_factor"] = qv;
    rep.metadata["qv_gap_mean"] = ds.mean;
    rep.metadata["qv_gap_se"] = ds.se;
    rep.metadata["second_moment"] = mean_se([&] {
                                        std::vector<double> m2(M.size());
                                        for (std::size_t i = 0; i < M.size(); ++i) m2[i] = M[i] * M[i];
                                        return m2;
                                    }())
                                        .mean;
    rep.metadata["drift"] = ens.drift_id;
    return rep;
}

/// PDE-SDE duality witness: Monte-Carlo E[u_T(X_T)] against the quadrature
/// pairing <u(0), eta_0>. Pass iff |difference| <= 3 SE + 10 * solver_tol.
inline DiagnosticsReport duality_check(const Ensemble& ens, const PDETrajectory& traj,
                                       const SpectralField& eta0, double solver_tol) {
    if (std::abs(ens.times.back() - traj.times.back()) > 1e-9)
        throw std::invalid_argument("duality_check: horizon mismatch");
    auto xT = detail::terminal_positions(ens);
    auto vals = detail::evaluate_sparse(traj.terminal(), xT);
    const auto ms = mean_se(vals);
    // <u(0), eta0> with eta0 normalized to unit mass.
    SpectralField eta = eta0;
    const double mass = eta.at(0, 0).real();
    if (mass <= 0.0) throw std::invalid_argument("duality_check: eta0 must have positive mass");
    eta *= 1.0 / mass;
    const double pde = inner_l2(traj.initial(), eta).real();

    DiagnosticsReport rep;
    rep.name = "duality";
    rep.statistic = ms.mean;
    rep.bound_or_target = pde;
    rep.standard_error = ms.se;
    const double tol = 3.0 * ms.se + 10.0 * solver_tol;
    rep.verdict = std::abs(ms.mean - pde) <= tol ? Verdict::pass : Verdict::fail;
    rep.metadata["mc"] = ms.mean;
    rep.metadata["mc_se"] = ms.se;
    rep.metadata["pde"] = pde;
    rep.metadata["tolerance"] = tol;
    rep.metadata["solver_tol"] = solver_tol;
    rep.metadata["drift"] = ens.drift_id;
    return rep;
}

/// Novikov witness: E[E(int a . dB)_T^p] from the simulated increments,
/// against exp(C ||a||^4_{L^4_T B^0_{2r,1,2}}) with calibrated C (one-sided).
inline DiagnosticsReport novikov_check(const Ensemble& ens, const std::string& ito_name,
                                       const std::vector<TimeScalarField>& a_components, double p,
                                       double r = 2.0, double calibrated_C = 0.0) {
    if (!ens.uniform_start || !ens.div_free_drift)
        throw std::invalid_argument("novikov_check: requires stationary start, divergence-free drift");
    const auto& fr = ens.functional(ito_name);
    std::vector<double> expo(fr.value.size());
    for (std::size_t i = 0; i < expo.size(); ++i)
        expo[i] = std::exp(p * fr.value[i] - 0.5 * p * fr.quad[i]);
    const auto ms = mean_se(expo);

    // ||a||_{L^4_T B^0_{2r,1,2}} by quadrature over slices of the vector field.
    const double T = ens.times.back();
    double a_norm = 0.0;
    {
        const auto& first = a_components.front();
        std::vector<double> vals;
        std::vector<double> times = first.times;
        const std::size_t nsl = first.slices.size();
        for (std::size_t s = 0; s < nsl; ++s) {
            SpectralField vec(first.slices[s].grid, FieldRank::vector, true);
            for (std::size_t c = 0; c < a_components.size(); ++c)
                for (std::size_t m = 0; m < vec.modes(); ++m)
                    vec.at(static_cast<int>(c), m) = a_components[c].slices[s].at(0, m);
            vals.push_back(b012_norm(vec, 2.0 * r));
        }
        if (times.empty())
            a_norm = vals[0] * std::pow(T, 0.25);
        else
            a_norm = mixed_time_norm(times, vals, 4.0);
    }

    DiagnosticsReport rep;
    rep.name = "novikov";
    rep.statistic = ms.mean;
    rep.standard_error = ms.se;
    rep.metadata["p"] = p;
    rep.metadata["a_norm_l4_b012"] = a_norm;
    rep.metadata["drift"] = ens.drift_id;
    if (ms.se > std::abs(ms.mean)) {
        rep.verdict = Verdict::inconclusive; // heavy-tailed estimator
        rep.bound_or_target = 0.0;
        return rep;
    }
    if (calibrated_C <= 0.0) {
        const double c_est = std::log(std::max(ms.mean, 1.0)) / std::max(std::pow(a_norm, 4.0), 1e-300);
        rep.bound_or_target = c_est;
        rep.verdict = Verdict::pass;
        rep.metadata["calibration"] = true;
    } else {
        rep.bound_or_target = std::exp(calibrated_C * std::pow(a_norm, 4.0));
        rep.verdict = ms.mean <= rep.bound_or_target + 3.0 * ms.se ? Verdict::pass : Verdict::fail;
        rep.metadata["calibration"] = false;
        rep.metadata["calibrated_C"] = calibrated_C;
    }
    return rep;
}

/// Law convergence of the mollified approximations: Wasserstein-1 distances
/// of per-coordinate unwrapped X_T marginals for consecutive n, decreasing
/// within 2 SE slack (SE by 10-batch splitting).
inline DiagnosticsReport mollified_convergence(const std::vector<const Ensemble*>& runs,
                                               const std::vector<int>& n_list) {
    if (runs.size() != n_list.size() || runs.size() < 2)
        throw std::invalid_argument("mollified_convergence: need runs per n");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("mollified_convergence: n_list must increase");
    const int dim = runs[0]->grid.dim;
    const int npaths = runs[0]->n_paths;
    const int nbatch = 10;

    auto coordinate = [&](const Ensemble& e, int a) {
        std::vector<double> v(static_cast<std::size_t>(e.n_paths));
        const std::size_t last = e.saved() - 1;
        for (int p = 0; p < e.n_paths; ++p) v[static_cast<std::size_t>(p)] = e.unwrapped_at(p, last, a);
        return v;
    };

    DiagnosticsReport rep;
    rep.name = "mollified_convergence";
    auto rows = nlohmann::json::array();
    bool decreasing = true;
    double prev_total = 0.0, prev_se = 0.0;
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        double total = 0.0, se2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            auto va = coordinate(*runs[i], a);
            auto vb = coordinate(*runs[i + 1], a);
            total += wasserstein1_sorted(va, vb);
            // Batch-split SE proxy.
            std::vector<double> batch;
            const int bs = npaths / nbatch;
            for (int b = 0; b < nbatch; ++b) {
                std::vector<double> sa(va.begin() + b * bs, va.begin() + (b + 1) * bs);
                std::vector<double> sb(vb.begin() + b * bs, vb.begin() + (b + 1) * bs);
                batch.push_back(wasserstein1_sorted(sa, sb));
            }
            const auto bse = mean_se(batch);
            se2 += bse.se * bse.se;
        }
        const double se = std::sqrt(se2);
        rows.push_back({{"n_from", n_list[i]}, {"n_to", n_list[i + 1]}, {"w1", total}, {"se", se}});
        if (i > 0 && total > prev_total + 2.0 * (se + prev_se)) decreasing = false;
        prev_total = total;
        prev_se = se;
    }
    rep.statistic = prev_total;
    rep.bound_or_target = 0.0;
    rep.standard_error = prev_se;
    rep.verdict = decreasing ? Verdict::pass : Verdict::fail;
    rep.metadata["pairs"] = rows;
    rep.metadata["n_list"] = n_list;
    return rep;
}

/// Exploratory variance-growth table: E|X_t - X_0|^2 / (2 d t) per saved t,
/// with constant and sqrt(log)-corrected least-squares fits. Inconclusive by
/// design (the asymptotics are out of desk reach).
inline DiagnosticsReport variance_growth(const Ensemble& ens) {
    const int dim = ens.grid.dim;
    DiagnosticsReport rep;
    rep.name = "variance_growth";
    auto rows = nlohmann::json::array();
    std::vector<double> ts, ys;
    for (std::size_t s = 1; s < ens.saved(); ++s) {
        double acc = 0.0;
        for (int p = 0; p < ens.n_paths; ++p)
            for (int a = 0; a < dim; ++a) {
                const double d = ens.unwrapped_at(p, s, a) - ens.unwrapped_at(p, 0, a);
                acc += d * d;
            }
        const double t = ens.times[s];
        const double ratio = acc / static_cast<double>(ens.n_paths) / (2.0 * dim * t);
        rows.push_back({{"t", t}, {"ratio", ratio}});
        ts.push_back(t);
        ys.push_back(ratio);
    }
    // Fit y = c (diffusive) vs y = c sqrt(log(1 + t/t0)), t0 = first time.
    double c0 = 0.0;
    for (double y : ys) c0 += y;
    c0 /= static_cast<double>(ys.size());
    double sse0 = 0.0;
    for (double y : ys) sse0 += (y - c0) * (y - c0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double g = std::sqrt(std::log(1.0 + ts[i] / ts.front()));
        num += ys[i] * g;
        den += g * g;
    }
    const double c1 = den > 0 ? num / den : 0.0;
    double sse1 = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double g = std::sqrt(std::log(1.0 + ts[i] / ts.front()));
        sse1 += (ys[i] - c1 * g) * (ys[i] - c1 * g);
    }
    rep.statistic = ys.back();
    rep.bound_or_target = 1.0;
    rep.verdict = Verdict::inconclusive; // exploratory by design
    rep.metadata["table"] = rows;
    rep.metadata["fit_constant"] = {{"c", c0}, {"sse", sse0}};
    rep.metadata["fit_sqrtlog"] = {{"c", c1}, {"sse", sse1}};
    rep.metadata["better_fit"] = sse1 < sse0 ? "sqrtlog" : "constant";
    rep.metadata["drift"] = ens.drift_id;
    return rep;
}

/// JSON-lines and CSV writers for report batches.
inline void write_reports_jsonl(const std::vector<DiagnosticsReport>& reports,
                                const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_reports_jsonl: cannot open " + path);
    for (const auto& r : reports) os << r.to_json().dump() << "\n";
}

inline void write_summary_csv(const std::vector<DiagnosticsReport>& reports,
                              const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_summary_csv: cannot open " + path);
    os << "name,statistic,target,se,verdict\n";
    os.precision(17);
    for (const auto& r : reports) {
        os << r.name << ',' << r.statistic << ',' << r.bound_or_target << ',';
        if (std::isnan(r.standard_error))
            os << "";
        else
            os << r.standard_error;
        os << ',' << verdict_name(r.verdict) << "\n";
    }
}

} // namespace sdl

#endif
