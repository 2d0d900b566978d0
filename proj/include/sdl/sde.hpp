// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_SDE_HPP
#define SDL_SDE_HPP

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sdl/drift_library.hpp"
#include "sdl/parallel.hpp"
#include "sdl/rng.hpp"

namespace sdl {

struct SimConfig {
    double dt = 1e-3;
    double T = 1.0;
    int n_paths = 1000;
    int save_stride = 1;
    std::uint64_t master_seed = 0;
    EvalMode eval_mode = EvalMode::grid_interp;
    double qv_factor = 2.0; // quadratic-variation factor of M^f; the Ito computation gives 2

    int steps() const {
        const double raw = T / dt;
        const auto n = static_cast<int>(std::llround(raw));
        if (n < 1 || std::abs(raw - n) > 1e-9 * std::max(1.0, raw))
            throw std::invalid_argument("SimConfig: T/dt must be integral");
        return n;
    }
    void validate() const {
        if (dt <= 0 || T <= 0 || n_paths <= 0) throw std::invalid_argument("SimConfig: bad sizes");
        const int n = steps();
        if (save_stride < 1 || n % save_stride != 0)
            throw std::invalid_argument("SimConfig: save_stride must divide the step count");
    }
};

/// A scalar field possibly sampled in time; static when times is empty.
/// Between samples the left endpoint is used (matching the Euler order).
struct TimeScalarField {
    std::vector<double> times;
    std::vector<SpectralField> slices;

    static TimeScalarField constant(SpectralField f) { return {{}, {std::move(f)}}; }
    std::size_t slice_index(double t) const {
        if (times.empty()) return 0;
        std::size_t i = 0;
        while (i + 1 < times.size() && times[i + 1] <= t + 1e-12) ++i;
        return i;
    }
};

/// Additive path functionals accumulated during simulation at full step
/// resolution: trapezoid in time for time integrals, left-point sums against
/// the driving Brownian increments for Ito integrals.
struct FunctionalSpec {
    enum class Kind { time_integral, ito_integral };
    Kind kind = Kind::time_integral;
    std::string name;
    TimeScalarField scalar;                // time_integral integrand
    std::vector<TimeScalarField> vector_f; // per component, ito_integral integrand
};

struct FunctionalResult {
    std::string name;
    std::vector<double> value;       // per path, at T
    std::vector<double> running_sup; // per path, sup_{t <= T} |value up to t|
    std::vector<double> quad;        // ito kind only: int_0^T |a|^2(s, X_s) ds per path
    std::vector<double> checkpoint_times;
    std::vector<std::vector<double>> value_at;       // [checkpoint][path]
    std::vector<std::vector<double>> running_sup_at; // [checkpoint][path]
};

struct Ensemble {
    TorusGrid grid;
    int n_paths = 0;
    std::vector<double> times;      // saved time grid, starts at 0
    std::vector<double> wrapped;    // [path][saved time][comp], in [0,1)
    std::vector<double> unwrapped;  // same layout, cumulative in R^d
    std::vector<std::uint64_t> path_seeds;
    SimConfig config;
    std::string drift_id;
    bool uniform_start = false;
    bool div_free_drift = false;
    std::vector<int> aborted_paths;
    std::vector<std::string> warnings;
    std::vector<FunctionalResult> functionals;

    std::size_t saved() const { return times.size(); }
    double& wrapped_at(int p, std::size_t s, int c) {
        return wrapped[(static_cast<std::size_t>(p) * saved() + s) * grid.dim +
                       static_cast<std::size_t>(c)];
    }
    double wrapped_at(int p, std::size_t s, int c) const {
        return wrapped[(static_cast<std::size_t>(p) * saved() + s) * grid.dim +
                       static_cast<std::size_t>(c)];
    }
    double& unwrapped_at(int p, std::size_t s, int c) {
        return unwrapped[(static_cast<std::size_t>(p) * saved() + s) * grid.dim +
                         static_cast<std::size_t>(c)];
    }
    double unwrapped_at(int p, std::size_t s, int c) const {
        return unwrapped[(static_cast<std::size_t>(p) * saved() + s) * grid.dim +
                         static_cast<std::size_t>(c)];
    }

    const FunctionalResult& functional(const std::string& name) const {
        for (const auto& f : functionals)
            if (f.name == name) return f;
        throw std::out_of_range("Ensemble: no functional named " + name);
    }
};

/// Initial positions from a density (rejection sampling against the
/// grid-interpolated density) or uniform. Deterministic given the seed.
/// Negative ringing of the density is clipped at 0; the clipped mass is
/// reported through clipped_mass when a pointer is passed.
inline std::vector<std::array<double, 3>> sample_initial(const TorusGrid& grid,
                                                         const SpectralField* density, int n_paths,
                                                         std::uint64_t seed,
                                                         double* clipped_mass = nullptr,
                                                         double efficiency_limit = 1e6) {
    Rng rng(seed);
    std::vector<std::array<double, 3>> out(static_cast<std::size_t>(n_paths), {0.0, 0.0, 0.0});
    const int dim = grid.dim;
    if (density == nullptr) {
        for (auto& x : out)
            for (int a = 0; a < dim; ++a) x[a] = rng.uniform();
        return out;
    }
    if (density->grid != grid || density->rank != FieldRank::scalar)
        throw std::invalid_argument("sample_initial: density shape mismatch");
    auto samples = real_samples(*density, 0);
    double clipped = 0.0, mass = 0.0, maxv = 0.0;
    for (auto& v : samples) {
        if (v < 0.0) { // ringing is clipped at 0 and the clipped mass reported
            clipped += -v;
            v = 0.0;
        }
        mass += v;
        maxv = std::max(maxv, v);
    }
    if (mass <= 0.0) throw std::invalid_argument("sample_initial: density has no mass");
    const double mean = mass / static_cast<double>(samples.size());
    if (maxv / mean > efficiency_limit)
        throw std::runtime_error("sample_initial: rejection would be too inefficient "
                                 "(max/mean exceeds the efficiency limit)");
    if (clipped_mass) *clipped_mass = clipped / static_cast<double>(samples.size());
    GridInterpolator interp(grid, samples);
    const double envelope = maxv * (1.0 + 1e-9);
    for (auto& x : out) {
        for (;;) {
            std::array<double, 3> cand{0.0, 0.0, 0.0};
            for (int a = 0; a < dim; ++a) cand[a] = rng.uniform();
            const double u = rng.uniform();
            if (u * envelope <= interp(cand.data())) {
                x = cand;
                break;
            }
        }
    }
    return out;
}

struct SimRequest {
    DriftSpec drift;   // used as given; apply mollify_space/time beforehand
    std::vector<std::array<double, 3>> init;
    SimConfig config;
    bool uniform_start = false;
    std::vector<FunctionalSpec> bank;
    std::vector<double> checkpoints; // must be multiples of dt, increasing
};

namespace detail {

/// Per-slice per-component samplers of a drift (collocation interpolation or
/// exact Fourier sums).
class DriftSampler {
  public:
    DriftSampler(const DriftSpec& drift, EvalMode mode) : mode_(mode), grid_(drift.grid) {
        const std::size_t nsl = drift.slices.size();
        for (std::size_t s = 0; s < nsl; ++s) {
            fields_.push_back(drift.total_field(s));
            if (mode == EvalMode::grid_interp) {
                std::vector<GridInterpolator> comps;
                for (int c = 0; c < grid_.dim; ++c) comps.emplace_back(fields_.back(), c);
                interps_.push_back(std::move(comps));
            }
        }
        times_ = drift.times;
        sup_ = 0.0;
        for (const auto& f : fields_)
            sup_ = std::max(sup_, lebesgue_norm(f, std::numeric_limits<double>::infinity()));
    }

    double sup_norm() const { return sup_; }

    std::size_t slice_index(double t) const {
        if (times_.empty()) return 0;
        std::size_t i = 0;
        while (i + 1 < times_.size() && times_[i + 1] <= t + 1e-12) ++i;
        return i;
    }

    void eval(double t, const double* x, double* out) const {
        const std::size_t s = slice_index(t);
        if (mode_ == EvalMode::grid_interp) {
            for (int c = 0; c < grid_.dim; ++c) out[c] = interps_[s][c](x);
            return;
        }
        std::vector<std::array<double, 3>> pt(1);
        for (int a = 0; a < grid_.dim; ++a) pt[0][a] = x[a] - std::floor(x[a]);
        for (int c = 0; c < grid_.dim; ++c) out[c] = evaluate_direct(fields_[s], c, pt)[0];
    }

  private:
    EvalMode mode_;
    TorusGrid grid_;
    std::vector<double> times_;
    std::vector<SpectralField> fields_;
    std::vector<std::vector<GridInterpolator>> interps_;
    double sup_ = 0.0;
};

class ScalarTimeSampler {
  public:
    ScalarTimeSampler(const TimeScalarField& f, EvalMode mode) : mode_(mode), field_(f) {
        if (mode_ == EvalMode::grid_interp)
            for (const auto& s : f.slices) interps_.emplace_back(s, 0);
    }
    double operator()(double t, const double* x) const {
        const std::size_t s = field_.slice_index(t);
        if (mode_ == EvalMode::grid_interp) return interps_[s](x);
        std::vector<std::array<double, 3>> pt(1);
        const auto& g = field_.slices[s].grid;
        for (int a = 0; a < g.dim; ++a) pt[0][a] = x[a] - std::floor(x[a]);
        return evaluate_direct(field_.slices[s], 0, pt)[0];
    }

  private:
    EvalMode mode_;
    TimeScalarField field_;
    std::vector<GridInterpolator> interps_;
};

} // namespace detail

/// Euler-Maruyama ensemble simulation of dX = b(t, X) dt + sqrt(2) dB on the
/// torus. Per-path noise streams derive from (master_seed, path index), so the
/// result is a pure function of the request, independent of threading. Paths
/// hitting non-finite positions are frozen and recorded in aborted_paths.
inline Ensemble simulate(const SimRequest& req) {
    req.config.validate();
    const auto& grid = req.drift.grid;
    const int dim = grid.dim;
    const int nsteps = req.config.steps();
    const int stride = req.config.save_stride;
    const int nsaved = nsteps / stride + 1;
    const int npaths = req.config.n_paths;
    if (req.init.size() != static_cast<std::size_t>(npaths))
        throw std::invalid_argument("simulate: init size != n_paths");

    detail::DriftSampler drift(req.drift, req.config.eval_mode);

    Ensemble ens;
    ens.grid = grid;
    ens.n_paths = npaths;
    ens.config = req.config;
    ens.drift_id = req.drift.id;
    ens.uniform_start = req.uniform_start;
    ens.div_free_drift = req.drift.divergence_free();
    ens.times.resize(static_cast<std::size_t>(nsaved));
    for (int s = 0; s < nsaved; ++s) ens.times[static_cast<std::size_t>(s)] = s * stride * req.config.dt;
    ens.wrapped.assign(static_cast<std::size_t>(npaths) * nsaved * dim, 0.0);
    ens.unwrapped.assign(static_cast<std::size_t>(npaths) * nsaved * dim, 0.0);
    ens.path_seeds.resize(static_cast<std::size_t>(npaths));

    const double advisory = 0.1 / (1.0 + drift.sup_norm() * drift.sup_norm());
    if (req.config.dt > advisory)
        ens.warnings.push_back("dt exceeds the stability advisory 0.1/(1+|b|_inf^2) = " +
                               std::to_string(advisory));

    // Checkpoints must land on steps.
    std::vector<int> cp_steps;
    for (double t : req.checkpoints) {
        const auto s = static_cast<int>(std::llround(t / req.config.dt));
        if (std::abs(s * req.config.dt - t) > 1e-9)
            throw std::invalid_argument("simulate: checkpoint not a multiple of dt");
        cp_steps.push_back(s);
    }

    std::vector<detail::ScalarTimeSampler> scalar_bank;
    std::vector<std::vector<detail::ScalarTimeSampler>> vector_bank;
    for (const auto& spec : req.bank) {
        if (spec.kind == FunctionalSpec::Kind::time_integral) {
            scalar_bank.emplace_back(spec.scalar, req.config.eval_mode);
            vector_bank.emplace_back();
        } else {
            std::vector<detail::ScalarTimeSampler> comps;
            for (const auto& f : spec.vector_f) comps.emplace_back(f, req.config.eval_mode);
            vector_bank.push_back(std::move(comps));
            scalar_bank.emplace_back(TimeScalarField::constant(SpectralField(grid, FieldRank::scalar)),
                                     EvalMode::grid_interp);
        }
    }

    ens.functionals.resize(req.bank.size());
    for (std::size_t f = 0; f < req.bank.size(); ++f) {
        auto& r = ens.functionals[f];
        r.name = req.bank[f].name;
        r.value.assign(static_cast<std::size_t>(npaths), 0.0);
        r.running_sup.assign(static_cast<std::size_t>(npaths), 0.0);
        r.quad.assign(static_cast<std::size_t>(npaths), 0.0);
        r.checkpoint_times = req.checkpoints;
        r.value_at.assign(req.checkpoints.size(),
                          std::vector<double>(static_cast<std::size_t>(npaths), 0.0));
        r.running_sup_at.assign(req.checkpoints.size(),
                                std::vector<double>(static_cast<std::size_t>(npaths), 0.0));
    }

    std::vector<int> aborted(static_cast<std::size_t>(npaths), 0);

    parallel_for(static_cast<std::size_t>(npaths), [&](std::size_t p) {
        const auto pidx = static_cast<int>(p);
        const std::uint64_t pseed = mix_seed(req.config.master_seed, p);
        ens.path_seeds[p] = pseed;
        Rng rng(pseed);

        double xw[3] = {0.0, 0.0, 0.0}; // wrapped
        double xu[3] = {0.0, 0.0, 0.0}; // unwrapped
        for (int a = 0; a < dim; ++a) {
            xw[a] = req.init[p][a] - std::floor(req.init[p][a]);
            xu[a] = xw[a];
        }
        for (int a = 0; a < dim; ++a) {
            ens.wrapped_at(pidx, 0, a) = xw[a];
            ens.unwrapped_at(pidx, 0, a) = xu[a];
        }

        const std::size_t nbank = req.bank.size();
        std::vector<double> acc(nbank, 0.0), sup(nbank, 0.0), quad(nbank, 0.0), prev(nbank, 0.0);
        for (std::size_t f = 0; f < nbank; ++f)
            if (req.bank[f].kind == FunctionalSpec::Kind::time_integral)
                prev[f] = scalar_bank[f](0.0, xw);

        const double dt = req.config.dt;
        const double noise = std::sqrt(2.0 * dt);
        bool alive = true;
        std::size_t next_cp = 0;
        auto record_cp = [&](int step) {
            while (next_cp < cp_steps.size() && cp_steps[next_cp] == step) {
                for (std::size_t f = 0; f < nbank; ++f) {
                    ens.functionals[f].value_at[next_cp][p] = acc[f];
                    ens.functionals[f].running_sup_at[next_cp][p] = sup[f];
                }
                ++next_cp;
            }
        };
        record_cp(0);

        double bval[3];
        double dz[3];
        std::vector<std::array<double, 3>> aval(nbank);
        for (int m = 0; m < nsteps; ++m) {
            const double t = m * dt;
            if (alive) {
                drift.eval(t, xw, bval);
                // Ito integrands are left-point: evaluate at the pre-step position.
                for (std::size_t f = 0; f < nbank; ++f)
                    if (req.bank[f].kind == FunctionalSpec::Kind::ito_integral)
                        for (int a = 0; a < dim; ++a)
                            aval[f][static_cast<std::size_t>(a)] =
                                vector_bank[f][static_cast<std::size_t>(a)](t, xw);
                for (int a = 0; a < dim; ++a) {
                    dz[a] = noise * rng.normal();
                    xu[a] += bval[a] * dt + dz[a];
                    xw[a] = xu[a] - std::floor(xu[a]);
                    if (!std::isfinite(xu[a])) alive = false;
                }
            } else {
                for (int a = 0; a < dim; ++a) rng.normal(); // keep streams aligned
            }
            const double tn = (m + 1) * dt;
            if (alive) {
                for (std::size_t f = 0; f < nbank; ++f) {
                    if (req.bank[f].kind == FunctionalSpec::Kind::time_integral) {
                        const double cur = scalar_bank[f](tn, xw);
                        acc[f] += 0.5 * dt * (prev[f] + cur);
                        prev[f] = cur;
                    } else {
                        // dB = dz / sqrt(2) is the standard Brownian increment.
                        double dot = 0.0, a2 = 0.0;
                        for (int a = 0; a < dim; ++a) {
                            dot += aval[f][static_cast<std::size_t>(a)] * dz[a];
                            a2 += aval[f][static_cast<std::size_t>(a)] *
                                  aval[f][static_cast<std::size_t>(a)];
                        }
                        acc[f] += dot / std::sqrt(2.0);
                        quad[f] += a2 * dt;
                    }
                    sup[f] = std::max(sup[f], std::abs(acc[f]));
                }
            }
            record_cp(m + 1);
            if ((m + 1) % stride == 0) {
                const int s = (m + 1) / stride;
                for (int a = 0; a < dim; ++a) {
                    ens.wrapped_at(pidx, static_cast<std::size_t>(s), a) = xw[a];
                    ens.unwrapped_at(pidx, static_cast<std::size_t>(s), a) = xu[a];
                }
            }
        }
        for (std::size_t f = 0; f < nbank; ++f) {
            ens.functionals[f].value[p] = acc[f];
            ens.functionals[f].running_sup[p] = sup[f];
            ens.functionals[f].quad[p] = quad[f];
        }
        if (!alive) aborted[p] = 1;
    });

    for (int p = 0; p < npaths; ++p)
        if (aborted[static_cast<std::size_t>(p)]) ens.aborted_paths.push_back(p);
    return ens;
}

/// Trapezoidal quadrature of f(s, X_s) along the saved path points; returns
/// the terminal integral and the running sup over saved times per path.
struct AdditiveFunctional {
    std::vector<double> integral;
    std::vector<double> running_sup;
};

inline AdditiveFunctional additive_functional(const Ensemble& ens, const TimeScalarField& f) {
    if (!f.times.empty()) {
        // Every saved ensemble time must have a sampled slice at or before it.
        if (f.times.front() > ens.times.front() + 1e-12)
            throw std::invalid_argument("additive_functional: field sampled after t0");
    }
    std::vector<detail::ScalarTimeSampler> sampler{
        detail::ScalarTimeSampler(f, EvalMode::grid_interp)};
    AdditiveFunctional out;
    out.integral.assign(static_cast<std::size_t>(ens.n_paths), 0.0);
    out.running_sup.assign(static_cast<std::size_t>(ens.n_paths), 0.0);
    const int dim = ens.grid.dim;
    for (int p = 0; p < ens.n_paths; ++p) {
        double acc = 0.0, sup = 0.0;
        double x[3];
        for (int a = 0; a < dim; ++a) x[a] = ens.wrapped_at(p, 0, a);
        double prev = sampler[0](ens.times[0], x);
        for (std::size_t s = 1; s < ens.saved(); ++s) {
            for (int a = 0; a < dim; ++a) x[a] = ens.wrapped_at(p, s, a);
            const double cur = sampler[0](ens.times[s], x);
            acc += 0.5 * (ens.times[s] - ens.times[s - 1]) * (prev + cur);
            sup = std::max(sup, std::abs(acc));
            prev = cur;
        }
        out.integral[static_cast<std::size_t>(p)] = acc;
        out.running_sup[static_cast<std::size_t>(p)] = sup;
    }
    return out;
}

/// CSV export: path, t, x1..xd (wrapped), u1..ud (unwrapped).
inline void export_ensemble_csv(const Ensemble& ens, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("export_ensemble_csv: cannot open " + path);
    os << "path,t";
    for (int a = 0; a < ens.grid.dim; ++a) os << ",x" << (a + 1);
    for (int a = 0; a < ens.grid.dim; ++a) os << ",u" << (a + 1);
    os << "\n";
    os.precision(17);
    for (int p = 0; p < ens.n_paths; ++p)
        for (std::size_t s = 0; s < ens.saved(); ++s) {
            os << p << ',' << ens.times[s];
            for (int a = 0; a < ens.grid.dim; ++a) os << ',' << ens.wrapped_at(p, s, a);
            for (int a = 0; a < ens.grid.dim; ++a) os << ',' << ens.unwrapped_at(p, s, a);
            os << "\n";
        }
}

} // namespace sdl

#endif
