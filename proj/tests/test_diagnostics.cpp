// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "sdl/diagnostics.hpp"
#include "sdl/mollify.hpp"
#include "test_util.hpp"

using namespace sdl;

namespace {
TimeScalarField cos_mode(const TorusGrid& grid, const std::array<int, 3>& k, double amp = 1.0) {
    SpectralField f(grid, FieldRank::scalar, true);
    f.at(0, grid.linear_index(k)) = 0.5 * amp;
    f.at(0, grid.linear_index({-k[0], -k[1], -k[2]})) = 0.5 * amp;
    return TimeScalarField::constant(f);
}

constexpr double kLambda = 4.0 * std::numbers::pi * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

Ensemble run_with_ito_bank(const DriftSpec& drift, const SimConfig& cfg,
                           const TimeScalarField& f, std::uint64_t init_seed,
                           std::vector<double> checkpoints = {}) {
    SimRequest req;
    req.drift = drift;
    req.init = sample_initial(drift.grid, nullptr, cfg.n_paths, init_seed);
    req.config = cfg;
    req.uniform_start = true;
    req.bank.push_back(laplacian_functional("lap_f", f));
    req.checkpoints = std::move(checkpoints);
    return simulate(req);
}
} // namespace

TEST_CASE("ito trick: closed-form oracle, scaling exponent, drift independence") {
    TorusGrid grid(2, 16);
    auto f = cos_mode(grid, {1, 0, 0});
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    cfg.n_paths = 20000;
    cfg.save_stride = 100;
    cfg.master_seed = 31415;

    auto ens = run_with_ito_bank(DriftSpec::zero(grid), cfg, f, 1, {0.125, 0.25, 0.5, 1.0});

    // Endpoint oracle at the T = 0.5 checkpoint: E[(int_0^T Delta f)^2]
    // = lambda T - (1 - e^{-lambda T}).
    const auto& fr = ens.functional("lap_f");
    {
        const double T = 0.5;
        std::vector<double> sq(fr.value_at[2].size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = fr.value_at[2][i] * fr.value_at[2][i];
        const auto ms = mean_se(sq);
        const double target = kLambda * T - (1.0 - std::exp(-kLambda * T));
        REQUIRE(std::abs(ms.mean - target) <= 3.0 * ms.se);
    }

    // Calibration on the Brownian baseline, then drift independence under the
    // shear drift within the documented 1.5x headroom.
    auto cal = ito_trick_check(ens, f, "lap_f", 2.0, kInf);
    REQUIRE(cal.verdict == Verdict::pass);
    REQUIRE(cal.metadata["calibration"].get<bool>());
    const double C = cal.statistic;
    REQUIRE(C > 0.0);

    auto shear_ens = run_with_ito_bank(shear_drift(grid, 1.0), cfg, f, 2);
    auto shear_rep = ito_trick_check(shear_ens, f, "lap_f", 2.0, kInf, C);
    REQUIRE(shear_rep.verdict == Verdict::pass);

    // T-scaling exponent within 20% of p(1/2 - 1/q) = 1.
    auto scaling = ito_scaling_check(ens, "lap_f", 2.0, kInf, 0.2);
    REQUIRE(scaling.verdict == Verdict::pass);

    // f constant: Delta f = 0, statistic identically zero.
    auto fc = TimeScalarField::constant([&] {
        SpectralField c(grid, FieldRank::scalar, true);
        c.at(0, 0) = 2.0;
        return c;
    }());
    SimConfig small = cfg;
    small.n_paths = 100;
    small.T = 0.1;
    small.save_stride = 10;
    SimRequest req;
    req.drift = DriftSpec::zero(grid);
    req.init = sample_initial(grid, nullptr, small.n_paths, 3);
    req.config = small;
    req.uniform_start = true;
    req.bank.push_back(laplacian_functional("lap_c", fc));
    auto cens = simulate(req);
    for (double v : cens.functional("lap_c").running_sup) REQUIRE(v == 0.0);

    // Precondition: non-stationary start is refused.
    Ensemble biased = ens;
    biased.uniform_start = false;
    REQUIRE_THROWS_AS(ito_trick_check(biased, f, "lap_f", 2.0, kInf), std::invalid_argument);
}

TEST_CASE("incompressibility: stationarity, heat-kernel relaxation, GFF invariance") {
    TorusGrid grid(2, 16);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 0.5;
    cfg.n_paths = 10000;
    cfg.save_stride = 125;
    cfg.master_seed = 271;

    SimRequest req;
    req.drift = DriftSpec::zero(grid);
    req.init = sample_initial(grid, nullptr, cfg.n_paths, 5);
    req.config = cfg;
    req.uniform_start = true;
    auto ens = simulate(req);
    auto rep = incompressibility_check(ens);
    REQUIRE(rep.verdict == Verdict::pass);
    REQUIRE(rep.statistic < 1.25);

    // Peaked density 1 + cos(2 pi x1): E[cos(2 pi X^1_t)] = e^{-lambda t}/2
    // (heat-kernel decay of the one mode), and the density ratio relaxes to 1.
    SpectralField dens(grid, FieldRank::scalar, true);
    dens.at(0, 0) = 1.0;
    dens.at(0, grid.linear_index({1, 0, 0})) = 0.5;
    dens.at(0, grid.linear_index({-1, 0, 0})) = 0.5;
    SimRequest preq;
    preq.drift = DriftSpec::zero(grid);
    preq.init = sample_initial(grid, &dens, cfg.n_paths, 6);
    preq.config = cfg;
    preq.uniform_start = false;
    auto pens = simulate(preq);
    auto prep = incompressibility_check(pens);
    REQUIRE(prep.verdict == Verdict::inconclusive); // non-uniform start
    const auto& rows = prep.metadata["times"];
    REQUIRE(rows.front()["density_ratio"].get<double>() >
            rows.back()["density_ratio"].get<double>());
    for (std::size_t s : {std::size_t{1}, ens.saved() - 1}) {
        std::vector<double> c(static_cast<std::size_t>(cfg.n_paths));
        for (int p = 0; p < cfg.n_paths; ++p)
            c[static_cast<std::size_t>(p)] = std::cos(two_pi * pens.wrapped_at(p, s, 0));
        const auto ms = mean_se(c);
        const double target = 0.5 * std::exp(-kLambda * pens.times[s]);
        REQUIRE(std::abs(ms.mean - target) <= 3.5 * ms.se);
    }

    // GFF curl drift preserves Lebesgue.
    auto xi = sample_gff(grid, 8);
    SimRequest greq;
    greq.drift = mollify_space(gff_curl_drift(xi, 1.5), 8);
    greq.init = sample_initial(grid, nullptr, cfg.n_paths, 7);
    greq.config = cfg;
    greq.uniform_start = true;
    auto gens = simulate(greq);
    auto grep = incompressibility_check(gens);
    REQUIRE(grep.verdict == Verdict::pass);
}

TEST_CASE("energy estimate: calibration, trivially-satisfied oscillatory member, stability") {
    TorusGrid grid(2, 16);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 0.5;
    cfg.n_paths = 10000;
    cfg.save_stride = 100;
    cfg.master_seed = 1618;

    std::vector<std::pair<std::string, TimeScalarField>> bank;
    for (int i = 0; i < 8; ++i) {
        auto f = TimeScalarField::constant(
            test::random_mean_zero_field(grid, FieldRank::scalar, 4000 + i, 1.0));
        bank.emplace_back("f" + std::to_string(i), f);
    }
    // A rapidly oscillating member: huge H^{-1} norm relative to its integral.
    bank.emplace_back("osc", cos_mode(grid, {7, 0, 0}, 5.0));

    auto run = [&](const DriftSpec& d, std::uint64_t s) {
        SimRequest req;
        req.drift = d;
        req.init = sample_initial(grid, nullptr, cfg.n_paths, s);
        req.config = cfg;
        req.uniform_start = true;
        for (auto& [name, f] : bank) req.bank.push_back(plain_functional(name, f));
        return simulate(req);
    };
    auto ens0 = run(DriftSpec::zero(grid), 1);
    auto cal = energy_estimate_check(ens0, bank);
    REQUIRE(cal.verdict == Verdict::pass);
    const double C = cal.statistic;

    // The oscillatory member's individual ratio is far below the bank max.
    double osc_ratio = 0.0, max_ratio = 0.0;
    for (const auto& row : cal.metadata["bank"]) {
        max_ratio = std::max(max_ratio, row["ratio"].get<double>());
        if (row["functional"] == "osc") osc_ratio = row["ratio"].get<double>();
    }
    REQUIRE(osc_ratio < 0.5 * max_ratio);

    auto xi = sample_gff(grid, 12);
    auto ens1 = run(mollify_space(gff_curl_drift(xi, 1.5), 8), 2);
    auto rep = energy_estimate_check(ens1, bank, C, 2.0);
    REQUIRE(rep.verdict == Verdict::pass);
}

TEST_CASE("martingale check: space-constant exactness, Brownian and GFF runs") {
    TorusGrid grid(2, 16);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 0.5;
    cfg.n_paths = 20000;
    cfg.save_stride = 100;
    cfg.master_seed = 60221;

    auto f = cos_mode(grid, {1, 0, 0});
    auto run = [&](const DriftSpec& d, std::uint64_t s) {
        SimRequest req;
        req.drift = d;
        req.init = sample_initial(grid, nullptr, cfg.n_paths, s);
        req.config = cfg;
        req.uniform_start = true;
        req.bank.push_back(generator_functional("gen_f", d, f));
        req.bank.push_back(grad_squared_functional("grad2_f", f));
        return simulate(req);
    };

    auto ens0 = run(DriftSpec::zero(grid), 1);
    auto rep0 = martingale_check(ens0, f, "gen_f", "grad2_f");
    REQUIRE(rep0.verdict == Verdict::pass);
    // Stationary closed form: E int |grad f|^2 = T ||grad f||_{L^2}^2.
    const auto& g2 = ens0.functional("grad2_f");
    const auto g2ms = mean_se(g2.value);
    REQUIRE(std::abs(g2ms.mean - cfg.T * 2.0 * std::numbers::pi * std::numbers::pi) <=
            3.0 * g2ms.se);

    auto xi = sample_gff(grid, 33);
    auto ens1 = run(mollify_space(gff_curl_drift(xi, 1.5), 8), 2);
    auto rep1 = martingale_check(ens1, f, "gen_f", "grad2_f");
    REQUIRE(rep1.verdict == Verdict::pass);

    // Space-constant linear ramp: M^f = 0 path-wise (exact telescoping).
    TimeScalarField ramp;
    SimConfig small = cfg;
    small.n_paths = 200;
    for (int i = 0; i <= small.steps(); i += 50) {
        SpectralField s(grid, FieldRank::scalar, true);
        s.at(0, 0) = 2.0 + 3.0 * (i * small.dt);
        ramp.times.push_back(i * small.dt);
        ramp.slices.push_back(std::move(s));
    }
    SimRequest rreq;
    rreq.drift = DriftSpec::zero(grid);
    rreq.init = sample_initial(grid, nullptr, small.n_paths, 9);
    rreq.config = small;
    rreq.uniform_start = true;
    rreq.bank.push_back(generator_functional("gen_r", rreq.drift, ramp));
    rreq.bank.push_back(grad_squared_functional("grad2_r", ramp));
    auto rens = simulate(rreq);
    const auto& gr = rens.functional("gen_r");
    for (int p = 0; p < small.n_paths; ++p) {
        const double M = (2.0 + 3.0 * small.T) - 2.0 - gr.value[static_cast<std::size_t>(p)];
        REQUIRE(std::abs(M) < 1e-10);
    }
}

TEST_CASE("duality: zero-mean mode, heat-kernel closed form, horizon guard") {
    TorusGrid grid(2, 16);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 0.25;
    cfg.n_paths = 20000;
    cfg.save_stride = 50;
    cfg.master_seed = 777;

    SpectralField u_T(grid, FieldRank::scalar, true);
    u_T.at(0, grid.linear_index({1, 0, 0})) = 0.5;
    u_T.at(0, grid.linear_index({-1, 0, 0})) = 0.5;
    auto traj = solve_backward(DriftSpec::zero(grid), u_T, cfg.T, 1e-3);

    // Uniform eta0: both sides 0.
    SimRequest req;
    req.drift = DriftSpec::zero(grid);
    req.init = sample_initial(grid, nullptr, cfg.n_paths, 1);
    req.config = cfg;
    req.uniform_start = true;
    auto ens = simulate(req);
    SpectralField uniform(grid, FieldRank::scalar, true);
    uniform.at(0, 0) = 1.0;
    auto rep0 = duality_check(ens, traj, uniform, 1e-10);
    REQUIRE(rep0.verdict == Verdict::pass);
    REQUIRE(std::abs(rep0.metadata["pde"].get<double>()) < 1e-12);

    // eta0 = 1 + cos(2 pi x1): both sides e^{-lambda T}/2.
    SpectralField dens = uniform;
    dens.at(0, grid.linear_index({1, 0, 0})) = 0.5;
    dens.at(0, grid.linear_index({-1, 0, 0})) = 0.5;
    SimRequest preq = req;
    preq.init = sample_initial(grid, &dens, cfg.n_paths, 2);
    preq.uniform_start = false;
    auto pens = simulate(preq);
    auto rep1 = duality_check(pens, traj, dens, 1e-10);
    REQUIRE(rep1.verdict == Verdict::pass);
    const double closed = 0.5 * std::exp(-kLambda * cfg.T);
    REQUIRE(rep1.metadata["pde"].get<double>() == Catch::Approx(closed).margin(1e-8));

    // Horizon mismatch is refused.
    auto short_traj = solve_backward(DriftSpec::zero(grid), u_T, 0.125, 1e-3);
    REQUIRE_THROWS_AS(duality_check(ens, short_traj, uniform, 1e-10), std::invalid_argument);
}

TEST_CASE("novikov: empty exponential, Gaussian closed form, bank member") {
    TorusGrid grid(2, 16);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 0.5;
    cfg.n_paths = 10000;
    cfg.save_stride = 100;
    cfg.master_seed = 141;

    auto make_const_a = [&](double ax, double ay) {
        std::vector<TimeScalarField> comps;
        SpectralField cx(grid, FieldRank::scalar, true);
        cx.at(0, 0) = ax;
        SpectralField cy(grid, FieldRank::scalar, true);
        cy.at(0, 0) = ay;
        comps.push_back(TimeScalarField::constant(cx));
        comps.push_back(TimeScalarField::constant(cy));
        return comps;
    };

    SimRequest req;
    req.drift = DriftSpec::zero(grid);
    req.init = sample_initial(grid, nullptr, cfg.n_paths, 4);
    req.config = cfg;
    req.uniform_start = true;
    auto zero_a = make_const_a(0.0, 0.0);
    auto const_a = make_const_a(0.6, -0.3);
    req.bank.push_back(ito_functional("a_zero", zero_a));
    req.bank.push_back(ito_functional("a_const", const_a));
    auto ens = simulate(req);

    auto rep0 = novikov_check(ens, "a_zero", zero_a, 2.0);
    REQUIRE(rep0.statistic == 1.0); // empty exponential, exactly

    auto rep1 = novikov_check(ens, "a_const", const_a, 2.0);
    const double a2 = 0.6 * 0.6 + 0.3 * 0.3;
    const double target = std::exp(2.0 * (2.0 - 1.0) * a2 * cfg.T / 2.0);
    REQUIRE(std::abs(rep1.statistic - target) <= 3.0 * rep1.standard_error);

    // Smooth spatial member: finite statistic, below the calibrated bound.
    std::vector<TimeScalarField> smooth;
    smooth.push_back(cos_mode(grid, {1, 0, 0}, 0.8));
    smooth.push_back(cos_mode(grid, {0, 1, 0}, -0.5));
    SimRequest sreq = req;
    sreq.bank.clear();
    sreq.bank.push_back(ito_functional("a_smooth", smooth));
    auto sens = simulate(sreq);
    auto cal = novikov_check(sens, "a_smooth", smooth, 2.0);
    REQUIRE(cal.verdict == Verdict::pass);
    const double C = cal.bound_or_target;
    auto rep2 = novikov_check(sens, "a_smooth", smooth, 2.0, 2.0, std::max(C, 0.05));
    REQUIRE(rep2.verdict == Verdict::pass);
}

TEST_CASE("mollified convergence: noise floor for smooth drift, exact zero for same n") {
    TorusGrid grid(2, 16);
    SimConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 0.5;
    cfg.n_paths = 4000;
    cfg.save_stride = 250;
    cfg.master_seed = 99;

    auto run_n = [&](const DriftSpec& base, int n) {
        SimRequest req;
        req.drift = mollify_space(base, n);
        req.init = sample_initial(grid, nullptr, cfg.n_paths, 1);
        req.config = cfg;
        req.uniform_start = true;
        return simulate(req);
    };

    auto shear = shear_drift(grid, 1.0);
    auto e8 = run_n(shear, 8);
    auto e16 = run_n(shear, 16);
    auto e32 = run_n(shear, 32);
    std::vector<const Ensemble*> runs{&e8, &e16, &e32};
    auto rep = mollified_convergence(runs, {8, 16, 32});
    REQUIRE(rep.verdict == Verdict::pass);
    // Smooth drift: distances at the Monte-Carlo noise floor for n >= 8
    // (identical Brownian increments, nearly identical drift).
    for (const auto& row : rep.metadata["pairs"])
        REQUIRE(row["w1"].get<double>() < 0.01);

    // Same n, same seed: exactly zero.
    auto e16b = run_n(shear, 16);
    std::vector<const Ensemble*> dup{&e16, &e16b};
    auto zrep = mollified_convergence(dup, {16, 32});
    REQUIRE(zrep.metadata["pairs"][0]["w1"].get<double>() == 0.0);
}

TEST_CASE("variance growth: Brownian ratio 1, shear enhancement closed form") {
    TorusGrid grid(2, 16);
    SimConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 2.0;
    cfg.n_paths = 10000;
    cfg.save_stride = 100;
    cfg.master_seed = 512;

    SimRequest req;
    req.drift = DriftSpec::zero(grid);
    req.init = sample_initial(grid, nullptr, cfg.n_paths, 1);
    req.config = cfg;
    req.uniform_start = true;
    auto ens = simulate(req);
    auto rep = variance_growth(ens);
    REQUIRE(rep.verdict == Verdict::inconclusive); // by design
    for (const auto& row : rep.metadata["table"])
        REQUIRE(row["ratio"].get<double>() == Catch::Approx(1.0).margin(0.05));

    // Shear amp 3: the sheared coordinate satisfies
    // E[dX1^2] = 2t + 9 (t - (1 - e^{-lambda t})/lambda) / lambda.
    SimRequest sreq = req;
    sreq.drift = shear_drift(grid, 3.0);
    sreq.init = sample_initial(grid, nullptr, cfg.n_paths, 2);
    auto sens = simulate(sreq);
    const std::size_t last = sens.saved() - 1;
    std::vector<double> dx2(static_cast<std::size_t>(cfg.n_paths));
    for (int p = 0; p < cfg.n_paths; ++p) {
        const double d = sens.unwrapped_at(p, last, 0) - sens.unwrapped_at(p, 0, 0);
        dx2[static_cast<std::size_t>(p)] = d * d;
    }
    const auto ms = mean_se(dx2);
    const double t = sens.times[last];
    const double target =
        2.0 * t + 9.0 * (t - (1.0 - std::exp(-kLambda * t)) / kLambda) / kLambda;
    REQUIRE(std::abs(ms.mean - target) <= 3.0 * ms.se);
    auto srep = variance_growth(sens);
    // Enhanced diffusion shows as a ratio above 1 in the table tail.
    REQUIRE(srep.metadata["table"].back()["ratio"].get<double>() > 1.02);
}
