#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epifit/mcmc.hpp"
#include "epifit/rng.hpp"
#include "epifit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace epifit;

namespace {

McmcConfig gaussian_config(std::uint64_t seed) {
    McmcConfig cfg;
    cfg.adapt_iters = 1000;
    cfg.burnin_iters = 1000;
    cfg.sample_iters = 50000;
    cfg.thin = 5; // 10000 retained
    cfg.seed = seed;
    return cfg;
}

const LogDensity std_normal = [](const std::vector<double>& x) {
    return -0.5 * x[0] * x[0];
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> draws) {
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double f = normal_cdf(draws[i]);
        ks = std::max(ks, std::abs((i + 1) / n - f));
        ks = std::max(ks, std::abs(f - i / n));
    }
    return ks;
}

} // namespace

TEST_CASE("run_chain recovers a standard normal target") {
    const std::vector<ParamSpec> specs = {{"x", Transform::identity()}};
    const auto trace = run_chain(std_normal, {0.5}, specs, gaussian_config(42), 0);
    REQUIRE(trace.rows() == 10000);
    std::vector<double> draws(trace.rows());
    for (int i = 0; i < trace.rows(); ++i) draws[i] = trace.at(i, 0);
    double mean = 0.0;
    for (double v : draws) mean += v;
    mean /= draws.size();
    double var = 0.0;
    for (double v : draws) var += (v - mean) * (v - mean);
    var /= (draws.size() - 1);
    CHECK(std::abs(mean) < 0.1);
    CHECK(std::abs(var - 1.0) < 0.15);
    CHECK(ks_statistic(draws) < 0.02);
}

TEST_CASE("run_chain is deterministic and chain-index isolated") {
    const std::vector<ParamSpec> specs = {{"x", Transform::identity()}};
    McmcConfig cfg = gaussian_config(7);
    cfg.sample_iters = 2000;
    cfg.thin = 2;
    const auto a = run_chain(std_normal, {0.0}, specs, cfg, 0);
    const auto b = run_chain(std_normal, {0.0}, specs, cfg, 0);
    const auto c = run_chain(std_normal, {0.0}, specs, cfg, 1);
    CHECK(a.draws == b.draws);
    CHECK(a.acceptance_rate == b.acceptance_rate);
    CHECK(a.draws != c.draws);
}

TEST_CASE("run_chain respects logit support") {
    // Uniform(0,1) target through the logit transform
    const LogDensity flat = [](const std::vector<double>&) { return 0.0; };
    const std::vector<ParamSpec> specs = {{"u", Transform::interval(0.0, 1.0)}};
    McmcConfig cfg = gaussian_config(3);
    cfg.sample_iters = 5000;
    cfg.thin = 1;
    const auto trace = run_chain(flat, {0.5}, specs, cfg, 0);
    for (int i = 0; i < trace.rows(); ++i) {
        CHECK(trace.at(i, 0) > 0.0);
        CHECK(trace.at(i, 0) < 1.0);
    }
}

TEST_CASE("run_chain thinning yields exactly floor(samples/thin) rows") {
    const std::vector<ParamSpec> specs = {{"x", Transform::identity()}};
    McmcConfig cfg = gaussian_config(9);
    cfg.sample_iters = 10000;
    cfg.thin = 3;
    const auto trace = run_chain(std_normal, {0.0}, specs, cfg, 0);
    CHECK(trace.rows() == 3333);
}

TEST_CASE("run_chain rejects an out-of-support start") {
    const LogDensity constrained = [](const std::vector<double>& x) {
        return x[0] > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    };
    const std::vector<ParamSpec> specs = {{"x", Transform::identity()}};
    CHECK_THROWS_AS(run_chain(constrained, {-1.0}, specs, gaussian_config(1), 0),
                    std::invalid_argument);
}

TEST_CASE("init_from_prior lands in support and is reproducible") {
    const PriorSpec spec;
    const auto a = init_from_prior(spec, 11);
    const auto b = init_from_prior(spec, 11);
    CHECK(a == b);
    REQUIRE(a.size() == 13);
    for (int age = 0; age < 3; ++age) {
        CHECK(a[3 * age + 0] > 0.0);
        CHECK(a[3 * age + 1] > 0.0);
        CHECK(a[3 * age + 2] > 0.0);
    }
    CHECK(a[9] >= 0.0);
    CHECK(a[9] <= 5.0);
    CHECK(a[11] >= 0.5);
    CHECK(a[11] <= 2.0);
    CHECK(a[12] >= 0.001);
    CHECK(a[12] <= 0.5);
}

TEST_CASE("init_from_prior mu draws have the Gamma(1,100) mean") {
    double sum = 0.0;
    for (int s = 0; s < 1000; ++s) sum += init_from_prior(PriorSpec{}, s)[2];
    CHECK(std::abs(sum / 1000.0 - 0.01) < 0.003);
}

namespace {

ChainTrace make_trace(const std::vector<std::vector<double>>& rows) {
    ChainTrace t;
    t.n_params = static_cast<int>(rows[0].size());
    for (int j = 0; j < t.n_params; ++j) t.names.push_back("p" + std::to_string(j));
    for (const auto& row : rows) t.draws.insert(t.draws.end(), row.begin(), row.end());
    return t;
}

} // namespace

TEST_CASE("gelman_rubin worked example") {
    const auto a = make_trace({{1.0}, {2.0}});
    const auto b = make_trace({{3.0}, {4.0}});
    const auto rhat = gelman_rubin({a, b});
    REQUIRE(rhat.size() == 1);
    CHECK(rhat[0] == doctest::Approx(2.1213203435596424).epsilon(1e-9));
}

TEST_CASE("gelman_rubin identical chains stay at or below one") {
    const auto a = make_trace({{1.0}, {2.0}, {5.0}, {3.0}});
    const auto rhat = gelman_rubin({a, a});
    CHECK(rhat[0] <= 1.0 + 1e-12);
    CHECK(rhat[0] == doctest::Approx(std::sqrt(3.0 / 4.0)).epsilon(1e-12)); // B = 0
}

TEST_CASE("gelman_rubin conventions and errors") {
    SUBCASE("all-constant chains give 1 by convention") {
        const auto a = make_trace({{2.0}, {2.0}});
        const auto b = make_trace({{2.0}, {2.0}});
        CHECK(gelman_rubin({a, b})[0] == 1.0);
    }
    SUBCASE("zero within-variance with differing means is degenerate") {
        const auto a = make_trace({{1.0}, {1.0}});
        const auto b = make_trace({{2.0}, {2.0}});
        CHECK_THROWS_AS(gelman_rubin({a, b}), std::domain_error);
    }
    SUBCASE("needs two chains") {
        const auto a = make_trace({{1.0}, {2.0}});
        CHECK_THROWS_AS(gelman_rubin({a}), std::invalid_argument);
    }
}

TEST_CASE("gelman_rubin below 1.05 for independent well-mixed chains") {
    const std::vector<ParamSpec> specs = {{"x", Transform::identity()}};
    McmcConfig cfg = gaussian_config(5);
    cfg.sample_iters = 20000;
    cfg.thin = 2;
    const auto a = run_chain(std_normal, {0.1}, specs, cfg, 0);
    const auto b = run_chain(std_normal, {-0.2}, specs, cfg, 1);
    CHECK(gelman_rubin({a, b})[0] < 1.05);
}

TEST_CASE("summarize basics and derived quantities") {
    SUBCASE("median and mean of a tiny chain") {
        const auto t = make_trace({{1.0}, {2.0}, {3.0}});
        const auto s = summarize({t});
        CHECK(s.rows[0].median == 2.0);
        CHECK(s.rows[0].mean == 2.0);
        CHECK(std::isnan(s.rows[0].r_hat));
    }
    SUBCASE("constant draws give the constant-ratio r0") {
        ChainTrace t;
        t.names = ClusterPosterior::param_names();
        t.n_params = 13;
        const std::vector<double> row = {4.57, 2.89, 0.034, 4.57, 2.89, 0.034, 4.57,
                                         2.89, 0.034, 1.0, 1.0, 1.0, 0.1};
        for (int i = 0; i < 4; ++i) t.draws.insert(t.draws.end(), row.begin(), row.end());
        const auto s = summarize({t});
        const auto& r0_row = s.row("r0_adult");
        CHECK(r0_row.mean == doctest::Approx(1.5629274965800275).epsilon(1e-12));
        CHECK(r0_row.median == doctest::Approx(1.5629274965800275).epsilon(1e-12));
        const auto& tau = s.row("tau_prev");
        CHECK(tau.mean == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("quantile ordering holds on random draws") {
        Rng rng(8);
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < 500; ++i) rows.push_back({rng.normal(2.0, 3.0)});
        const auto s = summarize({make_trace(rows)});
        CHECK(s.rows[0].q025 <= s.rows[0].median);
        CHECK(s.rows[0].median <= s.rows[0].q975);
    }
}

TEST_CASE("retained draws always stay inside the prior support") {
    SyntheticSpec spec;
    spec.n_states = 3;
    spec.t_years = 8;
    spec.n_clusters = 1;
    spec.true_params = {{6.0, 5.0, 0.2}, {5.0, 4.0, 0.1}, {4.0, 3.0, 0.5}};
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        spec.seed = seed;
        const auto synth = generate_synthetic(spec);
        McmcConfig cfg;
        cfg.n_chains = 1;
        cfg.adapt_iters = 100;
        cfg.burnin_iters = 100;
        cfg.sample_iters = 300;
        cfg.thin = 1;
        cfg.seed = seed;
        const auto result = fit_cluster(synth.panel, PriorSpec{}, cfg);
        const PriorSpec ps;
        for (const auto& trace : result.traces) {
            for (int i = 0; i < trace.rows(); ++i) {
                for (int age = 0; age < 3; ++age) {
                    CHECK(trace.at(i, 3 * age + 0) > 0.0);
                    CHECK(trace.at(i, 3 * age + 1) > 0.0);
                    CHECK(trace.at(i, 3 * age + 2) > 0.0);
                }
                CHECK(trace.at(i, 9) > ps.rho_inc.lo);
                CHECK(trace.at(i, 9) < ps.rho_inc.hi);
                CHECK(trace.at(i, 11) > ps.rho_death.lo);
                CHECK(trace.at(i, 11) < ps.rho_death.hi);
                CHECK(trace.at(i, 12) > ps.sigma_prev.lo);
                CHECK(trace.at(i, 12) < ps.sigma_prev.hi);
            }
        }
    }
}

TEST_CASE("fit_cluster is deterministic and covers a known truth") {
    SyntheticSpec spec;
    spec.n_states = 4;
    spec.t_years = 32;
    spec.n_clusters = 1;
    spec.true_params = {{7.5, 5.5, 0.5}, {6.5, 5.5, 0.1}, {5.5, 3.1, 0.8}};
    spec.seed = 31;
    const auto synth = generate_synthetic(spec);

    McmcConfig cfg = McmcConfig::fast();
    cfg.seed = 5;
    const auto fit_a = fit_cluster(synth.panel, PriorSpec{}, cfg);
    const auto fit_b = fit_cluster(synth.panel, PriorSpec{}, cfg);
    for (std::size_t c = 0; c < fit_a.traces.size(); ++c)
        CHECK(fit_a.traces[c].draws == fit_b.traces[c].draws);
    for (std::size_t r = 0; r < fit_a.summary.rows.size(); ++r) {
        CHECK(fit_a.summary.rows[r].mean == fit_b.summary.rows[r].mean);
        CHECK(fit_a.summary.rows[r].median == fit_b.summary.rows[r].median);
    }

    // 95% CrIs cover the true beta for most (seed, age) pairs
    int covered = 0;
    const std::vector<double> true_beta = {7.5, 6.5, 5.5};
    for (std::uint64_t data_seed : {31ULL, 32ULL, 33ULL}) {
        spec.seed = data_seed;
        const auto fit =
            data_seed == 31 ? fit_a : fit_cluster(generate_synthetic(spec).panel, PriorSpec{}, cfg);
        int age = 0;
        for (AgeGroup g : kAgeGroups) {
            const auto& row = fit.summary.row(std::string("beta_") + to_string(g));
            if (row.q025 <= true_beta[age] && true_beta[age] <= row.q975) ++covered;
            ++age;
        }
    }
    CHECK(covered >= 5); // of 9
}

TEST_CASE("fit_cluster on an all-zero panel pulls mu below its prior mean") {
    std::vector<std::string> names = {"a", "b"};
    ObservationPanel panel(names, 1990, 16);
    for (int r = 0; r < 2; ++r)
        for (AgeGroup a : kAgeGroups)
            for (int t = 0; t < 16; ++t) panel.set_cell(r, a, t, 0.0, 0.0, 0.0);
    McmcConfig cfg = McmcConfig::fast();
    cfg.seed = 77;
    const auto result = fit_cluster(panel, PriorSpec{}, cfg);
    for (AgeGroup g : kAgeGroups) {
        const auto& row = result.summary.row(std::string("mu_") + to_string(g));
        CHECK(row.mean < 0.01);
    }
}
