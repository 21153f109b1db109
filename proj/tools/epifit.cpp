// epifit command line: simulate | cluster | fit | validate | report
//
// Exit codes: 0 success, 2 input/ingestion error, 3 missing K decision,
// 4 sampler initialization failure.

#include "epifit/csv.hpp"
#include "epifit/data_io.hpp"
#include "epifit/kmeans.hpp"
#include "epifit/mcmc.hpp"
#include "epifit/pipeline.hpp"
#include "epifit/rng.hpp"
#include "epifit/sird.hpp"
#include "epifit/synthetic.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace epifit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitMissingK = 3;
constexpr int kExitSampler = 4;

// Flat key=value config, '#' comments. Flag values take precedence.
std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        auto trim = [](std::string s) {
            const auto x = s.find_first_not_of(" \t\r");
            if (x == std::string::npos) return std::string{};
            const auto y = s.find_last_not_of(" \t\r");
            return s.substr(x, y - x + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

// One option: flag > config file > (env for seed) > default.
class Resolver {
public:
    Resolver(CLI::App* cmd, std::map<std::string, std::string> config)
        : cmd_(cmd), config_(std::move(config)) {}

    template <typename T>
    T resolve(const std::string& flag, const std::string& key, T flag_value, T fallback) {
        if (cmd_->count(flag) > 0) {
            echo_[key] = to_text(flag_value);
            return flag_value;
        }
        auto it = config_.find(key);
        if (it != config_.end()) {
            T v = from_text<T>(it->second, key);
            echo_[key] = to_text(v);
            return v;
        }
        echo_[key] = to_text(fallback);
        return fallback;
    }

    std::uint64_t resolve_seed(const std::string& flag, std::uint64_t flag_value) {
        if (cmd_->count(flag) > 0) {
            echo_["seed"] = to_text(flag_value);
            return flag_value;
        }
        auto it = config_.find("seed");
        if (it != config_.end()) {
            const auto v = from_text<std::uint64_t>(it->second, "seed");
            echo_["seed"] = to_text(v);
            return v;
        }
        if (const char* env = std::getenv("EPIFIT_SEED")) {
            const auto v = from_text<std::uint64_t>(env, "EPIFIT_SEED");
            echo_["seed"] = to_text(v);
            return v;
        }
        echo_["seed"] = "1";
        return 1;
    }

    void note(const std::string& key, const std::string& value) { echo_[key] = value; }

    void write_echo(const fs::path& dir) const {
        std::ofstream out(dir / "resolved_config.txt");
        for (const auto& [k, v] : echo_) out << k << "=" << v << "\n";
    }

private:
    template <typename T>
    static std::string to_text(const T& v) {
        if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, bool>) return v ? "1" : "0";
        else if constexpr (std::is_same_v<T, double>) return fmt_double(v);
        else return std::to_string(v);
    }
    template <typename T>
    static T from_text(const std::string& s, const std::string& key) {
        if constexpr (std::is_same_v<T, std::string>) {
            return s;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (s == "1" || s == "true") return true;
            if (s == "0" || s == "false") return false;
            throw std::runtime_error("config: bad boolean for " + key + ": " + s);
        } else if constexpr (std::is_same_v<T, double>) {
            return parse_double(s, "config " + key);
        } else {
            return static_cast<T>(parse_int(s, "config " + key));
        }
    }

    CLI::App* cmd_;
    std::map<std::string, std::string> config_;
    std::map<std::string, std::string> echo_;
};

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

std::pair<int, int> parse_k_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::runtime_error("--k-range expects A:B, got " + text);
    const int lo = static_cast<int>(parse_int(text.substr(0, colon), "k-range"));
    const int hi = static_cast<int>(parse_int(text.substr(colon + 1), "k-range"));
    if (lo < 2 || hi < lo) throw std::runtime_error("--k-range expects 2 <= A <= B");
    return {lo, hi};
}

struct McmcFlags {
    int chains = 0, adapt = 0, burnin = 0, samples = 0, thin = 0;
    bool fast = false;
};

McmcConfig resolve_mcmc(Resolver& res, const McmcFlags& flags, std::uint64_t seed) {
    const bool fast = res.resolve<bool>("--fast", "fast", flags.fast, false);
    const McmcConfig profile = fast ? McmcConfig::fast() : McmcConfig{};
    McmcConfig cfg;
    cfg.n_chains = res.resolve<int>("--chains", "chains", flags.chains, profile.n_chains);
    cfg.adapt_iters = res.resolve<int>("--adapt", "adapt", flags.adapt, profile.adapt_iters);
    cfg.burnin_iters =
        res.resolve<int>("--burnin", "burnin", flags.burnin, profile.burnin_iters);
    cfg.sample_iters =
        res.resolve<int>("--samples", "samples", flags.samples, profile.sample_iters);
    cfg.thin = res.resolve<int>("--thin", "thin", flags.thin, profile.thin);
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

std::string rhat_text(double v) {
    return std::isnan(v) ? "NA" : fmt_double(v);
}

void write_fit_outputs(const std::vector<ClusterFit>& fits, const fs::path& dir) {
    {
        std::ofstream out(dir / "fit_summary.csv");
        out << "cluster,age_group";
        for (const char* p : {"beta", "gamma", "mu", "r0"})
            out << ',' << p << "_mean," << p << "_median," << p << "_q025," << p
                << "_q975," << p << "_rhat";
        out << '\n';
        for (const auto& cf : fits) {
            for (AgeGroup age : kAgeGroups) {
                out << cf.cluster_label << ',' << to_string(age);
                const std::string suffix = std::string("_") + to_string(age);
                for (const std::string base : {"beta", "gamma", "mu", "r0"}) {
                    const auto& row = cf.fit.summary.row(base + suffix);
                    out << ',' << fmt_double(row.mean) << ',' << fmt_double(row.median)
                        << ',' << fmt_double(row.q025) << ',' << fmt_double(row.q975) << ','
                        << rhat_text(row.r_hat);
                }
                out << '\n';
            }
        }
    }
    {
        std::ofstream out(dir / "fit_reporting.csv");
        out << "cluster,parameter,mean,median,q025,q975,r_hat\n";
        for (const auto& cf : fits) {
            for (const std::string name :
                 {"rho_inc", "rho_prev", "rho_death", "sigma_prev", "tau_prev"}) {
                const auto& row = cf.fit.summary.row(name);
                out << cf.cluster_label << ',' << name << ',' << fmt_double(row.mean) << ','
                    << fmt_double(row.median) << ',' << fmt_double(row.q025) << ','
                    << fmt_double(row.q975) << ',' << rhat_text(row.r_hat) << '\n';
            }
        }
    }
    {
        std::ofstream out(dir / "diagnostics.csv");
        out << "cluster,parameter,r_hat,warn\n";
        for (const auto& cf : fits) {
            for (const auto& row : cf.fit.summary.rows) {
                const bool warn = !std::isnan(row.r_hat) && row.r_hat >= 1.1;
                out << cf.cluster_label << ',' << row.name << ',' << rhat_text(row.r_hat)
                    << ',' << (warn ? 1 : 0) << '\n';
            }
        }
    }
    {
        std::ofstream out(dir / "chains.csv");
        out << "cluster,chain,acceptance_rate,seed\n";
        for (const auto& cf : fits)
            for (std::size_t c = 0; c < cf.fit.traces.size(); ++c)
                out << cf.cluster_label << ',' << c << ','
                    << fmt_double(cf.fit.traces[c].acceptance_rate) << ','
                    << cf.fit.traces[c].seed << '\n';
    }
}

void write_draws(const std::vector<ClusterFit>& fits, const fs::path& dir) {
    for (const auto& cf : fits) {
        std::ofstream out(dir /
                          ("draws_cluster_" + std::to_string(cf.cluster_label) + ".csv"));
        out << "chain,draw";
        for (const auto& name : cf.fit.traces[0].names) out << ',' << name;
        out << '\n';
        for (std::size_t c = 0; c < cf.fit.traces.size(); ++c) {
            const auto& trace = cf.fit.traces[c];
            for (int i = 0; i < trace.rows(); ++i) {
                out << c << ',' << i;
                for (int j = 0; j < trace.n_params; ++j)
                    out << ',' << fmt_double(trace.at(i, j));
                out << '\n';
            }
        }
    }
}

void write_kselect(const KSelectionReport& report, const fs::path& dir) {
    {
        std::ofstream out(dir / "kselect.csv");
        out << "k,wcss,silhouette,aic,bic\n";
        for (const auto& row : report.rows)
            out << row.k << ',' << fmt_double(row.wcss) << ',' << fmt_double(row.silhouette)
                << ',' << fmt_double(row.aic) << ',' << fmt_double(row.bic) << '\n';
    }
    std::ofstream out(dir / "kselect_recommendation.txt");
    out << "recommended_k=" << report.recommended_k << "\n" << report.rationale << "\n";
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(CLI::App* cmd, const std::string& params_path, const std::string& out_dir,
                 int years, int start_year, int threads, const std::string& config_path) {
    Resolver res(cmd, config_path.empty() ? std::map<std::string, std::string>{}
                                          : load_config_file(config_path));
    const std::string params_file =
        res.resolve<std::string>("--params", "params", params_path, "");
    const std::string output =
        res.resolve<std::string>("--output-dir", "output_dir", out_dir, "");
    const int n_years = res.resolve<int>("--years", "years", years, 32);
    const int year0 = res.resolve<int>("--start-year", "start_year", start_year, 1990);
    apply_threads(res.resolve<int>("--threads", "threads", threads, 0));

    if (params_file.empty() || output.empty()) {
        std::cerr << "simulate: --params and --output-dir are required\n";
        return kExitInput;
    }
    if (n_years < 1) {
        std::cerr << "simulate: --years must be >= 1\n";
        return kExitInput;
    }
    const auto rows = load_params_csv(params_file);
    if (rows.empty()) {
        std::cerr << "simulate: no parameter rows in " << params_file << "\n";
        return kExitInput;
    }
    fs::create_directories(output);
    const fs::path dir(output);

    std::ofstream long_out(dir / "trajectories_long.csv");
    long_out << "cluster,age_group,year,s,i,r,d,new_inf,new_rec,new_death,clamped\n";
    for (const auto& row : rows) {
        const Trajectory traj =
            simulate_trajectory(default_init(), row.params, n_years, year0);
        std::ofstream out(dir / ("trajectory_cluster" + std::to_string(row.cluster) + "_" +
                                 to_string(row.age) + ".csv"));
        write_trajectory_csv(traj, out);
        for (std::size_t t = 0; t < traj.states.size(); ++t) {
            const auto& st = traj.states[t];
            long_out << row.cluster << ',' << to_string(row.age) << ','
                     << (year0 + static_cast<int>(t)) << ',' << fmt_double(st.s) << ','
                     << fmt_double(st.i) << ',' << fmt_double(st.r) << ','
                     << fmt_double(st.d);
            if (t < traj.flows.size()) {
                long_out << ',' << fmt_double(traj.flows[t].new_inf) << ','
                         << fmt_double(traj.flows[t].new_rec) << ','
                         << fmt_double(traj.flows[t].new_death);
            } else {
                long_out << ",,,";
            }
            long_out << ',' << (st.clamped ? 1 : 0) << '\n';
        }
    }
    res.write_echo(dir);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

int cmd_cluster(CLI::App* cmd, const std::string& input, const std::string& out_dir,
                std::uint64_t seed, int k, const std::string& k_range, int threads,
                const std::string& config_path) {
    Resolver res(cmd, config_path.empty() ? std::map<std::string, std::string>{}
                                          : load_config_file(config_path));
    const std::string input_file = res.resolve<std::string>("--input", "input", input, "");
    const std::string output =
        res.resolve<std::string>("--output-dir", "output_dir", out_dir, "");
    const std::uint64_t rseed = res.resolve_seed("--seed", seed);
    const int fixed_k = res.resolve<int>("--k", "k", k, 0);
    const std::string range_text =
        res.resolve<std::string>("--k-range", "k_range", k_range, "2:6");
    apply_threads(res.resolve<int>("--threads", "threads", threads, 0));

    if (input_file.empty() || output.empty()) {
        std::cerr << "cluster: --input and --output-dir are required\n";
        return kExitInput;
    }
    const ObservationPanel panel = load_csv(input_file);
    const FeatureMatrix features = extract_features(panel);
    fs::create_directories(output);
    const fs::path dir(output);

    auto [range_lo, range_hi] = parse_k_range(range_text);
    range_hi = std::min(range_hi, panel.n_regions() - 1);
    const bool range_ok = range_lo >= 2 && range_lo <= range_hi;
    if (range_ok) {
        const KSelectionReport report =
            select_k(features, range_lo, range_hi, mix_seed(rseed, 0x6b73ULL));
        write_kselect(report, dir);
        std::cout << "k,wcss,silhouette,aic,bic\n";
        for (const auto& row : report.rows)
            std::cout << row.k << ',' << fmt_double(row.wcss) << ','
                      << fmt_double(row.silhouette) << ',' << fmt_double(row.aic) << ','
                      << fmt_double(row.bic) << '\n';
        std::cout << report.rationale << "\n";
    } else if (fixed_k == 0) {
        std::cerr << "cluster: panel too small for --k-range " << range_text
                  << " and no --k given\n";
        return kExitInput;
    } else {
        std::cerr << "note: panel too small for --k-range " << range_text
                  << "; skipping the K-selection report\n";
    }

    if (fixed_k == 0) {
        res.write_echo(dir);
        std::cerr << "cluster: no --k given; review the K-selection report and rerun "
                     "with --k <K>\n";
        return kExitMissingK;
    }
    if (fixed_k < 1 || fixed_k > panel.n_regions()) {
        std::cerr << "cluster: --k out of range for " << panel.n_regions() << " regions\n";
        return kExitInput;
    }
    const ClusterModel model = kmeans(features, fixed_k, mix_seed(rseed, 0x6b6dULL), 20);
    write_assignments_csv(panel.regions(), model.assignments, (dir / "assignments.csv").string());
    res.write_echo(dir);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

int cmd_fit(CLI::App* cmd, const std::string& input, const std::string& assignments_path,
            const std::string& out_dir, std::uint64_t seed, const McmcFlags& mf,
            const std::string& priors_path, int threads, const std::string& config_path) {
    Resolver res(cmd, config_path.empty() ? std::map<std::string, std::string>{}
                                          : load_config_file(config_path));
    const std::string input_file = res.resolve<std::string>("--input", "input", input, "");
    const std::string assign_file =
        res.resolve<std::string>("--assignments", "assignments", assignments_path, "");
    const std::string output =
        res.resolve<std::string>("--output-dir", "output_dir", out_dir, "");
    const std::uint64_t rseed = res.resolve_seed("--seed", seed);
    const McmcConfig cfg = resolve_mcmc(res, mf, rseed);
    const std::string priors_file =
        res.resolve<std::string>("--priors", "priors", priors_path, "");
    apply_threads(res.resolve<int>("--threads", "threads", threads, 0));

    if (input_file.empty() || assign_file.empty() || output.empty()) {
        std::cerr << "fit: --input, --assignments and --output-dir are required\n";
        return kExitInput;
    }
    const ObservationPanel panel = load_csv(input_file);
    const auto assignments = load_assignments_csv(assign_file, panel.regions());
    const PriorSpec priors =
        priors_file.empty() ? PriorSpec{} : load_prior_config(priors_file);

    fs::create_directories(output);
    const fs::path dir(output);
    const auto fits = fit_by_cluster(panel, assignments, priors, cfg);
    write_fit_outputs(fits, dir);
    write_draws(fits, dir);
    res.write_echo(dir);
    for (const auto& cf : fits)
        if (!cf.fit.converged && cfg.n_chains >= 2)
            std::cerr << "warning: cluster " << cf.cluster_label
                      << ": some r_hat >= 1.1 (max " << cf.fit.summary.max_r_hat << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(CLI::App* cmd, const std::string& out_dir, std::uint64_t seed,
                 const McmcFlags& mf, int states, int years, int clusters,
                 bool literal_noise, const std::string& priors_path, int threads,
                 const std::string& config_path) {
    Resolver res(cmd, config_path.empty() ? std::map<std::string, std::string>{}
                                          : load_config_file(config_path));
    const std::string output =
        res.resolve<std::string>("--output-dir", "output_dir", out_dir, "");
    const std::uint64_t rseed = res.resolve_seed("--seed", seed);
    const McmcConfig cfg = resolve_mcmc(res, mf, rseed);
    SyntheticSpec spec;
    spec.n_states = res.resolve<int>("--states", "states", states, 10);
    spec.t_years = res.resolve<int>("--years", "years", years, 32);
    spec.n_clusters = res.resolve<int>("--clusters", "clusters", clusters, 3);
    spec.literal_death_noise = res.resolve<bool>("--strict-literal-noise",
                                                 "strict_literal_noise", literal_noise, false);
    spec.seed = rseed;
    const std::string priors_file =
        res.resolve<std::string>("--priors", "priors", priors_path, "");
    apply_threads(res.resolve<int>("--threads", "threads", threads, 0));

    if (output.empty()) {
        std::cerr << "validate: --output-dir is required\n";
        return kExitInput;
    }
    const PriorSpec priors =
        priors_file.empty() ? PriorSpec{} : load_prior_config(priors_file);

    const ValidationOutcome outcome = run_validation_study(spec, priors, cfg);

    fs::create_directories(output);
    const fs::path dir(output);
    write_panel_csv(outcome.synth.panel, (dir / "synthetic_panel.csv").string());
    write_labels_csv(outcome.synth.panel.regions(), outcome.synth.true_labels,
                     (dir / "true_labels.csv").string());
    write_assignments_csv(outcome.synth.panel.regions(), outcome.cluster_model.assignments,
                          (dir / "assignments.csv").string());
    {
        std::ofstream out(dir / "ari.txt");
        out << fmt_double(outcome.ari) << "\n";
    }
    {
        std::ofstream out(dir / "comparison.csv");
        out << "true_cluster,age_group,matched_est_cluster,true_beta,est_beta,beta_q025,"
               "beta_q975,beta_covered,true_gamma,est_gamma,gamma_q025,gamma_q975,"
               "true_mu,est_mu,mu_q025,mu_q975\n";
        for (const auto& row : outcome.comparison) {
            out << row.true_cluster << ',' << to_string(row.age) << ','
                << row.matched_est_cluster << ',' << fmt_double(row.truth.beta) << ','
                << fmt_double(row.est_beta) << ',' << fmt_double(row.beta_q025) << ','
                << fmt_double(row.beta_q975) << ',' << (row.beta_covered ? 1 : 0) << ','
                << fmt_double(row.truth.gamma) << ',' << fmt_double(row.est_gamma) << ','
                << fmt_double(row.gamma_q025) << ',' << fmt_double(row.gamma_q975) << ','
                << fmt_double(row.truth.mu) << ',' << fmt_double(row.est_mu) << ','
                << fmt_double(row.mu_q025) << ',' << fmt_double(row.mu_q975) << '\n';
        }
    }
    write_fit_outputs(outcome.fits, dir);
    {
        std::ofstream out(dir / "validate_summary.txt");
        out << "ARI=" << fmt_double(outcome.ari) << "\n";
        out << "beta_coverage=" << outcome.n_beta_covered << "/"
            << outcome.comparison.size() << "\n";
        out << "frac_rhat_below_1.1=" << fmt_double(outcome.frac_rhat_ok) << "\n";
        out << "true_labels=";
        for (std::size_t i = 0; i < outcome.synth.true_labels.size(); ++i)
            out << (i ? "," : "") << outcome.synth.true_labels[i];
        out << "\nestimated_labels=";
        for (std::size_t i = 0; i < outcome.cluster_model.assignments.size(); ++i)
            out << (i ? "," : "") << outcome.cluster_model.assignments[i];
        out << "\n";
        for (const auto& row : outcome.comparison) {
            out << "cluster " << row.true_cluster << " " << to_string(row.age)
                << ": beta " << fmt_double(row.truth.beta) << " -> "
                << fmt_double(row.est_beta) << " [" << fmt_double(row.beta_q025) << ", "
                << fmt_double(row.beta_q975) << "]"
                << (row.beta_covered ? " covered" : " missed") << "; gamma "
                << fmt_double(row.truth.gamma) << " -> " << fmt_double(row.est_gamma)
                << "; mu " << fmt_double(row.truth.mu) << " -> " << fmt_double(row.est_mu)
                << "\n";
        }
    }
    res.write_echo(dir);
    std::cout << "ARI=" << fmt_double(outcome.ari) << " beta_coverage="
              << outcome.n_beta_covered << "/" << outcome.comparison.size()
              << " frac_rhat_ok=" << fmt_double(outcome.frac_rhat_ok) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(CLI::App* cmd, const std::string& out_dir, const std::string& config_path) {
    Resolver res(cmd, config_path.empty() ? std::map<std::string, std::string>{}
                                          : load_config_file(config_path));
    const std::string output =
        res.resolve<std::string>("--output-dir", "output_dir", out_dir, "");
    if (output.empty()) {
        std::cerr << "report: --output-dir is required\n";
        return kExitInput;
    }
    const fs::path dir(output);
    for (const char* needed : {"assignments.csv", "fit_summary.csv"}) {
        if (!fs::exists(dir / needed)) {
            std::cerr << "report: missing input file " << (dir / needed).string() << "\n";
            return kExitInput;
        }
    }
    const auto assignments = read_csv_rows((dir / "assignments.csv").string());
    const auto summary = read_csv_rows((dir / "fit_summary.csv").string());

    std::map<std::string, std::vector<std::string>> members; // cluster -> regions
    for (std::size_t i = 1; i < assignments.size(); ++i)
        if (assignments[i].size() >= 2)
            members[assignments[i][1]].push_back(assignments[i][0]);

    std::ofstream txt(dir / "report.txt");
    txt << "cluster membership\n";
    for (const auto& [cluster, regions] : members) {
        txt << "  cluster " << cluster << " (" << regions.size() << " regions):";
        for (const auto& r : regions) txt << " " << r;
        txt << "\n";
    }
    txt << "\nposterior summary (mean [q025, q975], r_hat)\n";
    // fit_summary.csv columns: cluster,age_group, then 5 stats per block
    const std::vector<std::string> blocks = {"beta", "gamma", "mu", "r0"};
    for (std::size_t i = 1; i < summary.size(); ++i) {
        const auto& row = summary[i];
        if (row.size() < 2 + 5 * blocks.size()) continue;
        txt << "  cluster " << row[0] << " " << row[1] << ":";
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const std::size_t base = 2 + 5 * b;
            txt << " " << blocks[b] << "=" << row[base] << " [" << row[base + 2] << ", "
                << row[base + 3] << "] rhat=" << row[base + 4] << ";";
        }
        txt << "\n";
    }
    if (fs::exists(dir / "kselect.csv")) {
        txt << "\nK selection\n";
        for (const auto& row : read_csv_rows((dir / "kselect.csv").string())) {
            txt << "  ";
            for (std::size_t j = 0; j < row.size(); ++j) txt << (j ? "," : "") << row[j];
            txt << "\n";
        }
    }

    std::ofstream csv(dir / "report.csv");
    csv << "cluster,n_regions,age_group";
    for (const auto& b : blocks) csv << ',' << b << "_mean," << b << "_q025," << b << "_q975";
    csv << '\n';
    for (std::size_t i = 1; i < summary.size(); ++i) {
        const auto& row = summary[i];
        if (row.size() < 2 + 5 * blocks.size()) continue;
        const auto it = members.find(row[0]);
        csv << row[0] << ',' << (it == members.end() ? 0 : it->second.size()) << ','
            << row[1];
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const std::size_t base = 2 + 5 * b;
            csv << ',' << row[base] << ',' << row[base + 2] << ',' << row[base + 3];
        }
        csv << '\n';
    }
    res.write_echo(dir);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster-based Bayesian SIRD pipeline for age-structured epidemic panels"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Forward SIRD trajectories from a params CSV");
    std::string sim_params, sim_out, sim_config;
    int sim_years = 32, sim_start = 1990, sim_threads = 0;
    sim->add_option("--params", sim_params, "cluster,age_group,beta,gamma,mu CSV");
    sim->add_option("--output-dir", sim_out, "output directory");
    sim->add_option("--years", sim_years, "number of annual steps");
    sim->add_option("--start-year", sim_start, "calendar year of the initial state");
    sim->add_option("--threads", sim_threads, "worker thread cap");
    sim->add_option("--config", sim_config, "flat key=value config file");

    // cluster
    auto* clu = app.add_subcommand("cluster", "K-selection report and assignments");
    std::string clu_input, clu_out, clu_range, clu_config;
    std::uint64_t clu_seed = 0;
    int clu_k = 0, clu_threads = 0;
    clu->add_option("--input", clu_input, "panel CSV");
    clu->add_option("--output-dir", clu_out, "output directory");
    clu->add_option("--seed", clu_seed, "random seed");
    clu->add_option("--k", clu_k, "fixed number of clusters");
    clu->add_option("--k-range", clu_range, "candidate range A:B (default 2:6)");
    clu->add_option("--threads", clu_threads, "worker thread cap");
    clu->add_option("--config", clu_config, "flat key=value config file");

    // fit
    auto* fit = app.add_subcommand("fit", "Per-cluster Bayesian SIRD fits");
    std::string fit_input, fit_assign, fit_out, fit_priors, fit_config;
    std::uint64_t fit_seed = 0;
    McmcFlags fit_mcmc;
    int fit_threads = 0;
    fit->add_option("--input", fit_input, "panel CSV");
    fit->add_option("--assignments", fit_assign, "region,cluster CSV");
    fit->add_option("--output-dir", fit_out, "output directory");
    fit->add_option("--seed", fit_seed, "random seed");
    fit->add_option("--chains", fit_mcmc.chains, "number of chains");
    fit->add_option("--adapt", fit_mcmc.adapt, "adaptation iterations");
    fit->add_option("--burnin", fit_mcmc.burnin, "burn-in iterations");
    fit->add_option("--samples", fit_mcmc.samples, "sampling iterations");
    fit->add_option("--thin", fit_mcmc.thin, "thinning factor");
    fit->add_flag("--fast", fit_mcmc.fast, "CI profile (2 chains, 500/500, 2000 samples)");
    fit->add_option("--priors", fit_priors, "prior overrides config");
    fit->add_option("--threads", fit_threads, "worker thread cap");
    fit->add_option("--config", fit_config, "flat key=value config file");

    // validate
    auto* val = app.add_subcommand("validate", "Built-in synthetic simulation study");
    std::string val_out, val_priors, val_config;
    std::uint64_t val_seed = 0;
    McmcFlags val_mcmc;
    int val_states = 10, val_years = 32, val_clusters = 3, val_threads = 0;
    bool val_literal = false;
    val->add_option("--output-dir", val_out, "output directory");
    val->add_option("--seed", val_seed, "random seed");
    val->add_option("--chains", val_mcmc.chains, "number of chains");
    val->add_option("--adapt", val_mcmc.adapt, "adaptation iterations");
    val->add_option("--burnin", val_mcmc.burnin, "burn-in iterations");
    val->add_option("--samples", val_mcmc.samples, "sampling iterations");
    val->add_option("--thin", val_mcmc.thin, "thinning factor");
    val->add_flag("--fast", val_mcmc.fast, "CI profile (2 chains, 500/500, 2000 samples)");
    val->add_option("--states", val_states, "number of synthetic states");
    val->add_option("--years", val_years, "years of synthetic data");
    val->add_option("--clusters", val_clusters, "number of true clusters");
    val->add_flag("--strict-literal-noise", val_literal,
                  "Poisson death noise on the cumulative fraction");
    val->add_option("--priors", val_priors, "prior overrides config");
    val->add_option("--threads", val_threads, "worker thread cap");
    val->add_option("--config", val_config, "flat key=value config file");

    // report
    auto* rep = app.add_subcommand("report", "Merge prior outputs into one bundle");
    std::string rep_out, rep_config;
    rep->add_option("--output-dir", rep_out, "directory holding previous outputs");
    rep->add_option("--config", rep_config, "flat key=value config file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim, sim_params, sim_out, sim_years, sim_start, sim_threads,
                                sim_config);
        if (clu->parsed())
            return cmd_cluster(clu, clu_input, clu_out, clu_seed, clu_k, clu_range,
                               clu_threads, clu_config);
        if (fit->parsed())
            return cmd_fit(fit, fit_input, fit_assign, fit_out, fit_seed, fit_mcmc,
                           fit_priors, fit_threads, fit_config);
        if (val->parsed())
            return cmd_validate(val, val_out, val_seed, val_mcmc, val_states, val_years,
                                val_clusters, val_literal, val_priors, val_threads,
                                val_config);
        if (rep->parsed()) return cmd_report(rep, rep_out, rep_config);
    } catch (const SamplerInitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSampler;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
