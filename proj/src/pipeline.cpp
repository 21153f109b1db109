#include "epifit/pipeline.hpp"

#include "epifit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace epifit {

std::vector<ClusterFit> fit_by_cluster(const ObservationPanel& panel,
                                       const std::vector<int>& assignments,
                                       const PriorSpec& spec, const McmcConfig& config) {
    if (static_cast<int>(assignments.size()) != panel.n_regions())
        throw std::invalid_argument("fit_by_cluster: assignment length mismatch");
    std::map<int, std::vector<int>> members;
    for (int r = 0; r < panel.n_regions(); ++r) members[assignments[r]].push_back(r);

    std::vector<ClusterFit> out;
    for (const auto& [label, regions] : members) {
        McmcConfig cluster_cfg = config;
        cluster_cfg.seed = mix_seed(config.seed, 0xf17ULL + static_cast<std::uint64_t>(label));
        ClusterFit cf;
        cf.cluster_label = label;
        cf.n_regions = static_cast<int>(regions.size());
        cf.fit = fit_cluster(panel.subset(regions), spec, cluster_cfg);
        out.push_back(std::move(cf));
    }
    return out;
}

namespace {

// For each true cluster, the estimated cluster with maximal member
// overlap (ties toward the smaller estimated label).
std::map<int, int> match_clusters(const std::vector<int>& true_labels,
                                  const std::vector<int>& est_labels) {
    std::map<int, std::map<int, int>> overlap;
    for (std::size_t i = 0; i < true_labels.size(); ++i)
        ++overlap[true_labels[i]][est_labels[i]];
    std::map<int, int> match;
    for (const auto& [t, row] : overlap) {
        int best_e = 0, best_n = -1;
        for (const auto& [e, cnt] : row) {
            if (cnt > best_n) {
                best_n = cnt;
                best_e = e;
            }
        }
        match[t] = best_e;
    }
    return match;
}

} // namespace

ValidationOutcome run_validation_study(const SyntheticSpec& spec, const PriorSpec& priors,
                                       const McmcConfig& config) {
    ValidationOutcome out;
    out.synth = generate_synthetic(spec);

    const FeatureMatrix features = extract_features(out.synth.panel);
    out.cluster_model =
        kmeans(features, spec.n_clusters, mix_seed(spec.seed, 0x6b6dULL), 20);
    out.ari = adjusted_rand_index(out.cluster_model.assignments, out.synth.true_labels);

    out.fits = fit_by_cluster(out.synth.panel, out.cluster_model.assignments, priors, config);

    const auto match = match_clusters(out.synth.true_labels, out.cluster_model.assignments);
    auto fit_of = [&](int label) -> const ClusterFit& {
        for (const auto& cf : out.fits)
            if (cf.cluster_label == label) return cf;
        throw std::logic_error("run_validation_study: no fit for matched cluster");
    };

    long long rhat_ok = 0, rhat_total = 0;
    for (const auto& cf : out.fits) {
        for (const auto& name : ClusterPosterior::param_names()) {
            const auto& row = cf.fit.summary.row(name);
            if (std::isnan(row.r_hat)) continue;
            ++rhat_total;
            if (row.r_hat < 1.1) ++rhat_ok;
        }
    }
    out.frac_rhat_ok =
        rhat_total > 0 ? static_cast<double>(rhat_ok) / static_cast<double>(rhat_total) : 0.0;

    for (int c = 1; c <= spec.n_clusters; ++c) {
        const ClusterFit& cf = fit_of(match.at(c));
        for (AgeGroup age : kAgeGroups) {
            const std::string suffix = std::string("_") + to_string(age);
            const auto& beta_row = cf.fit.summary.row("beta" + suffix);
            const auto& gamma_row = cf.fit.summary.row("gamma" + suffix);
            const auto& mu_row = cf.fit.summary.row("mu" + suffix);
            ComparisonRow row;
            row.true_cluster = c;
            row.age = age;
            row.matched_est_cluster = cf.cluster_label;
            row.truth =
                out.synth.true_params[(c - 1) * kNumAgeGroups + static_cast<int>(age)];
            row.est_beta = beta_row.mean;
            row.est_gamma = gamma_row.mean;
            row.est_mu = mu_row.mean;
            row.beta_q025 = beta_row.q025;
            row.beta_q975 = beta_row.q975;
            row.gamma_q025 = gamma_row.q025;
            row.gamma_q975 = gamma_row.q975;
            row.mu_q025 = mu_row.q025;
            row.mu_q975 = mu_row.q975;
            row.beta_covered =
                row.beta_q025 <= row.truth.beta && row.truth.beta <= row.beta_q975;
            if (row.beta_covered) ++out.n_beta_covered;
            out.comparison.push_back(row);
        }
    }
    return out;
}

} // namespace epifit
