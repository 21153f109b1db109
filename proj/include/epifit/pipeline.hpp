#pragma once

#include "epifit/kmeans.hpp"
#include "epifit/mcmc.hpp"
#include "epifit/synthetic.hpp"

#include <vector>

namespace epifit {

/// One posterior fit per cluster label present in the assignments.
struct ClusterFit {
    int cluster_label = 0;
    int n_regions = 0;
    FitResult fit;
};

/// Fits every cluster named in `assignments` (1-based labels) over the
/// panel, with per-cluster seeds derived from config.seed. Labels are
/// processed in increasing order.
std::vector<ClusterFit> fit_by_cluster(const ObservationPanel& panel,
                                       const std::vector<int>& assignments,
                                       const PriorSpec& spec, const McmcConfig& config);

/// One row of the true-vs-estimated table of the simulation study.
struct ComparisonRow {
    int true_cluster = 0;
    AgeGroup age = AgeGroup::juvenile;
    int matched_est_cluster = 0;
    SirdParams truth;
    double est_beta = 0.0, est_gamma = 0.0, est_mu = 0.0; // posterior means
    double beta_q025 = 0.0, beta_q975 = 0.0;
    double gamma_q025 = 0.0, gamma_q975 = 0.0;
    double mu_q025 = 0.0, mu_q975 = 0.0;
    bool beta_covered = false; // true beta inside its 95% CrI
};

struct ValidationOutcome {
    SyntheticResult synth;
    ClusterModel cluster_model;
    double ari = 0.0;
    std::vector<ClusterFit> fits;         // per estimated cluster
    std::vector<ComparisonRow> comparison; // one row per (true cluster, age)
    double frac_rhat_ok = 0.0;             // sampled params with r_hat < 1.1
    int n_beta_covered = 0;                 // out of comparison.size()
};

/// End-to-end simulation study: generate -> cluster (K = spec.n_clusters)
/// -> score ARI -> fit each estimated cluster -> compare against truth.
/// Estimated clusters are matched to true clusters by maximal overlap.
ValidationOutcome run_validation_study(const SyntheticSpec& spec, const PriorSpec& priors,
                                       const McmcConfig& config);

} // namespace epifit
