#pragma once

#include "epifit/likelihood.hpp"
#include "epifit/priors.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace epifit {

struct McmcConfig {
    int n_chains = 3;
    int adapt_iters = 1000;
    int burnin_iters = 2000;
    int sample_iters = 10000;
    int thin = 3;
    std::uint64_t seed = 0;
    double target_acceptance = 0.234;

    void validate() const;
    /// CI profile: 2 chains, 500/500 adapt/burn-in, 2000 samples, thin 1.
    static McmcConfig fast();
};

/// Reparameterization used for proposals: positive parameters walk on the
/// log scale, bounded ones on the logit scale.
struct Transform {
    enum class Kind { identity, log_scale, logit };
    Kind kind = Kind::identity;
    double lo = 0.0, hi = 1.0; // logit bounds

    double to_unconstrained(double x) const;
    double to_constrained(double y) const;
    /// log |d constrained / d unconstrained| at unconstrained y.
    double log_jacobian(double y) const;

    static Transform identity() { return {}; }
    static Transform positive() { return {Kind::log_scale, 0.0, 1.0}; }
    static Transform interval(double lo, double hi) { return {Kind::logit, lo, hi}; }
};

struct ParamSpec {
    std::string name;
    Transform transform;
};

/// Retained (post burn-in, thinned) draws of one chain, natural scale.
struct ChainTrace {
    std::vector<std::string> names;
    int n_params = 0;
    std::vector<double> draws; // row-major rows() x n_params
    double acceptance_rate = 0.0;
    std::uint64_t seed = 0;

    int rows() const {
        return n_params == 0 ? 0 : static_cast<int>(draws.size()) / n_params;
    }
    double at(int row, int p) const {
        return draws[static_cast<std::size_t>(row) * n_params + p];
    }
};

using LogDensity = std::function<double(const std::vector<double>&)>;

/// No usable starting point could be drawn from the prior.
class SamplerInitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optional exact-rescaling move: mu' = c*mu and gamma' = gamma + mu - mu'
/// for every (gamma, mu) index pair, with the reporting factor at
/// rho_index divided by c. Leaves the trajectories and death-stream means
/// unchanged, so it walks the mortality/reporting ridge in single steps.
struct RescaleMove {
    std::vector<std::pair<int, int>> gamma_mu_pairs;
    int rho_index = -1;
};

/// Component-wise adaptive random-walk Metropolis within a parallel
/// tempering ladder. Per sweep and per rung, every coordinate is updated
/// with its own proposal scale, adapted by Robbins-Monro toward the
/// target acceptance during adapt_iters only; after adaptation each sweep
/// also makes joint proposals from the rung's empirical covariance
/// (estimated during adaptation, refreshed once at the end of burn-in)
/// and, when given, the exact rescaling move. Replica swaps run every
/// sweep; retained draws come from the untempered rung. All tuning is
/// frozen before sampling starts. Deterministic given
/// (config.seed, chain_index). Throws when the initial point has
/// non-finite density.
ChainTrace run_chain(const LogDensity& log_target, const std::vector<double>& init,
                     const std::vector<ParamSpec>& params, const McmcConfig& config,
                     int chain_index, const RescaleMove* rescale = nullptr);

/// One draw per parameter from its prior, ordered like
/// ClusterPosterior::param_names(). Deterministic given the seed.
std::vector<double> init_from_prior(const PriorSpec& spec, std::uint64_t seed);

/// Potential scale reduction factor (1992 form) per parameter:
/// sqrt(((n-1)/n * W + B/n) / W). All-identical draws give 1.0 by
/// convention; throws when W = 0 while chain means differ.
std::vector<double> gelman_rubin(const std::vector<ChainTrace>& traces);

struct SummaryRow {
    std::string name;
    double mean = 0.0, median = 0.0, q025 = 0.0, q975 = 0.0;
    double r_hat = 0.0; // NaN when fewer than 2 chains
};

/// Per-parameter summaries over pooled retained draws, plus derived rows:
/// per-draw r0_<age> when the (beta, gamma, mu) triple of an age group is
/// present, and tau_prev = 1/sigma_prev^2. Reported r_hat is floored at 1.
struct PosteriorSummary {
    std::vector<SummaryRow> rows;
    bool converged = false; // every defined r_hat < 1.1
    double max_r_hat = 0.0;

    const SummaryRow& row(const std::string& name) const;
};

PosteriorSummary summarize(const std::vector<ChainTrace>& traces);

/// Linear interpolation of order statistics, p in [0, 1].
double quantile(std::vector<double> values, double p);

struct FitResult {
    PosteriorSummary summary;
    std::vector<ChainTrace> traces;
    bool converged = false;
};

/// Runs config.n_chains chains over the cluster posterior (seeds derived
/// from config.seed), in parallel when OpenMP is enabled. Initial points
/// are drawn from the prior until the posterior is finite (at most 1000
/// attempts per chain). Non-convergence (some r_hat >= 1.1) is flagged,
/// not an error.
FitResult fit_cluster(const ObservationPanel& cluster_panel, const PriorSpec& spec,
                      const McmcConfig& config);

} // namespace epifit
