#pragma once

#include "epifit/panel.hpp"
#include "epifit/priors.hpp"
#include "epifit/sird.hpp"

#include <array>
#include <string>
#include <vector>

namespace epifit {

/// Poisson log-pmf with the mean floored at 1e-12 so zero model flows
/// never produce NaN.
double log_poisson_pmf(double count, double mean);

double log_normal_pdf(double x, double mean, double sd);

/// Three-stream panel log-likelihood given one trajectory per
/// (region, age): incidence ~ Poisson(rho_inc * new_inf * scale),
/// prevalence ~ Normal(rho_prev * i, sigma_prev^2),
/// deaths ~ Poisson(rho_death * new_death * scale).
/// `scale` converts fractional flows to the panel's count units.
/// Throws when trajectories disagree with the panel on regions or years.
///
/// Parallel over regions; per-region partial sums are combined in region
/// order, so the result is identical for any thread count and matches
/// log_likelihood_serial bit for bit.
double log_likelihood(const ObservationPanel& panel,
                      const std::vector<std::array<Trajectory, 3>>& trajectories,
                      const ReportingParams& reporting, double scale = 100000.0);

/// Reference kernel: same partial-sum structure, no threading.
double log_likelihood_serial(const ObservationPanel& panel,
                             const std::vector<std::array<Trajectory, 3>>& trajectories,
                             const ReportingParams& reporting, double scale = 100000.0);

/// log_prior + log_likelihood with per-age trajectories regenerated from
/// the parameters under default_init. -inf propagates.
double log_posterior(const ObservationPanel& panel, const std::vector<SirdParams>& per_age,
                     const ReportingParams& reporting, const PriorSpec& spec,
                     double scale = 100000.0);

/// Log-posterior over the 13-parameter vector of one cluster fit:
/// (beta, gamma, mu) per age group, then rho_inc, rho_prev, rho_death,
/// sigma_prev. All regions of the bound panel share one parameter set.
/// Pure evaluation; safe for concurrent use from several chains.
class ClusterPosterior {
public:
    static constexpr int kNumParams = 13;

    ClusterPosterior(ObservationPanel panel, PriorSpec spec, double scale = 100000.0);

    double operator()(const std::vector<double>& theta) const;

    static std::vector<std::string> param_names();
    static std::vector<SirdParams> unpack_rates(const std::vector<double>& theta);
    static ReportingParams unpack_reporting(const std::vector<double>& theta);

    const ObservationPanel& panel() const { return panel_; }
    const PriorSpec& prior_spec() const { return spec_; }
    double scale() const { return scale_; }

private:
    ObservationPanel panel_;
    PriorSpec spec_;
    double scale_;
    std::vector<double> lgamma_inc_, lgamma_death_; // lgamma(count+1) caches
};

} // namespace epifit
