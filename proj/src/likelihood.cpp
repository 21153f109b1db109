#include "epifit/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace epifit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMeanFloor = 1e-12;
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void check_dimensions(const ObservationPanel& panel,
                      const std::vector<std::array<Trajectory, 3>>& trajectories) {
    if (static_cast<int>(trajectories.size()) != panel.n_regions())
        throw std::invalid_argument("log_likelihood: one trajectory set per region required");
    for (const auto& per_age : trajectories) {
        for (const auto& traj : per_age) {
            if (traj.steps() < panel.n_years())
                throw std::invalid_argument(
                    "log_likelihood: trajectory shorter than the panel year range");
            if (traj.start_year != panel.start_year())
                throw std::invalid_argument(
                    "log_likelihood: trajectory start year differs from the panel");
        }
    }
}

// Contribution of one region. Accumulation order (age, year, stream) is
// fixed; every caller combines these partials in region order so that
// serial and parallel evaluations agree bitwise.
double region_loglik(const ObservationPanel& panel, int region,
                     const std::array<const Trajectory*, 3>& per_age,
                     const ReportingParams& rep, double scale, const double* lg_inc,
                     const double* lg_death) {
    double partial = 0.0;
    const int T = panel.n_years();
    for (int a = 0; a < kNumAgeGroups; ++a) {
        const Trajectory& traj = *per_age[a];
        const AgeGroup age = static_cast<AgeGroup>(a);
        for (int t = 0; t < T; ++t) {
            const std::size_t c = panel.cell(region, age, t);
            const double inc_mean =
                std::max(rep.rho_inc * traj.flows[t].new_inf * scale, kMeanFloor);
            const double death_mean =
                std::max(rep.rho_death * traj.flows[t].new_death * scale, kMeanFloor);
            const double y_inc = panel.incidence(region, age, t);
            const double y_death = panel.deaths(region, age, t);
            const double lg_inc_t = lg_inc ? lg_inc[c] : std::lgamma(y_inc + 1.0);
            const double lg_death_t = lg_death ? lg_death[c] : std::lgamma(y_death + 1.0);

            partial += y_inc * std::log(inc_mean) - inc_mean - lg_inc_t;
            const double z =
                (panel.prevalence(region, age, t) - rep.rho_prev * traj.states[t].i) /
                rep.sigma_prev;
            partial += -kHalfLog2Pi - std::log(rep.sigma_prev) - 0.5 * z * z;
            partial += y_death * std::log(death_mean) - death_mean - lg_death_t;
        }
    }
    return partial;
}

double combine_partials(const std::vector<double>& partials) {
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

} // namespace

double log_poisson_pmf(double count, double mean) {
    const double m = std::max(mean, kMeanFloor);
    return count * std::log(m) - m - std::lgamma(count + 1.0);
}

double log_normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -kHalfLog2Pi - std::log(sd) - 0.5 * z * z;
}

double log_likelihood(const ObservationPanel& panel,
                      const std::vector<std::array<Trajectory, 3>>& trajectories,
                      const ReportingParams& reporting, double scale) {
    check_dimensions(panel, trajectories);
    const int R = panel.n_regions();
    std::vector<double> partials(R, 0.0);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < R; ++r) {
        const std::array<const Trajectory*, 3> per_age = {
            &trajectories[r][0], &trajectories[r][1], &trajectories[r][2]};
        partials[r] =
            region_loglik(panel, r, per_age, reporting, scale, nullptr, nullptr);
    }
    return combine_partials(partials);
}

double log_likelihood_serial(const ObservationPanel& panel,
                             const std::vector<std::array<Trajectory, 3>>& trajectories,
                             const ReportingParams& reporting, double scale) {
    check_dimensions(panel, trajectories);
    const int R = panel.n_regions();
    std::vector<double> partials(R, 0.0);
    for (int r = 0; r < R; ++r) {
        const std::array<const Trajectory*, 3> per_age = {
            &trajectories[r][0], &trajectories[r][1], &trajectories[r][2]};
        partials[r] =
            region_loglik(panel, r, per_age, reporting, scale, nullptr, nullptr);
    }
    return combine_partials(partials);
}

double log_posterior(const ObservationPanel& panel, const std::vector<SirdParams>& per_age,
                     const ReportingParams& reporting, const PriorSpec& spec, double scale) {
    const double lp = log_prior(per_age, reporting, spec);
    if (lp == kNegInf) return kNegInf;
    std::array<Trajectory, 3> shared;
    for (int a = 0; a < kNumAgeGroups; ++a)
        shared[a] =
            simulate_trajectory(default_init(), per_age[a], panel.n_years(), panel.start_year());
    std::vector<double> partials(panel.n_regions(), 0.0);
    for (int r = 0; r < panel.n_regions(); ++r) {
        const std::array<const Trajectory*, 3> per_age_ptr = {&shared[0], &shared[1],
                                                              &shared[2]};
        partials[r] =
            region_loglik(panel, r, per_age_ptr, reporting, scale, nullptr, nullptr);
    }
    return lp + combine_partials(partials);
}

ClusterPosterior::ClusterPosterior(ObservationPanel panel, PriorSpec spec, double scale)
    : panel_(std::move(panel)), spec_(spec), scale_(scale) {
    if (panel_.n_regions() == 0)
        throw std::invalid_argument("ClusterPosterior: panel must be nonempty");
    const std::size_t n =
        static_cast<std::size_t>(panel_.n_regions()) * kNumAgeGroups * panel_.n_years();
    lgamma_inc_.resize(n);
    lgamma_death_.resize(n);
    for (int r = 0; r < panel_.n_regions(); ++r) {
        for (AgeGroup age : kAgeGroups) {
            for (int t = 0; t < panel_.n_years(); ++t) {
                const std::size_t c = panel_.cell(r, age, t);
                lgamma_inc_[c] = std::lgamma(panel_.incidence(r, age, t) + 1.0);
                lgamma_death_[c] = std::lgamma(panel_.deaths(r, age, t) + 1.0);
            }
        }
    }
}

std::vector<std::string> ClusterPosterior::param_names() {
    std::vector<std::string> names;
    for (AgeGroup age : kAgeGroups) {
        names.push_back(std::string("beta_") + to_string(age));
        names.push_back(std::string("gamma_") + to_string(age));
        names.push_back(std::string("mu_") + to_string(age));
    }
    names.insert(names.end(), {"rho_inc", "rho_prev", "rho_death", "sigma_prev"});
    return names;
}

std::vector<SirdParams> ClusterPosterior::unpack_rates(const std::vector<double>& theta) {
    std::vector<SirdParams> rates(kNumAgeGroups);
    for (int a = 0; a < kNumAgeGroups; ++a)
        rates[a] = SirdParams{theta[3 * a], theta[3 * a + 1], theta[3 * a + 2]};
    return rates;
}

ReportingParams ClusterPosterior::unpack_reporting(const std::vector<double>& theta) {
    return ReportingParams{theta[9], theta[10], theta[11], theta[12]};
}

double ClusterPosterior::operator()(const std::vector<double>& theta) const {
    if (theta.size() != static_cast<std::size_t>(kNumParams))
        throw std::invalid_argument("ClusterPosterior: expected 13 parameters");
    const auto rates = unpack_rates(theta);
    const auto reporting = unpack_reporting(theta);
    const double lp = log_prior(rates, reporting, spec_);
    if (lp == kNegInf) return kNegInf;
    std::array<Trajectory, 3> shared;
    for (int a = 0; a < kNumAgeGroups; ++a)
        shared[a] = simulate_trajectory(default_init(), rates[a], panel_.n_years(),
                                        panel_.start_year());
    const std::array<const Trajectory*, 3> per_age = {&shared[0], &shared[1], &shared[2]};
    double total = 0.0;
    for (int r = 0; r < panel_.n_regions(); ++r)
        total += region_loglik(panel_, r, per_age, reporting, scale_, lgamma_inc_.data(),
                               lgamma_death_.data());
    return lp + total;
}

} // namespace epifit
