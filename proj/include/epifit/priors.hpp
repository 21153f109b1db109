#pragma once

#include "epifit/sird.hpp"

#include <string>
#include <vector>

namespace epifit {

struct GammaPrior {
    double shape;
    double rate;
};

struct UniformPrior {
    double lo;
    double hi;
};

/// Prior distributions over the SIRD rates (shared across age groups)
/// and the reporting parameters.
struct PriorSpec {
    GammaPrior beta{2.0, 0.2};
    GammaPrior gamma{2.0, 1.0};
    GammaPrior mu{1.0, 100.0};
    UniformPrior rho_inc{0.0, 5.0};
    UniformPrior rho_prev{0.0, 5.0};
    UniformPrior rho_death{0.5, 2.0};
    UniformPrior sigma_prev{0.001, 0.5};
};

/// Reporting multipliers and the prevalence observation noise scale.
struct ReportingParams {
    double rho_inc = 1.0;
    double rho_prev = 1.0;
    double rho_death = 1.0;
    double sigma_prev = 0.01;
};

/// shape*ln(rate) - lnGamma(shape) + (shape-1)*ln(x) - rate*x.
/// Throws std::domain_error for x <= 0.
double log_gamma_density(double x, double shape, double rate);

/// -ln(hi-lo) inside the support, -inf outside.
double log_uniform_density(double x, const UniformPrior& prior);

/// Sum of independent component log-densities over the per-age rates and
/// the reporting parameters; -inf (not an error) out of support.
double log_prior(const std::vector<SirdParams>& per_age, const ReportingParams& reporting,
                 const PriorSpec& spec);

/// Overrides priors from a flat key = distribution config file, e.g.
///   beta = gamma 2 0.2
///   rho_death = uniform 0.5 2
/// Unlisted parameters keep their defaults.
PriorSpec load_prior_config(const std::string& path);

} // namespace epifit
