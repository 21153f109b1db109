#include "epifit/priors.hpp"

#include "epifit/age_group.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace epifit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_gamma_density(double x, double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0)
        throw std::domain_error("log_gamma_density: shape and rate must be positive");
    if (x <= 0.0) throw std::domain_error("log_gamma_density: x must be positive");
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
           rate * x;
}

double log_uniform_density(double x, const UniformPrior& prior) {
    if (prior.hi <= prior.lo)
        throw std::domain_error("log_uniform_density: bounds out of order");
    if (x < prior.lo || x > prior.hi) return kNegInf;
    return -std::log(prior.hi - prior.lo);
}

double log_prior(const std::vector<SirdParams>& per_age, const ReportingParams& reporting,
                 const PriorSpec& spec) {
    if (per_age.size() != static_cast<std::size_t>(kNumAgeGroups))
        throw std::invalid_argument("log_prior: need one SirdParams per age group");
    double total = 0.0;
    for (const auto& p : per_age) {
        if (p.beta <= 0.0 || p.gamma <= 0.0 || p.mu <= 0.0) return kNegInf;
        total += log_gamma_density(p.beta, spec.beta.shape, spec.beta.rate);
        total += log_gamma_density(p.gamma, spec.gamma.shape, spec.gamma.rate);
        total += log_gamma_density(p.mu, spec.mu.shape, spec.mu.rate);
    }
    total += log_uniform_density(reporting.rho_inc, spec.rho_inc);
    total += log_uniform_density(reporting.rho_prev, spec.rho_prev);
    total += log_uniform_density(reporting.rho_death, spec.rho_death);
    total += log_uniform_density(reporting.sigma_prev, spec.sigma_prev);
    return total;
}

PriorSpec load_prior_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open prior config: " + path);
    PriorSpec spec;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream parts(line);
        std::string name, eq, dist;
        if (!(parts >> name)) continue; // blank
        if (!(parts >> eq >> dist) || eq != "=")
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected '<name> = <dist> <a> <b>'");
        double a, b;
        if (!(parts >> a >> b))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected two numeric parameters");
        if (dist == "gamma") {
            GammaPrior g{a, b};
            if (a <= 0 || b <= 0)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": gamma parameters must be positive");
            if (name == "beta") spec.beta = g;
            else if (name == "gamma") spec.gamma = g;
            else if (name == "mu") spec.mu = g;
            else
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": '" + name + "' does not take a gamma prior");
        } else if (dist == "uniform") {
            UniformPrior u{a, b};
            if (b <= a)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": uniform bounds out of order");
            if (name == "rho_inc") spec.rho_inc = u;
            else if (name == "rho_prev") spec.rho_prev = u;
            else if (name == "rho_death") spec.rho_death = u;
            else if (name == "sigma_prev") spec.sigma_prev = u;
            else
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": '" + name + "' does not take a uniform prior");
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown distribution '" + dist + "'");
        }
    }
    return spec;
}

} // namespace epifit
