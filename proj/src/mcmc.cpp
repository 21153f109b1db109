#include "epifit/mcmc.hpp"

#include "epifit/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace epifit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kChainStream = 0x636861696eULL; // "chain"
constexpr std::uint64_t kInitStream = 0x696e6974ULL;    // "init"

double softplus(double z) {
    if (z > 30.0) return z;
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

double sigmoid(double y) {
    if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
    const double e = std::exp(y);
    return e / (1.0 + e);
}

} // namespace

void McmcConfig::validate() const {
    if (n_chains < 1 || adapt_iters < 1 || burnin_iters < 1 || sample_iters < 1 || thin < 1)
        throw std::invalid_argument("McmcConfig: all counts must be >= 1");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
        throw std::invalid_argument("McmcConfig: target_acceptance must lie in (0, 1)");
}

McmcConfig McmcConfig::fast() {
    McmcConfig cfg;
    cfg.n_chains = 2;
    cfg.adapt_iters = 500;
    cfg.burnin_iters = 500;
    cfg.sample_iters = 2000;
    cfg.thin = 1;
    return cfg;
}

double Transform::to_unconstrained(double x) const {
    switch (kind) {
        case Kind::identity: return x;
        case Kind::log_scale: return std::log(x);
        case Kind::logit: {
            const double p = (x - lo) / (hi - lo);
            return std::log(p) - std::log1p(-p);
        }
    }
    return x;
}

double Transform::to_constrained(double y) const {
    switch (kind) {
        case Kind::identity: return y;
        case Kind::log_scale: return std::exp(y);
        case Kind::logit: return lo + (hi - lo) * sigmoid(y);
    }
    return y;
}

double Transform::log_jacobian(double y) const {
    switch (kind) {
        case Kind::identity: return 0.0;
        case Kind::log_scale: return y;
        case Kind::logit:
            return std::log(hi - lo) - softplus(y) - softplus(-y);
    }
    return 0.0;
}

namespace {

// In-place lower Cholesky; false when the matrix is not positive definite.
bool cholesky_lower(std::vector<double>& a, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
        for (int j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
    }
    return true;
}

// Scaled empirical covariance (2.38^2/p) of recorded sweep states, with a
// ridge on the diagonal; empty when degenerate.
std::vector<double> proposal_cholesky(const std::vector<double>& hist, int p) {
    const int m = static_cast<int>(hist.size()) / p;
    if (m < 2 * p) return {};
    std::vector<double> mean(p, 0.0), cov(static_cast<std::size_t>(p) * p, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < p; ++j) mean[j] += hist[static_cast<std::size_t>(i) * p + j] / m;
    for (int i = 0; i < m; ++i)
        for (int a = 0; a < p; ++a)
            for (int b = 0; b <= a; ++b)
                cov[static_cast<std::size_t>(a) * p + b] +=
                    (hist[static_cast<std::size_t>(i) * p + a] - mean[a]) *
                    (hist[static_cast<std::size_t>(i) * p + b] - mean[b]) / (m - 1);
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b)
            cov[static_cast<std::size_t>(a) * p + b] = cov[static_cast<std::size_t>(b) * p + a];
    double trace = 0.0;
    for (int j = 0; j < p; ++j) trace += cov[static_cast<std::size_t>(j) * p + j];
    if (trace <= 0.0) return {};
    const double scale = 5.6644 / p; // 2.38^2 / p
    for (auto& v : cov) v *= scale;
    for (int j = 0; j < p; ++j)
        cov[static_cast<std::size_t>(j) * p + j] += 1e-12 + 1e-6 * scale * trace / p;
    if (!cholesky_lower(cov, p)) return {};
    return cov;
}

} // namespace

namespace {

// One tempered replica: state, component scales, covariance history.
struct Replica {
    std::vector<double> x, y;
    double lp = 0.0; // untempered log target
    std::vector<double> log_scales;
    double log_rescale_scale = std::log(0.3);
    std::vector<double> history; // recorded y sweeps for the covariance
    std::vector<double> chol;    // frozen proposal Cholesky (may stay empty)
};

// Applies the rescaling move x -> phi_c(x). phi_{1/c} inverts phi_c and
// |J| = c^(#pairs - 1). Returns false when a rescaled rate leaves the
// positive orthant.
bool apply_rescale(const RescaleMove& move, const std::vector<double>& x, double c,
                   std::vector<double>& out) {
    out = x;
    for (const auto& [g, m] : move.gamma_mu_pairs) {
        const double mu = x[m];
        out[m] = c * mu;
        out[g] = x[g] + mu - c * mu;
        if (out[g] <= 0.0 || out[m] <= 0.0) return false;
    }
    if (move.rho_index >= 0) out[move.rho_index] = x[move.rho_index] / c;
    return true;
}

} // namespace

ChainTrace run_chain(const LogDensity& log_target, const std::vector<double>& init,
                     const std::vector<ParamSpec>& params, const McmcConfig& config,
                     int chain_index, const RescaleMove* rescale) {
    config.validate();
    const int p = static_cast<int>(params.size());
    if (static_cast<int>(init.size()) != p)
        throw std::invalid_argument("run_chain: init size does not match parameter count");

    const double init_lp = log_target(init);
    if (!std::isfinite(init_lp))
        throw std::invalid_argument("run_chain: initial point has non-finite log density");

    const std::uint64_t chain_seed =
        mix_seed(config.seed, kChainStream + static_cast<std::uint64_t>(chain_index));
    Rng rng(chain_seed);

    // Tempering ladder. Rung 0 is the posterior; hotter rungs flatten the
    // clamp-induced ridges so the cold rung can traverse them via swaps.
    constexpr int kRungs = 16;
    constexpr double kTempRatio = 1.4;
    std::array<double, kRungs> inv_temp;
    for (int k = 0; k < kRungs; ++k) inv_temp[k] = 1.0 / std::pow(kTempRatio, k);

    std::array<Replica, kRungs> rungs;
    for (auto& r : rungs) {
        r.x = init;
        r.lp = init_lp;
        r.y.resize(p);
        for (int j = 0; j < p; ++j) r.y[j] = params[j].transform.to_unconstrained(init[j]);
        r.log_scales.assign(p, std::log(0.05));
    }

    constexpr double kAdaptGain = 2.0;
    const int total_iters = config.adapt_iters + config.burnin_iters + config.sample_iters;
    const int n_rows = config.sample_iters / config.thin;

    ChainTrace trace;
    trace.n_params = p;
    trace.seed = chain_seed;
    for (const auto& ps : params) trace.names.push_back(ps.name);
    trace.draws.reserve(static_cast<std::size_t>(n_rows) * p);

    std::vector<double> y_prop(p), x_prop(p), eps(p);
    long long accepted = 0, proposed = 0; // cold-rung moves during sampling

    for (int it = 0; it < total_iters; ++it) {
        const bool in_adapt = it < config.adapt_iters;
        const bool in_sampling = it >= config.adapt_iters + config.burnin_iters;

        for (int k = 0; k < kRungs; ++k) {
            Replica& r = rungs[k];
            const double beta_t = inv_temp[k];
            for (int j = 0; j < p; ++j) {
                const double y_old = r.y[j];
                const double x_old = r.x[j];
                r.y[j] = y_old + std::exp(r.log_scales[j]) * rng.normal();
                r.x[j] = params[j].transform.to_constrained(r.y[j]);
                const double prop_lp = log_target(r.x);
                double log_ratio = beta_t * (prop_lp - r.lp) +
                                   params[j].transform.log_jacobian(r.y[j]) -
                                   params[j].transform.log_jacobian(y_old);
                if (std::isnan(log_ratio)) log_ratio = kNegInf;
                const double alpha = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
                const bool accept = rng.uniform() < alpha;
                if (accept) {
                    r.lp = prop_lp;
                } else {
                    r.y[j] = y_old;
                    r.x[j] = x_old;
                }
                if (in_adapt) {
                    const double gain =
                        kAdaptGain / std::pow(static_cast<double>(it + 1), 0.6);
                    r.log_scales[j] += gain * (alpha - config.target_acceptance);
                }
                if (in_sampling && k == 0) {
                    ++proposed;
                    if (accept) ++accepted;
                }
            }

            // Joint moves from the frozen covariance.
            if (!in_adapt && !r.chol.empty()) {
                for (int rep = 0; rep < 3; ++rep) {
                    for (int j = 0; j < p; ++j) eps[j] = rng.normal();
                    double jac_delta = 0.0;
                    for (int i2 = 0; i2 < p; ++i2) {
                        double step = 0.0;
                        for (int kk = 0; kk <= i2; ++kk)
                            step += r.chol[static_cast<std::size_t>(i2) * p + kk] * eps[kk];
                        y_prop[i2] = r.y[i2] + step;
                        x_prop[i2] = params[i2].transform.to_constrained(y_prop[i2]);
                        jac_delta += params[i2].transform.log_jacobian(y_prop[i2]) -
                                     params[i2].transform.log_jacobian(r.y[i2]);
                    }
                    const double prop_lp = log_target(x_prop);
                    double log_ratio = beta_t * (prop_lp - r.lp) + jac_delta;
                    if (std::isnan(log_ratio)) log_ratio = kNegInf;
                    const bool accept =
                        rng.uniform() < (log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio));
                    if (accept) {
                        r.y = y_prop;
                        r.x = x_prop;
                        r.lp = prop_lp;
                    }
                    if (in_sampling && k == 0) {
                        ++proposed;
                        if (accept) ++accepted;
                    }
                }
            }

            // Exact rescaling move along the mortality/reporting ridge.
            if (rescale && !rescale->gamma_mu_pairs.empty()) {
                const double log_c = std::exp(r.log_rescale_scale) * rng.normal();
                const double u = rng.uniform();
                double alpha = 0.0;
                if (apply_rescale(*rescale, r.x, std::exp(log_c), x_prop)) {
                    const double prop_lp = log_target(x_prop);
                    const double jac =
                        (static_cast<double>(rescale->gamma_mu_pairs.size()) - 1.0) * log_c;
                    double log_ratio = beta_t * (prop_lp - r.lp) + jac;
                    if (std::isnan(log_ratio)) log_ratio = kNegInf;
                    alpha = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
                    if (u < alpha) {
                        r.x = x_prop;
                        for (const auto& [g, m] : rescale->gamma_mu_pairs) {
                            r.y[g] = params[g].transform.to_unconstrained(r.x[g]);
                            r.y[m] = params[m].transform.to_unconstrained(r.x[m]);
                        }
                        if (rescale->rho_index >= 0)
                            r.y[rescale->rho_index] =
                                params[rescale->rho_index].transform.to_unconstrained(
                                    r.x[rescale->rho_index]);
                        r.lp = prop_lp;
                        if (in_sampling && k == 0) ++accepted;
                    }
                }
                if (in_sampling && k == 0) ++proposed;
                if (in_adapt) {
                    const double gain =
                        kAdaptGain / std::pow(static_cast<double>(it + 1), 0.6);
                    r.log_rescale_scale += gain * (alpha - config.target_acceptance);
                }
            }

            if (it >= config.adapt_iters / 2 && !in_sampling)
                r.history.insert(r.history.end(), r.y.begin(), r.y.end());
        }

        if (it == config.adapt_iters - 1) {
            for (auto& r : rungs) {
                auto learned = proposal_cholesky(r.history, p);
                if (!learned.empty()) r.chol = std::move(learned);
                r.history.clear(); // burn-in window recorded separately
            }
        }
        if (it == config.adapt_iters + config.burnin_iters - 1) {
            // Refresh from the burn-in window, pooled with the next-hotter
            // rung so the proposal spans the whole ridge, then freeze.
            for (int k = 0; k < kRungs; ++k) {
                std::vector<double> pooled = rungs[k].history;
                if (k + 1 < kRungs)
                    pooled.insert(pooled.end(), rungs[k + 1].history.begin(),
                                  rungs[k + 1].history.end());
                auto learned = proposal_cholesky(pooled, p);
                if (!learned.empty()) rungs[k].chol = std::move(learned);
            }
        }

        // Replica swaps between adjacent rungs, both parities per sweep.
        for (int parity = 0; parity < 2; ++parity) {
            for (int k = parity; k + 1 < kRungs; k += 2) {
                const double log_ratio =
                    (inv_temp[k] - inv_temp[k + 1]) * (rungs[k + 1].lp - rungs[k].lp);
                if (std::log(std::max(rng.uniform(), 1e-300)) < log_ratio) {
                    std::swap(rungs[k].x, rungs[k + 1].x);
                    std::swap(rungs[k].y, rungs[k + 1].y);
                    std::swap(rungs[k].lp, rungs[k + 1].lp);
                }
            }
        }

        if (in_sampling) {
            const int s = it - (config.adapt_iters + config.burnin_iters);
            if ((s + 1) % config.thin == 0 && trace.rows() < n_rows)
                trace.draws.insert(trace.draws.end(), rungs[0].x.begin(), rungs[0].x.end());
        }
    }
    trace.acceptance_rate =
        proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
    return trace;
}

std::vector<double> init_from_prior(const PriorSpec& spec, std::uint64_t seed) {
    Rng rng(mix_seed(seed, kInitStream));
    std::vector<double> theta;
    theta.reserve(ClusterPosterior::kNumParams);
    for (int a = 0; a < kNumAgeGroups; ++a) {
        theta.push_back(rng.gamma(spec.beta.shape, spec.beta.rate));
        theta.push_back(rng.gamma(spec.gamma.shape, spec.gamma.rate));
        theta.push_back(rng.gamma(spec.mu.shape, spec.mu.rate));
    }
    theta.push_back(rng.uniform(spec.rho_inc.lo, spec.rho_inc.hi));
    theta.push_back(rng.uniform(spec.rho_prev.lo, spec.rho_prev.hi));
    theta.push_back(rng.uniform(spec.rho_death.lo, spec.rho_death.hi));
    theta.push_back(rng.uniform(spec.sigma_prev.lo, spec.sigma_prev.hi));
    return theta;
}

namespace {

// Deterministic coordinate descent over the transformed-space density
// (target plus Jacobian), multi-scale steps per coordinate plus two
// composite directions that follow the reporting-factor ridges.
std::vector<double> coordinate_descent(const LogDensity& target, std::vector<double> x,
                                       const std::vector<ParamSpec>& params,
                                       int max_passes) {
    const int p = static_cast<int>(params.size());
    std::vector<double> y(p);
    for (int j = 0; j < p; ++j) y[j] = params[j].transform.to_unconstrained(x[j]);
    auto eval = [&](const std::vector<double>& yy) {
        std::vector<double> xx(p);
        double jac = 0.0;
        for (int j = 0; j < p; ++j) {
            xx[j] = params[j].transform.to_constrained(yy[j]);
            jac += params[j].transform.log_jacobian(yy[j]);
        }
        const double lp = target(xx);
        return std::isnan(lp) ? kNegInf : lp + jac;
    };
    double cur = eval(y);
    static const double kSteps[] = {2.0, 1.0, 0.5, 0.2, 0.1, 0.05,
                                    0.02, 0.01, 0.005, 0.002, 0.001};
    std::vector<std::vector<int>> moves;
    for (int j = 0; j < p; ++j) moves.push_back({j});
    if (p == ClusterPosterior::kNumParams) {
        moves.push_back({2, 5, 8, -11 - 1}); // mu up, rho_death down
        moves.push_back({0, 3, 6, -9 - 1});  // beta up, rho_inc down
    }
    for (int pass = 0; pass < max_passes; ++pass) {
        bool improved = false;
        for (const auto& move : moves) {
            for (double step : kSteps) {
                for (double sign : {1.0, -1.0}) {
                    auto yy = y;
                    for (int enc : move) {
                        const int j = enc >= 0 ? enc : -enc - 1;
                        yy[j] += (enc >= 0 ? 1.0 : -1.0) * sign * step;
                    }
                    const double lp = eval(yy);
                    if (lp > cur) {
                        cur = lp;
                        y = std::move(yy);
                        improved = true;
                    }
                }
            }
        }
        if (!improved) break;
    }
    for (int j = 0; j < p; ++j) x[j] = params[j].transform.to_constrained(y[j]);
    return x;
}

// Per-parameter series extracted per chain; shared by gelman_rubin and
// the derived-quantity summaries.
double psrf(const std::vector<std::vector<double>>& chains) {
    const int m = static_cast<int>(chains.size());
    const int n = static_cast<int>(chains[0].size());
    std::vector<double> means(m), vars(m);
    for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (double v : chains[c]) s += v;
        means[c] = s / n;
        double ss = 0.0;
        for (double v : chains[c]) ss += (v - means[c]) * (v - means[c]);
        vars[c] = ss / (n - 1);
    }
    double w = 0.0;
    for (double v : vars) w += v;
    w /= m;
    double grand = 0.0;
    for (double v : means) grand += v;
    grand /= m;
    double bvar = 0.0;
    for (double v : means) bvar += (v - grand) * (v - grand);
    bvar /= (m - 1);
    const double b = n * bvar;
    if (w == 0.0) {
        if (b == 0.0) return 1.0; // every draw identical
        throw std::domain_error("gelman_rubin: zero within-chain variance with "
                                "differing chain means");
    }
    const double n_d = static_cast<double>(n);
    return std::sqrt(((n_d - 1.0) / n_d * w + b / n_d) / w);
}

} // namespace

std::vector<double> gelman_rubin(const std::vector<ChainTrace>& traces) {
    if (traces.size() < 2)
        throw std::invalid_argument("gelman_rubin: need at least 2 chains");
    const int n = traces[0].rows();
    const int p = traces[0].n_params;
    if (n < 2) throw std::invalid_argument("gelman_rubin: need at least 2 retained draws");
    for (const auto& t : traces)
        if (t.rows() != n || t.n_params != p)
            throw std::invalid_argument("gelman_rubin: chains must have equal shapes");

    std::vector<double> out(p);
    for (int j = 0; j < p; ++j) {
        std::vector<std::vector<double>> series(traces.size());
        for (std::size_t c = 0; c < traces.size(); ++c) {
            series[c].resize(n);
            for (int i = 0; i < n; ++i) series[c][i] = traces[c].at(i, j);
        }
        out[j] = psrf(series);
    }
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

const SummaryRow& PosteriorSummary::row(const std::string& name) const {
    for (const auto& r : rows)
        if (r.name == name) return r;
    throw std::out_of_range("PosteriorSummary: no row named " + name);
}

namespace {

SummaryRow summarize_series(const std::string& name,
                            const std::vector<std::vector<double>>& per_chain) {
    SummaryRow row;
    row.name = name;
    std::vector<double> pooled;
    for (const auto& c : per_chain) pooled.insert(pooled.end(), c.begin(), c.end());
    double s = 0.0;
    for (double v : pooled) s += v;
    row.mean = s / static_cast<double>(pooled.size());
    row.median = quantile(pooled, 0.5);
    row.q025 = quantile(pooled, 0.025);
    row.q975 = quantile(pooled, 0.975);
    if (per_chain.size() >= 2 && per_chain[0].size() >= 2) {
        // reported value floored at 1 (B = 0 pushes the raw factor under 1)
        row.r_hat = std::max(1.0, psrf(per_chain));
    } else {
        row.r_hat = kNaN;
    }
    return row;
}

} // namespace

PosteriorSummary summarize(const std::vector<ChainTrace>& traces) {
    if (traces.empty() || traces[0].rows() == 0)
        throw std::invalid_argument("summarize: no retained draws");
    const int p = traces[0].n_params;
    const int n = traces[0].rows();
    for (const auto& t : traces)
        if (t.n_params != p || t.rows() != n)
            throw std::invalid_argument("summarize: chains must have equal shapes");

    auto series_of = [&](int j) {
        std::vector<std::vector<double>> per_chain(traces.size());
        for (std::size_t c = 0; c < traces.size(); ++c) {
            per_chain[c].resize(n);
            for (int i = 0; i < n; ++i) per_chain[c][i] = traces[c].at(i, j);
        }
        return per_chain;
    };
    auto index_of = [&](const std::string& name) {
        const auto& names = traces[0].names;
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return static_cast<int>(j);
        return -1;
    };

    PosteriorSummary summary;
    for (int j = 0; j < p; ++j)
        summary.rows.push_back(summarize_series(traces[0].names[j], series_of(j)));

    // Derived rows, computed per draw then summarized.
    for (AgeGroup age : kAgeGroups) {
        const std::string suffix = std::string("_") + to_string(age);
        const int jb = index_of("beta" + suffix);
        const int jg = index_of("gamma" + suffix);
        const int jm = index_of("mu" + suffix);
        if (jb < 0 || jg < 0 || jm < 0) continue;
        std::vector<std::vector<double>> per_chain(traces.size());
        for (std::size_t c = 0; c < traces.size(); ++c) {
            per_chain[c].resize(n);
            for (int i = 0; i < n; ++i)
                per_chain[c][i] =
                    traces[c].at(i, jb) / (traces[c].at(i, jg) + traces[c].at(i, jm));
        }
        summary.rows.push_back(summarize_series("r0" + suffix, per_chain));
    }
    const int js = index_of("sigma_prev");
    if (js >= 0) {
        std::vector<std::vector<double>> per_chain(traces.size());
        for (std::size_t c = 0; c < traces.size(); ++c) {
            per_chain[c].resize(n);
            for (int i = 0; i < n; ++i) {
                const double s = traces[c].at(i, js);
                per_chain[c][i] = 1.0 / (s * s);
            }
        }
        summary.rows.push_back(summarize_series("tau_prev", per_chain));
    }

    summary.converged = true;
    summary.max_r_hat = 0.0;
    for (const auto& row : summary.rows) {
        if (std::isnan(row.r_hat)) continue;
        summary.max_r_hat = std::max(summary.max_r_hat, row.r_hat);
        if (row.r_hat >= 1.1) summary.converged = false;
    }
    return summary;
}

FitResult fit_cluster(const ObservationPanel& cluster_panel, const PriorSpec& spec,
                      const McmcConfig& config) {
    config.validate();
    if (cluster_panel.n_regions() == 0)
        throw std::invalid_argument("fit_cluster: panel must be nonempty");

    const ClusterPosterior posterior(cluster_panel, spec);
    std::vector<ParamSpec> params;
    {
        const auto names = ClusterPosterior::param_names();
        for (int a = 0; a < kNumAgeGroups; ++a)
            for (int k = 0; k < 3; ++k)
                params.push_back({names[3 * a + k], Transform::positive()});
        params.push_back({names[9], Transform::interval(spec.rho_inc.lo, spec.rho_inc.hi)});
        params.push_back({names[10], Transform::interval(spec.rho_prev.lo, spec.rho_prev.hi)});
        params.push_back(
            {names[11], Transform::interval(spec.rho_death.lo, spec.rho_death.hi)});
        params.push_back(
            {names[12], Transform::interval(spec.sigma_prev.lo, spec.sigma_prev.hi)});
    }

    const LogDensity target = [&posterior](const std::vector<double>& t) {
        return posterior(t);
    };

    // The posterior of the annual-step model is a needle with clamp-induced
    // plateaus; prior draws land far outside it. Start every chain from a
    // deterministic multi-start mode search (coordinate descent in the
    // unconstrained space), then jitter per chain.
    std::vector<std::pair<double, std::vector<double>>> candidates;
    for (int attempt = 0; attempt < 1000 && candidates.size() < 256; ++attempt) {
        auto theta =
            init_from_prior(spec, mix_seed(config.seed, kInitStream + attempt));
        const double lp = target(theta);
        if (std::isfinite(lp)) candidates.emplace_back(lp, std::move(theta));
    }
    if (candidates.empty())
        throw SamplerInitError("fit_cluster: posterior non-finite for 1000 "
                               "consecutive prior draws during initialization");
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<double> mode_point = candidates.front().second;
    double mode_lp = kNegInf;
    const int n_starts = std::min<std::size_t>(12, candidates.size());
    for (int s = 0; s < n_starts; ++s) {
        auto polished = coordinate_descent(target, candidates[s].second, params, 40);
        const double lp = target(polished);
        if (lp > mode_lp) {
            mode_lp = lp;
            mode_point = std::move(polished);
        }
    }

    std::vector<std::vector<double>> inits(config.n_chains, mode_point);
    for (int c = 0; c < config.n_chains; ++c) {
        Rng jitter(mix_seed(config.seed, kInitStream + 7777ULL + c));
        auto& theta = inits[c];
        for (int j = 0; j < ClusterPosterior::kNumParams; ++j) {
            const double yj =
                params[j].transform.to_unconstrained(theta[j]) + 0.003 * jitter.normal();
            theta[j] = params[j].transform.to_constrained(yj);
        }
        if (!std::isfinite(target(theta))) theta = mode_point;
    }

    RescaleMove rescale;
    rescale.gamma_mu_pairs = {{1, 2}, {4, 5}, {7, 8}};
    rescale.rho_index = 11;

    std::vector<ChainTrace> traces(config.n_chains);
#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < config.n_chains; ++c) {
        traces[c] = run_chain(target, inits[c], params, config, c, &rescale);
    }

    FitResult result;
    result.summary = summarize(traces);
    result.converged = result.summary.converged && config.n_chains >= 2;
    result.traces = std::move(traces);
    return result;
}

} // namespace epifit
