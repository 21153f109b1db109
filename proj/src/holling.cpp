#include "epifit/holling.hpp"

#include <cmath>
#include <stdexcept>

namespace epifit {

double holling_force_of_infection(const std::array<double, 3>& infected_fractions,
                                  const HollingMixing& mixing, AgeGroup target) {
    const int k = static_cast<int>(target);
    double lambda = 0.0;
    for (int kp = 0; kp < kNumAgeGroups; ++kp) {
        const double x = infected_fractions[kp];
        lambda += mixing.beta[k][kp] * x / (1.0 + mixing.alpha[k][kp] * x);
    }
    return lambda;
}

ContinuousDerivatives continuous_derivatives(const ContinuousState& state,
                                             const HollingMixing& mixing,
                                             const std::array<double, 3>& gammas,
                                             const std::array<double, 3>& mus) {
    std::array<double, 3> frac{};
    for (int k = 0; k < kNumAgeGroups; ++k) {
        const double n = state.living(k);
        if (n <= 0.0)
            throw std::domain_error("continuous_derivatives: living population of group " +
                                    std::string(to_string(static_cast<AgeGroup>(k))) +
                                    " is zero");
        frac[k] = state.I[k] / n;
    }
    ContinuousDerivatives deriv;
    for (int k = 0; k < kNumAgeGroups; ++k) {
        const double lambda =
            holling_force_of_infection(frac, mixing, static_cast<AgeGroup>(k));
        const double infection = lambda * state.S[k];
        const double recovery = gammas[k] * state.I[k];
        const double death = mus[k] * state.I[k];
        deriv.dS[k] = -infection;
        deriv.dI[k] = infection - recovery - death;
        deriv.dR[k] = recovery;
        deriv.dD[k] = death;
    }
    return deriv;
}

namespace {

ContinuousState axpy(const ContinuousState& base, double h, const ContinuousDerivatives& d) {
    ContinuousState out = base;
    for (int k = 0; k < kNumAgeGroups; ++k) {
        out.S[k] = base.S[k] + h * d.dS[k];
        out.I[k] = base.I[k] + h * d.dI[k];
        out.R[k] = base.R[k] + h * d.dR[k];
        out.D[k] = base.D[k] + h * d.dD[k];
    }
    return out;
}

// One RK4 step; clamps negative compartments and reports it.
ContinuousState rk4_step(const ContinuousState& y, const HollingMixing& mixing,
                         const std::array<double, 3>& gammas,
                         const std::array<double, 3>& mus, double h, bool& clamped) {
    const auto k1 = continuous_derivatives(y, mixing, gammas, mus);
    const auto k2 = continuous_derivatives(axpy(y, h / 2.0, k1), mixing, gammas, mus);
    const auto k3 = continuous_derivatives(axpy(y, h / 2.0, k2), mixing, gammas, mus);
    const auto k4 = continuous_derivatives(axpy(y, h, k3), mixing, gammas, mus);
    ContinuousState next = y;
    for (int k = 0; k < kNumAgeGroups; ++k) {
        next.S[k] = y.S[k] + h / 6.0 * (k1.dS[k] + 2.0 * k2.dS[k] + 2.0 * k3.dS[k] + k4.dS[k]);
        next.I[k] = y.I[k] + h / 6.0 * (k1.dI[k] + 2.0 * k2.dI[k] + 2.0 * k3.dI[k] + k4.dI[k]);
        next.R[k] = y.R[k] + h / 6.0 * (k1.dR[k] + 2.0 * k2.dR[k] + 2.0 * k3.dR[k] + k4.dR[k]);
        next.D[k] = y.D[k] + h / 6.0 * (k1.dD[k] + 2.0 * k2.dD[k] + 2.0 * k3.dD[k] + k4.dD[k]);
        for (double* v : {&next.S[k], &next.I[k], &next.R[k], &next.D[k]}) {
            if (*v < 0.0) {
                *v = 0.0;
                clamped = true;
            }
        }
    }
    return next;
}

} // namespace

ContinuousSeries integrate_continuous(const ContinuousState& state0,
                                      const HollingMixing& mixing,
                                      const std::array<double, 3>& gammas,
                                      const std::array<double, 3>& mus,
                                      double t_span, double dt) {
    if (dt <= 0.0 || t_span <= 0.0)
        throw std::invalid_argument("integrate_continuous: dt and t_span must be positive");
    if (dt > t_span)
        throw std::invalid_argument("integrate_continuous: dt exceeds t_span");

    ContinuousSeries series;
    series.times.push_back(0.0);
    series.states.push_back(state0);

    const long long n_whole = static_cast<long long>(std::floor(t_span / dt + 1e-9));
    double t = 0.0;
    for (long long step = 0; step < n_whole; ++step) {
        series.states.push_back(
            rk4_step(series.states.back(), mixing, gammas, mus, dt, series.clamped));
        t = dt * static_cast<double>(step + 1);
        series.times.push_back(t);
    }
    const double rem = t_span - t;
    if (rem > 1e-12 * t_span) {
        series.states.push_back(
            rk4_step(series.states.back(), mixing, gammas, mus, rem, series.clamped));
        series.times.push_back(t_span);
    }
    return series;
}

} // namespace epifit
