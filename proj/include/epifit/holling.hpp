#pragma once

#include "epifit/age_group.hpp"

#include <array>
#include <vector>

namespace epifit {

/// 3x3 transmission intensities and saturation constants, indexed
/// [target][source] by AgeGroup.
struct HollingMixing {
    std::array<std::array<double, 3>, 3> beta{};  // beta_kk'
    std::array<std::array<double, 3>, 3> alpha{}; // alpha_kk'
};

/// Count-valued SIRD state for the continuous system.
struct ContinuousState {
    std::array<double, 3> S{};
    std::array<double, 3> I{};
    std::array<double, 3> R{};
    std::array<double, 3> D{};

    double living(int k) const { return S[k] + I[k] + R[k]; }
};

struct ContinuousDerivatives {
    std::array<double, 3> dS{};
    std::array<double, 3> dI{};
    std::array<double, 3> dR{};
    std::array<double, 3> dD{};
};

/// Saturating force of infection on the target group:
/// sum over sources of beta * x / (1 + alpha * x) with x = I/N.
double holling_force_of_infection(const std::array<double, 3>& infected_fractions,
                                  const HollingMixing& mixing, AgeGroup target);

/// Full system right-hand side. Throws when some living population is zero.
ContinuousDerivatives continuous_derivatives(const ContinuousState& state,
                                             const HollingMixing& mixing,
                                             const std::array<double, 3>& gammas,
                                             const std::array<double, 3>& mus);

struct ContinuousSeries {
    std::vector<double> times;
    std::vector<ContinuousState> states;
    bool clamped = false; // some compartment went negative and was zeroed
};

/// Classical fixed-step RK4 over [0, t_span]. A trailing partial step
/// covers any remainder of t_span not divisible by dt.
ContinuousSeries integrate_continuous(const ContinuousState& state0,
                                      const HollingMixing& mixing,
                                      const std::array<double, 3>& gammas,
                                      const std::array<double, 3>& mus,
                                      double t_span, double dt);

} // namespace epifit
