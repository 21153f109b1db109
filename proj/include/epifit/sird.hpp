#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

namespace epifit {

/// Per age-group rate triple driving the SIRD dynamics (all per year).
struct SirdParams {
    double beta = 0.0;  // transmission
    double gamma = 0.0; // recovery
    double mu = 0.0;    // disease mortality
};

/// Fractional SIRD state. s+i+r+d stays at 1 unless a clamp fired.
struct CompartmentState {
    double s = 0.0;
    double i = 0.0;
    double r = 0.0;
    double d = 0.0;
    bool clamped = false; // set when a max() clamp produced this state
};

/// Fractional flows realized by one annual step.
struct StepFlows {
    double new_inf = 0.0;
    double new_rec = 0.0;
    double new_death = 0.0;
};

/// Time-indexed evolution: states has one more entry than flows.
struct Trajectory {
    int start_year = 0;
    std::vector<CompartmentState> states; // length steps+1
    std::vector<StepFlows> flows;         // length steps

    int steps() const { return static_cast<int>(flows.size()); }
};

/// (s, i, r, d) = (0.97, 0.02, 0.01, 0).
CompartmentState default_init();

/// One annual update. Flows are beta*s*i, gamma*i, mu*i; s and i are
/// clamped at zero, and a clamp is flagged on the returned state.
std::pair<CompartmentState, StepFlows> discrete_step(const CompartmentState& state,
                                                     const SirdParams& params);

/// Iterates discrete_step. steps >= 1.
Trajectory simulate_trajectory(const CompartmentState& init, const SirdParams& params,
                               int steps, int start_year);

/// Basic reproduction number beta/(gamma+mu). Throws when gamma+mu == 0.
double r0(const SirdParams& params);

/// Columns: year,s,i,r,d,new_inf,new_rec,new_death,clamped.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

} // namespace epifit
