#include "epifit/sird.hpp"

#include "epifit/csv.hpp"

#include <ostream>
#include <stdexcept>

namespace epifit {

CompartmentState default_init() {
    return CompartmentState{0.97, 0.02, 0.01, 0.0, false};
}

std::pair<CompartmentState, StepFlows> discrete_step(const CompartmentState& state,
                                                     const SirdParams& params) {
    StepFlows flows;
    flows.new_inf = params.beta * state.s * state.i;
    flows.new_rec = params.gamma * state.i;
    flows.new_death = params.mu * state.i;

    CompartmentState next;
    const double s_raw = state.s - flows.new_inf;
    const double i_raw = state.i + flows.new_inf - flows.new_rec - flows.new_death;
    next.s = s_raw > 0.0 ? s_raw : 0.0;
    next.i = i_raw > 0.0 ? i_raw : 0.0;
    next.r = state.r + flows.new_rec;
    next.d = state.d + flows.new_death;
    next.clamped = (s_raw < 0.0) || (i_raw < 0.0);
    return {next, flows};
}

Trajectory simulate_trajectory(const CompartmentState& init, const SirdParams& params,
                               int steps, int start_year) {
    if (steps < 1) throw std::invalid_argument("simulate_trajectory: steps must be >= 1");
    Trajectory traj;
    traj.start_year = start_year;
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.flows.reserve(static_cast<std::size_t>(steps));
    traj.states.push_back(init);
    for (int t = 0; t < steps; ++t) {
        auto [next, flows] = discrete_step(traj.states.back(), params);
        traj.states.push_back(next);
        traj.flows.push_back(flows);
    }
    return traj;
}

double r0(const SirdParams& params) {
    const double denom = params.gamma + params.mu;
    if (denom == 0.0)
        throw std::domain_error("r0: gamma + mu must be positive");
    return params.beta / denom;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "year,s,i,r,d,new_inf,new_rec,new_death,clamped\n";
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
        const auto& st = traj.states[t];
        out << (traj.start_year + static_cast<int>(t)) << ',' << fmt_double(st.s) << ','
            << fmt_double(st.i) << ',' << fmt_double(st.r) << ',' << fmt_double(st.d);
        if (t < traj.flows.size()) {
            const auto& f = traj.flows[t];
            out << ',' << fmt_double(f.new_inf) << ',' << fmt_double(f.new_rec) << ','
                << fmt_double(f.new_death);
        } else {
            out << ",,,"; // final state has no outgoing flows
        }
        out << ',' << (st.clamped ? 1 : 0) << '\n';
    }
}

} // namespace epifit
