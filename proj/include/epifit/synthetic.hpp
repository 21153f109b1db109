#pragma once

#include "epifit/panel.hpp"
#include "epifit/sird.hpp"

#include <cstdint>
#include <vector>

namespace epifit {

/// Configuration of the built-in simulation study generator.
struct SyntheticSpec {
    int n_states = 10;
    int t_years = 32;
    int n_clusters = 3;
    /// Per (cluster, age-group), cluster-major: index = cluster*3 + age.
    /// Empty means the default truth table.
    std::vector<SirdParams> true_params;
    std::uint64_t seed = 0;
    /// Optional explicit 1-based labels per state; empty means a seeded
    /// random assignment with every cluster nonempty.
    std::vector<int> cluster_assignment;
    /// Literal reading of the death noise: Poisson on the cumulative
    /// death fraction instead of the per-step flow scaled to counts.
    bool literal_death_noise = false;
    int start_year = 1990;
};

/// The 9 true (cluster, age-group) rate triples of the simulation study,
/// cluster-major (cluster 1 juvenile/adult/old, then cluster 2, ...).
std::vector<SirdParams> true_params_table();

struct SyntheticResult {
    ObservationPanel panel;
    std::vector<int> true_labels; // 1-based, one per state
    std::vector<SirdParams> true_params;
};

/// Deterministic function of the spec (seed included): simulates each
/// state's trajectories from its cluster's parameters and adds
/// measurement noise: Poisson counts per 100k on incidence and deaths,
/// Normal(prev, 0.01^2) clamped at 0 on prevalence.
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

} // namespace epifit
