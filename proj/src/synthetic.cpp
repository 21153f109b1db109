#include "epifit/synthetic.hpp"

#include "epifit/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace epifit {

std::vector<SirdParams> true_params_table() {
    // index = (cluster-1)*3 + age, ages juvenile/adult/old
    return {
        {7.5, 5.5, 0.5},   // cluster 1 juvenile
        {6.5, 5.5, 0.1},   // cluster 1 adult
        {5.5, 3.1, 0.8},   // cluster 1 old
        {13.0, 9.1, 1.5},  // cluster 2 juvenile
        {2.4, 0.6, 0.005}, // cluster 2 adult
        {13.0, 8.05, 2.6}, // cluster 2 old
        {8.9, 7.7, 0.5},   // cluster 3 juvenile
        {4.5, 2.9, 0.03},  // cluster 3 adult
        {6.6, 5.5, 0.09},  // cluster 3 old
    };
}

namespace {

std::vector<int> random_assignment(int n_states, int n_clusters, Rng& rng) {
    // One state per cluster guaranteed, remainder uniform, then shuffled.
    std::vector<int> labels;
    labels.reserve(n_states);
    for (int c = 1; c <= n_clusters; ++c) labels.push_back(c);
    for (int s = n_clusters; s < n_states; ++s)
        labels.push_back(1 + static_cast<int>(rng.uniform_index(n_clusters)));
    for (int i = n_states - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_index(i + 1));
        std::swap(labels[i], labels[j]);
    }
    return labels;
}

} // namespace

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_states < 1 || spec.t_years < 1)
        throw std::invalid_argument("generate_synthetic: need n_states, t_years >= 1");
    if (spec.n_clusters < 1 || spec.n_clusters > spec.n_states)
        throw std::invalid_argument("generate_synthetic: n_clusters must be in [1, n_states]");

    std::vector<SirdParams> truth =
        spec.true_params.empty() ? true_params_table() : spec.true_params;
    if (static_cast<int>(truth.size()) != spec.n_clusters * kNumAgeGroups)
        throw std::invalid_argument("generate_synthetic: true_params must have one row per "
                                    "(cluster, age-group)");

    Rng rng(mix_seed(spec.seed, 0x73796e7468ULL)); // stream tag: "synth"

    std::vector<int> labels = spec.cluster_assignment;
    if (labels.empty()) {
        labels = random_assignment(spec.n_states, spec.n_clusters, rng);
    } else {
        if (static_cast<int>(labels.size()) != spec.n_states)
            throw std::invalid_argument("generate_synthetic: assignment length mismatch");
        for (int l : labels)
            if (l < 1 || l > spec.n_clusters)
                throw std::invalid_argument("generate_synthetic: label out of range");
    }

    // One noiseless trajectory per (cluster, age); states in a cluster share it.
    std::vector<Trajectory> cluster_traj(truth.size());
    for (int c = 0; c < spec.n_clusters; ++c)
        for (int a = 0; a < kNumAgeGroups; ++a)
            cluster_traj[c * kNumAgeGroups + a] = simulate_trajectory(
                default_init(), truth[c * kNumAgeGroups + a], spec.t_years, spec.start_year);

    std::vector<std::string> names;
    names.reserve(spec.n_states);
    for (int s = 0; s < spec.n_states; ++s) names.push_back("state_" + std::to_string(s + 1));

    ObservationPanel panel(names, spec.start_year, spec.t_years);
    for (int s = 0; s < spec.n_states; ++s) {
        const int c = labels[s] - 1;
        for (int a = 0; a < kNumAgeGroups; ++a) {
            const Trajectory& traj = cluster_traj[c * kNumAgeGroups + a];
            for (int t = 0; t < spec.t_years; ++t) {
                const double inc_mean = traj.flows[t].new_inf * 100000.0;
                const double prev_mean = traj.states[t].i;
                const double death_mean = spec.literal_death_noise
                                              ? traj.states[t + 1].d
                                              : traj.flows[t].new_death * 100000.0;
                const double y_inc = static_cast<double>(rng.poisson(inc_mean));
                const double y_prev = std::max(0.0, rng.normal(prev_mean, 0.01));
                const double y_death = static_cast<double>(rng.poisson(death_mean));
                panel.set_cell(s, static_cast<AgeGroup>(a), t, y_inc, y_prev, y_death);
            }
        }
    }
    panel.set_cluster_of_region(labels);
    return SyntheticResult{std::move(panel), std::move(labels), std::move(truth)};
}

} // namespace epifit
