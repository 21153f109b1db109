// Compares the OpenMP kernels against their serial references:
// panel log-likelihood, k-means restarts, and per-cluster chain runs.

#include "epifit/kmeans.hpp"
#include "epifit/likelihood.hpp"
#include "epifit/mcmc.hpp"
#include "epifit/rng.hpp"
#include "epifit/synthetic.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

using namespace epifit;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int threads_in_use() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-24s serial %8.4f s   parallel %8.4f s   speedup %5.2fx   %s\n", name,
                serial_s, parallel_s, parallel_s > 0 ? serial_s / parallel_s : 0.0,
                identical ? "results identical" : "RESULTS DIFFER");
}

} // namespace

int main(int argc, char** argv) {
    int regions = 30, years = 32, evals = 2000, restarts = 64;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--regions")) regions = std::atoi(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--years")) years = std::atoi(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--evals")) evals = std::atoi(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--restarts")) restarts = std::atoi(argv[i + 1]);
    }
    std::printf("threads=%d regions=%d years=%d evals=%d restarts=%d\n", threads_in_use(),
                regions, years, evals, restarts);

    SyntheticSpec spec;
    spec.n_states = regions;
    spec.t_years = years;
    spec.seed = 7;
    const auto synth = generate_synthetic(spec);

    // --- likelihood ---
    {
        std::vector<std::array<Trajectory, 3>> trajs(synth.panel.n_regions());
        for (int r = 0; r < synth.panel.n_regions(); ++r) {
            const int c = synth.true_labels[r] - 1;
            for (int a = 0; a < kNumAgeGroups; ++a)
                trajs[r][a] = simulate_trajectory(default_init(),
                                                  synth.true_params[c * kNumAgeGroups + a],
                                                  years, synth.panel.start_year());
        }
        ReportingParams rep;
        double acc_s = 0.0, acc_p = 0.0;
        auto t0 = clock_type::now();
        for (int e = 0; e < evals; ++e)
            acc_s += log_likelihood_serial(synth.panel, trajs, rep);
        const double serial_s = seconds_since(t0);
        t0 = clock_type::now();
        for (int e = 0; e < evals; ++e) acc_p += log_likelihood(synth.panel, trajs, rep);
        const double parallel_s = seconds_since(t0);
        report("log_likelihood", serial_s, parallel_s, acc_s == acc_p);
    }

    // --- k-means restarts ---
    {
        const FeatureMatrix features = extract_features(synth.panel);
        auto t0 = clock_type::now();
        const ClusterModel serial = kmeans_serial(features, 3, 11, restarts);
        const double serial_s = seconds_since(t0);
        t0 = clock_type::now();
        const ClusterModel parallel = kmeans(features, 3, 11, restarts);
        const double parallel_s = seconds_since(t0);
        const bool same = serial.wcss == parallel.wcss &&
                          serial.assignments == parallel.assignments &&
                          serial.centroids == parallel.centroids;
        report("kmeans restarts", serial_s, parallel_s, same);
    }

    // --- MCMC chains ---
    {
        McmcConfig cfg = McmcConfig::fast();
        cfg.n_chains = 2;
        cfg.seed = 3;
        const auto members = [&] {
            std::vector<int> idx;
            for (int r = 0; r < synth.panel.n_regions(); ++r)
                if (synth.true_labels[r] == 1) idx.push_back(r);
            return idx;
        }();
        const ObservationPanel panel = synth.panel.subset(members);
#ifdef _OPENMP
        const int max_threads = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        auto t0 = clock_type::now();
        const FitResult serial = fit_cluster(panel, PriorSpec{}, cfg);
        const double serial_s = seconds_since(t0);
#ifdef _OPENMP
        omp_set_num_threads(max_threads);
#endif
        t0 = clock_type::now();
        const FitResult parallel = fit_cluster(panel, PriorSpec{}, cfg);
        const double parallel_s = seconds_since(t0);
        bool same = serial.traces.size() == parallel.traces.size();
        for (std::size_t c = 0; same && c < serial.traces.size(); ++c)
            same = serial.traces[c].draws == parallel.traces[c].draws;
        report("fit_cluster chains", serial_s, parallel_s, same);
    }
    return 0;
}
