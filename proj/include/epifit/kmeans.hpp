#pragma once

#include "epifit/panel.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace epifit {

/// Regions x features matrix, columns z-standardized (constant columns
/// become all-zero).
struct FeatureMatrix {
    std::vector<std::string> regions;
    int n = 0, d = 0;
    std::vector<double> x; // row-major n x d
    std::vector<std::string> feature_names;

    double at(int i, int j) const {
        return x[static_cast<std::size_t>(i) * d + j];
    }
};

/// Per region and age group: time-mean incidence, prevalence and deaths
/// (9 features), z-standardized by column.
FeatureMatrix extract_features(const ObservationPanel& panel);

/// Z-standardizes every column in place; constant columns become zero.
void standardize_columns(FeatureMatrix& m);

struct ClusterModel {
    int k = 0;
    std::vector<double> centroids; // row-major k x d
    std::vector<int> assignments;  // 1-based labels, one per region
    double wcss = 0.0;
    int n_iterations = 0;
    std::uint64_t seed = 0; // seed of the winning restart
};

/// Lloyd iterations to an assignment fixpoint (cap 300) from a k-means++
/// start; best of n_restarts by WCSS (ties keep the earliest restart).
/// Empty clusters are reseeded at the point farthest from its centroid.
/// Restarts run in parallel; the result is independent of thread count
/// and identical to kmeans_serial.
ClusterModel kmeans(const FeatureMatrix& x, int k, std::uint64_t seed, int n_restarts = 20);

/// Reference implementation: same restarts, sequential.
ClusterModel kmeans_serial(const FeatureMatrix& x, int k, std::uint64_t seed,
                           int n_restarts = 20);

/// One seeded Lloyd run; wcss_history (when given) records the objective
/// after every iteration.
ClusterModel kmeans_single_run(const FeatureMatrix& x, int k, std::uint64_t seed,
                               std::vector<double>* wcss_history = nullptr);

/// Mean over points of (b-a)/max(a,b); singleton clusters score 0.
/// Throws when fewer than 2 distinct clusters are present.
double silhouette(const FeatureMatrix& x, const std::vector<int>& assignments);

/// Spherical-Gaussian information criteria from the WCSS:
/// sigma^2 = WCSS/(n*d), logL = -(n*d/2)(ln(2*pi*sigma^2)+1),
/// p = K*d+1, AIC = -2logL+2p, BIC = -2logL+p*ln(n).
/// Throws when WCSS is zero.
std::pair<double, double> aic_bic(const ClusterModel& model, const FeatureMatrix& x);

struct KSelectionRow {
    int k = 0;
    double wcss = 0.0, silhouette = 0.0, aic = 0.0, bic = 0.0;
};

struct KSelectionReport {
    std::vector<KSelectionRow> rows;
    int recommended_k = 0; // elbow K (max WCSS second difference); advisory
    std::string rationale;
};

/// Evaluates every K in [k_lo, k_hi] with 20 restarts each. The
/// recommendation is informational: callers decide the final K.
KSelectionReport select_k(const FeatureMatrix& x, int k_lo, int k_hi, std::uint64_t seed);

/// Chance-corrected pair-counting agreement between two labelings.
/// When both partitions are trivial, returns 1 if they are identical
/// as partitions and 0 otherwise.
double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

} // namespace epifit
