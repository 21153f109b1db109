#include "epifit/kmeans.hpp"

#include "epifit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace epifit {

namespace {
constexpr std::uint64_t kRestartStream = 0x726573ULL; // "res"
}

FeatureMatrix extract_features(const ObservationPanel& panel) {
    if (panel.n_regions() == 0)
        throw std::invalid_argument("extract_features: empty panel");
    FeatureMatrix m;
    m.regions = panel.regions();
    m.n = panel.n_regions();
    m.d = kNumAgeGroups * 3;
    for (AgeGroup age : kAgeGroups) {
        const std::string a = to_string(age);
        m.feature_names.push_back(a + "_mean_incidence");
        m.feature_names.push_back(a + "_mean_prevalence");
        m.feature_names.push_back(a + "_mean_deaths");
    }
    m.x.resize(static_cast<std::size_t>(m.n) * m.d);
    const double T = panel.n_years();
    for (int r = 0; r < m.n; ++r) {
        for (int a = 0; a < kNumAgeGroups; ++a) {
            double inc = 0.0, prev = 0.0, death = 0.0;
            for (int t = 0; t < panel.n_years(); ++t) {
                const AgeGroup age = static_cast<AgeGroup>(a);
                inc += panel.incidence(r, age, t);
                prev += panel.prevalence(r, age, t);
                death += panel.deaths(r, age, t);
            }
            m.x[static_cast<std::size_t>(r) * m.d + 3 * a + 0] = inc / T;
            m.x[static_cast<std::size_t>(r) * m.d + 3 * a + 1] = prev / T;
            m.x[static_cast<std::size_t>(r) * m.d + 3 * a + 2] = death / T;
        }
    }
    standardize_columns(m);
    return m;
}

void standardize_columns(FeatureMatrix& m) {
    for (int j = 0; j < m.d; ++j) {
        double mean = 0.0;
        for (int i = 0; i < m.n; ++i) mean += m.at(i, j);
        mean /= m.n;
        double ss = 0.0;
        for (int i = 0; i < m.n; ++i) {
            const double dv = m.at(i, j) - mean;
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / m.n);
        for (int i = 0; i < m.n; ++i) {
            double& v = m.x[static_cast<std::size_t>(i) * m.d + j];
            v = sd < 1e-12 * (std::abs(mean) + 1.0) ? 0.0 : (v - mean) / sd;
        }
    }
}

namespace {

double dist2(const FeatureMatrix& x, int i, const double* centroid) {
    double s = 0.0;
    for (int j = 0; j < x.d; ++j) {
        const double dv = x.at(i, j) - centroid[j];
        s += dv * dv;
    }
    return s;
}

// Nearest centroid index, ties resolved toward the lower index.
int nearest(const FeatureMatrix& x, int i, const std::vector<double>& centroids, int k) {
    int best = 0;
    double best_d = dist2(x, i, centroids.data());
    for (int c = 1; c < k; ++c) {
        const double d = dist2(x, i, centroids.data() + static_cast<std::size_t>(c) * x.d);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

double compute_wcss(const FeatureMatrix& x, const std::vector<double>& centroids,
                    const std::vector<int>& assign0) {
    double wcss = 0.0;
    for (int i = 0; i < x.n; ++i)
        wcss += dist2(x, i, centroids.data() + static_cast<std::size_t>(assign0[i]) * x.d);
    return wcss;
}

std::vector<double> kmeanspp_init(const FeatureMatrix& x, int k, Rng& rng) {
    std::vector<double> centroids(static_cast<std::size_t>(k) * x.d);
    const int first = static_cast<int>(rng.uniform_index(x.n));
    std::copy_n(&x.x[static_cast<std::size_t>(first) * x.d], x.d, centroids.begin());
    std::vector<double> min_d2(x.n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < x.n; ++i) {
            double best = dist2(x, i, centroids.data());
            for (int cc = 1; cc < c; ++cc)
                best = std::min(
                    best, dist2(x, i, centroids.data() + static_cast<std::size_t>(cc) * x.d));
            min_d2[i] = best;
            total += best;
        }
        int pick;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double cum = 0.0;
            pick = x.n - 1;
            for (int i = 0; i < x.n; ++i) {
                cum += min_d2[i];
                if (r < cum) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(rng.uniform_index(x.n));
        }
        std::copy_n(&x.x[static_cast<std::size_t>(pick) * x.d],
                    x.d, centroids.begin() + static_cast<std::size_t>(c) * x.d);
    }
    return centroids;
}

} // namespace

ClusterModel kmeans_single_run(const FeatureMatrix& x, int k, std::uint64_t seed,
                               std::vector<double>* wcss_history) {
    if (k < 1 || k > x.n)
        throw std::invalid_argument("kmeans: k must lie in [1, n]");
    Rng rng(seed);
    std::vector<double> centroids = kmeanspp_init(x, k, rng);
    std::vector<int> assign0(x.n, -1);
    constexpr int kMaxIter = 300;
    int iterations = 0;

    for (int iter = 0; iter < kMaxIter; ++iter) {
        ++iterations;
        bool changed = false;
        for (int i = 0; i < x.n; ++i) {
            const int c = nearest(x, i, centroids, k);
            if (c != assign0[i]) {
                assign0[i] = c;
                changed = true;
            }
        }
        // means update
        std::vector<double> sums(static_cast<std::size_t>(k) * x.d, 0.0);
        std::vector<int> counts(k, 0);
        for (int i = 0; i < x.n; ++i) {
            ++counts[assign0[i]];
            for (int j = 0; j < x.d; ++j)
                sums[static_cast<std::size_t>(assign0[i]) * x.d + j] += x.at(i, j);
        }
        bool repaired = false;
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (int j = 0; j < x.d; ++j)
                    centroids[static_cast<std::size_t>(c) * x.d + j] =
                        sums[static_cast<std::size_t>(c) * x.d + j] / counts[c];
            }
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // reseed at the point farthest from its own centroid
                int far_i = 0;
                double far_d = -1.0;
                for (int i = 0; i < x.n; ++i) {
                    const double d = dist2(
                        x, i, centroids.data() + static_cast<std::size_t>(assign0[i]) * x.d);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                std::copy_n(&x.x[static_cast<std::size_t>(far_i) * x.d], x.d,
                            centroids.begin() + static_cast<std::size_t>(c) * x.d);
                assign0[far_i] = c; // claims it before the next pass
                repaired = true;
            }
        }
        if (wcss_history) wcss_history->push_back(compute_wcss(x, centroids, assign0));
        if (!changed && !repaired) break;
    }

    ClusterModel model;
    model.k = k;
    model.centroids = std::move(centroids);
    model.assignments.resize(x.n);
    for (int i = 0; i < x.n; ++i) model.assignments[i] = assign0[i] + 1;
    model.wcss = compute_wcss(x, model.centroids, assign0);
    model.n_iterations = iterations;
    model.seed = seed;
    return model;
}

namespace {

ClusterModel best_of_restarts(std::vector<ClusterModel>& runs) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(runs.size()); ++i)
        if (runs[i].wcss < runs[best].wcss) best = i;
    return std::move(runs[best]);
}

} // namespace

ClusterModel kmeans(const FeatureMatrix& x, int k, std::uint64_t seed, int n_restarts) {
    if (n_restarts < 1) throw std::invalid_argument("kmeans: n_restarts must be >= 1");
    if (k < 1 || k > x.n)
        throw std::invalid_argument("kmeans: k must lie in [1, n]");
    std::vector<ClusterModel> runs(n_restarts);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < n_restarts; ++r)
        runs[r] = kmeans_single_run(x, k, mix_seed(seed, kRestartStream + r));
    return best_of_restarts(runs);
}

ClusterModel kmeans_serial(const FeatureMatrix& x, int k, std::uint64_t seed, int n_restarts) {
    if (n_restarts < 1) throw std::invalid_argument("kmeans: n_restarts must be >= 1");
    if (k < 1 || k > x.n)
        throw std::invalid_argument("kmeans: k must lie in [1, n]");
    std::vector<ClusterModel> runs(n_restarts);
    for (int r = 0; r < n_restarts; ++r)
        runs[r] = kmeans_single_run(x, k, mix_seed(seed, kRestartStream + r));
    return best_of_restarts(runs);
}

double silhouette(const FeatureMatrix& x, const std::vector<int>& assignments) {
    if (static_cast<int>(assignments.size()) != x.n)
        throw std::invalid_argument("silhouette: assignment length mismatch");
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < x.n; ++i) groups[assignments[i]].push_back(i);
    if (groups.size() < 2)
        throw std::invalid_argument("silhouette: need at least 2 clusters");

    auto euclid = [&](int i, int j) {
        double s = 0.0;
        for (int f = 0; f < x.d; ++f) {
            const double dv = x.at(i, f) - x.at(j, f);
            s += dv * dv;
        }
        return std::sqrt(s);
    };

    double total = 0.0;
    for (int i = 0; i < x.n; ++i) {
        const auto& own = groups[assignments[i]];
        if (own.size() == 1) continue; // singleton scores 0
        double a = 0.0;
        for (int j : own)
            if (j != i) a += euclid(i, j);
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, members] : groups) {
            if (label == assignments[i]) continue;
            double mean_d = 0.0;
            for (int j : members) mean_d += euclid(i, j);
            mean_d /= static_cast<double>(members.size());
            b = std::min(b, mean_d);
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(x.n);
}

std::pair<double, double> aic_bic(const ClusterModel& model, const FeatureMatrix& x) {
    if (model.wcss <= 0.0)
        throw std::domain_error("aic_bic: WCSS must be positive (K < n of distinct points)");
    const double nd = static_cast<double>(x.n) * x.d;
    const double sigma2 = model.wcss / nd;
    const double log_l = -(nd / 2.0) * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
    const double p = static_cast<double>(model.k) * x.d + 1.0;
    const double aic = -2.0 * log_l + 2.0 * p;
    const double bic = -2.0 * log_l + p * std::log(static_cast<double>(x.n));
    return {aic, bic};
}

KSelectionReport select_k(const FeatureMatrix& x, int k_lo, int k_hi, std::uint64_t seed) {
    if (k_lo < 2 || k_hi < k_lo || k_hi > x.n - 1)
        throw std::invalid_argument("select_k: need 2 <= k_lo <= k_hi <= n-1");
    constexpr int kRestarts = 20;

    KSelectionReport report;
    std::map<int, double> wcss_of;
    // one extra K below the range so the elbow curvature is defined at k_lo
    wcss_of[k_lo - 1] = kmeans(x, k_lo - 1, mix_seed(seed, k_lo - 1), kRestarts).wcss;
    for (int k = k_lo; k <= k_hi; ++k) {
        ClusterModel model = kmeans(x, k, mix_seed(seed, k), kRestarts);
        KSelectionRow row;
        row.k = k;
        row.wcss = model.wcss;
        row.silhouette = silhouette(x, model.assignments);
        if (model.wcss > 0.0) {
            std::tie(row.aic, row.bic) = aic_bic(model, x);
        } else {
            row.aic = std::numeric_limits<double>::quiet_NaN();
            row.bic = std::numeric_limits<double>::quiet_NaN();
        }
        wcss_of[k] = model.wcss;
        report.rows.push_back(row);
    }

    // Elbow: maximal second difference of WCSS. Defined for K with both
    // neighbors evaluated, i.e. k_lo..k_hi-1 thanks to the extra k_lo-1 run.
    int elbow_k = k_lo;
    double best_curv = -std::numeric_limits<double>::infinity();
    for (int k = k_lo; k + 1 <= k_hi; ++k) {
        const double curv = wcss_of[k - 1] - 2.0 * wcss_of[k] + wcss_of[k + 1];
        if (curv > best_curv) {
            best_curv = curv;
            elbow_k = k;
        }
    }
    report.recommended_k = elbow_k;

    int sil_k = report.rows[0].k, aic_k = report.rows[0].k, bic_k = report.rows[0].k;
    for (const auto& row : report.rows) {
        if (row.silhouette > report.rows[sil_k - k_lo].silhouette) sil_k = row.k;
        if (row.aic < report.rows[aic_k - k_lo].aic) aic_k = row.k;
        if (row.bic < report.rows[bic_k - k_lo].bic) bic_k = row.k;
    }
    std::ostringstream rationale;
    rationale << "elbow (max WCSS second difference) at K=" << elbow_k
              << "; silhouette max at K=" << sil_k << "; AIC min at K=" << aic_k
              << "; BIC min at K=" << bic_k
              << ". Recommendation is advisory; pass --k to fix the choice.";
    report.rationale = rationale.str();
    return report;
}

double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw std::invalid_argument("adjusted_rand_index: length mismatch");
    const std::size_t n = labels_a.size();
    if (n < 2) throw std::invalid_argument("adjusted_rand_index: need at least 2 items");

    std::map<int, int> ia, ib;
    for (int v : labels_a) ia.try_emplace(v, static_cast<int>(ia.size()));
    for (int v : labels_b) ib.try_emplace(v, static_cast<int>(ib.size()));
    const int ka = static_cast<int>(ia.size());
    const int kb = static_cast<int>(ib.size());

    std::vector<long long> cont(static_cast<std::size_t>(ka) * kb, 0);
    std::vector<long long> row(ka, 0), col(kb, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int a = ia[labels_a[i]];
        const int b = ib[labels_b[i]];
        ++cont[static_cast<std::size_t>(a) * kb + b];
        ++row[a];
        ++col[b];
    }
    auto choose2 = [](long long m) { return static_cast<double>(m) * (m - 1) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (long long c : cont) sum_ij += choose2(c);
    for (long long c : row) sum_a += choose2(c);
    for (long long c : col) sum_b += choose2(c);
    const double total_pairs = choose2(static_cast<long long>(n));
    const double expected = sum_a * sum_b / total_pairs;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (std::abs(max_index - expected) <= 1e-12 * std::max(1.0, max_index)) {
        // both partitions trivial; identical partitions count as perfect
        bool identical = true;
        for (std::size_t i = 0; i < n && identical; ++i)
            for (std::size_t j = i + 1; j < n && identical; ++j)
                identical = (labels_a[i] == labels_a[j]) == (labels_b[i] == labels_b[j]);
        return identical ? 1.0 : 0.0;
    }
    return (sum_ij - expected) / (max_index - expected);
}

} // namespace epifit
