#include "epifit/panel.hpp"

#include <cmath>
#include <stdexcept>

namespace epifit {

ObservationPanel::ObservationPanel(std::vector<std::string> regions, int start_year,
                                   int n_years, double reference_pop)
    : regions_(std::move(regions)),
      start_year_(start_year),
      n_years_(n_years),
      reference_pop_(reference_pop),
      base_reference_pop_(reference_pop) {
    if (n_years_ < 1) throw std::invalid_argument("ObservationPanel: n_years must be >= 1");
    if (reference_pop_ <= 0.0)
        throw std::invalid_argument("ObservationPanel: reference population must be positive");
    const std::size_t n = regions_.size() * kNumAgeGroups * static_cast<std::size_t>(n_years_);
    inc_.assign(n, 0.0);
    prev_.assign(n, 0.0);
    death_.assign(n, 0.0);
    base_inc_.assign(n, 0.0);
    base_death_.assign(n, 0.0);
}

void ObservationPanel::set_cell(int region, AgeGroup age, int year_idx, double incidence,
                                double prevalence, double deaths) {
    const std::size_t c = cell(region, age, year_idx);
    inc_[c] = incidence;
    prev_[c] = prevalence;
    death_[c] = deaths;
    base_inc_[c] = incidence;
    base_death_[c] = deaths;
}

void ObservationPanel::set_cluster_of_region(std::vector<int> labels) {
    if (!labels.empty() && labels.size() != regions_.size())
        throw std::invalid_argument("cluster labels must cover every region");
    cluster_of_region_ = std::move(labels);
}

ObservationPanel ObservationPanel::subset(const std::vector<int>& region_indices) const {
    std::vector<std::string> names;
    names.reserve(region_indices.size());
    for (int r : region_indices) {
        if (r < 0 || r >= n_regions())
            throw std::out_of_range("subset: region index out of range");
        names.push_back(regions_[r]);
    }
    ObservationPanel out(std::move(names), start_year_, n_years_, reference_pop_);
    out.base_reference_pop_ = base_reference_pop_;
    for (std::size_t j = 0; j < region_indices.size(); ++j) {
        const int r = region_indices[j];
        for (AgeGroup age : kAgeGroups) {
            for (int t = 0; t < n_years_; ++t) {
                const std::size_t src = cell(r, age, t);
                const std::size_t dst = out.cell(static_cast<int>(j), age, t);
                out.inc_[dst] = inc_[src];
                out.prev_[dst] = prev_[src];
                out.death_[dst] = death_[src];
                out.base_inc_[dst] = base_inc_[src];
                out.base_death_[dst] = base_death_[src];
            }
        }
    }
    if (!cluster_of_region_.empty()) {
        std::vector<int> labels;
        labels.reserve(region_indices.size());
        for (int r : region_indices) labels.push_back(cluster_of_region_[r]);
        out.cluster_of_region_ = std::move(labels);
    }
    return out;
}

namespace {

// x * num / den, exact whenever x is an integer count and the rational
// product is an integer (covers every whole-multiple rescale).
double rescale_value(double x, double num, double den) {
    if (num == den) return x;
    const double xr = std::floor(x);
    if (xr == x && std::abs(x) < 0x1p40 && std::floor(num) == num &&
        std::floor(den) == den && num < 0x1p31 && den < 0x1p31) {
        const __int128 prod = static_cast<__int128>(xr) * static_cast<__int128>(num);
        const __int128 d = static_cast<__int128>(den);
        if (d != 0 && prod % d == 0) {
            return static_cast<double>(static_cast<long double>(prod / d));
        }
    }
    return static_cast<double>(static_cast<long double>(x) * static_cast<long double>(num) /
                               static_cast<long double>(den));
}

} // namespace

ObservationPanel ObservationPanel::scaled_to(double p) const {
    if (p <= 0.0 || !std::isfinite(p))
        throw std::invalid_argument("scale_population: reference must be positive");
    ObservationPanel out = *this;
    out.reference_pop_ = p;
    for (std::size_t c = 0; c < inc_.size(); ++c) {
        out.inc_[c] = rescale_value(base_inc_[c], p, base_reference_pop_);
        out.death_[c] = rescale_value(base_death_[c], p, base_reference_pop_);
    }
    return out;
}

bool ObservationPanel::operator==(const ObservationPanel& other) const {
    return regions_ == other.regions_ && start_year_ == other.start_year_ &&
           n_years_ == other.n_years_ && reference_pop_ == other.reference_pop_ &&
           inc_ == other.inc_ && prev_ == other.prev_ && death_ == other.death_ &&
           cluster_of_region_ == other.cluster_of_region_;
}

} // namespace epifit
