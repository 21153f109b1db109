#pragma once

#include "epifit/age_group.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace epifit {

/// Region x age-group x year panel of incidence counts, prevalence
/// fractions and death counts. Counts are expressed per `reference_pop`
/// persons (100,000 unless rescaled); prevalence is scale-free.
///
/// Rescaling always recomputes from the ingestion-time values, so
/// scaling to another reference and back restores the panel bit-exactly.
class ObservationPanel {
public:
    ObservationPanel() = default;
    ObservationPanel(std::vector<std::string> regions, int start_year, int n_years,
                     double reference_pop = 100000.0);

    int n_regions() const { return static_cast<int>(regions_.size()); }
    int n_years() const { return n_years_; }
    int start_year() const { return start_year_; }
    double reference_pop() const { return reference_pop_; }
    const std::vector<std::string>& regions() const { return regions_; }

    double incidence(int region, AgeGroup age, int year_idx) const {
        return inc_[cell(region, age, year_idx)];
    }
    double prevalence(int region, AgeGroup age, int year_idx) const {
        return prev_[cell(region, age, year_idx)];
    }
    double deaths(int region, AgeGroup age, int year_idx) const {
        return death_[cell(region, age, year_idx)];
    }

    void set_cell(int region, AgeGroup age, int year_idx, double incidence,
                  double prevalence, double deaths);

    /// Optional cluster labels (1-based); empty when unassigned.
    const std::vector<int>& cluster_of_region() const { return cluster_of_region_; }
    void set_cluster_of_region(std::vector<int> labels);

    /// New panel restricted to the given region indices (order preserved).
    ObservationPanel subset(const std::vector<int>& region_indices) const;

    /// Re-expresses count streams per `p` persons. Throws when p <= 0.
    ObservationPanel scaled_to(double p) const;

    bool operator==(const ObservationPanel& other) const;

    std::size_t cell(int region, AgeGroup age, int year_idx) const {
        return (static_cast<std::size_t>(region) * kNumAgeGroups +
                static_cast<std::size_t>(age)) *
                   static_cast<std::size_t>(n_years_) +
               static_cast<std::size_t>(year_idx);
    }

private:
    std::vector<std::string> regions_;
    int start_year_ = 0;
    int n_years_ = 0;
    double reference_pop_ = 100000.0;
    std::vector<double> inc_, prev_, death_;
    // Ingestion-time count streams and their reference, kept so that
    // repeated rescaling never compounds rounding.
    double base_reference_pop_ = 100000.0;
    std::vector<double> base_inc_, base_death_;
    std::vector<int> cluster_of_region_;
};

} // namespace epifit
