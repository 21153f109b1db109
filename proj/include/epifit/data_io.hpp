#pragma once

#include "epifit/panel.hpp"
#include "epifit/sird.hpp"

#include <string>
#include <utility>
#include <vector>

namespace epifit {

/// Malformed header (missing or renamed columns).
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad cell contents; the message lists every offending row.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Loads a panel from CSV with header
/// region,year,age_group,incidence,prevalence,deaths.
/// Incidence and deaths are rounded to the nearest integer; prevalence
/// values above 1 are taken as per-100k and divided down (a notice is
/// printed to stderr). Validates completeness: no duplicate cells, no
/// year gaps, identical year range for every region.
ObservationPanel load_csv(const std::string& path);

/// Writes the panel in the ingestion schema, floats at 17 significant digits.
void write_panel_csv(const ObservationPanel& panel, const std::string& path);

/// Count streams re-expressed per p persons (default 100,000).
ObservationPanel scale_population(const ObservationPanel& panel, double p = 100000.0);

/// Sidecar labels file: header region,true_cluster.
void write_labels_csv(const std::vector<std::string>& regions, const std::vector<int>& labels,
                      const std::string& path);

/// Returns labels ordered like `regions`; throws when a region is missing.
std::vector<int> load_labels_csv(const std::string& path,
                                 const std::vector<std::string>& regions);

/// Parameter table rows in the cluster/age layout:
/// header cluster,age_group,beta,gamma,mu.
struct ParamsRow {
    int cluster;
    AgeGroup age;
    SirdParams params;
};
std::vector<ParamsRow> load_params_csv(const std::string& path);
void write_params_csv(const std::vector<ParamsRow>& rows, const std::string& path);

/// Assignments file: header region,cluster.
void write_assignments_csv(const std::vector<std::string>& regions,
                           const std::vector<int>& assignments, const std::string& path);
std::vector<int> load_assignments_csv(const std::string& path,
                                      const std::vector<std::string>& regions);

} // namespace epifit
