#include "epifit/data_io.hpp"

#include "epifit/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace epifit {

namespace {

const std::vector<std::string> kPanelHeader = {"region", "year",       "age_group",
                                               "incidence", "prevalence", "deaths"};

void require_header(const std::vector<std::string>& got,
                    const std::vector<std::string>& want, const std::string& path) {
    if (got != want) {
        std::ostringstream msg;
        msg << path << ": bad header; expected ";
        for (std::size_t i = 0; i < want.size(); ++i) msg << (i ? "," : "") << want[i];
        msg << " got ";
        for (std::size_t i = 0; i < got.size(); ++i) msg << (i ? "," : "") << got[i];
        throw SchemaError(msg.str());
    }
}

struct RawCell {
    double inc, prev, death;
};

} // namespace

ObservationPanel load_csv(const std::string& path) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw SchemaError(path + ": empty file");
    require_header(rows[0], kPanelHeader, path);

    std::vector<std::string> region_order;
    std::map<std::string, int> region_index;
    // (region, age, year) -> cell, insertion checked for duplicates
    std::map<std::tuple<int, int, long long>, RawCell> cells;
    std::vector<std::string> problems;
    long long coerced_prevalence = 0;

    for (std::size_t rn = 1; rn < rows.size(); ++rn) {
        const auto& row = rows[rn];
        const std::string where = path + " row " + std::to_string(rn + 1);
        if (row.size() != kPanelHeader.size()) {
            problems.push_back(where + ": expected 6 fields, got " +
                               std::to_string(row.size()));
            continue;
        }
        try {
            const std::string& region = row[0];
            const long long year = parse_int(row[1], where + " year");
            if (year < 1800 || year > 2200)
                throw std::runtime_error(where + ": year " + std::to_string(year) +
                                         " outside [1800, 2200]");
            AgeGroup age;
            try {
                age = age_group_from_string(row[2]);
            } catch (const std::exception&) {
                throw std::runtime_error(where + ": unknown age group '" + row[2] + "'");
            }
            double inc = parse_double(row[3], where + " incidence");
            double prev = parse_double(row[4], where + " prevalence");
            double death = parse_double(row[5], where + " deaths");
            if (!std::isfinite(inc) || !std::isfinite(prev) || !std::isfinite(death))
                throw std::runtime_error(where + ": non-finite value");
            if (inc < 0.0) throw std::runtime_error(where + ": negative incidence");
            if (prev < 0.0) throw std::runtime_error(where + ": negative prevalence");
            if (death < 0.0) throw std::runtime_error(where + ": negative deaths");
            inc = static_cast<double>(std::llround(inc));
            death = static_cast<double>(std::llround(death));
            if (prev > 1.0) {
                prev /= 100000.0;
                ++coerced_prevalence;
                if (prev > 1.0)
                    throw std::runtime_error(where + ": prevalence above 100,000 per 100k");
            }
            auto [it, fresh] = region_index.try_emplace(
                region, static_cast<int>(region_order.size()));
            if (fresh) region_order.push_back(region);
            const auto key = std::make_tuple(it->second, static_cast<int>(age), year);
            if (!cells.emplace(key, RawCell{inc, prev, death}).second)
                throw std::runtime_error(where + ": duplicate (region, year, age) cell");
        } catch (const SchemaError&) {
            throw;
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
    }

    if (cells.empty() && problems.empty()) throw ValidationError(path + ": no data rows");

    // Completeness: every (region, age) carries the same contiguous years.
    long long year_min = 0, year_max = -1;
    if (!cells.empty()) {
        year_min = std::get<2>(cells.begin()->first);
        year_max = year_min;
        for (const auto& [key, cell] : cells) {
            year_min = std::min(year_min, std::get<2>(key));
            year_max = std::max(year_max, std::get<2>(key));
        }
        for (int r = 0; r < static_cast<int>(region_order.size()); ++r) {
            for (int a = 0; a < kNumAgeGroups; ++a) {
                for (long long y = year_min; y <= year_max; ++y) {
                    if (!cells.count(std::make_tuple(r, a, y)))
                        problems.push_back(path + ": missing cell (" + region_order[r] +
                                           ", " + to_string(static_cast<AgeGroup>(a)) +
                                           ", " + std::to_string(y) + ")");
                }
            }
        }
    }

    if (!problems.empty()) {
        std::ostringstream msg;
        msg << path << ": " << problems.size() << " validation problem(s):";
        for (const auto& p : problems) msg << "\n  " << p;
        throw ValidationError(msg.str());
    }

    if (coerced_prevalence > 0)
        std::cerr << "note: " << path << ": " << coerced_prevalence
                  << " prevalence value(s) > 1 interpreted as per-100k and divided by 100000\n";

    const int n_years = static_cast<int>(year_max - year_min + 1);
    ObservationPanel panel(region_order, static_cast<int>(year_min), n_years);
    for (const auto& [key, cell] : cells) {
        const auto [r, a, y] = key;
        panel.set_cell(r, static_cast<AgeGroup>(a), static_cast<int>(y - year_min),
                       cell.inc, cell.prev, cell.death);
    }
    return panel;
}

void write_panel_csv(const ObservationPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "region,year,age_group,incidence,prevalence,deaths\n";
    for (int r = 0; r < panel.n_regions(); ++r) {
        for (int t = 0; t < panel.n_years(); ++t) {
            for (AgeGroup age : kAgeGroups) {
                out << panel.regions()[r] << ',' << (panel.start_year() + t) << ','
                    << to_string(age) << ',' << fmt_double(panel.incidence(r, age, t)) << ','
                    << fmt_double(panel.prevalence(r, age, t)) << ','
                    << fmt_double(panel.deaths(r, age, t)) << '\n';
            }
        }
    }
}

ObservationPanel scale_population(const ObservationPanel& panel, double p) {
    return panel.scaled_to(p);
}

void write_labels_csv(const std::vector<std::string>& regions, const std::vector<int>& labels,
                      const std::string& path) {
    if (regions.size() != labels.size())
        throw std::invalid_argument("write_labels_csv: size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "region,true_cluster\n";
    for (std::size_t r = 0; r < regions.size(); ++r)
        out << regions[r] << ',' << labels[r] << '\n';
}

namespace {

std::vector<int> load_region_int_csv(const std::string& path,
                                     const std::vector<std::string>& regions,
                                     const std::string& value_column) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw SchemaError(path + ": empty file");
    require_header(rows[0], {"region", value_column}, path);
    std::map<std::string, int> by_region;
    for (std::size_t rn = 1; rn < rows.size(); ++rn) {
        if (rows[rn].size() != 2)
            throw ValidationError(path + " row " + std::to_string(rn + 1) +
                                  ": expected 2 fields");
        by_region[rows[rn][0]] = static_cast<int>(
            parse_int(rows[rn][1], path + " row " + std::to_string(rn + 1)));
    }
    std::vector<int> out;
    out.reserve(regions.size());
    for (const auto& r : regions) {
        auto it = by_region.find(r);
        if (it == by_region.end())
            throw ValidationError(path + ": no entry for region '" + r + "'");
        out.push_back(it->second);
    }
    return out;
}

} // namespace

std::vector<int> load_labels_csv(const std::string& path,
                                 const std::vector<std::string>& regions) {
    return load_region_int_csv(path, regions, "true_cluster");
}

std::vector<ParamsRow> load_params_csv(const std::string& path) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw SchemaError(path + ": empty file");
    require_header(rows[0], {"cluster", "age_group", "beta", "gamma", "mu"}, path);
    std::vector<ParamsRow> out;
    for (std::size_t rn = 1; rn < rows.size(); ++rn) {
        const std::string where = path + " row " + std::to_string(rn + 1);
        if (rows[rn].size() != 5) throw ValidationError(where + ": expected 5 fields");
        ParamsRow row;
        row.cluster = static_cast<int>(parse_int(rows[rn][0], where + " cluster"));
        row.age = age_group_from_string(rows[rn][1]);
        row.params.beta = parse_double(rows[rn][2], where + " beta");
        row.params.gamma = parse_double(rows[rn][3], where + " gamma");
        row.params.mu = parse_double(rows[rn][4], where + " mu");
        if (row.params.beta < 0 || row.params.gamma < 0 || row.params.mu < 0)
            throw ValidationError(where + ": negative rate");
        out.push_back(row);
    }
    return out;
}

void write_params_csv(const std::vector<ParamsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "cluster,age_group,beta,gamma,mu\n";
    for (const auto& row : rows)
        out << row.cluster << ',' << to_string(row.age) << ',' << fmt_double(row.params.beta)
            << ',' << fmt_double(row.params.gamma) << ',' << fmt_double(row.params.mu)
            << '\n';
}

void write_assignments_csv(const std::vector<std::string>& regions,
                           const std::vector<int>& assignments, const std::string& path) {
    if (regions.size() != assignments.size())
        throw std::invalid_argument("write_assignments_csv: size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "region,cluster\n";
    for (std::size_t r = 0; r < regions.size(); ++r)
        out << regions[r] << ',' << assignments[r] << '\n';
}

std::vector<int> load_assignments_csv(const std::string& path,
                                      const std::vector<std::string>& regions) {
    return load_region_int_csv(path, regions, "cluster");
}

} // namespace epifit
