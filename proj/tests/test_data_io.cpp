#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epifit/data_io.hpp"
#include "epifit/rng.hpp"
#include "epifit/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

using namespace epifit;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& contents)
        : path("/tmp/epifit_io_" + name) {
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

const char* kMinimal =
    "region,year,age_group,incidence,prevalence,deaths\n"
    "KA,1990,juvenile,5,0.02,1\n"
    "KA,1990,adult,3,0.01,0\n"
    "KA,1990,old,2,0.005,2\n";

} // namespace

TEST_CASE("load_csv reads a minimal panel") {
    TempFile f("minimal.csv", kMinimal);
    const auto panel = load_csv(f.path);
    CHECK(panel.n_regions() == 1);
    CHECK(panel.n_years() == 1);
    CHECK(panel.start_year() == 1990);
    CHECK(panel.incidence(0, AgeGroup::juvenile, 0) == 5.0);
    CHECK(panel.prevalence(0, AgeGroup::adult, 0) == 0.01);
    CHECK(panel.deaths(0, AgeGroup::old, 0) == 2.0);
    CHECK(panel.reference_pop() == 100000.0);
}

TEST_CASE("load_csv enforces the schema header") {
    TempFile f("schema.csv", "region,year,age,incidence,prevalence,deaths\nKA,1990,adult,1,0,0\n");
    CHECK_THROWS_AS(load_csv(f.path), SchemaError);
}

TEST_CASE("load_csv validation names each offending row") {
    TempFile f("bad.csv",
               "region,year,age_group,incidence,prevalence,deaths\n"
               "KA,1990,juvenile,5,0.02,-1\n"
               "KA,1990,adult,3,0.01,0\n"
               "KA,1990,old,2,0.005,2\n"
               "KA,1990,elder,2,0.005,2\n");
    try {
        load_csv(f.path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);        // negative deaths
        CHECK(msg.find("row 5") != std::string::npos);        // unknown age group
        CHECK(msg.find("negative deaths") != std::string::npos);
    }
}

TEST_CASE("load_csv rejects duplicates and year gaps") {
    SUBCASE("duplicate cell") {
        TempFile f("dup.csv",
                   "region,year,age_group,incidence,prevalence,deaths\n"
                   "KA,1990,juvenile,5,0.02,1\n"
                   "KA,1990,juvenile,6,0.02,1\n"
                   "KA,1990,adult,3,0.01,0\n"
                   "KA,1990,old,2,0.005,2\n");
        CHECK_THROWS_AS(load_csv(f.path), ValidationError);
    }
    SUBCASE("year gap") {
        std::string body = "region,year,age_group,incidence,prevalence,deaths\n";
        for (const char* age : {"juvenile", "adult", "old"}) {
            body += std::string("KA,1990,") + age + ",1,0.01,0\n";
            body += std::string("KA,1992,") + age + ",1,0.01,0\n"; // 1991 missing
        }
        TempFile f("gap.csv", body);
        CHECK_THROWS_AS(load_csv(f.path), ValidationError);
    }
    SUBCASE("region missing a year present elsewhere") {
        std::string body = "region,year,age_group,incidence,prevalence,deaths\n";
        for (const char* age : {"juvenile", "adult", "old"}) {
            body += std::string("KA,1990,") + age + ",1,0.01,0\n";
            body += std::string("KA,1991,") + age + ",1,0.01,0\n";
            body += std::string("TN,1990,") + age + ",1,0.01,0\n";
        }
        TempFile f("uneven.csv", body);
        CHECK_THROWS_AS(load_csv(f.path), ValidationError);
    }
}

TEST_CASE("load_csv coerces per-100k prevalence and rounds counts") {
    TempFile f("coerce.csv",
               "region,year,age_group,incidence,prevalence,deaths\n"
               "KA,1990,juvenile,5.4,2000,1.6\n"
               "KA,1990,adult,3,0.01,0\n"
               "KA,1990,old,2,0.005,2\n");
    const auto panel = load_csv(f.path);
    CHECK(panel.prevalence(0, AgeGroup::juvenile, 0) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(panel.incidence(0, AgeGroup::juvenile, 0) == 5.0);
    CHECK(panel.deaths(0, AgeGroup::juvenile, 0) == 2.0);
}

TEST_CASE("scale_population") {
    TempFile f("scale.csv", kMinimal);
    const auto panel = load_csv(f.path);
    SUBCASE("identity at the current reference") {
        const auto same = scale_population(panel, 100000.0);
        CHECK(same == panel);
    }
    SUBCASE("linear rescale and exact round trip") {
        const auto down = scale_population(panel, 10000.0);
        CHECK(down.incidence(0, AgeGroup::juvenile, 0) == 0.5);
        CHECK(down.prevalence(0, AgeGroup::juvenile, 0) == 0.02); // fractions untouched
        const auto back = scale_population(down, 100000.0);
        CHECK(back == panel);
    }
    SUBCASE("counts per 10k re-expressed per 100k") {
        std::vector<std::string> names = {"r"};
        ObservationPanel small(names, 1990, 1, 10000.0);
        small.set_cell(0, AgeGroup::juvenile, 0, 50.0, 0.1, 5.0);
        small.set_cell(0, AgeGroup::adult, 0, 1.0, 0.1, 0.0);
        small.set_cell(0, AgeGroup::old, 0, 1.0, 0.1, 0.0);
        const auto scaled = scale_population(small, 100000.0);
        CHECK(scaled.incidence(0, AgeGroup::juvenile, 0) == 500.0);
        CHECK(scaled.deaths(0, AgeGroup::juvenile, 0) == 50.0);
    }
    SUBCASE("large integer counts survive the round trip bit-exactly") {
        std::vector<std::string> names = {"r"};
        ObservationPanel big(names, 1990, 1);
        const double huge = 1099511627776.0; // 2^40
        big.set_cell(0, AgeGroup::juvenile, 0, huge - 1.0, 0.5, huge - 7.0);
        big.set_cell(0, AgeGroup::adult, 0, 3.0, 0.5, 0.0);
        big.set_cell(0, AgeGroup::old, 0, 17.0, 0.5, 1.0);
        const auto round = scale_population(scale_population(big, 7919.0), 100000.0);
        CHECK(round == big);
    }
    SUBCASE("nonpositive scale") {
        CHECK_THROWS_AS(scale_population(panel, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(scale_population(panel, -5.0), std::invalid_argument);
    }
}

TEST_CASE("generate_synthetic shape and determinism") {
    SyntheticSpec spec;
    spec.seed = 5;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    CHECK(a.panel == b.panel);
    CHECK(a.true_labels == b.true_labels);
    CHECK(a.panel.n_regions() == 10);
    CHECK(a.panel.n_years() == 32);
    CHECK(a.panel.start_year() == 1990);
    std::set<int> used(a.true_labels.begin(), a.true_labels.end());
    CHECK(used == std::set<int>{1, 2, 3});

    SUBCASE("different seeds differ") {
        SyntheticSpec other = spec;
        other.seed = 6;
        CHECK_FALSE(generate_synthetic(other).panel == a.panel);
    }
}

TEST_CASE("generate_synthetic labels cover every cluster for many seeds") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        const auto labels = generate_synthetic(spec).true_labels;
        std::set<int> used(labels.begin(), labels.end());
        CHECK(used.size() == 3);
    }
}

TEST_CASE("generate_synthetic with zero mortality emits zero deaths") {
    SyntheticSpec spec;
    spec.seed = 4;
    spec.true_params = true_params_table();
    for (auto& p : spec.true_params) p.mu = 0.0;
    const auto synth = generate_synthetic(spec);
    for (int r = 0; r < synth.panel.n_regions(); ++r)
        for (AgeGroup a : kAgeGroups)
            for (int t = 0; t < synth.panel.n_years(); ++t)
                CHECK(synth.panel.deaths(r, a, t) == 0.0);
}

TEST_CASE("literal death noise yields near-zero counts") {
    // Poisson on the cumulative death fraction instead of scaled flows:
    // fractions are < 1, so draws are almost surely 0 or 1.
    SyntheticSpec spec;
    spec.seed = 11;
    spec.literal_death_noise = true;
    const auto literal = generate_synthetic(spec);
    double total_literal = 0.0;
    for (int r = 0; r < literal.panel.n_regions(); ++r)
        for (AgeGroup a : kAgeGroups)
            for (int t = 0; t < literal.panel.n_years(); ++t) {
                CHECK(literal.panel.deaths(r, a, t) <= 8.0);
                total_literal += literal.panel.deaths(r, a, t);
            }
    spec.literal_death_noise = false;
    const auto scaled = generate_synthetic(spec);
    double total_scaled = 0.0;
    for (int r = 0; r < scaled.panel.n_regions(); ++r)
        for (AgeGroup a : kAgeGroups)
            for (int t = 0; t < scaled.panel.n_years(); ++t)
                total_scaled += scaled.panel.deaths(r, a, t);
    CHECK(total_scaled > 100.0 * std::max(total_literal, 1.0));
}

TEST_CASE("generate_synthetic observations are nonnegative") {
    SyntheticSpec spec;
    spec.seed = 23;
    const auto synth = generate_synthetic(spec);
    for (int r = 0; r < synth.panel.n_regions(); ++r) {
        for (AgeGroup a : kAgeGroups) {
            for (int t = 0; t < synth.panel.n_years(); ++t) {
                CHECK(synth.panel.incidence(r, a, t) >= 0.0);
                CHECK(synth.panel.prevalence(r, a, t) >= 0.0);
                CHECK(synth.panel.deaths(r, a, t) >= 0.0);
            }
        }
    }
}

TEST_CASE("cluster-2 juveniles out-transmit cluster-3 juveniles on average") {
    double mean2 = 0.0, mean3 = 0.0;
    long n2 = 0, n3 = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        const auto synth = generate_synthetic(spec);
        for (int r = 0; r < synth.panel.n_regions(); ++r) {
            if (synth.true_labels[r] != 2 && synth.true_labels[r] != 3) continue;
            double mean = 0.0;
            for (int t = 0; t < synth.panel.n_years(); ++t)
                mean += synth.panel.incidence(r, AgeGroup::juvenile, t);
            mean /= synth.panel.n_years();
            if (synth.true_labels[r] == 2) {
                mean2 += mean;
                ++n2;
            } else {
                mean3 += mean;
                ++n3;
            }
        }
    }
    REQUIRE(n2 > 0);
    REQUIRE(n3 > 0);
    CHECK(mean2 / n2 > mean3 / n3);
}

TEST_CASE("synthetic panel round trips through CSV") {
    SyntheticSpec spec;
    spec.seed = 8;
    spec.n_states = 4;
    spec.t_years = 6;
    const auto synth = generate_synthetic(spec);
    const std::string path = "/tmp/epifit_io_roundtrip.csv";
    write_panel_csv(synth.panel, path);
    auto reloaded = load_csv(path);
    reloaded.set_cluster_of_region(synth.true_labels);
    CHECK(reloaded == synth.panel);
    std::remove(path.c_str());
}

TEST_CASE("labels and assignments round trip") {
    const std::vector<std::string> regions = {"a", "b", "c"};
    const std::vector<int> labels = {2, 1, 2};
    const std::string lpath = "/tmp/epifit_io_labels.csv";
    write_labels_csv(regions, labels, lpath);
    CHECK(load_labels_csv(lpath, regions) == labels);
    CHECK_THROWS_AS(load_labels_csv(lpath, {"a", "zz", "c"}), ValidationError);
    std::remove(lpath.c_str());

    const std::string apath = "/tmp/epifit_io_assign.csv";
    write_assignments_csv(regions, labels, apath);
    CHECK(load_assignments_csv(apath, regions) == labels);
    std::remove(apath.c_str());
}

TEST_CASE("params table round trips") {
    std::vector<ParamsRow> rows;
    const auto table = true_params_table();
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a)
            rows.push_back({c + 1, static_cast<AgeGroup>(a), table[c * 3 + a]});
    const std::string path = "/tmp/epifit_io_params.csv";
    write_params_csv(rows, path);
    const auto loaded = load_params_csv(path);
    REQUIRE(loaded.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(loaded[i].cluster == rows[i].cluster);
        CHECK(loaded[i].age == rows[i].age);
        CHECK(loaded[i].params.beta == rows[i].params.beta);
        CHECK(loaded[i].params.gamma == rows[i].params.gamma);
        CHECK(loaded[i].params.mu == rows[i].params.mu);
    }
    std::remove(path.c_str());
}
