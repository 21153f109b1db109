#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "epifit/data_io.hpp"
#include "epifit/kmeans.hpp"
#include "epifit/synthetic.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using namespace epifit;

namespace {

std::string g_cli; // path to the epifit binary, from argv[1]

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

int run_cli(const std::string& env, const std::string& args) {
    const std::string cmd = env + " " + g_cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("/tmp/epifit_cli_tests") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("simulate writes one trajectory per params row") {
    const auto dir = fresh_dir("simulate");
    std::vector<ParamsRow> rows;
    const auto table = true_params_table();
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a)
            rows.push_back({c + 1, static_cast<AgeGroup>(a), table[c * 3 + a]});
    write_params_csv(rows, (dir / "params.csv").string());

    REQUIRE(run_cli("simulate --params " + (dir / "params.csv").string() +
                    " --years 32 --output-dir " + (dir / "out").string()) == 0);
    int found = 0;
    for (const auto& entry : fs::directory_iterator(dir / "out"))
        if (entry.path().filename().string().rfind("trajectory_cluster", 0) == 0) ++found;
    CHECK(found == 9);
    CHECK(fs::exists(dir / "out" / "trajectories_long.csv"));
    CHECK(fs::exists(dir / "out" / "resolved_config.txt"));
}

TEST_CASE("simulate exits 2 on a bad params file") {
    const auto dir = fresh_dir("simulate_bad");
    {
        std::ofstream out(dir / "params.csv");
        out << "cluster,age_group,beta,gamma,mu\n1,adult,-3,1,0.1\n";
    }
    CHECK(run_cli("simulate --params " + (dir / "params.csv").string() +
                  " --output-dir " + (dir / "out").string()) == 2);
    CHECK(run_cli("simulate --params " + (dir / "missing.csv").string() +
                  " --output-dir " + (dir / "out").string()) == 2);
}

TEST_CASE("cluster requires a K decision") {
    const auto dir = fresh_dir("cluster");
    SyntheticSpec spec;
    spec.seed = 12;
    const auto synth = generate_synthetic(spec);
    write_panel_csv(synth.panel, (dir / "panel.csv").string());

    // no --k: report is written, exit code 3
    CHECK(run_cli("cluster --input " + (dir / "panel.csv").string() + " --seed 12" +
                  " --output-dir " + (dir / "out").string()) == 3);
    CHECK(fs::exists(dir / "out" / "kselect.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "assignments.csv"));

    // with --k assignments appear
    CHECK(run_cli("cluster --input " + (dir / "panel.csv").string() + " --seed 12 --k 3" +
                  " --output-dir " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "assignments.csv"));
}

TEST_CASE("cluster exits 2 on ingestion problems") {
    const auto dir = fresh_dir("cluster_bad");
    {
        std::ofstream out(dir / "panel.csv");
        out << "region,year,age_group,incidence,prevalence,deaths\nKA,1990,adult,-4,0,0\n";
    }
    CHECK(run_cli("cluster --input " + (dir / "panel.csv").string() + " --k 2 --output-dir " +
                  (dir / "out").string()) == 2);
}

TEST_CASE("cluster recovers synthetic clusters well") {
    const auto dir = fresh_dir("cluster_ari");
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        const auto synth = generate_synthetic(spec);
        const auto panel_path = dir / ("panel" + std::to_string(seed) + ".csv");
        write_panel_csv(synth.panel, panel_path.string());
        const auto out = dir / ("out" + std::to_string(seed));
        REQUIRE(run_cli("cluster --input " + panel_path.string() + " --seed 1 --k 3" +
                        " --output-dir " + out.string()) == 0);
        const auto est =
            load_assignments_csv((out / "assignments.csv").string(), synth.panel.regions());
        if (adjusted_rand_index(est, synth.true_labels) >= 0.5) ++good;
    }
    CHECK(good >= 4);
}

TEST_CASE("report needs prior outputs and names the missing file") {
    const auto dir = fresh_dir("report");
    CHECK(run_cli("report --output-dir " + dir.string()) == 2);
}

TEST_CASE("k-range produces one report row per candidate") {
    const auto dir = fresh_dir("krange");
    SyntheticSpec spec;
    spec.seed = 3;
    write_panel_csv(generate_synthetic(spec).panel, (dir / "panel.csv").string());
    REQUIRE(run_cli("cluster --input " + (dir / "panel.csv").string() +
                    " --seed 2 --k 3 --k-range 2:6 --output-dir " +
                    (dir / "out").string()) == 0);
    std::ifstream in(dir / "out" / "kselect.csv");
    std::string line;
    int rows = -1; // skip header
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("the resolved config echo reproduces a run by itself") {
    const auto dir = fresh_dir("echo");
    SyntheticSpec spec;
    spec.seed = 17;
    write_panel_csv(generate_synthetic(spec).panel, (dir / "panel.csv").string());
    const auto out = dir / "out";
    REQUIRE(run_cli("cluster --input " + (dir / "panel.csv").string() +
                    " --seed 5 --k 3 --output-dir " + out.string()) == 0);
    const auto echo = dir / "echo.txt";
    fs::copy_file(out / "resolved_config.txt", echo);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string assignments = slurp(out / "assignments.csv");
    const std::string kselect = slurp(out / "kselect.csv");
    fs::remove_all(out);
    REQUIRE(run_cli("cluster --config " + echo.string()) == 0);
    CHECK(slurp(out / "assignments.csv") == assignments);
    CHECK(slurp(out / "kselect.csv") == kselect);
}

TEST_CASE("EPIFIT_SEED is used when no seed is given") {
    const auto dir = fresh_dir("envseed");
    SyntheticSpec spec;
    spec.seed = 29;
    write_panel_csv(generate_synthetic(spec).panel, (dir / "panel.csv").string());
    const std::string base = "cluster --input " + (dir / "panel.csv").string() + " --k 3";
    REQUIRE(run_cli("EPIFIT_SEED=77", base + " --output-dir " + (dir / "env").string()) == 0);
    REQUIRE(run_cli(base + " --seed 77 --output-dir " + (dir / "flag").string()) == 0);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    CHECK(slurp(dir / "env" / "assignments.csv") == slurp(dir / "flag" / "assignments.csv"));
    const std::string echo = slurp(dir / "env" / "resolved_config.txt");
    CHECK(echo.find("seed=77") != std::string::npos);
}

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    doctest::Context context;
    context.applyCommandLine(argc > 1 ? 1 : argc, argv);
    return context.run();
}
