#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <regex>

#include "aoisched/experiment.hpp"
#include "aoisched/svg.hpp"

using aoisched::ExperimentConfig;
using Catch::Approx;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.devices = 2;
    config.antennas = {2};
    config.snr_db = {10.0};
    config.delta_max = 6;
    config.horizon = 20000;
    config.burn_in = 200;
    config.seeds = {1, 2};
    config.policies = {"greedy", "fixed:1"};
    config.out_dir.clear();  // no cache needed without the optimal policy
    return config;
}

}  // namespace

TEST_CASE("dB conversion round-trips at the usual grid") {
    for (double db : {0.0, 10.0, 20.0, 30.0}) {
        const double linear = aoisched::snr_db_to_linear(db);
        REQUIRE(aoisched::snr_linear_to_db(linear) == Approx(db).margin(1e-12));
    }
    REQUIRE(aoisched::snr_db_to_linear(0.0) == 1.0);
    REQUIRE(aoisched::snr_db_to_linear(10.0) == Approx(10.0).margin(1e-12));
    REQUIRE(aoisched::snr_db_to_linear(20.0) == Approx(100.0).margin(1e-10));
}

TEST_CASE("sweep variable resolution") {
    ExperimentConfig config = small_config();
    REQUIRE(aoisched::resolve_sweep_variable(config) == aoisched::SweepVariable::single);
    config.snr_db = {0.0, 10.0};
    REQUIRE(aoisched::resolve_sweep_variable(config) == aoisched::SweepVariable::snr_db);
    config.antennas = {2, 3};
    REQUIRE_THROWS_AS(aoisched::resolve_sweep_variable(config), std::invalid_argument);
    config.snr_db = {10.0};
    REQUIRE(aoisched::resolve_sweep_variable(config) ==
            aoisched::SweepVariable::antennas);
    config.snr_db.clear();
    REQUIRE_THROWS_AS(aoisched::resolve_sweep_variable(config), std::invalid_argument);
}

TEST_CASE("degenerate single-point sweep yields one row per policy") {
    const auto rows = aoisched::run_sweep(small_config());
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].policy == "fixed:1");  // sorted by policy name within a point
    REQUIRE(rows[1].policy == "greedy");
    for (const auto& row : rows) {
        REQUIRE_FALSE(row.failed);
        REQUIRE(row.sweep_var == "snr_db");
        REQUIRE(row.value == 10.0);
        REQUIRE(row.avg_aoi >= 1.0);
        REQUIRE(row.std_error >= 0.0);
        REQUIRE_FALSE(row.j_star.has_value());
        REQUIRE_FALSE(row.solve_iters.has_value());
    }
}

TEST_CASE("unknown policy names are a config error") {
    auto config = small_config();
    config.policies = {"greedy", "roundrobin"};
    REQUIRE_THROWS_AS(aoisched::run_sweep(config), std::invalid_argument);
    config.policies.clear();
    REQUIRE_THROWS_AS(aoisched::run_sweep(config), std::invalid_argument);
}

TEST_CASE("antenna sweeps order rows by value whatever the input order") {
    auto config = small_config();
    config.antennas = {4, 2, 3};
    config.policies = {"greedy"};
    config.horizon = 4000;
    config.burn_in = 100;
    const auto rows = aoisched::run_sweep(config);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0].sweep_var == "antennas");
    REQUIRE(rows[0].value == 2.0);
    REQUIRE(rows[1].value == 3.0);
    REQUIRE(rows[2].value == 4.0);
    // more antennas cannot hurt
    REQUIRE(rows[2].avg_aoi <= rows[0].avg_aoi + 3.0 * rows[0].std_error);
}

TEST_CASE("CSV bytes are stable across repeated runs, including the cache") {
    TempDir dir("aoisched_sweep_stability");
    ExperimentConfig config = small_config();
    config.snr_db = {0.0, 10.0};
    config.policies = {"optimal", "greedy", "fixed:1"};
    config.out_dir = dir.path.string();
    config.horizon = 10000;
    config.burn_in = 100;

    const auto first = aoisched::sweep_csv(aoisched::run_sweep(config));
    // second run resolves the optimal policy from the on-disk cache
    const auto second = aoisched::sweep_csv(aoisched::run_sweep(config));
    REQUIRE(first == second);
    REQUIRE(first.rfind("sweep_var,value,policy,avg_aoi,stderr,j_star,solve_iters\n",
                        0) == 0);

    // optimal rows carry j_star and iterations, the rest leave them empty
    std::istringstream lines(first);
    std::string line;
    std::getline(lines, line);  // header
    int optimal_rows = 0;
    while (std::getline(lines, line)) {
        if (line.find(",optimal,") != std::string::npos) {
            ++optimal_rows;
            REQUIRE_FALSE(line.ends_with(","));
        } else {
            REQUIRE(line.ends_with(",,"));
        }
    }
    REQUIRE(optimal_rows == 2);
}

TEST_CASE("SVG markers carry exactly the CSV values") {
    auto config = small_config();
    config.snr_db = {0.0, 6.0, 12.0};
    config.horizon = 8000;
    config.burn_in = 100;
    const auto rows = aoisched::run_sweep(config);
    const std::string svg = aoisched::sweep_svg(rows, rows.front().sweep_var);

    std::regex title_re("<title>([^<]*)</title>");
    std::vector<std::string> titles;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), title_re);
         it != std::sregex_iterator(); ++it)
        titles.push_back((*it)[1]);
    REQUIRE(titles.size() == rows.size());

    for (const auto& row : rows) {
        const std::string expected =
            row.policy + aoisched::detail::strprintf(",%g,%.6f", row.value, row.avg_aoi);
        REQUIRE(std::find(titles.begin(), titles.end(), expected) != titles.end());
    }
    REQUIRE(svg.find("avg AoI") != std::string::npos);
    REQUIRE(svg.find("snr_db") != std::string::npos);
}

TEST_CASE("compare ranks policies and reports pairwise gaps") {
    auto config = small_config();
    config.policies = {"greedy", "fixed:1", "fixed:2"};
    config.horizon = 30000;
    const auto report = aoisched::run_compare(config);
    REQUIRE(report.rows.size() == 3);
    REQUIRE(report.rows[0].avg_aoi <= report.rows[1].avg_aoi);
    REQUIRE(report.rows[1].avg_aoi <= report.rows[2].avg_aoi);
    REQUIRE(report.pairwise.size() == 3);
    for (const auto& pair : report.pairwise) {
        REQUIRE(pair.difference <= 0.0);  // sorted ascending: row a is better
        REQUIRE(pair.combined_se >= 0.0);
    }
    const std::string table = aoisched::compare_table(report);
    REQUIRE(table.find("greedy") != std::string::npos);
    REQUIRE(table.find("pairwise") != std::string::npos);

    config.policies = {"greedy"};
    REQUIRE_THROWS_AS(aoisched::run_compare(config), std::invalid_argument);
    config.policies = {"greedy", "fixed:1"};
    config.snr_db = {0.0, 10.0};
    REQUIRE_THROWS_AS(aoisched::run_compare(config), std::invalid_argument);
}

TEST_CASE("failed points are recorded in-row and the sweep continues") {
    auto config = small_config();
    config.policies = {"optimal", "greedy"};
    config.max_iters = 1;  // optimal cannot converge in one sweep
    config.out_dir.clear();
    const auto rows = aoisched::run_sweep(config);
    REQUIRE(rows.size() == 2);
    bool saw_failed = false, saw_ok = false;
    for (const auto& row : rows) {
        if (row.policy == "optimal") {
            REQUIRE(row.failed);
            saw_failed = true;
        } else {
            REQUIRE_FALSE(row.failed);
            saw_ok = true;
        }
    }
    REQUIRE(saw_failed);
    REQUIRE(saw_ok);

    // failed rows leave the numeric cells empty
    const auto csv = aoisched::sweep_csv(rows);
    REQUIRE(csv.find("snr_db,10,optimal,,,,\n") != std::string::npos);
}
