// Command-line front end: solve a channel point, sweep a grid, or compare
// policies head to head. See README.md for examples.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "aoisched/experiment.hpp"
#include "aoisched/svg.hpp"

namespace {

struct CliOptions {
    aoisched::ExperimentConfig config;
    double drift_m = 2.0;
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
    cmd->set_config("--config", "", "config file (key=value with [blocks])");
    auto& cfg = opts.config;
    cmd->add_option("-K,--devices,--channel.devices", cfg.devices,
                    "number of devices K")
        ->capture_default_str();
    cmd->add_option("-N,--antennas,--channel.antennas", cfg.antennas,
                    "AP antenna count N, or a grid to sweep")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--snr-db,--channel.snr-db", cfg.snr_db,
                    "transmit SNR P/sigma^2 in dB, or a grid to sweep")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("-d,--distance,--channel.distance", cfg.distance,
                    "device-AP distance")
        ->capture_default_str();
    cmd->add_option("--tau,--channel.tau", cfg.path_loss_exponent, "path loss exponent")
        ->capture_default_str();
    cmd->add_option("--gamma-th,--channel.gamma-th", cfg.snr_threshold,
                    "decoding SNR threshold")
        ->capture_default_str();
    cmd->add_option("--delta-max,--mdp.delta-max", cfg.delta_max,
                    "age truncation of the solver state space")
        ->capture_default_str();
    cmd->add_option("--rvi-tol,--mdp.rvi-tol", cfg.rvi_tol,
                    "span tolerance of relative value iteration")
        ->capture_default_str();
    cmd->add_option("--max-iters,--mdp.max-iters", cfg.max_iters,
                    "iteration cap of the solver")
        ->capture_default_str();
    cmd->add_option("--horizon,--sim.horizon", cfg.horizon, "simulated slots per replica")
        ->capture_default_str();
    cmd->add_option("--burn-in,--sim.burn-in", cfg.burn_in,
                    "leading slots discarded from estimates")
        ->capture_default_str();
    cmd->add_option("--seeds,--sim.seeds", cfg.seeds, "replica seeds")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_flag("--truncate-sim,--sim.truncate", cfg.truncate_sim,
                  "saturate simulated ages at delta-max instead of unbounded ages");
    cmd->add_option("--policies,--run.policies", cfg.policies,
                    "policies: optimal, greedy, fixed:<k>")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--out-dir,--run.out-dir", cfg.out_dir, "output directory")
        ->capture_default_str();
    cmd->add_option("--jobs,--run.jobs", cfg.jobs, "concurrent grid points")
        ->capture_default_str();
    cmd->add_option("--threads,--run.threads", cfg.threads,
                    "solver threads per job (0 = hardware)")
        ->capture_default_str();
}

void require_single_point(const aoisched::ExperimentConfig& cfg) {
    if (aoisched::resolve_sweep_variable(cfg) != aoisched::SweepVariable::single)
        throw std::invalid_argument("this command needs a single channel point "
                                    "(one --snr-db value and one --antennas value)");
}

int cmd_solve(const CliOptions& opts) {
    require_single_point(opts.config);
    const auto& cfg = opts.config;
    const aoisched::ChannelConfig channel =
        aoisched::channel_at(cfg, cfg.snr_db.front(), cfg.antennas.front());

    aoisched::SolveOutcome outcome = aoisched::solve_with_cache(
        channel, cfg.delta_max, cfg.rvi_tol, cfg.max_iters, cfg.threads, cfg.out_dir,
        &std::cerr);

    std::filesystem::create_directories(cfg.out_dir);
    const std::string dump =
        (std::filesystem::path(cfg.out_dir) / "solution.bin").string();
    aoisched::save_solution(dump, outcome.artifact);

    const aoisched::MdpSpec spec = aoisched::MdpSpec::make(channel, cfg.delta_max);
    const aoisched::DriftReport drift =
        aoisched::check_drift_condition(spec, opts.drift_m);

    std::printf("j_star      %.9f\n", outcome.artifact.values.j_star);
    std::printf("iterations  %llu%s\n",
                static_cast<unsigned long long>(outcome.artifact.iterations),
                outcome.from_cache ? " (cached)" : "");
    std::printf("drift       beta=%.6f m=%.3f %s\n", drift.beta, drift.m,
                drift.satisfied ? "satisfied" : "NOT satisfied");
    std::printf("dump        %s\n", dump.c_str());
    return 0;
}

int cmd_sweep(const CliOptions& opts) {
    const auto rows = aoisched::run_sweep(opts.config, &std::cerr);
    std::filesystem::create_directories(opts.config.out_dir);
    const auto dir = std::filesystem::path(opts.config.out_dir);

    const std::string csv = aoisched::sweep_csv(rows);
    std::ofstream csv_file(dir / "sweep.csv", std::ios::binary | std::ios::trunc);
    csv_file << csv;

    const std::string x_label = rows.empty() ? "snr_db" : rows.front().sweep_var;
    std::ofstream svg_file(dir / "sweep.svg", std::ios::binary | std::ios::trunc);
    svg_file << aoisched::sweep_svg(rows, x_label);

    std::size_t failures = 0;
    for (const auto& row : rows)
        if (row.failed) ++failures;
    std::printf("wrote %zu rows to %s (and sweep.svg)\n", rows.size(),
                (dir / "sweep.csv").string().c_str());
    if (failures > 0)
        std::fprintf(stderr, "%zu point(s) failed; see empty cells\n", failures);
    return 0;
}

int cmd_compare(const CliOptions& opts) {
    const aoisched::CompareReport report = aoisched::run_compare(opts.config, &std::cerr);
    std::fputs(aoisched::compare_table(report).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AoI-optimal multiuser scheduling: solver, simulator and benchmarks"};
    app.require_subcommand(1);

    CliOptions solve_opts, sweep_opts, compare_opts;
    CLI::App* solve = app.add_subcommand("solve", "solve one channel point by RVI");
    add_common_options(solve, solve_opts);
    solve->add_option("--drift-m", solve_opts.drift_m,
                      "constant m of the drift-condition check")
        ->capture_default_str();
    CLI::App* sweep =
        app.add_subcommand("sweep", "sweep snr-db or antennas; write CSV and SVG");
    add_common_options(sweep, sweep_opts);
    CLI::App* compare =
        app.add_subcommand("compare", "rank policies at a single channel point");
    add_common_options(compare, compare_opts);
    compare->add_flag("--exact", compare_opts.config.exact_eval,
                      "also evaluate each policy exactly on the truncated chain");

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return cmd_solve(solve_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts);
        if (compare->parsed()) return cmd_compare(compare_opts);
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
