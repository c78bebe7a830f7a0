#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "aoisched/exact.hpp"
#include "aoisched/rvi.hpp"
#include "aoisched/simulate.hpp"
#include "aoisched/table_io.hpp"

namespace aoisched {

inline double snr_db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double snr_linear_to_db(double linear) { return 10.0 * std::log10(linear); }

/**
 * One full experiment description: the channel block, the MDP truncation
 * and solver settings, the simulation block and the policy list. A run
 * sweeps either snr_db or antennas (or is a single point when both grids
 * have one entry).
 */
struct ExperimentConfig {
    int devices = 3;
    std::vector<int> antennas = {3};
    std::vector<double> snr_db = {20.0};
    double distance = 3.0;
    double path_loss_exponent = 2.0;
    double snr_threshold = 1.0;

    int delta_max = 50;
    double rvi_tol = 1e-9;
    std::uint64_t max_iters = 100000;

    std::int64_t horizon = 200000;
    std::int64_t burn_in = 2000;
    std::vector<std::uint64_t> seeds = {1};
    bool truncate_sim = false;  // Monte Carlo ages unbounded by default

    std::vector<std::string> policies = {"optimal", "greedy", "fixed:1", "fixed:2",
                                         "fixed:3"};
    std::string out_dir = ".";
    int jobs = 1;
    int threads = 0;
    bool exact_eval = false;  // compare only: also evaluate on the exact chain
};

enum class SweepVariable { snr_db, antennas, single };

inline SweepVariable resolve_sweep_variable(const ExperimentConfig& config) {
    if (config.snr_db.empty() || config.antennas.empty())
        throw std::invalid_argument("experiment: snr_db and antennas grids must be non-empty");
    const bool snr_sweep = config.snr_db.size() > 1;
    const bool antenna_sweep = config.antennas.size() > 1;
    if (snr_sweep && antenna_sweep)
        throw std::invalid_argument(
            "experiment: sweep either snr_db or antennas, not both in one run");
    if (snr_sweep) return SweepVariable::snr_db;
    if (antenna_sweep) return SweepVariable::antennas;
    return SweepVariable::single;
}

inline ChannelConfig channel_at(const ExperimentConfig& config, double snr_db,
                                int antennas) {
    ChannelConfig cfg;
    cfg.num_devices = config.devices;
    cfg.num_antennas = antennas;
    cfg.snr_linear = snr_db_to_linear(snr_db);
    cfg.distance = config.distance;
    cfg.path_loss_exponent = config.path_loss_exponent;
    cfg.snr_threshold = config.snr_threshold;
    cfg.validate();
    return cfg;
}

struct SweepRow {
    std::string sweep_var;
    double value = 0.0;
    std::string policy;
    bool failed = false;
    double avg_aoi = 0.0;
    double std_error = 0.0;
    std::optional<double> j_star;
    std::optional<std::uint64_t> solve_iters;
};

namespace detail {

inline std::string strprintf(const char* fmt, ...) {
    char buffer[128];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buffer, sizeof buffer, fmt, args);
    va_end(args);
    return buffer;
}

}  // namespace detail

struct SolveOutcome {
    SolutionArtifact artifact;
    bool from_cache = false;
    double final_span = 0.0;
    double bellman_residual = 0.0;
};

/**
 * Solve a channel point, consulting the on-disk cache first. Dumps are
 * keyed by the config hash, so re-running a sweep only re-solves points
 * whose channel or solver settings changed. Only converged solves are
 * cached; non-convergence throws.
 */
inline SolveOutcome solve_with_cache(const ChannelConfig& cfg, int delta_max,
                                     double tol, std::uint64_t max_iters, int threads,
                                     const std::string& out_dir,
                                     std::ostream* diag = nullptr) {
    const std::uint64_t hash = config_hash(cfg, delta_max, tol, max_iters);
    std::string cache_path;
    if (!out_dir.empty()) {
        const auto dir = std::filesystem::path(out_dir) / "cache";
        std::filesystem::create_directories(dir);
        cache_path = (dir / detail::strprintf("aoisched-%016llx.bin",
                                              static_cast<unsigned long long>(hash)))
                         .string();
        if (std::filesystem::exists(cache_path)) {
            try {
                SolutionArtifact artifact = load_solution(cache_path);
                if (artifact.cfg_hash == hash) {
                    SolveOutcome outcome;
                    outcome.artifact = std::move(artifact);
                    outcome.from_cache = true;
                    return outcome;
                }
            } catch (const std::exception& e) {
                if (diag) *diag << "cache read failed, re-solving: " << e.what() << "\n";
            }
        }
    }

    MdpSpec spec = MdpSpec::make(cfg, delta_max);
    SolveOptions opts;
    opts.tol = tol;
    opts.max_iters = max_iters;
    opts.threads = threads;
    SolveReport report = solve_rvi(spec, opts);
    if (!report.converged)
        throw std::runtime_error(detail::strprintf(
            "solve did not converge within %llu iterations (span %.3e)",
            static_cast<unsigned long long>(report.iterations), report.final_span));

    SolveOutcome outcome;
    outcome.artifact.cfg = cfg;
    outcome.artifact.delta_max = delta_max;
    outcome.artifact.cfg_hash = hash;
    outcome.artifact.iterations = report.iterations;
    outcome.artifact.values = std::move(report.values);
    outcome.artifact.policy = std::move(report.policy);
    outcome.final_span = report.final_span;
    outcome.bellman_residual = report.bellman_residual;
    if (!cache_path.empty()) save_solution(cache_path, outcome.artifact);
    return outcome;
}

namespace detail {

struct PointResult {
    bool failed = false;
    double avg_aoi = 0.0;
    double std_error = 0.0;
    std::optional<double> j_star;
    std::optional<std::uint64_t> solve_iters;
};

inline PointResult evaluate_point(const ExperimentConfig& config,
                                  const ChannelConfig& cfg,
                                  const PolicyName& policy, std::ostream* diag) {
    PointResult result;
    try {
        MdpSpec spec = MdpSpec::make(cfg, config.delta_max);
        PolicyRule rule = PolicyRule::greedy();
        switch (policy.kind) {
            case PolicyKind::optimal: {
                SolveOutcome solved = solve_with_cache(
                    cfg, config.delta_max, config.rvi_tol, config.max_iters,
                    config.threads, config.out_dir, diag);
                result.j_star = solved.artifact.values.j_star;
                result.solve_iters = solved.artifact.iterations;
                rule = PolicyRule::optimal(std::move(solved.artifact.policy));
                break;
            }
            case PolicyKind::greedy:
                rule = PolicyRule::greedy();
                break;
            case PolicyKind::stationary:
                rule = PolicyRule::stationary(policy.fixed_k);
                break;
        }
        std::vector<SimResult> replicas;
        replicas.reserve(config.seeds.size());
        for (std::uint64_t seed : config.seeds) {
            SimConfig sim;
            sim.horizon = config.horizon;
            sim.burn_in = config.burn_in;
            sim.seed = seed;
            sim.track_truncation = config.truncate_sim;
            replicas.push_back(simulate(spec, rule, sim));
        }
        const SimResult merged = merge_replicas(replicas);
        result.avg_aoi = merged.avg_aoi;
        result.std_error = merged.std_error;
    } catch (const std::exception& e) {
        result.failed = true;
        if (diag) *diag << "point failed (" << policy.str() << "): " << e.what() << "\n";
    }
    return result;
}

}  // namespace detail

inline std::vector<PolicyName> parse_policies(const std::vector<std::string>& names) {
    if (names.empty()) throw std::invalid_argument("experiment: no policies requested");
    std::vector<PolicyName> parsed;
    parsed.reserve(names.size());
    for (const auto& name : names) {
        const auto policy = PolicyName::parse(name);
        if (!policy)
            throw std::invalid_argument("unknown policy name: " + name +
                                        " (expected optimal, greedy or fixed:<k>)");
        parsed.push_back(*policy);
    }
    return parsed;
}

/**
 * Sweep the configured grid: per grid point and policy, solve (for the
 * optimal policy, cached) and simulate, yielding one row per cell. Rows
 * come out ordered by (sweep value, policy name) no matter how the work
 * was scheduled. A failed point is recorded in its row and the sweep
 * continues.
 */
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                       std::ostream* diag = nullptr) {
    const SweepVariable variable = resolve_sweep_variable(config);
    const std::vector<PolicyName> policies = parse_policies(config.policies);

    struct Cell {
        double value;
        ChannelConfig cfg;
        PolicyName policy;
    };
    std::vector<Cell> cells;
    const std::string var_name =
        variable == SweepVariable::antennas ? "antennas" : "snr_db";
    if (variable == SweepVariable::antennas) {
        for (int n : config.antennas)
            for (const auto& policy : policies)
                cells.push_back({static_cast<double>(n),
                                 channel_at(config, config.snr_db.front(), n), policy});
    } else {
        for (double db : config.snr_db)
            for (const auto& policy : policies)
                cells.push_back({db, channel_at(config, db, config.antennas.front()),
                                 policy});
    }

    std::vector<detail::PointResult> results(cells.size());
    std::atomic<std::size_t> cursor{0};
    const int jobs = std::max(1, config.jobs);
    auto worker = [&] {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= cells.size()) break;
            results[i] = detail::evaluate_point(config, cells[i].cfg, cells[i].policy,
                                                jobs == 1 ? diag : nullptr);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<SweepRow> rows(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        rows[i].sweep_var = var_name;
        rows[i].value = cells[i].value;
        rows[i].policy = cells[i].policy.str();
        rows[i].failed = results[i].failed;
        rows[i].avg_aoi = results[i].avg_aoi;
        rows[i].std_error = results[i].std_error;
        rows[i].j_star = results[i].j_star;
        rows[i].solve_iters = results[i].solve_iters;
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.policy < b.policy;
    });
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "sweep_var,value,policy,avg_aoi,stderr,j_star,solve_iters\n";
    for (const auto& row : rows) {
        out += row.sweep_var;
        out += ',';
        out += detail::strprintf("%g", row.value);
        out += ',';
        out += row.policy;
        out += ',';
        if (!row.failed) {
            out += detail::strprintf("%.6f", row.avg_aoi);
            out += ',';
            out += detail::strprintf("%.6f", row.std_error);
        } else {
            out += ',';
        }
        out += ',';
        if (row.j_star) out += detail::strprintf("%.9f", *row.j_star);
        out += ',';
        if (row.solve_iters)
            out += detail::strprintf("%llu",
                                     static_cast<unsigned long long>(*row.solve_iters));
        out += '\n';
    }
    return out;
}

struct CompareRow {
    std::string policy;
    double avg_aoi = 0.0;
    double std_error = 0.0;
    std::optional<double> j_star;
    std::optional<double> exact_avg;
};

struct CompareReport {
    std::vector<CompareRow> rows;  // sorted by avg_aoi ascending

    struct Pair {
        std::string a, b;
        double difference;   // avg(a) - avg(b), negative when a is better
        double combined_se;  // sqrt(se_a^2 + se_b^2)
    };
    std::vector<Pair> pairwise;
};

/// Head-to-head policy ranking at a single channel point.
inline CompareReport run_compare(const ExperimentConfig& config,
                                 std::ostream* diag = nullptr) {
    if (resolve_sweep_variable(config) != SweepVariable::single)
        throw std::invalid_argument("compare: needs a single channel point, not a sweep");
    const std::vector<PolicyName> policies = parse_policies(config.policies);
    if (policies.size() < 2)
        throw std::invalid_argument("compare: needs at least two policies");

    const ChannelConfig cfg =
        channel_at(config, config.snr_db.front(), config.antennas.front());
    MdpSpec spec = MdpSpec::make(cfg, config.delta_max);

    CompareReport report;
    for (const auto& policy : policies) {
        detail::PointResult result = detail::evaluate_point(config, cfg, policy, diag);
        if (result.failed)
            throw std::runtime_error("compare: evaluation failed for " + policy.str());
        CompareRow row;
        row.policy = policy.str();
        row.avg_aoi = result.avg_aoi;
        row.std_error = result.std_error;
        row.j_star = result.j_star;
        if (config.exact_eval) {
            PolicyRule rule = PolicyRule::greedy();
            if (policy.kind == PolicyKind::optimal) {
                SolveOutcome solved = solve_with_cache(cfg, config.delta_max,
                                                       config.rvi_tol, config.max_iters,
                                                       config.threads, config.out_dir,
                                                       diag);
                rule = PolicyRule::optimal(std::move(solved.artifact.policy));
            } else if (policy.kind == PolicyKind::stationary) {
                rule = PolicyRule::stationary(policy.fixed_k);
            }
            ExactEvalOptions eopts;
            eopts.threads = config.threads;
            row.exact_avg = evaluate_policy_exact(spec, rule, eopts);
        }
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const CompareRow& a, const CompareRow& b) {
                  if (a.avg_aoi != b.avg_aoi) return a.avg_aoi < b.avg_aoi;
                  return a.policy < b.policy;
              });
    for (std::size_t i = 0; i < report.rows.size(); ++i)
        for (std::size_t j = i + 1; j < report.rows.size(); ++j) {
            const auto& a = report.rows[i];
            const auto& b = report.rows[j];
            report.pairwise.push_back(
                {a.policy, b.policy, a.avg_aoi - b.avg_aoi,
                 std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error)});
        }
    return report;
}

inline std::string compare_table(const CompareReport& report) {
    std::string out = detail::strprintf("%-12s %12s %12s %14s\n", "policy", "avg_aoi",
                                        "stderr", "j_star");
    for (const auto& row : report.rows) {
        out += detail::strprintf(
            "%-12s %12.6f %12.6f %14s", row.policy.c_str(), row.avg_aoi, row.std_error,
            row.j_star ? detail::strprintf("%.9f", *row.j_star).c_str() : "-");
        if (row.exact_avg) out += detail::strprintf("  exact=%.9f", *row.exact_avg);
        out += '\n';
    }
    out += "\npairwise differences (row - column, +/- combined stderr):\n";
    for (const auto& pair : report.pairwise)
        out += detail::strprintf("%-12s - %-12s %+12.6f +/- %.6f\n", pair.a.c_str(),
                                 pair.b.c_str(), pair.difference, pair.combined_se);
    return out;
}

}  // namespace aoisched
