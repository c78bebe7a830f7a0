#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aoisched/mdp.hpp"

namespace aoisched {

/// Materialized state -> action lookup, indexed by state_index over the
/// table's own (num_devices, delta_max) grid.
struct PolicyTable {
    int num_devices = 0;
    int delta_max = 0;
    std::vector<std::uint8_t> actions;

    std::size_t expected_size() const {
        return checked_state_count(num_devices, delta_max);
    }
};

enum class PolicyKind { optimal, greedy, stationary };

/// CLI-facing policy identifier: "optimal", "greedy" or "fixed:<k>".
struct PolicyName {
    PolicyKind kind = PolicyKind::greedy;
    int fixed_k = 0;

    static std::optional<PolicyName> parse(const std::string& text) {
        if (text == "optimal") return PolicyName{PolicyKind::optimal, 0};
        if (text == "greedy") return PolicyName{PolicyKind::greedy, 0};
        if (text.rfind("fixed:", 0) == 0) {
            const std::string arg = text.substr(6);
            if (arg.empty() ||
                arg.find_first_not_of("0123456789") != std::string::npos)
                return std::nullopt;
            return PolicyName{PolicyKind::stationary, std::stoi(arg)};
        }
        return std::nullopt;
    }

    std::string str() const {
        switch (kind) {
            case PolicyKind::optimal: return "optimal";
            case PolicyKind::greedy: return "greedy";
            case PolicyKind::stationary: return "fixed:" + std::to_string(fixed_k);
        }
        return "?";
    }
};

/**
 * One-step lookahead rule: sort the ages descending into s'' and pick the
 * k in 0..K minimizing the expected next-slot mean age
 *
 *   E[r(s'|s,a(k))] = (sum_i s''_i + K - (1 - P_e(k)) * sum_{i<=k} s''_i) / K,
 *
 * ties resolved toward the smaller k. Resolves to the top-k-by-age set.
 */
inline ScheduleAction greedy_decide(const MdpSpec& spec, const AgeState& s) {
    std::vector<double> sorted(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const int num_devices = spec.num_devices();
    double total = 0.0;
    for (double age : sorted) total += age;

    int best_k = 0;
    double best_value = 0.0;
    double prefix = 0.0;
    for (int k = 0; k <= num_devices; ++k) {
        if (k > 0) prefix += sorted[static_cast<std::size_t>(k - 1)];
        const double value =
            (total + num_devices - spec.outage.success(k) * prefix) /
            static_cast<double>(num_devices);
        if (k == 0 || value < best_value) {
            best_value = value;
            best_k = k;
        }
    }
    return ScheduleAction{best_k};
}

/**
 * A stationary deterministic scheduling policy: either the solved optimal
 * table, the one-step greedy rule, or a fixed transmit count. Immutable
 * once constructed; decide() is pure.
 */
class PolicyRule {
  public:
    static PolicyRule optimal(PolicyTable table) {
        PolicyRule rule;
        rule.kind_ = PolicyKind::optimal;
        rule.table_ = std::move(table);
        return rule;
    }
    static PolicyRule greedy() {
        PolicyRule rule;
        rule.kind_ = PolicyKind::greedy;
        return rule;
    }
    static PolicyRule stationary(int k) {
        if (k < 0) throw std::invalid_argument("stationary policy: k must be >= 0");
        PolicyRule rule;
        rule.kind_ = PolicyKind::stationary;
        rule.fixed_k_ = k;
        return rule;
    }

    PolicyKind kind() const { return kind_; }
    const PolicyTable& table() const { return table_; }

    std::string name() const {
        PolicyName n{kind_, fixed_k_};
        return n.str();
    }

    ScheduleAction decide(const MdpSpec& spec, const AgeState& s) const {
        switch (kind_) {
            case PolicyKind::greedy:
                return greedy_decide(spec, s);
            case PolicyKind::stationary:
                if (fixed_k_ > spec.num_devices())
                    throw std::invalid_argument(
                        "stationary policy: fixed k exceeds device count");
                return ScheduleAction{fixed_k_};
            case PolicyKind::optimal: {
                if (table_.num_devices != spec.num_devices() ||
                    table_.actions.size() != table_.expected_size())
                    throw std::invalid_argument("optimal policy: malformed table");
                // Ages beyond the table's delta_max are clamped so a policy
                // solved on the truncated space can drive unbounded runs.
                std::size_t idx = 0;
                for (int age : s) {
                    const int clamped = std::min(age, table_.delta_max);
                    idx = idx * static_cast<std::size_t>(table_.delta_max) +
                          static_cast<std::size_t>(clamped - 1);
                }
                return ScheduleAction{static_cast<int>(table_.actions[idx])};
            }
        }
        throw std::logic_error("unreachable policy kind");
    }

  private:
    PolicyRule() = default;
    PolicyKind kind_ = PolicyKind::greedy;
    int fixed_k_ = 0;
    PolicyTable table_;
};

}  // namespace aoisched
