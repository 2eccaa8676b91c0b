#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "memaug/belief.hpp"

namespace memaug {

struct SufficiencyOptions {
    std::size_t k_cap = 4;               ///< largest buffer length checked for the O/K and OA conditions
    std::size_t history_cap = 1'000'000; ///< histories enumerated before giving up
    double tolerance = 1e-9;             ///< L-infinity belief deduplication
};

struct SufficiencyReport {
    std::size_t depth = 0;                        ///< actions per history at most
    std::size_t num_histories = 0;                ///< non-terminal histories enumerated
    std::vector<std::size_t> beliefs_per_observation;
    std::size_t u = 0;                            ///< max distinct beliefs sharing a current observation
    std::size_t bit_memory_bound = 0;             ///< ceil(log2|O|) + ceil(log2|A|) + ceil(log2 u)
    double tolerance = 1e-9;
    std::size_t k_cap = 0;
    std::optional<std::size_t> observation_buffer_k;        ///< smallest k whose last-k observations fix the belief
    std::optional<std::size_t> observation_action_buffer_k; ///< same with (o, a) pairs
    bool complete = true;                                   ///< false in the report carried by a capacity error
};

/// Belief enumeration exceeded its cap. Carries what had been found so far.
class SufficiencyCapacityError : public CapacityError {
public:
    SufficiencyCapacityError(const std::string& message, SufficiencyReport partial)
        : CapacityError(message), partial_(std::move(partial)) {}
    const SufficiencyReport& partial() const noexcept { return partial_; }

private:
    SufficiencyReport partial_;
};

inline std::size_t ceil_log2(std::size_t n) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    return bits;
}

namespace detail {

struct History {
    std::vector<std::size_t> observations; ///< o_0 .. o_t
    std::vector<std::size_t> actions;      ///< a_0 .. a_{t-1}
    std::vector<double> belief;
};

inline bool beliefs_close(const std::vector<double>& x, const std::vector<double>& y, double tol) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - y[i]) > tol) return false;
    return true;
}

/// Belief after (a, o) restricted to non-terminal successors; empty when that has zero mass.
inline std::vector<double> conditioned_update(const TabularPomdp& pomdp, const std::vector<double>& belief,
                                              std::size_t action, std::size_t observation) {
    std::vector<double> next(pomdp.num_states(), 0.0);
    double z = 0.0;
    for (std::size_t s = 0; s < belief.size(); ++s) {
        if (belief[s] == 0.0) continue;
        for (const auto& t : pomdp.transitions(s, action)) {
            if (pomdp.is_terminal(t.next_state)) continue;
            const double p = belief[s] * t.probability * pomdp.observation_probability(t.next_state, observation);
            next[t.next_state] += p;
            z += p;
        }
    }
    if (!(z > 0.0)) return {};
    for (double& x : next) x /= z;
    return next;
}

/// Smallest k in [1, cap] whose key function groups only equal beliefs.
template <class KeyFn>
std::optional<std::size_t> smallest_sufficient_k(const std::vector<History>& histories, std::size_t cap, double tol,
                                                 KeyFn key) {
    for (std::size_t k = 1; k <= cap; ++k) {
        std::map<std::vector<std::size_t>, const std::vector<double>*> seen;
        bool ok = true;
        for (const auto& h : histories) {
            auto [it, inserted] = seen.emplace(key(h, k), &h.belief);
            if (!inserted && !beliefs_close(*it->second, h.belief, tol)) {
                ok = false;
                break;
            }
        }
        if (ok) return k;
    }
    return std::nullopt;
}

} // namespace detail

/// Enumerates every history up to `max_depth` actions (default: horizon - 1),
/// conditioned on the episode still running, and reports how many distinct
/// beliefs share each current observation together with the buffer lengths
/// whose contents determine the belief.
inline SufficiencyReport sufficiency_report(const TabularPomdp& pomdp, std::optional<std::size_t> max_depth = std::nullopt,
                                            const SufficiencyOptions& options = {}) {
    SufficiencyReport report;
    if (max_depth) report.depth = *max_depth;
    else if (pomdp.horizon()) report.depth = *pomdp.horizon() - 1;
    else throw UsageError("sufficiency_report: needs a horizon or an explicit depth");
    report.tolerance = options.tolerance;
    report.k_cap = options.k_cap;

    const std::size_t O = pomdp.num_observations(), A = pomdp.num_actions();
    std::vector<detail::History> histories;
    std::vector<std::vector<const std::vector<double>*>> distinct(O);

    auto finalize_counts = [&] {
        report.num_histories = histories.size();
        report.beliefs_per_observation.assign(O, 0);
        report.u = 0;
        for (std::size_t o = 0; o < O; ++o) {
            report.beliefs_per_observation[o] = distinct[o].size();
            report.u = std::max(report.u, distinct[o].size());
        }
        report.bit_memory_bound = ceil_log2(O) + ceil_log2(A) + ceil_log2(std::max<std::size_t>(report.u, 1));
    };
    auto add = [&](detail::History h) {
        if (histories.size() >= options.history_cap) {
            finalize_counts();
            report.complete = false;
            throw SufficiencyCapacityError("belief enumeration exceeds " + std::to_string(options.history_cap) +
                                               " histories",
                                           report);
        }
        histories.push_back(std::move(h));
    };

    histories.reserve(1024);
    const auto mu = pomdp.initial_distribution();
    for (std::size_t o = 0; o < O; ++o) {
        std::vector<double> b(pomdp.num_states(), 0.0);
        double z = 0.0;
        for (std::size_t s = 0; s < pomdp.num_states(); ++s) {
            if (pomdp.is_terminal(s)) continue;
            b[s] = mu[s] * pomdp.observation_probability(s, o);
            z += b[s];
        }
        if (!(z > 0.0)) continue;
        for (double& x : b) x /= z;
        add({{o}, {}, std::move(b)});
    }
    // Breadth-first: histories of length d occupy [begin, end).
    std::size_t begin = 0;
    for (std::size_t d = 0; d < report.depth; ++d) {
        const std::size_t end = histories.size();
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t a = 0; a < A; ++a)
                for (std::size_t o = 0; o < O; ++o) {
                    auto next = detail::conditioned_update(pomdp, histories[i].belief, a, o);
                    if (next.empty()) continue;
                    detail::History h{histories[i].observations, histories[i].actions, std::move(next)};
                    h.observations.push_back(o);
                    h.actions.push_back(a);
                    add(std::move(h));
                }
        begin = end;
    }

    // Histories are no longer reallocated past this point.
    for (const auto& h : histories) {
        auto& bucket = distinct[h.observations.back()];
        bool found = false;
        for (const auto* b : bucket)
            if (detail::beliefs_close(*b, h.belief, options.tolerance)) {
                found = true;
                break;
            }
        if (!found) bucket.push_back(&h.belief);
    }
    finalize_counts();

    static constexpr std::size_t kPad = static_cast<std::size_t>(-1);
    report.observation_buffer_k = detail::smallest_sufficient_k(
        histories, options.k_cap, options.tolerance, [](const detail::History& h, std::size_t k) {
            const auto& obs = h.observations;
            std::vector<std::size_t> key{obs.back()};
            for (std::size_t j = 1; j <= k; ++j) key.push_back(obs.size() > j ? obs[obs.size() - 1 - j] : kPad);
            return key;
        });
    report.observation_action_buffer_k = detail::smallest_sufficient_k(
        histories, options.k_cap, options.tolerance, [](const detail::History& h, std::size_t k) {
            const auto& obs = h.observations;
            const auto& act = h.actions;
            std::vector<std::size_t> key{obs.back()};
            for (std::size_t j = 1; j <= k; ++j) {
                const bool has = act.size() >= j;
                key.push_back(has ? obs[obs.size() - 1 - j] : kPad);
                key.push_back(has ? act[act.size() - j] : kPad);
            }
            return key;
        });
    return report;
}

} // namespace memaug
