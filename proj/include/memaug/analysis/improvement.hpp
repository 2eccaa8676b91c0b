#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "memaug/analysis/observation_values.hpp"
#include "memaug/analysis/policy_search.hpp"
#include "memaug/augmented.hpp"

namespace memaug {

enum class FixedPointLabel { optimal, suboptimal, none, unknown };

inline std::string to_string(FixedPointLabel label) {
    switch (label) {
    case FixedPointLabel::optimal: return "optimal";
    case FixedPointLabel::suboptimal: return "suboptimal";
    case FixedPointLabel::none: return "none";
    case FixedPointLabel::unknown: return "unknown";
    }
    return "unknown";
}

struct ImprovementStep {
    std::size_t iteration = 0;
    std::optional<StochasticPolicy> policy; ///< snapshot before the update; absent when not recorded
    double expected_return = 0.0;
    std::optional<StochasticPolicy> greedy;
    double distance = 0.0; ///< max over visited observations of TV(policy, greedy)
};

struct ImprovementTrace {
    std::vector<ImprovementStep> steps;
    StochasticPolicy final_policy = StochasticPolicy::uniform(1, 1);
    bool converged = false;
    FixedPointLabel label = FixedPointLabel::none;
    std::optional<double> reference_value; ///< history-optimal return used for the label
    std::optional<double> limit_return;    ///< return of the greedy policy at convergence
};

struct ImprovementOptions {
    double epsilon = 0.05;
    std::size_t max_iterations = 10'000;
    double tolerance = 1e-6;
    bool record_policies = true;
    std::size_t product_cap = kDefaultProductStateCap;
    std::size_t reference_node_cap = 200'000;
};

/// Greedy pair action at one observation: among maximisers of q (relative
/// tolerance 1e-9) the lowest environment action wins, then the highest write.
inline std::size_t greedy_pair_action(std::span<const double> q, std::size_t num_writes) {
    const auto best = maximisers(q);
    const std::size_t num_env_actions = q.size() / num_writes;
    for (std::size_t a = 0; a < num_env_actions; ++a)
        for (std::size_t w = num_writes; w-- > 0;)
            if (best[a * num_writes + w]) return a * num_writes + w;
    return 0;
}

/// Idealised policy improvement over the product POMDP with perfect q-values:
///   pi' = (1 - epsilon) pi + epsilon greedy(q_pi)
/// applied on visited observations only. Stops once every visited row is within
/// `tolerance` total variation of its greedy action.
inline ImprovementTrace idealized_improvement(const TabularPomdp& base, const MemorySpec& memory,
                                              const ImprovementOptions& options = {},
                                              std::optional<StochasticPolicy> init_policy = std::nullopt) {
    if (!(options.epsilon > 0.0 && options.epsilon <= 1.0)) throw UsageError("epsilon must lie in (0, 1]");
    const AugmentedEnv env = make_augmented(base, memory);
    const ProductPomdp product = build_product_pomdp(env, {options.product_cap});
    const TabularPomdp& pomdp = product.pomdp;
    const std::size_t O = pomdp.num_observations(), A = pomdp.num_actions();
    const std::size_t W = A / base.num_actions();

    StochasticPolicy pi = init_policy ? *init_policy : StochasticPolicy::uniform(O, A);
    if (pi.num_observations() != O || pi.num_actions() != A)
        throw UsageError("initial policy does not match the augmented observation and action counts");

    ImprovementTrace trace;
    std::vector<double> row(A);
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const auto eval = evaluate_observations(pomdp, pi);
        StochasticPolicy greedy = pi;
        double distance = 0.0;
        for (std::size_t o = 0; o < O; ++o) {
            if (!eval.projection.visited(o)) continue;
            const std::size_t g = greedy_pair_action(eval.q.row(o), W);
            std::fill(row.begin(), row.end(), 0.0);
            row[g] = 1.0;
            greedy.set_row(o, row);
            distance = std::max(distance, 1.0 - pi(o, g)); // TV to a point mass
        }
        ImprovementStep step{it, std::nullopt, eval.expected_return, std::nullopt, distance};
        if (options.record_policies) {
            step.policy = pi;
            step.greedy = greedy;
        }
        trace.steps.push_back(std::move(step));
        if (distance < options.tolerance) {
            trace.converged = true;
            break;
        }
        for (std::size_t o = 0; o < O; ++o) {
            if (!eval.projection.visited(o)) continue;
            for (std::size_t a = 0; a < A; ++a) row[a] = (1.0 - options.epsilon) * pi(o, a) + options.epsilon * greedy(o, a);
            pi.set_row(o, row);
        }
    }
    trace.final_policy = pi;
    if (trace.converged) {
        StochasticPolicy limit = pi;
        const auto eval = evaluate_observations(pomdp, pi);
        for (std::size_t o = 0; o < O; ++o) {
            if (!eval.projection.visited(o)) continue;
            std::fill(row.begin(), row.end(), 0.0);
            row[greedy_pair_action(eval.q.row(o), W)] = 1.0;
            limit.set_row(o, row);
        }
        trace.limit_return = expected_return(pomdp, limit);
    }

    if (!trace.converged) {
        trace.label = FixedPointLabel::none;
        return trace;
    }
    try {
        const double best = history_optimal_value(base, options.reference_node_cap);
        trace.reference_value = best;
        trace.label = std::abs(*trace.limit_return - best) <= 1e-6 * std::max(1.0, std::abs(best)) ? FixedPointLabel::optimal
                                                                                             : FixedPointLabel::suboptimal;
    } catch (const CapacityError&) {
        trace.label = FixedPointLabel::unknown;
    } catch (const UnsupportedConfigurationError&) {
        trace.label = FixedPointLabel::unknown;
    }
    return trace;
}

} // namespace memaug
