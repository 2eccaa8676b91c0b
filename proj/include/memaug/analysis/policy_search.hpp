#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "memaug/belief.hpp"
#include "memaug/evaluation.hpp"

namespace memaug {

inline constexpr std::size_t kDefaultPolicySearchCap = 10'000'000;

struct PolicySearchResult {
    std::vector<std::size_t> actions; ///< best action per observation
    double value = 0.0;
    std::size_t policies_evaluated = 0;
};

/// Best deterministic memoryless policy by exhaustive enumeration. Policies are
/// visited in lexicographic order (observation 0 most significant) and a later
/// policy replaces the incumbent only if it is strictly better.
inline PolicySearchResult exhaustive_policy_search(const TabularPomdp& pomdp, std::size_t cap = kDefaultPolicySearchCap) {
    const std::size_t O = pomdp.num_observations(), A = pomdp.num_actions();
    double count = 1.0;
    for (std::size_t o = 0; o < O; ++o) {
        count *= static_cast<double>(A);
        if (count > static_cast<double>(cap))
            throw CapacityError("policy search would enumerate more than " + std::to_string(cap) + " policies");
    }
    std::vector<std::size_t> current(O, 0);
    PolicySearchResult best;
    best.value = -std::numeric_limits<double>::infinity();
    while (true) {
        const double v = expected_return(pomdp, StochasticPolicy::deterministic(current, A));
        ++best.policies_evaluated;
        if (v > best.value + 1e-12 * std::max(1.0, std::abs(best.value)) || best.actions.empty()) {
            best.value = v;
            best.actions = current;
        }
        std::size_t i = O;
        while (i > 0 && ++current[i - 1] == A) current[--i] = 0;
        if (i == 0) break;
    }
    return best;
}

namespace detail {

inline double expectimax(const TabularPomdp& pomdp, const Belief& belief, std::size_t steps_left, std::size_t& budget) {
    if (steps_left == 0) return 0.0;
    if (budget == 0) throw CapacityError("history tree exceeds the node budget");
    --budget;
    const std::size_t S = pomdp.num_states();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < pomdp.num_actions(); ++a) {
        double value = 0.0;
        std::vector<double> obs_mass(pomdp.num_observations(), 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            if (belief[s] == 0.0 || pomdp.is_terminal(s)) continue;
            value += belief[s] * expected_reward(pomdp, s, a);
            for (const auto& t : pomdp.transitions(s, a)) {
                if (pomdp.is_terminal(t.next_state)) continue;
                for (const auto& ob : pomdp.observations(t.next_state))
                    obs_mass[ob.observation] += belief[s] * t.probability * ob.probability;
            }
        }
        for (std::size_t o = 0; o < obs_mass.size(); ++o) {
            if (obs_mass[o] <= 0.0) continue;
            // Posterior over non-terminal successors.
            std::vector<double> next(S, 0.0);
            for (std::size_t s = 0; s < S; ++s) {
                if (belief[s] == 0.0 || pomdp.is_terminal(s)) continue;
                for (const auto& t : pomdp.transitions(s, a))
                    if (!pomdp.is_terminal(t.next_state))
                        next[t.next_state] += belief[s] * t.probability * pomdp.observation_probability(t.next_state, o);
            }
            for (double& x : next) x /= obs_mass[o];
            double z = 0.0;
            for (double x : next) z += x;
            for (double& x : next) x /= z;
            value += pomdp.discount() * obs_mass[o] * expectimax(pomdp, Belief(std::move(next)), steps_left - 1, budget);
        }
        best = std::max(best, value);
    }
    return best;
}

} // namespace detail

/// Optimal expected return over all history-dependent policies, by expectimax
/// over the belief tree. Needs a horizon; throws CapacityError past `node_cap`.
inline double history_optimal_value(const TabularPomdp& pomdp, std::size_t node_cap = 1'000'000) {
    if (!pomdp.horizon()) throw UnsupportedConfigurationError("history-optimal value needs a horizon");
    std::size_t budget = node_cap;
    double total = 0.0;
    const auto mu = pomdp.initial_distribution();
    for (std::size_t o = 0; o < pomdp.num_observations(); ++o) {
        double mass = 0.0;
        for (std::size_t s = 0; s < pomdp.num_states(); ++s) mass += mu[s] * pomdp.observation_probability(s, o);
        if (mass <= 0.0) continue;
        total += mass * detail::expectimax(pomdp, initial_belief(pomdp, o), *pomdp.horizon(), budget);
    }
    return total;
}

} // namespace memaug
