#pragma once

#include <array>
#include <string>
#include <vector>

#include "memaug/pomdp.hpp"

namespace memaug {

namespace detail {

/// Episodic task with one observation whose state is the sequence of actions
/// taken so far (a prefix tree) plus one terminal state. Only the final action
/// is rewarded: `final_reward(sequence)` is looked up once `depth` actions
/// have been executed.
template <class RewardFn>
TabularPomdp build_sequence_task(std::size_t num_actions, std::size_t depth, double discount,
                                 const std::vector<std::string>& action_names, const std::string& root_label,
                                 RewardFn&& final_reward) {
    // Node ids: level by level, children of node n at level l are consecutive.
    std::vector<std::vector<std::size_t>> sequences{{}};
    std::vector<std::size_t> level_start{0};
    for (std::size_t l = 0; l + 1 < depth; ++l) {
        const std::size_t begin = level_start.back(), end = sequences.size();
        level_start.push_back(end);
        for (std::size_t n = begin; n < end; ++n)
            for (std::size_t a = 0; a < num_actions; ++a) {
                auto seq = sequences[n];
                seq.push_back(a);
                sequences.push_back(std::move(seq));
            }
    }
    const std::size_t terminal = sequences.size();

    PomdpDefinition def;
    def.num_states = terminal + 1;
    def.num_observations = 1;
    def.num_actions = num_actions;
    def.discount = discount;
    def.horizon = depth;
    def.initial_distribution.assign(def.num_states, 0.0);
    def.initial_distribution[0] = 1.0;
    def.terminal.assign(def.num_states, false);
    def.terminal[terminal] = true;
    def.dynamics.resize(def.num_states);
    def.observation_fn.assign(def.num_states, {{0, 1.0}});
    def.rewards = {0.0};

    auto reward_index = [&](double r) {
        for (std::size_t i = 0; i < def.rewards.size(); ++i)
            if (def.rewards[i] == r) return i;
        def.rewards.push_back(r);
        return def.rewards.size() - 1;
    };

    for (std::size_t n = 0; n < terminal; ++n) {
        const auto& seq = sequences[n];
        std::string label = root_label;
        if (!seq.empty()) {
            label = "s";
            for (std::size_t a : seq) label += action_names[a];
        }
        def.state_labels.push_back(label);
        for (std::size_t a = 0; a < num_actions; ++a) {
            if (seq.size() + 1 == depth) {
                auto full = seq;
                full.push_back(a);
                def.dynamics[n].push_back({{terminal, reward_index(final_reward(full)), 1.0}});
            } else {
                // Child index: position within the next level.
                std::size_t offset = 0;
                for (std::size_t b : seq) offset = offset * num_actions + b;
                const std::size_t child = level_start[seq.size() + 1] + offset * num_actions + a;
                def.dynamics[n].push_back({{child, 0, 1.0}});
            }
        }
    }
    def.state_labels.push_back("end");
    def.observation_labels = {"o"};
    def.action_labels = action_names;
    return TabularPomdp(std::move(def));
}

} // namespace detail

/// Three actions over three steps; reward 1 only for the sequence (a1, a2, a3),
/// which are action indices (0, 1, 2).
inline TabularPomdp build_recall(double discount = 0.95) {
    return detail::build_sequence_task(3, 3, discount, {"1", "2", "3"}, "s*", [](const std::vector<std::size_t>& seq) {
        return (seq[0] == 0 && seq[1] == 1 && seq[2] == 2) ? 1.0 : 0.0;
    });
}

/// Final reward of the binary variant, indexed by a1 * 4 + a2 * 2 + a3.
inline constexpr std::array<double, 8> kVariantRecallRewards = {0.0, 2.0, 3.0, 1.0, -100.0, -100.0, -10.0, -10.0};

inline TabularPomdp build_variant_recall() {
    return detail::build_sequence_task(2, 3, 1.0, {"0", "1"}, "s*", [](const std::vector<std::size_t>& seq) {
        return kVariantRecallRewards[seq[0] * 4 + seq[1] * 2 + seq[2]];
    });
}

/// r[a1][a2] of the four-action task.
inline constexpr std::array<std::array<double, 4>, 4> kFourActionRecallRewards = {{
    {-5.0, 0.5, 1.0, 0.5},
    {0.0, 0.5, -0.5, 0.75},
    {0.0, 0.5, -5.0, 0.5},
    {0.0, 0.5, -5.0, 0.5},
}};

/// States: s* (index 0), s0..s3 (index 1 + a1), terminal (index 5).
inline TabularPomdp build_four_action_recall(double reward_scale = 1.0) {
    return detail::build_sequence_task(4, 2, 1.0, {"0", "1", "2", "3"}, "s*",
                                       [reward_scale](const std::vector<std::size_t>& seq) {
                                           return reward_scale * kFourActionRecallRewards[seq[0]][seq[1]];
                                       });
}

} // namespace memaug
