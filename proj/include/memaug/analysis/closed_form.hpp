#pragma once

#include <array>

#include "memaug/policy.hpp"
#include "memaug/pomdp.hpp"

namespace memaug {

namespace detail {

/// r[i][a]: reward for action i followed by action a, read from the task tables.
inline std::array<std::array<double, 4>, 4> four_action_rewards(const TabularPomdp& task) {
    const bool shaped = task.num_states() == 6 && task.num_observations() == 1 && task.num_actions() == 4 &&
                        task.horizon() == std::optional<std::size_t>{2} && task.initial_distribution()[0] == 1.0 &&
                        task.is_terminal(5);
    if (!shaped) throw UsageError("closed_form_q_b1: expects the four-action recall task");
    std::array<std::array<double, 4>, 4> r{};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto first = task.transitions(0, i);
        if (first.size() != 1 || first[0].next_state != 1 + i || task.reward(first[0].reward_index) != 0.0)
            throw UsageError("closed_form_q_b1: first action must lead to s_i without reward");
        for (std::size_t a = 0; a < 4; ++a) {
            const auto second = task.transitions(1 + i, a);
            if (second.size() != 1 || second[0].next_state != 5)
                throw UsageError("closed_form_q_b1: second action must end the episode");
            r[i][a] = task.reward(second[0].reward_index);
        }
    }
    return r;
}

} // namespace detail

/// Closed-form q-values of the four-action recall task with B1 memory.
///
/// `policy` is over augmented observations m in {0, 1} and actions a * 2 + w.
/// With p^m_{aw} = pi(<a,w> | m), p^w_i = sum_w' p^w_{iw'},
/// b_i = p^0_{i0} / (1 + sum_j p^0_{j0}) and t_i = p^0_{i1} / sum_j p^0_{j1}:
///   Q^0_{aw} = sum_i r_{ia} b_i + (1 - sum_i b_i) sum_i p^w_i r_{ai}
///   Q^1_{aw} = sum_i t_i r_{ia}   (zero when memory 1 is never reached)
inline QTable closed_form_q_b1(const TabularPomdp& task, const StochasticPolicy& policy) {
    const auto r = detail::four_action_rewards(task);
    if (policy.num_observations() != 2 || policy.num_actions() != 8)
        throw UsageError("closed_form_q_b1: policy must cover 2 memory states and 8 pair actions");
    auto p = [&](std::size_t m, std::size_t a, std::size_t w) { return policy(m, a * 2 + w); };

    std::array<double, 4> b{}, t{}, p0{}, p1{};
    double stay0 = 0.0, write1 = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        stay0 += p(0, j, 0);
        write1 += p(0, j, 1);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        b[i] = p(0, i, 0) / (1.0 + stay0);
        t[i] = write1 > 0.0 ? p(0, i, 1) / write1 : 0.0;
        p0[i] = p(0, i, 0) + p(0, i, 1);
        p1[i] = p(1, i, 0) + p(1, i, 1);
    }
    double b_total = 0.0;
    for (double x : b) b_total += x;

    QTable q(2, 8, 0.0);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t w = 0; w < 2; ++w) {
            const auto& pw = w == 0 ? p0 : p1;
            double q0 = 0.0, cont = 0.0, q1 = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                q0 += r[i][a] * b[i];
                cont += pw[i] * r[a][i];
                q1 += t[i] * r[i][a];
            }
            q(0, a * 2 + w) = q0 + (1.0 - b_total) * cont;
            q(1, a * 2 + w) = q1;
        }
    return q;
}

} // namespace memaug
