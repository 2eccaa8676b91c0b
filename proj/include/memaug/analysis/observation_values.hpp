#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "memaug/analysis/occupancy.hpp"
#include "memaug/linalg.hpp"

namespace memaug {

/// Exact evaluation projected onto observations.
struct ObservationEvaluation {
    QTable q;                       ///< q_pi(o, a) = sum_s P_pi(s | o) q_pi(s, a); zero rows for unvisited o
    OccupancyProjection projection;
    double expected_return = 0.0;
};

inline ObservationEvaluation evaluate_observations(const TabularPomdp& pomdp, const StochasticPolicy& policy) {
    const auto state_eval = evaluate_policy(pomdp, policy);
    ObservationEvaluation out;
    out.projection = project_occupancy(pomdp, state_eval.occupancy);
    out.expected_return = state_eval.expected_return;
    const std::size_t S = pomdp.num_states(), O = pomdp.num_observations(), A = pomdp.num_actions();
    out.q = QTable(O, A, 0.0);
    for (std::size_t o = 0; o < O; ++o) {
        if (!out.projection.visited(o)) continue;
        for (std::size_t s = 0; s < S; ++s) {
            const double w = out.projection.state_given_observation(s, o);
            if (w == 0.0) continue;
            for (std::size_t a = 0; a < A; ++a) out.q(o, a) += w * state_eval.q(s, a);
        }
    }
    return out;
}

/// Monte-Carlo (true) action values over observations.
inline QTable exact_obs_q(const TabularPomdp& pomdp, const StochasticPolicy& policy) {
    return evaluate_observations(pomdp, policy).q;
}

/// Fixed point of one-step TD over observations:
///   Q(o, a) = rbar(o, a) + gamma sum_o' Pbar(o' | o, a) sum_a' pi(a' | o') Q(o', a'),
/// where rbar and Pbar average the hidden state with P_pi(s | o). Transitions
/// into terminal states do not bootstrap; unvisited observations have Q = 0.
inline QTable td_fixed_point(const TabularPomdp& pomdp, const StochasticPolicy& policy) {
    const auto proj = occupancy(pomdp, policy);
    const std::size_t S = pomdp.num_states(), O = pomdp.num_observations(), A = pomdp.num_actions();
    const double gamma = pomdp.discount();
    const std::size_t n = O * A;
    DenseMatrix m = DenseMatrix::identity(n);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t o = 0; o < O; ++o) {
        if (!proj.visited(o)) continue;
        for (std::size_t s = 0; s < S; ++s) {
            const double ws = proj.state_given_observation(s, o);
            if (ws == 0.0) continue;
            for (std::size_t a = 0; a < A; ++a) {
                const std::size_t row = o * A + a;
                for (const auto& t : pomdp.transitions(s, a)) {
                    const double p = ws * t.probability;
                    if (p == 0.0) continue;
                    rhs[row] += p * pomdp.reward(t.reward_index);
                    if (pomdp.is_terminal(t.next_state)) continue;
                    for (const auto& ob : pomdp.observations(t.next_state)) {
                        if (!proj.visited(ob.observation)) continue;
                        const auto pi_next = policy.row(ob.observation);
                        for (std::size_t b = 0; b < A; ++b)
                            if (pi_next[b] > 0.0) m(row, ob.observation * A + b) -= gamma * p * ob.probability * pi_next[b];
                    }
                }
            }
        }
    }
    std::vector<double> solution;
    try {
        solution = solve_linear_system(std::move(m), std::move(rhs));
    } catch (const SingularMatrixError&) {
        throw UnsupportedConfigurationError("TD fixed point is not unique for this policy");
    }
    QTable q(O, A, 0.0);
    for (std::size_t o = 0; o < O; ++o)
        for (std::size_t a = 0; a < A; ++a) q(o, a) = solution[o * A + a];
    return q;
}

/// Maximisers of a row, using a tolerance relative to the row's magnitude.
inline std::vector<bool> maximisers(std::span<const double> row, double relative_tolerance = 1e-9) {
    double best = -INFINITY, scale = 0.0;
    for (double v : row) {
        best = std::max(best, v);
        scale = std::max(scale, std::abs(v));
    }
    std::vector<bool> out(row.size(), false);
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = row[i] >= best - relative_tolerance * scale;
    return out;
}

struct Shortcut {
    std::size_t observation = 0;
    std::size_t action = 0;
    double td_value = 0.0;
    double mc_value = 0.0;
    bool flips_argmax = false; ///< greedy under TD at its observation but not under the true values
};

/// Observation-action pairs whose TD fixed-point value differs from the true value by more than `tol`.
inline std::vector<Shortcut> detect_shortcuts(const TabularPomdp& pomdp, const StochasticPolicy& policy,
                                              double tol = 1e-6) {
    const QTable td = td_fixed_point(pomdp, policy);
    const QTable mc = exact_obs_q(pomdp, policy);
    std::vector<Shortcut> out;
    for (std::size_t o = 0; o < pomdp.num_observations(); ++o) {
        const auto td_best = maximisers(td.row(o));
        const auto mc_best = maximisers(mc.row(o));
        for (std::size_t a = 0; a < pomdp.num_actions(); ++a) {
            if (!(std::abs(td(o, a) - mc(o, a)) > tol)) continue;
            out.push_back({o, a, td(o, a), mc(o, a), td_best[a] && !mc_best[a]});
        }
    }
    return out;
}

} // namespace memaug
