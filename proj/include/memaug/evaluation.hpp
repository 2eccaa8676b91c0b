#pragma once

#include <vector>

#include "memaug/linalg.hpp"
#include "memaug/policy.hpp"
#include "memaug/pomdp.hpp"

namespace memaug {

enum class EvaluationMethod {
    automatic,          ///< backward induction when a horizon is set, linear solve otherwise
    backward_induction, ///< requires a horizon
    linear_solve,       ///< requires discount < 1; ignores the horizon
};

/// Exact evaluation of a memoryless (observation-based) policy at state level.
///
/// With a horizon, `q(s, a)` is the expected return from taking `a` in `s`,
/// averaged over the visits to `s` under the policy (each visit contributes the
/// value with its remaining horizon), and `occupancy(s)` is the expected number
/// of visits per episode. Without a horizon both are the usual discounted
/// quantities. Terminal states have zero value and zero occupancy.
struct StateEvaluation {
    QTable q;
    std::vector<double> values;    ///< V(s) with the full horizon remaining
    std::vector<double> occupancy; ///< visits (finite horizon) or discounted visits
    double expected_return = 0.0;  ///< sum_s mu(s) V(s)
    EvaluationMethod method = EvaluationMethod::automatic;
};

/// pi(a | s) = sum_o omega(o | s) pi(a | o).
inline std::vector<double> state_action_policy(const TabularPomdp& pomdp, const StochasticPolicy& policy) {
    if (policy.num_observations() != pomdp.num_observations() || policy.num_actions() != pomdp.num_actions())
        throw UsageError("policy shape does not match the POMDP");
    const std::size_t S = pomdp.num_states(), A = pomdp.num_actions();
    std::vector<double> out(S * A, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (const auto& ob : pomdp.observations(s)) {
            if (ob.probability == 0.0) continue;
            const auto row = policy.row(ob.observation);
            for (std::size_t a = 0; a < A; ++a) out[s * A + a] += ob.probability * row[a];
        }
    return out;
}

namespace detail {

inline StateEvaluation evaluate_backward(const TabularPomdp& pomdp, const StochasticPolicy& policy) {
    if (!pomdp.horizon()) throw UnsupportedConfigurationError("backward induction requires a horizon");
    const std::size_t H = *pomdp.horizon(), S = pomdp.num_states(), A = pomdp.num_actions();
    const double gamma = pomdp.discount();
    const auto pi = state_action_policy(pomdp, policy);

    // Forward pass: per-step distribution over non-terminal states.
    std::vector<std::vector<double>> visits(H, std::vector<double>(S, 0.0));
    const auto mu = pomdp.initial_distribution();
    for (std::size_t s = 0; s < S; ++s)
        if (!pomdp.is_terminal(s)) visits[0][s] = mu[s];
    for (std::size_t t = 0; t + 1 < H; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
            const double mass = visits[t][s];
            if (mass == 0.0) continue;
            for (std::size_t a = 0; a < A; ++a) {
                const double pa = pi[s * A + a];
                if (pa == 0.0) continue;
                for (const auto& tr : pomdp.transitions(s, a))
                    if (!pomdp.is_terminal(tr.next_state)) visits[t + 1][tr.next_state] += mass * pa * tr.probability;
            }
        }
    }

    // Backward pass: q_h with h steps to go, accumulated with weight visits[H - h].
    std::vector<double> reward(S * A, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) reward[s * A + a] = expected_reward(pomdp, s, a);

    std::vector<double> value(S, 0.0), next_value(S, 0.0);
    std::vector<double> q_h(S * A, 0.0);
    QTable weighted(S, A, 0.0);
    std::vector<double> weight(S, 0.0);
    for (std::size_t h = 1; h <= H; ++h) {
        const auto& d = visits[H - h];
        for (std::size_t s = 0; s < S; ++s) {
            double v = 0.0;
            for (std::size_t a = 0; a < A; ++a) {
                double q = reward[s * A + a];
                if (!pomdp.is_terminal(s)) {
                    double cont = 0.0;
                    for (const auto& tr : pomdp.transitions(s, a))
                        if (!pomdp.is_terminal(tr.next_state)) cont += tr.probability * value[tr.next_state];
                    q += gamma * cont;
                } else {
                    q = 0.0;
                }
                q_h[s * A + a] = q;
                v += pi[s * A + a] * q;
                if (d[s] > 0.0) weighted(s, a) += d[s] * q;
            }
            next_value[s] = pomdp.is_terminal(s) ? 0.0 : v;
            weight[s] += d[s];
        }
        std::swap(value, next_value);
    }

    StateEvaluation out;
    out.method = EvaluationMethod::backward_induction;
    out.q = QTable(S, A, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a)
            out.q(s, a) = weight[s] > 0.0 ? weighted(s, a) / weight[s] : q_h[s * A + a];
    out.values = value;
    out.occupancy = weight;
    for (std::size_t s = 0; s < S; ++s) out.expected_return += mu[s] * value[s];
    return out;
}

inline StateEvaluation evaluate_linear(const TabularPomdp& pomdp, const StochasticPolicy& policy) {
    const double gamma = pomdp.discount();
    if (!(gamma < 1.0))
        throw UnsupportedConfigurationError("linear-system evaluation requires a discount below 1");
    const std::size_t S = pomdp.num_states(), A = pomdp.num_actions();
    const auto pi = state_action_policy(pomdp, policy);

    // (I - gamma P_pi) V = r_pi over non-terminal states; terminal rows pin V = 0.
    DenseMatrix m = DenseMatrix::identity(S);
    std::vector<double> rhs(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        if (pomdp.is_terminal(s)) continue;
        for (std::size_t a = 0; a < A; ++a) {
            const double pa = pi[s * A + a];
            if (pa == 0.0) continue;
            for (const auto& tr : pomdp.transitions(s, a)) {
                rhs[s] += pa * tr.probability * pomdp.reward(tr.reward_index);
                if (!pomdp.is_terminal(tr.next_state)) m(s, tr.next_state) -= gamma * pa * tr.probability;
            }
        }
    }
    const std::vector<double> value = solve_linear_system(m, rhs);

    // Discounted occupancy: (I - gamma P_pi^T) d = mu restricted to non-terminal states.
    DenseMatrix mt = DenseMatrix::identity(S);
    std::vector<double> mu_nt(S, 0.0);
    const auto mu = pomdp.initial_distribution();
    for (std::size_t s = 0; s < S; ++s) {
        if (pomdp.is_terminal(s)) continue;
        mu_nt[s] = mu[s];
        for (std::size_t a = 0; a < A; ++a) {
            const double pa = pi[s * A + a];
            if (pa == 0.0) continue;
            for (const auto& tr : pomdp.transitions(s, a))
                if (!pomdp.is_terminal(tr.next_state)) mt(tr.next_state, s) -= gamma * pa * tr.probability;
        }
    }
    std::vector<double> occupancy = solve_linear_system(mt, mu_nt);
    for (double& d : occupancy) d = std::max(d, 0.0);

    StateEvaluation out;
    out.method = EvaluationMethod::linear_solve;
    out.q = QTable(S, A, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        if (pomdp.is_terminal(s)) continue;
        for (std::size_t a = 0; a < A; ++a) {
            double q = 0.0;
            for (const auto& tr : pomdp.transitions(s, a))
                q += tr.probability * (pomdp.reward(tr.reward_index) + gamma * value[tr.next_state]);
            out.q(s, a) = q;
        }
    }
    out.values = value;
    out.occupancy = std::move(occupancy);
    for (std::size_t s = 0; s < S; ++s) out.expected_return += mu[s] * value[s];
    return out;
}

} // namespace detail

inline StateEvaluation evaluate_policy(const TabularPomdp& pomdp, const StochasticPolicy& policy,
                                       EvaluationMethod method = EvaluationMethod::automatic) {
    switch (method) {
    case EvaluationMethod::backward_induction:
        return detail::evaluate_backward(pomdp, policy);
    case EvaluationMethod::linear_solve:
        return detail::evaluate_linear(pomdp, policy);
    case EvaluationMethod::automatic:
        break;
    }
    if (pomdp.horizon()) return detail::evaluate_backward(pomdp, policy);
    if (pomdp.discount() < 1.0) return detail::evaluate_linear(pomdp, policy);
    throw UnsupportedConfigurationError("exact evaluation needs a horizon or a discount below 1");
}

/// State-level action values q_pi(s, a) of an observation-based policy.
inline QTable exact_state_q(const TabularPomdp& pomdp, const StochasticPolicy& policy,
                            EvaluationMethod method = EvaluationMethod::automatic) {
    return evaluate_policy(pomdp, policy, method).q;
}

inline double expected_return(const TabularPomdp& pomdp, const StochasticPolicy& policy) {
    return evaluate_policy(pomdp, policy).expected_return;
}

} // namespace memaug
