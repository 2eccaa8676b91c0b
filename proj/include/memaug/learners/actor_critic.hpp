#pragma once

#include <algorithm>
#include <cmath>
#include <deque>

#include "memaug/learners/common.hpp"

namespace memaug {

struct ActorCriticResult {
    StochasticPolicy policy = StochasticPolicy::uniform(1, 1);
    QTable preferences;         ///< softmax logits h(o, a)
    std::vector<double> values; ///< critic V(o)
    RunRecord record;
};

/// pi(. | o) = softmax(h(o, .)), shifted by the row maximum so it stays finite.
inline void softmax_row(std::span<const double> h, std::vector<double>& out) {
    out.resize(h.size());
    const double top = *std::max_element(h.begin(), h.end());
    double total = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) total += (out[i] = std::exp(h[i] - top));
    for (double& p : out) p /= total;
}

inline StochasticPolicy softmax_policy(const QTable& preferences) {
    std::vector<double> table, row;
    table.reserve(preferences.rows() * preferences.cols());
    for (std::size_t o = 0; o < preferences.rows(); ++o) {
        softmax_row(preferences.row(o), row);
        table.insert(table.end(), row.begin(), row.end());
    }
    return StochasticPolicy(preferences.rows(), preferences.cols(), std::move(table));
}

/// n-step actor-critic with a tabular softmax actor (uniform at start) and a
/// tabular critic. Each visited (o, a) is updated once its n-step return
///   G = r_t + ... + gamma^(n-1) r_(t+n-1) + gamma^n V(o_(t+n))
/// is available; at episode end the remaining returns are truncated (no
/// bootstrap after a terminal state, bootstrap from V after a horizon cut).
///   delta = G - V(o_t);  V(o_t) += beta delta;  h(o_t, .) += alpha delta (e_a - pi(. | o_t))
inline ActorCriticResult nstep_actor_critic(const AugmentedEnv& env, const LearnerConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t O = env.num_observations(), A = env.num_actions();
    ActorCriticResult result;
    result.preferences = QTable(O, A, 0.0);
    result.values.assign(O, 0.0);
    result.record.seed = seed;
    result.record.config_hash = fnv1a(config.canonical());
    QTable& h = result.preferences;
    std::vector<double>& v = result.values;

    struct Entry {
        std::size_t observation, action;
        double reward;
    };
    std::deque<Entry> window;
    std::vector<double> pi;
    std::vector<double> discounts(config.n + 1, 1.0);
    for (std::size_t i = 1; i <= config.n; ++i) discounts[i] = discounts[i - 1] * config.discount;

    auto update_front = [&](double bootstrap) {
        // bootstrap = V(o_end) or 0; the window front is o_t.
        double g = 0.0;
        for (std::size_t i = 0; i < window.size(); ++i) g += discounts[i] * window[i].reward;
        g += discounts[window.size()] * bootstrap;
        const Entry e = window.front();
        window.pop_front();
        const double delta = g - v[e.observation];
        v[e.observation] += config.value_learning_rate * delta;
        softmax_row(h.row(e.observation), pi);
        for (std::size_t b = 0; b < A; ++b)
            h(e.observation, b) += config.policy_learning_rate * delta * ((b == e.action ? 1.0 : 0.0) - pi[b]);
    };

    Rng rng = training_rng(seed);
    auto st = env.reset(rng);
    std::size_t o = env.observe(st);
    std::size_t evaluations = 0;
    for (std::size_t t = 1; t <= config.total_steps; ++t) {
        softmax_row(h.row(o), pi);
        const std::size_t a = sample_discrete(pi, rng);
        const auto out = env.step(st, a, rng);
        window.push_back({o, a, out.reward});
        const double bootstrap = out.terminal ? 0.0 : v[out.augmented_observation];
        if (out.done) {
            while (!window.empty()) update_front(bootstrap);
            st = env.reset(rng);
        } else {
            if (window.size() == config.n) update_front(bootstrap);
            st = out.next;
        }
        o = env.observe(st);

        if (is_checkpoint(config, t)) {
            Rng eval = evaluation_rng(seed, evaluations++);
            std::vector<double> probs;
            const double metric = evaluate_metric(env, config, eval, [&](std::size_t obs, Rng& r) {
                if (config.eval_mode == EvaluationMode::greedy) return greedy_action(h.row(obs));
                softmax_row(h.row(obs), probs);
                return sample_discrete(probs, r);
            });
            result.record.samples.push_back({t, metric});
        }
    }
    result.policy = softmax_policy(h);
    return result;
}

} // namespace memaug
