#pragma once

#include "memaug/learners/common.hpp"

namespace memaug {

struct QLearningResult {
    QTable q;
    RunRecord record;
};

/// Tabular q-learning with epsilon-greedy exploration:
///   Q(o,a) += alpha (r + gamma max_a' Q(o',a') - Q(o,a)),
/// dropping the bootstrap on terminal transitions. Truncation by the horizon
/// still bootstraps and starts a new episode.
inline QLearningResult q_learning(const AugmentedEnv& env, const LearnerConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t O = env.num_observations(), A = env.num_actions();
    QLearningResult result{QTable(O, A, initial_q_value(env, config)), {}};
    result.record.seed = seed;
    result.record.config_hash = fnv1a(config.canonical());
    QTable& q = result.q;
    std::vector<std::size_t> visits(config.alpha_decay > 0.0 ? O * A : 0, 0);

    Rng rng = training_rng(seed);
    auto st = env.reset(rng);
    std::size_t o = env.observe(st);
    std::size_t evaluations = 0;
    for (std::size_t t = 1; t <= config.total_steps; ++t) {
        const std::size_t a = epsilon_greedy(q.row(o), config.epsilon, rng);
        const auto out = env.step(st, a, rng);
        double target = out.reward;
        if (!out.terminal) {
            const auto next = q.row(out.augmented_observation);
            target += config.discount * next[greedy_action(next)];
        }
        const double alpha = visits.empty() ? config.learning_rate : step_size(config, ++visits[o * A + a]);
        q(o, a) += alpha * (target - q(o, a));
        st = out.done ? env.reset(rng) : out.next;
        o = env.observe(st);

        if (is_checkpoint(config, t)) {
            Rng eval = evaluation_rng(seed, evaluations++);
            const double metric = evaluate_metric(env, config, eval, [&](std::size_t obs, Rng& r) {
                return config.eval_mode == EvaluationMode::greedy ? greedy_action(q.row(obs))
                                                                  : epsilon_greedy(q.row(obs), config.epsilon, r);
            });
            result.record.samples.push_back({t, metric});
        }
    }
    return result;
}

} // namespace memaug
