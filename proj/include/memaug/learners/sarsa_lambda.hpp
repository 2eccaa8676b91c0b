#pragma once

#include <algorithm>

#include "memaug/learners/common.hpp"

namespace memaug {

struct SarsaResult {
    QTable q;
    RunRecord record;
};

/// Trace entries below this magnitude are dropped; with lambda = 0 only the
/// current pair is ever active.
inline constexpr double kTraceFloor = 1e-12;

/// True-online Sarsa(lambda) over one-hot (o, a) features with dutch traces:
///   z <- gamma lambda z + (1 - alpha gamma lambda z[x]) e_x
///   w <- w + alpha delta z + alpha (Q - Q_old) (z - e_x)
/// Written this way, lambda = 0 reduces to w[x] += alpha delta exactly.
inline SarsaResult sarsa_lambda(const AugmentedEnv& env, const LearnerConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t O = env.num_observations(), A = env.num_actions();
    SarsaResult result{QTable(O, A, initial_q_value(env, config)), {}};
    result.record.seed = seed;
    result.record.config_hash = fnv1a(config.canonical());
    QTable& q = result.q;
    const double alpha = config.learning_rate, decay = config.discount * config.lambda;

    std::vector<double> z(O * A, 0.0);
    std::vector<std::size_t> active;
    auto clear_trace = [&] {
        for (std::size_t i : active) z[i] = 0.0;
        active.clear();
    };

    Rng rng = training_rng(seed);
    auto st = env.reset(rng);
    std::size_t o = env.observe(st);
    std::size_t a = epsilon_greedy(q.row(o), config.epsilon, rng);
    double q_old = 0.0;
    std::size_t evaluations = 0;
    for (std::size_t t = 1; t <= config.total_steps; ++t) {
        const auto out = env.step(st, a, rng);
        const std::size_t o_next = out.augmented_observation;
        std::size_t a_next = 0;
        double q_next = 0.0;
        if (!out.terminal) {
            a_next = epsilon_greedy(q.row(o_next), config.epsilon, rng);
            q_next = q(o_next, a_next);
        }
        const std::size_t x = o * A + a;
        const double q_now = q(o, a);
        const double delta = out.reward + config.discount * q_next - q_now;

        const double zx = z[x];
        std::size_t kept = 0;
        for (std::size_t i : active) {
            z[i] *= decay;
            if (std::abs(z[i]) < kTraceFloor && i != x) z[i] = 0.0;
            else active[kept++] = i;
        }
        active.resize(kept);
        if (zx == 0.0 && z[x] == 0.0 && std::find(active.begin(), active.end(), x) == active.end()) active.push_back(x);
        z[x] += 1.0 - alpha * decay * zx;

        const double dq = q_now - q_old;
        const auto w = q.flat();
        for (std::size_t i : active) w[i] += alpha * delta * z[i] + alpha * dq * (z[i] - (i == x ? 1.0 : 0.0));
        q_old = q_next;

        if (out.done) {
            clear_trace();
            q_old = 0.0;
            st = env.reset(rng);
            o = env.observe(st);
            a = epsilon_greedy(q.row(o), config.epsilon, rng);
        } else {
            st = out.next;
            o = o_next;
            a = a_next;
        }

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
