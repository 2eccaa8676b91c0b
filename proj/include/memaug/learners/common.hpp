#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "memaug/augmented.hpp"
#include "memaug/policy.hpp"
#include "memaug/random.hpp"

namespace memaug {

enum class Algorithm { q_learning, sarsa_lambda, nstep_actor_critic };
enum class EvaluationMode { greedy, on_policy };
enum class Metric {
    reward_per_100_steps, ///< total reward / steps * 100 over a fixed step window, resetting at episode ends
    episode_return,       ///< mean undiscounted return over a fixed number of episodes
};

inline std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::q_learning: return "q_learning";
    case Algorithm::sarsa_lambda: return "sarsa_lambda";
    case Algorithm::nstep_actor_critic: return "nstep_actor_critic";
    }
    return "?";
}
inline std::string to_string(EvaluationMode m) { return m == EvaluationMode::greedy ? "greedy" : "on_policy"; }
inline std::string to_string(Metric m) {
    return m == Metric::reward_per_100_steps ? "reward_per_100_steps" : "episode_return";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "q_learning") return Algorithm::q_learning;
    if (s == "sarsa_lambda") return Algorithm::sarsa_lambda;
    if (s == "nstep_actor_critic") return Algorithm::nstep_actor_critic;
    throw UsageError("unknown algorithm \"" + s + "\"");
}
inline EvaluationMode parse_evaluation_mode(const std::string& s) {
    if (s == "greedy") return EvaluationMode::greedy;
    if (s == "on_policy") return EvaluationMode::on_policy;
    throw UsageError("unknown evaluation mode \"" + s + "\"");
}
inline Metric parse_metric(const std::string& s) {
    if (s == "reward_per_100_steps") return Metric::reward_per_100_steps;
    if (s == "episode_return") return Metric::episode_return;
    throw UsageError("unknown metric \"" + s + "\"");
}

struct LearnerConfig {
    Algorithm algorithm = Algorithm::q_learning;
    double learning_rate = 0.1;        ///< q-learning and Sarsa step size
    double alpha_decay = 0.0;          ///< step size alpha / n(o,a)^alpha_decay; 0 keeps it constant
    double policy_learning_rate = 0.1; ///< actor step size
    double value_learning_rate = 0.001;
    double epsilon = 0.01;
    double lambda = 0.0;
    std::size_t n = 5;
    double discount = 0.95;
    std::optional<double> initial_q; ///< defaults to max reward / (1 - discount)
    std::size_t total_steps = 1'000'000;
    std::size_t eval_period = 10'000;
    EvaluationMode eval_mode = EvaluationMode::greedy;
    Metric metric = Metric::reward_per_100_steps;
    std::size_t eval_steps = 10'000;  ///< window for reward_per_100_steps
    std::size_t eval_episodes = 1;    ///< episodes for episode_return
    std::size_t eval_episode_cap = 10'000; ///< step cap per evaluation episode when the task has no horizon

    /// Throws UsageError naming the first field out of range.
    void validate() const {
        auto rate = [](double v, const char* name) {
            if (!(v > 0.0 && v <= 1.0)) throw UsageError(std::string(name) + " must lie in (0, 1]");
        };
        rate(learning_rate, "learning_rate");
        rate(policy_learning_rate, "policy_learning_rate");
        rate(value_learning_rate, "value_learning_rate");
        if (!(alpha_decay >= 0.0 && alpha_decay <= 1.0)) throw UsageError("alpha_decay must lie in [0, 1]");
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw UsageError("epsilon must lie in [0, 1]");
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw UsageError("lambda must lie in [0, 1]");
        if (n < 1) throw UsageError("n must be at least 1");
        if (!(discount >= 0.0 && discount < 1.0)) throw UsageError("discount must lie in [0, 1)");
        if (initial_q && !std::isfinite(*initial_q)) throw UsageError("initial_q must be finite");
        if (eval_period == 0) throw UsageError("eval_period must be positive");
        if (eval_steps == 0 || eval_episodes == 0 || eval_episode_cap == 0)
            throw UsageError("evaluation window must be positive");
    }

    /// Canonical text of every field; the basis of the config hash.
    std::string canonical() const {
        std::ostringstream out;
        out.precision(17);
        out << to_string(algorithm) << '|' << learning_rate << '|' << alpha_decay << '|' << policy_learning_rate << '|'
            << value_learning_rate << '|' << epsilon << '|' << lambda << '|' << n << '|' << discount << '|'
            << (initial_q ? std::to_string(*initial_q) : "auto") << '|' << total_steps << '|' << eval_period << '|'
            << to_string(eval_mode) << '|' << to_string(metric) << '|' << eval_steps << '|' << eval_episodes << '|'
            << eval_episode_cap;
        return out.str();
    }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct MetricSample {
    std::size_t step = 0;
    double value = 0.0;
};

/// Evaluation curve of one run. Steps strictly increase.
struct RunRecord {
    std::vector<MetricSample> samples;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

/// Optimistic initial value r_max / (1 - gamma) unless the config fixes one.
inline double initial_q_value(const AugmentedEnv& env, const LearnerConfig& config) {
    if (config.initial_q) return *config.initial_q;
    return env.base().max_reward() / (1.0 - config.discount);
}

/// Greedy action with ties to the lowest index.
inline std::size_t greedy_action(std::span<const double> row) { return argmax_lowest(row); }

inline std::size_t epsilon_greedy(std::span<const double> row, double epsilon, Rng& rng) {
    if (epsilon > 0.0 && uniform01(rng) < epsilon) return uniform_index(rng, row.size());
    return greedy_action(row);
}

/// Runs the fixed policy `act(observation, rng)` on a fresh copy of the
/// environment and reports the configured metric. Never touches learner state.
template <class ActFn>
double evaluate_metric(const AugmentedEnv& env, const LearnerConfig& config, Rng& rng, ActFn&& act) {
    const std::size_t cap = env.base().horizon() ? *env.base().horizon() : config.eval_episode_cap;
    if (config.metric == Metric::reward_per_100_steps) {
        double total = 0.0;
        auto st = env.reset(rng);
        for (std::size_t t = 0; t < config.eval_steps; ++t) {
            const auto out = env.step(st, act(env.observe(st), rng), rng);
            total += out.reward;
            st = out.done ? env.reset(rng) : out.next;
        }
        return total / static_cast<double>(config.eval_steps) * 100.0;
    }
    double total = 0.0;
    for (std::size_t e = 0; e < config.eval_episodes; ++e) {
        auto st = env.reset(rng);
        for (std::size_t t = 0; t < cap; ++t) {
            const auto out = env.step(st, act(env.observe(st), rng), rng);
            total += out.reward;
            if (out.done) break;
            st = out.next;
        }
    }
    return total / static_cast<double>(config.eval_episodes);
}

/// RNG streams of a run: training draws and one stream per evaluation.
inline Rng training_rng(std::uint64_t seed) { return derive_rng(seed, 0); }
inline Rng evaluation_rng(std::uint64_t seed, std::size_t evaluation) { return derive_rng(seed, 1 + evaluation); }

/// Evaluation schedule shared by all learners: after every `eval_period`
/// training steps, and once more at the end if the total is not a multiple.
inline bool is_checkpoint(const LearnerConfig& config, std::size_t steps_done) {
    return steps_done % config.eval_period == 0 || steps_done == config.total_steps;
}

/// Step size for the k-th update of a pair.
inline double step_size(const LearnerConfig& config, std::size_t visits) {
    if (config.alpha_decay == 0.0) return config.learning_rate;
    return config.learning_rate / std::pow(static_cast<double>(visits), config.alpha_decay);
}

} // namespace memaug
