#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memaug/errors.hpp"
#include "memaug/random.hpp"

namespace memaug {

/// Probability mass tolerance used by every row-stochastic invariant.
inline constexpr double kProbabilityTolerance = 1e-12;

struct Transition {
    std::size_t next_state = 0;
    std::size_t reward_index = 0;
    double probability = 0.0;
};

struct ObservationProbability {
    std::size_t observation = 0;
    double probability = 0.0;
};

/// Plain description of a finite POMDP <S, O, A, R, p, omega, gamma, mu>.
///
/// `dynamics[s][a]` lists the joint outcomes (s', r) of p(s', r | s, a), with
/// rewards referenced by index into `rewards`. Rows of terminal states may be
/// left empty; TabularPomdp fills them with a zero-reward self loop.
struct PomdpDefinition {
    std::size_t num_states = 0;
    std::size_t num_observations = 0;
    std::size_t num_actions = 0;
    std::vector<double> rewards;
    std::vector<std::vector<std::vector<Transition>>> dynamics;
    std::vector<std::vector<ObservationProbability>> observation_fn;
    double discount = 1.0;
    std::vector<double> initial_distribution;
    std::vector<bool> terminal;
    std::optional<std::size_t> horizon;

    // Optional human-readable names; empty means "generate".
    std::vector<std::string> state_labels;
    std::vector<std::string> observation_labels;
    std::vector<std::string> action_labels;
};

/// Immutable, validated tabular POMDP.
class TabularPomdp {
public:
    explicit TabularPomdp(PomdpDefinition def) : def_(std::move(def)) {
        normalize_and_validate();
    }

    std::size_t num_states() const noexcept { return def_.num_states; }
    std::size_t num_observations() const noexcept { return def_.num_observations; }
    std::size_t num_actions() const noexcept { return def_.num_actions; }

    std::span<const double> rewards() const noexcept { return def_.rewards; }
    double reward(std::size_t index) const { return def_.rewards.at(index); }
    double max_reward() const { return *std::max_element(def_.rewards.begin(), def_.rewards.end()); }

    std::span<const Transition> transitions(std::size_t s, std::size_t a) const {
        check_state(s);
        check_action(a);
        return def_.dynamics[s][a];
    }

    std::span<const ObservationProbability> observations(std::size_t s) const {
        check_state(s);
        return def_.observation_fn[s];
    }

    /// omega(o | s) by lookup.
    double observation_probability(std::size_t s, std::size_t o) const {
        double p = 0.0;
        for (const auto& entry : observations(s))
            if (entry.observation == o) p += entry.probability;
        return p;
    }

    double discount() const noexcept { return def_.discount; }
    std::span<const double> initial_distribution() const noexcept { return def_.initial_distribution; }
    bool is_terminal(std::size_t s) const {
        check_state(s);
        return def_.terminal[s];
    }
    std::optional<std::size_t> horizon() const noexcept { return def_.horizon; }

    const std::string& state_label(std::size_t s) const { return def_.state_labels.at(s); }
    const std::string& observation_label(std::size_t o) const { return def_.observation_labels.at(o); }
    const std::string& action_label(std::size_t a) const { return def_.action_labels.at(a); }

    const PomdpDefinition& definition() const noexcept { return def_; }

    /// Same model with every reward multiplied by `factor`.
    TabularPomdp with_scaled_rewards(double factor) const {
        PomdpDefinition scaled = def_;
        for (double& r : scaled.rewards) r *= factor;
        return TabularPomdp(std::move(scaled));
    }

    TabularPomdp with_discount(double discount) const {
        PomdpDefinition copy = def_;
        copy.discount = discount;
        return TabularPomdp(std::move(copy));
    }

    void check_state(std::size_t s) const {
        if (s >= def_.num_states) throw IndexError("state index " + std::to_string(s) + " out of range");
    }
    void check_action(std::size_t a) const {
        if (a >= def_.num_actions) throw IndexError("action index " + std::to_string(a) + " out of range");
    }
    void check_observation(std::size_t o) const {
        if (o >= def_.num_observations)
            throw IndexError("observation index " + std::to_string(o) + " out of range");
    }

private:
    static std::string at(const std::string& field, std::size_t i) { return field + "/" + std::to_string(i); }

    std::size_t zero_reward_index() {
        for (std::size_t i = 0; i < def_.rewards.size(); ++i)
            if (def_.rewards[i] == 0.0) return i;
        def_.rewards.push_back(0.0);
        return def_.rewards.size() - 1;
    }

    void normalize_and_validate() {
        const std::size_t S = def_.num_states, O = def_.num_observations, A = def_.num_actions;
        if (S == 0) throw ValidationError("/num_states", "must be positive");
        if (O == 0) throw ValidationError("/num_observations", "must be positive");
        if (A == 0) throw ValidationError("/num_actions", "must be positive");
        if (def_.rewards.empty()) throw ValidationError("/rewards", "reward set is empty");
        for (std::size_t i = 0; i < def_.rewards.size(); ++i)
            if (!std::isfinite(def_.rewards[i])) throw ValidationError(at("/rewards", i), "reward is not finite");
        if (!(def_.discount >= 0.0 && def_.discount <= 1.0))
            throw ValidationError("/discount", "must lie in [0, 1]");
        if (def_.horizon && *def_.horizon == 0) throw ValidationError("/horizon", "must be positive when set");

        if (def_.terminal.empty()) def_.terminal.assign(S, false);
        if (def_.terminal.size() != S) throw ValidationError("/terminal", "expected one flag per state");
        if (def_.initial_distribution.size() != S)
            throw ValidationError("/initial", "expected one probability per state");
        check_distribution(def_.initial_distribution, "/initial");

        if (def_.dynamics.size() != S) throw ValidationError("/dynamics", "expected one row per state");
        if (def_.observation_fn.size() != S) throw ValidationError("/observations", "expected one row per state");

        for (std::size_t s = 0; s < S; ++s) {
            auto& rows = def_.dynamics[s];
            const std::string srow = at("/dynamics", s);
            if (def_.terminal[s] && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.empty(); })) {
                const std::size_t zero = zero_reward_index();
                rows.assign(A, std::vector<Transition>{{s, zero, 1.0}});
            }
            if (rows.size() != A) throw ValidationError(srow, "expected one outcome list per action");
            for (std::size_t a = 0; a < A; ++a) {
                const std::string path = at(srow, a);
                double total = 0.0;
                for (std::size_t k = 0; k < rows[a].size(); ++k) {
                    const Transition& t = rows[a][k];
                    if (t.next_state >= S) throw ValidationError(at(path, k), "next state out of range");
                    if (t.reward_index >= def_.rewards.size())
                        throw ValidationError(at(path, k), "reward index out of range");
                    if (!(t.probability >= 0.0) || !std::isfinite(t.probability))
                        throw ValidationError(at(path, k), "probability must be finite and non-negative");
                    if (def_.terminal[s] && t.probability > 0.0 &&
                        (t.next_state != s || def_.rewards[t.reward_index] != 0.0))
                        throw ValidationError(at(path, k), "terminal states must be absorbing with zero reward");
                    total += t.probability;
                }
                if (std::abs(total - 1.0) > kProbabilityTolerance)
                    throw ValidationError(path, "transition probabilities sum to " + std::to_string(total));
            }

            const std::string opath = at("/observations", s);
            double total = 0.0;
            for (std::size_t k = 0; k < def_.observation_fn[s].size(); ++k) {
                const auto& e = def_.observation_fn[s][k];
                if (e.observation >= O) throw ValidationError(at(opath, k), "observation out of range");
                if (!(e.probability >= 0.0) || !std::isfinite(e.probability))
                    throw ValidationError(at(opath, k), "probability must be finite and non-negative");
                total += e.probability;
            }
            if (std::abs(total - 1.0) > kProbabilityTolerance)
                throw ValidationError(opath, "observation probabilities sum to " + std::to_string(total));
        }

        fill_labels(def_.state_labels, S, "s", "/state_labels");
        fill_labels(def_.observation_labels, O, "o", "/observation_labels");
        fill_labels(def_.action_labels, A, "a", "/action_labels");
    }

    static void check_distribution(const std::vector<double>& probs, const std::string& path) {
        double total = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (!(probs[i] >= 0.0) || !std::isfinite(probs[i]))
                throw ValidationError(at(path, i), "probability must be finite and non-negative");
            total += probs[i];
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance)
            throw ValidationError(path, "probabilities sum to " + std::to_string(total));
    }

    static void fill_labels(std::vector<std::string>& labels, std::size_t n, const char* prefix,
                            const char* path) {
        if (labels.empty()) {
            labels.reserve(n);
            for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
        } else if (labels.size() != n) {
            throw ValidationError(path, "expected " + std::to_string(n) + " labels");
        }
    }

    PomdpDefinition def_;
};

struct StepResult {
    std::size_t next_state = 0;
    std::size_t reward_index = 0;
    double reward = 0.0;
    std::size_t observation = 0;
    bool terminal = false; ///< s' is a terminal state
    bool done = false;     ///< terminal, or the horizon was reached
};

inline std::size_t sample_initial_state(const TabularPomdp& pomdp, Rng& rng) {
    return sample_discrete(pomdp.initial_distribution(), rng);
}

inline std::size_t sample_observation(const TabularPomdp& pomdp, std::size_t state, Rng& rng) {
    const auto row = pomdp.observations(state);
    return row[sample_discrete(row.size(), [&](std::size_t i) { return row[i].probability; }, rng)].observation;
}

/// One environment transition. `steps_taken` counts actions already executed in
/// the episode; it only matters for horizon truncation.
inline StepResult step(const TabularPomdp& pomdp, std::size_t state, std::size_t action, Rng& rng,
                       std::size_t steps_taken = 0) {
    pomdp.check_state(state);
    pomdp.check_action(action);
    if (pomdp.is_terminal(state)) throw UsageError("step: state " + std::to_string(state) + " is terminal");

    const auto outcomes = pomdp.transitions(state, action);
    const Transition& t =
        outcomes[sample_discrete(outcomes.size(), [&](std::size_t i) { return outcomes[i].probability; }, rng)];
    StepResult result;
    result.next_state = t.next_state;
    result.reward_index = t.reward_index;
    result.reward = pomdp.reward(t.reward_index);
    result.observation = sample_observation(pomdp, t.next_state, rng);
    result.terminal = pomdp.is_terminal(t.next_state);
    result.done = result.terminal || (pomdp.horizon() && steps_taken + 1 >= *pomdp.horizon());
    return result;
}

struct TrajectoryStep {
    std::size_t observation = 0;
    std::size_t action = 0;
    double reward = 0.0;
    std::size_t next_observation = 0;
};

/// Observable record of one episode.
struct Trajectory {
    std::size_t initial_observation = 0;
    std::vector<TrajectoryStep> steps;
    bool terminated = false;

    double total_reward() const {
        double total = 0.0;
        for (const auto& s : steps) total += s.reward;
        return total;
    }
};

/// p(s' | s, a) marginalised over rewards.
inline double transition_probability(const TabularPomdp& pomdp, std::size_t s, std::size_t a, std::size_t next) {
    double p = 0.0;
    for (const auto& t : pomdp.transitions(s, a))
        if (t.next_state == next) p += t.probability;
    return p;
}

/// Expected immediate reward r(s, a).
inline double expected_reward(const TabularPomdp& pomdp, std::size_t s, std::size_t a) {
    double r = 0.0;
    for (const auto& t : pomdp.transitions(s, a)) r += t.probability * pomdp.reward(t.reward_index);
    return r;
}

} // namespace memaug
