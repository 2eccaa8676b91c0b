#pragma once

#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "memaug/memory.hpp"
#include "memaug/pomdp.hpp"

namespace memaug {

inline constexpr std::size_t kDefaultProductStateCap = 1'000'000;

/// Hidden configuration of an augmented episode.
struct AugmentedState {
    std::size_t state = 0;       ///< sub-environment state
    std::size_t memory = 0;      ///< memory state m
    std::size_t observation = 0; ///< current sub-environment observation o
    std::size_t steps = 0;       ///< actions executed so far in the episode
};

struct AugmentedStep {
    AugmentedState next;
    std::size_t reward_index = 0;
    double reward = 0.0;
    std::size_t augmented_observation = 0;
    bool terminal = false;
    bool done = false;
};

/// Memory-augmented environment <P, M_P>. The agent observes <o, m> and acts
/// with <a, w>; both pairs are flattened into dense indices:
///   observation index = m * |O| + o,   action index = a * |W| + w.
class AugmentedEnv {
public:
    AugmentedEnv(TabularPomdp base, MemoryModule memory)
        : base_(std::make_shared<const TabularPomdp>(std::move(base))),
          memory_(std::make_shared<const MemoryModule>(std::move(memory))) {}

    const TabularPomdp& base() const noexcept { return *base_; }
    const MemoryModule& memory() const noexcept { return *memory_; }

    std::size_t num_observations() const noexcept {
        return memory_->num_memory_states() * base_->num_observations();
    }
    std::size_t num_actions() const noexcept { return base_->num_actions() * memory_->num_write_actions(); }

    std::size_t encode_observation(std::size_t observation, std::size_t memory) const {
        base_->check_observation(observation);
        if (memory >= memory_->num_memory_states()) throw IndexError("memory state out of range");
        return memory * base_->num_observations() + observation;
    }
    /// (o, m)
    std::pair<std::size_t, std::size_t> decode_observation(std::size_t index) const {
        if (index >= num_observations()) throw IndexError("augmented observation out of range");
        return {index % base_->num_observations(), index / base_->num_observations()};
    }

    std::size_t encode_action(std::size_t action, std::size_t write) const {
        base_->check_action(action);
        if (write >= memory_->num_write_actions()) throw IndexError("write action out of range");
        return action * memory_->num_write_actions() + write;
    }
    /// (a, w)
    std::pair<std::size_t, std::size_t> decode_action(std::size_t index) const {
        if (index >= num_actions()) throw IndexError("augmented action out of range");
        return {index / memory_->num_write_actions(), index % memory_->num_write_actions()};
    }

    std::string observation_label(std::size_t index) const {
        const auto [o, m] = decode_observation(index);
        return "<" + base_->observation_label(o) + "," + memory_->state_label(m) + ">";
    }
    std::string action_label(std::size_t index) const {
        const auto [a, w] = decode_action(index);
        return base_->action_label(a) + memory_->write_label(w);
    }

    /// s0 ~ mu, o0 ~ omega(.|s0), m0 ~ eta.
    AugmentedState reset(Rng& rng) const {
        AugmentedState st;
        st.state = sample_initial_state(*base_, rng);
        st.observation = sample_observation(*base_, st.state, rng);
        st.memory = memory_->sample_initial(rng);
        st.steps = 0;
        return st;
    }

    std::size_t observe(const AugmentedState& st) const { return st.memory * base_->num_observations() + st.observation; }

    /// The sub-environment moves on a; the memory moves on (m, w, o, a, r, o').
    AugmentedStep step(const AugmentedState& st, std::size_t pair_action, Rng& rng) const {
        const auto [a, w] = decode_action(pair_action);
        const StepResult sub = memaug::step(*base_, st.state, a, rng, st.steps);
        MemoryContext ctx{st.memory, w, st.observation, a, sub.reward_index, sub.observation};
        AugmentedStep out;
        out.next.state = sub.next_state;
        out.next.observation = sub.observation;
        out.next.memory = memory_->sample(ctx, rng);
        out.next.steps = st.steps + 1;
        out.reward_index = sub.reward_index;
        out.reward = sub.reward;
        out.augmented_observation = observe(out.next);
        out.terminal = sub.terminal;
        out.done = sub.done;
        return out;
    }

private:
    std::shared_ptr<const TabularPomdp> base_;
    std::shared_ptr<const MemoryModule> memory_;
};

inline AugmentedEnv make_augmented(const TabularPomdp& base, const MemorySpec& spec,
                                   std::size_t cap = kDefaultMemoryStateCap) {
    return AugmentedEnv(base, make_memory(spec, base.num_observations(), base.num_actions(), cap));
}

struct ProductState {
    std::size_t state = 0;
    std::size_t memory = 0;
    std::size_t observation = 0;

    auto operator<=>(const ProductState&) const = default;
};

/// Explicit POMDP equivalent to an augmented environment, over the states
/// <s, m, o> reachable from mu'. Its observation and action indices coincide
/// with those of the AugmentedEnv it was built from.
struct ProductPomdp {
    TabularPomdp pomdp;
    std::vector<ProductState> states;
};

struct ProductOptions {
    std::size_t cap = kDefaultProductStateCap;
    bool reachable_only = true; ///< false materialises every <s, m, o>
};

/// S' = S x M x O, by default restricted to the forward closure of mu'(s, m, o) = mu(s) eta(m) omega(o|s);
/// p'(<s',m',o'>, r | <s,m,o>, <a,w>) = p(s', r | s, a) Gamma(m' | m, w, o, a, r, o') omega(o' | s').
inline ProductPomdp build_product_pomdp(const AugmentedEnv& env, const ProductOptions& options = {}) {
    const std::size_t cap = options.cap;
    const TabularPomdp& base = env.base();
    const MemoryModule& mem = env.memory();
    const std::size_t A = base.num_actions(), W = mem.num_write_actions();

    std::map<ProductState, std::size_t> index;
    std::vector<ProductState> states;
    auto intern = [&](const ProductState& ps) {
        auto [it, inserted] = index.try_emplace(ps, states.size());
        if (inserted) {
            if (states.size() >= cap)
                throw CapacityError("product POMDP would exceed " + std::to_string(cap) + " states");
            states.push_back(ps);
        }
        return it->second;
    };

    if (!options.reachable_only) {
        const std::size_t full = base.num_states() * mem.num_memory_states() * base.num_observations();
        if (full > cap) throw CapacityError("product POMDP would exceed " + std::to_string(cap) + " states");
        for (std::size_t s = 0; s < base.num_states(); ++s)
            for (std::size_t m = 0; m < mem.num_memory_states(); ++m)
                for (std::size_t o = 0; o < base.num_observations(); ++o) intern({s, m, o});
    }

    std::map<std::size_t, double> initial;
    const auto mu = base.initial_distribution();
    const auto& eta = mem.initial_distribution();
    for (std::size_t s = 0; s < base.num_states(); ++s) {
        if (mu[s] == 0.0) continue;
        for (std::size_t m = 0; m < eta.size(); ++m) {
            if (eta[m] == 0.0) continue;
            for (const auto& ob : base.observations(s)) {
                if (ob.probability == 0.0) continue;
                initial[intern({s, m, ob.observation})] += mu[s] * eta[m] * ob.probability;
            }
        }
    }

    std::vector<std::vector<std::vector<Transition>>> dynamics;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const ProductState cur = states[i];
        std::vector<std::vector<Transition>> rows(A * W);
        if (!base.is_terminal(cur.state)) {
            for (std::size_t a = 0; a < A; ++a) {
                for (std::size_t w = 0; w < W; ++w) {
                    std::map<std::pair<std::size_t, std::size_t>, double> merged; // (next, reward) -> prob
                    for (const auto& tr : base.transitions(cur.state, a)) {
                        if (tr.probability == 0.0) continue;
                        for (const auto& ob : base.observations(tr.next_state)) {
                            if (ob.probability == 0.0) continue;
                            MemoryContext ctx{cur.memory, w, cur.observation, a, tr.reward_index, ob.observation};
                            for (const auto& mo : mem.distribution(ctx)) {
                                if (mo.probability == 0.0) continue;
                                const std::size_t next = intern({tr.next_state, mo.memory, ob.observation});
                                merged[{next, tr.reward_index}] += tr.probability * mo.probability * ob.probability;
                            }
                        }
                    }
                    auto& out = rows[a * W + w];
                    for (const auto& [key, p] : merged) out.push_back({key.first, key.second, p});
                }
            }
        }
        dynamics.push_back(std::move(rows));
    }

    PomdpDefinition def;
    def.num_states = states.size();
    def.num_observations = env.num_observations();
    def.num_actions = env.num_actions();
    def.rewards.assign(base.rewards().begin(), base.rewards().end());
    def.discount = base.discount();
    def.horizon = base.horizon();
    def.initial_distribution.assign(states.size(), 0.0);
    for (const auto& [i, p] : initial) def.initial_distribution[i] = p;
    def.dynamics = std::move(dynamics);
    for (const auto& ps : states) {
        def.observation_fn.push_back({{env.encode_observation(ps.observation, ps.memory), 1.0}});
        def.terminal.push_back(base.is_terminal(ps.state));
        def.state_labels.push_back(base.state_label(ps.state) + "|" + mem.state_label(ps.memory) + "|" +
                                   base.observation_label(ps.observation));
    }
    for (std::size_t i = 0; i < env.num_observations(); ++i) def.observation_labels.push_back(env.observation_label(i));
    for (std::size_t i = 0; i < env.num_actions(); ++i) def.action_labels.push_back(env.action_label(i));

    // Renormalise the merged rows so accumulated rounding stays within tolerance.
    for (auto& per_state : def.dynamics)
        for (auto& outcomes : per_state) {
            double total = 0.0;
            for (const auto& t : outcomes) total += t.probability;
            if (total > 0.0)
                for (auto& t : outcomes) t.probability /= total;
        }
    double mass = 0.0;
    for (double p : def.initial_distribution) mass += p;
    for (double& p : def.initial_distribution) p /= mass;

    return {TabularPomdp(std::move(def)), std::move(states)};
}

} // namespace memaug
