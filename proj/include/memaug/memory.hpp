#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memaug/errors.hpp"
#include "memaug/random.hpp"

namespace memaug {

inline constexpr std::size_t kDefaultMemoryStateCap = 1'000'000;

enum class MemoryFamily { none, binary, k_order, observation, observation_action, custom };

inline std::string family_prefix(MemoryFamily f) {
    switch (f) {
    case MemoryFamily::none: return "none";
    case MemoryFamily::binary: return "B";
    case MemoryFamily::k_order: return "K";
    case MemoryFamily::observation: return "O";
    case MemoryFamily::observation_action: return "OA";
    case MemoryFamily::custom: return "custom";
    }
    return "custom";
}

/// What a memory module was built for: family, buffer size and the alphabets.
struct MemoryDescriptor {
    MemoryFamily family = MemoryFamily::none;
    std::size_t k = 0;
    std::size_t num_observations = 0;
    std::size_t num_actions = 0;

    std::string spec() const {
        if (family == MemoryFamily::none || family == MemoryFamily::custom) return family_prefix(family);
        return family_prefix(family) + std::to_string(k);
    }
};

/// Inputs of the writing distribution Gamma(m' | m, w, o, a, r, o').
struct MemoryContext {
    std::size_t memory = 0;
    std::size_t write = 0;
    std::size_t observation = 0;
    std::size_t action = 0;
    std::size_t reward_index = 0;
    std::size_t next_observation = 0;
};

struct MemoryOutcome {
    std::size_t memory = 0;
    double probability = 0.0;
};

/// External memory <M, W, Gamma, eta> with dense memory-state indices.
///
/// Gamma is either a deterministic rule (the built-in families) or an explicit
/// distribution; `distribution` and `sample` agree in both cases.
class MemoryModule {
public:
    using DeterministicRule = std::function<std::size_t(const MemoryContext&)>;
    using StochasticRule = std::function<std::vector<MemoryOutcome>(const MemoryContext&)>;

    MemoryModule(MemoryDescriptor descriptor, std::size_t num_states, std::size_t num_writes,
                 std::vector<double> initial, DeterministicRule rule, std::vector<std::string> state_labels = {},
                 std::vector<std::string> write_labels = {})
        : descriptor_(descriptor), num_states_(num_states), num_writes_(num_writes), initial_(std::move(initial)),
          deterministic_(std::move(rule)), state_labels_(std::move(state_labels)),
          write_labels_(std::move(write_labels)) {
        validate();
    }

    MemoryModule(MemoryDescriptor descriptor, std::size_t num_states, std::size_t num_writes,
                 std::vector<double> initial, StochasticRule rule, std::vector<std::string> state_labels = {},
                 std::vector<std::string> write_labels = {})
        : descriptor_(descriptor), num_states_(num_states), num_writes_(num_writes), initial_(std::move(initial)),
          stochastic_(std::move(rule)), state_labels_(std::move(state_labels)),
          write_labels_(std::move(write_labels)) {
        validate();
    }

    const MemoryDescriptor& descriptor() const noexcept { return descriptor_; }
    std::size_t num_memory_states() const noexcept { return num_states_; }
    std::size_t num_write_actions() const noexcept { return num_writes_; }
    const std::vector<double>& initial_distribution() const noexcept { return initial_; }
    bool is_deterministic() const noexcept { return static_cast<bool>(deterministic_); }

    std::vector<MemoryOutcome> distribution(const MemoryContext& ctx) const {
        check(ctx);
        if (deterministic_) return {{deterministic_(ctx), 1.0}};
        return stochastic_(ctx);
    }

    std::size_t sample(const MemoryContext& ctx, Rng& rng) const {
        check(ctx);
        if (deterministic_) return deterministic_(ctx);
        const auto outcomes = stochastic_(ctx);
        return outcomes[sample_discrete(outcomes.size(), [&](std::size_t i) { return outcomes[i].probability; },
                                        rng)]
            .memory;
    }

    std::size_t sample_initial(Rng& rng) const { return sample_discrete(initial_, rng); }

    const std::string& state_label(std::size_t m) const { return state_labels_.at(m); }
    const std::string& write_label(std::size_t w) const { return write_labels_.at(w); }

private:
    void validate() {
        if (num_states_ == 0 || num_writes_ == 0) throw UsageError("MemoryModule: empty memory or write set");
        if (initial_.size() != num_states_) throw UsageError("MemoryModule: initial distribution has wrong size");
        double total = 0.0;
        for (double p : initial_) total += p;
        if (std::abs(total - 1.0) > 1e-12) throw UsageError("MemoryModule: initial distribution does not sum to 1");
        if (state_labels_.empty())
            for (std::size_t m = 0; m < num_states_; ++m) state_labels_.push_back("m" + std::to_string(m));
        if (write_labels_.empty())
            for (std::size_t w = 0; w < num_writes_; ++w) write_labels_.push_back("w" + std::to_string(w));
        if (state_labels_.size() != num_states_ || write_labels_.size() != num_writes_)
            throw UsageError("MemoryModule: label count mismatch");
    }

    void check(const MemoryContext& ctx) const {
        if (ctx.memory >= num_states_) throw IndexError("memory state out of range");
        if (ctx.write >= num_writes_) throw IndexError("write action out of range");
    }

    MemoryDescriptor descriptor_;
    std::size_t num_states_;
    std::size_t num_writes_;
    std::vector<double> initial_;
    DeterministicRule deterministic_;
    StochasticRule stochastic_;
    std::vector<std::string> state_labels_;
    std::vector<std::string> write_labels_;
};

/// Dense index over buffers of k slots holding symbols from an alphabet of size
/// n, with empty slots only as a prefix. Index 0 is the all-empty buffer;
/// buffers with f filled slots occupy a contiguous block after those with f - 1.
class BufferCodec {
public:
    using Slot = std::optional<std::size_t>;

    BufferCodec(std::size_t k, std::size_t alphabet, std::size_t cap = kDefaultMemoryStateCap)
        : k_(k), n_(alphabet) {
        if (k == 0) throw UsageError("BufferCodec: k must be at least 1");
        if (alphabet == 0) throw UsageError("BufferCodec: empty alphabet");
        const std::string overflow = "buffer memory would exceed " + std::to_string(cap) + " states";
        std::size_t total = 0;
        std::size_t block = 1;
        for (std::size_t f = 0; f <= k; ++f) {
            if (block > cap || total > cap - block) throw CapacityError(overflow);
            offsets_.push_back(total);
            powers_.push_back(block);
            total += block;
            if (f < k) {
                if (block > cap / n_) throw CapacityError(overflow);
                block *= n_;
            }
        }
        offsets_.push_back(total);
    }

    std::size_t k() const noexcept { return k_; }
    std::size_t alphabet_size() const noexcept { return n_; }
    std::size_t size() const noexcept { return offsets_.back(); }

    /// Number of filled slots of the buffer at `index`.
    std::size_t filled(std::size_t index) const {
        check(index);
        std::size_t f = 0;
        while (index >= offsets_[f + 1]) ++f;
        return f;
    }

    /// Slots oldest-first; nullopt marks an empty slot.
    std::vector<Slot> decode(std::size_t index) const {
        const std::size_t f = filled(index);
        std::size_t rest = index - offsets_[f];
        std::vector<Slot> slots(k_, std::nullopt);
        for (std::size_t i = 0; i < f; ++i) {
            slots[k_ - 1 - i] = rest % n_;
            rest /= n_;
        }
        return slots;
    }

    std::size_t encode(const std::vector<Slot>& slots) const {
        if (slots.size() != k_) throw UsageError("BufferCodec: wrong number of slots");
        std::size_t f = 0;
        while (f < k_ && slots[k_ - 1 - f].has_value()) ++f;
        for (std::size_t i = 0; i + f < k_; ++i)
            if (slots[i].has_value()) throw UsageError("BufferCodec: empty slots must form a prefix");
        std::size_t value = 0;
        for (std::size_t i = k_ - f; i < k_; ++i) {
            if (*slots[i] >= n_) throw IndexError("BufferCodec: symbol out of range");
            value = value * n_ + *slots[i];
        }
        return offsets_[f] + value;
    }

    /// <e1, ..., ek> -> <e2, ..., ek, symbol>.
    std::size_t push(std::size_t index, std::size_t symbol) const {
        if (symbol >= n_) throw IndexError("BufferCodec: symbol out of range");
        const std::size_t f = filled(index);
        std::size_t value = index - offsets_[f];
        if (f == k_) {
            value %= powers_[k_ - 1];
            return offsets_[k_] + value * n_ + symbol;
        }
        return offsets_[f + 1] + value * n_ + symbol;
    }

private:
    void check(std::size_t index) const {
        if (index >= size()) throw IndexError("BufferCodec: index out of range");
    }

    std::size_t k_;
    std::size_t n_;
    std::vector<std::size_t> offsets_; // offsets_[f] = first index with f filled slots
    std::vector<std::size_t> powers_;  // powers_[f] = n^f
};

namespace detail {

inline std::vector<double> point_mass(std::size_t n, std::size_t at) {
    std::vector<double> v(n, 0.0);
    v[at] = 1.0;
    return v;
}

inline std::vector<std::string> buffer_labels(const BufferCodec& codec,
                                              const std::function<std::string(std::size_t)>& symbol) {
    std::vector<std::string> labels;
    labels.reserve(codec.size());
    for (std::size_t m = 0; m < codec.size(); ++m) {
        std::string label = "<";
        const auto slots = codec.decode(m);
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (i) label += ",";
            label += slots[i] ? symbol(*slots[i]) : std::string("\xE2\x88\x85"); // empty set sign
        }
        labels.push_back(label + ">");
    }
    return labels;
}

} // namespace detail

/// Write-action indices of the gated buffers.
inline constexpr std::size_t kSkipWrite = 0; ///< bottom: leave the buffer unchanged
inline constexpr std::size_t kPushWrite = 1; ///< top: push into the buffer

/// Trivial memory: one state, one write action.
inline MemoryModule make_no_memory() {
    MemoryDescriptor d{MemoryFamily::none, 0, 0, 0};
    return MemoryModule(d, 1, 1, {1.0}, MemoryModule::DeterministicRule([](const MemoryContext&) -> std::size_t { return 0; }),
                        {"-"}, {"-"});
}

/// Bk: M = W = {0,1}^k, eta(0^k) = 1, m' = w.
inline MemoryModule make_bk(std::size_t k, std::size_t cap = kDefaultMemoryStateCap) {
    if (k == 0) throw UsageError("make_bk: k must be at least 1");
    if (k >= 63 || (std::size_t{1} << k) > cap)
        throw CapacityError("B" + std::to_string(k) + " needs 2^" + std::to_string(k) + " memory states");
    const std::size_t n = std::size_t{1} << k;
    std::vector<std::string> labels;
    for (std::size_t v = 0; v < n; ++v) {
        std::string bits(k, '0');
        for (std::size_t b = 0; b < k; ++b)
            if (v >> (k - 1 - b) & 1U) bits[b] = '1';
        labels.push_back(bits);
    }
    MemoryDescriptor d{MemoryFamily::binary, k, 0, 0};
    return MemoryModule(d, n, n, detail::point_mass(n, 0),
                        MemoryModule::DeterministicRule([](const MemoryContext& c) { return c.write; }), labels,
                        labels);
}

/// Kk: k-order buffer that always pushes the current observation o.
inline MemoryModule make_kk(std::size_t k, std::size_t num_observations, std::size_t cap = kDefaultMemoryStateCap) {
    auto codec = std::make_shared<const BufferCodec>(k, num_observations, cap);
    MemoryDescriptor d{MemoryFamily::k_order, k, num_observations, 0};
    auto labels = detail::buffer_labels(*codec, [](std::size_t o) { return "o" + std::to_string(o); });
    return MemoryModule(d, codec->size(), 1, detail::point_mass(codec->size(), 0),
                        MemoryModule::DeterministicRule(
                            [codec](const MemoryContext& c) { return codec->push(c.memory, c.observation); }),
                        std::move(labels), {"\xE2\x8A\xA4"});
}

/// Ok: the agent chooses whether to push the current observation o.
inline MemoryModule make_ok(std::size_t k, std::size_t num_observations, std::size_t cap = kDefaultMemoryStateCap) {
    auto codec = std::make_shared<const BufferCodec>(k, num_observations, cap);
    MemoryDescriptor d{MemoryFamily::observation, k, num_observations, 0};
    auto labels = detail::buffer_labels(*codec, [](std::size_t o) { return "o" + std::to_string(o); });
    return MemoryModule(d, codec->size(), 2, detail::point_mass(codec->size(), 0),
                        MemoryModule::DeterministicRule([codec](const MemoryContext& c) {
                            return c.write == kPushWrite ? codec->push(c.memory, c.observation) : c.memory;
                        }),
                        std::move(labels), {"\xE2\x8A\xA5", "\xE2\x8A\xA4"});
}

/// OAk: like Ok but a push stores the pair (o, a) of the executed environment action.
inline MemoryModule make_oak(std::size_t k, std::size_t num_observations, std::size_t num_actions,
                             std::size_t cap = kDefaultMemoryStateCap) {
    if (num_actions == 0) throw UsageError("make_oak: empty action alphabet");
    auto codec = std::make_shared<const BufferCodec>(k, num_observations * num_actions, cap);
    MemoryDescriptor d{MemoryFamily::observation_action, k, num_observations, num_actions};
    auto labels = detail::buffer_labels(*codec, [num_actions](std::size_t e) {
        return "(o" + std::to_string(e / num_actions) + ",a" + std::to_string(e % num_actions) + ")";
    });
    return MemoryModule(d, codec->size(), 2, detail::point_mass(codec->size(), 0),
                        MemoryModule::DeterministicRule([codec, num_actions](const MemoryContext& c) {
                            return c.write == kPushWrite
                                       ? codec->push(c.memory, c.observation * num_actions + c.action)
                                       : c.memory;
                        }),
                        std::move(labels), {"\xE2\x8A\xA5", "\xE2\x8A\xA4"});
}

/// Parsed form of "none", "B3", "K6", "O2", "OA1".
struct MemorySpec {
    MemoryFamily family = MemoryFamily::none;
    std::size_t k = 0;

    std::string str() const { return MemoryDescriptor{family, k, 0, 0}.spec(); }
};

inline std::optional<MemorySpec> try_parse_memory_spec(const std::string& text) {
    if (text == "none") return MemorySpec{};
    std::size_t pos = 0;
    MemoryFamily family;
    if (text.rfind("OA", 0) == 0) {
        family = MemoryFamily::observation_action;
        pos = 2;
    } else if (!text.empty() && text[0] == 'B') {
        family = MemoryFamily::binary;
        pos = 1;
    } else if (!text.empty() && text[0] == 'K') {
        family = MemoryFamily::k_order;
        pos = 1;
    } else if (!text.empty() && text[0] == 'O') {
        family = MemoryFamily::observation;
        pos = 1;
    } else {
        return std::nullopt;
    }
    if (pos >= text.size() || text.size() - pos > 6) return std::nullopt;
    std::size_t k = 0;
    for (std::size_t i = pos; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
        k = k * 10 + static_cast<std::size_t>(text[i] - '0');
    }
    if (k == 0) return std::nullopt;
    return MemorySpec{family, k};
}

inline MemorySpec parse_memory_spec(const std::string& text) {
    auto spec = try_parse_memory_spec(text);
    if (!spec) throw UsageError("unknown memory spec \"" + text + "\"");
    return *spec;
}

/// Instantiates a memory family for an environment with the given alphabets.
inline MemoryModule make_memory(const MemorySpec& spec, std::size_t num_observations, std::size_t num_actions,
                                std::size_t cap = kDefaultMemoryStateCap) {
    switch (spec.family) {
    case MemoryFamily::none: return make_no_memory();
    case MemoryFamily::binary: return make_bk(spec.k, cap);
    case MemoryFamily::k_order: return make_kk(spec.k, num_observations, cap);
    case MemoryFamily::observation: return make_ok(spec.k, num_observations, cap);
    case MemoryFamily::observation_action: return make_oak(spec.k, num_observations, num_actions, cap);
    case MemoryFamily::custom: break;
    }
    throw UsageError("make_memory: custom memories have no spec string");
}

} // namespace memaug
