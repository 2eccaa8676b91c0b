#include <gtest/gtest.h>

#include <deque>
#include <optional>

#include "memaug/augmented.hpp"
#include "memaug/environments.hpp"
#include "memaug/memory.hpp"

using namespace memaug;

namespace {

/// Slots oldest-first as an independent oracle: a deque padded with empties.
std::vector<BufferCodec::Slot> as_slots(const std::deque<std::size_t>& window, std::size_t k) {
    std::vector<BufferCodec::Slot> slots(k - window.size(), std::nullopt);
    for (std::size_t v : window) slots.push_back(v);
    return slots;
}

std::size_t single(const MemoryModule& m, const MemoryContext& ctx) {
    const auto d = m.distribution(ctx);
    EXPECT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].probability, 1.0);
    return d[0].memory;
}

} // namespace

TEST(BufferCodec, IndexRoundTripsAndEmptyPrefix) {
    for (std::size_t k = 1; k <= 4; ++k)
        for (std::size_t n = 1; n <= 4; ++n) {
            const BufferCodec codec(k, n);
            std::size_t expected = 0;
            for (std::size_t f = 0, block = 1; f <= k; ++f, block *= n) expected += block;
            ASSERT_EQ(codec.size(), expected);
            for (std::size_t i = 0; i < codec.size(); ++i) {
                const auto slots = codec.decode(i);
                bool seen_filled = false;
                for (const auto& s : slots) {
                    if (s) seen_filled = true;
                    else EXPECT_FALSE(seen_filled) << "empty slot after a filled one";
                }
                EXPECT_EQ(codec.encode(slots), i);
            }
        }
}

TEST(BufferCodec, PushShiftsOldestOut) {
    const BufferCodec codec(3, 5);
    std::deque<std::size_t> window;
    std::size_t index = 0;
    Rng rng(1);
    for (int t = 0; t < 40; ++t) {
        const std::size_t symbol = uniform_index(rng, 5);
        index = codec.push(index, symbol);
        window.push_back(symbol);
        if (window.size() > 3) window.pop_front();
        EXPECT_EQ(codec.decode(index), as_slots(window, 3));
    }
}

TEST(BufferCodec, CapacityIsEnforced) {
    EXPECT_THROW(BufferCodec(20, 25, 1'000'000), CapacityError);
    EXPECT_THROW(BufferCodec(2, 4, 20), CapacityError);
    EXPECT_NO_THROW(BufferCodec(2, 4, 21));
}

TEST(MemorySpec, ParsesKnownFamilies) {
    EXPECT_EQ(parse_memory_spec("none").family, MemoryFamily::none);
    EXPECT_EQ(parse_memory_spec("B3").k, 3u);
    EXPECT_EQ(parse_memory_spec("K6").family, MemoryFamily::k_order);
    EXPECT_EQ(parse_memory_spec("O2").family, MemoryFamily::observation);
    EXPECT_EQ(parse_memory_spec("OA1").family, MemoryFamily::observation_action);
    EXPECT_EQ(parse_memory_spec("OA12").str(), "OA12");
    for (const char* bad : {"Z9", "B0", "", "B", "OA", "b1", "O1x", "none1"})
        EXPECT_THROW(parse_memory_spec(bad), UsageError) << bad;
}

TEST(BinaryMemory, OneBitHasTwoStatesStartingAtZero) {
    const auto b1 = make_bk(1);
    EXPECT_EQ(b1.num_memory_states(), 2u);
    EXPECT_EQ(b1.num_write_actions(), 2u);
    EXPECT_EQ(b1.initial_distribution(), (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(b1.state_label(0), "0");
}

TEST(BinaryMemory, WriteOverwritesTheRegister) {
    const auto b2 = make_bk(2);
    // m = 01, w = 10 -> m' = 10 for every (o, a, r, o').
    for (std::size_t o = 0; o < 3; ++o)
        for (std::size_t a = 0; a < 3; ++a) EXPECT_EQ(single(b2, {0b01, 0b10, o, a, 0, o}), 0b10u);
    EXPECT_EQ(make_bk(3).num_write_actions(), 8u);
    EXPECT_THROW(make_bk(21), CapacityError);
    EXPECT_THROW(make_bk(0), UsageError);
}

TEST(KOrderMemory, ShiftsInTheCurrentObservation) {
    const auto k2 = make_kk(2, 4);
    const BufferCodec codec(2, 4);
    EXPECT_EQ(k2.num_write_actions(), 1u);
    const std::size_t m = codec.encode({std::nullopt, 1});
    const std::size_t next = single(k2, {m, 0, 3, 0, 0, 2});
    EXPECT_EQ(codec.decode(next), (std::vector<BufferCodec::Slot>{1, 3}));
    EXPECT_THROW(make_kk(10, 25, 1000), CapacityError);
}

TEST(KOrderMemory, BufferHoldsTheLastKObservations) {
    const auto env = make_augmented(build_gravity(), parse_memory_spec("K3"));
    const BufferCodec codec(3, 25);
    Rng rng(5);
    auto st = env.reset(rng);
    std::deque<std::size_t> history;
    for (int t = 0; t < 200; ++t) {
        history.push_back(st.observation);
        if (history.size() > 3) history.pop_front();
        const auto r = env.step(st, uniform_index(rng, env.num_actions()), rng);
        if (r.terminal) {
            st = env.reset(rng);
            history.clear();
            continue;
        }
        st = r.next;
        EXPECT_EQ(codec.decode(st.memory), as_slots(history, 3));
    }
}

TEST(KOrderMemory, K1ObservationPairIsSecondOrder) {
    const auto env = make_augmented(build_gravity(), parse_memory_spec("K1"));
    Rng rng(8);
    auto st = env.reset(rng);
    std::size_t previous = st.observation;
    for (int t = 0; t < 200; ++t) {
        const auto r = env.step(st, uniform_index(rng, env.num_actions()), rng);
        if (r.done) break;
        const auto [o, m] = env.decode_observation(r.augmented_observation);
        EXPECT_EQ(o, r.next.observation);
        EXPECT_EQ(m, previous + 1); // index 0 is the empty buffer
        previous = o;
        st = r.next;
    }
}

TEST(ObservationMemory, SkipLeavesMemoryUnchanged) {
    const auto o2 = make_ok(2, 3);
    for (std::size_t m = 0; m < o2.num_memory_states(); ++m)
        for (std::size_t o = 0; o < 3; ++o)
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t o2n = 0; o2n < 3; ++o2n) EXPECT_EQ(single(o2, {m, kSkipWrite, o, a, 1, o2n}), m);
}

TEST(ObservationMemory, GravityButtonCellIsStoredUntilNextPush) {
    const auto env = make_augmented(build_gravity(), parse_memory_spec("O1"));
    Rng rng(1);
    auto st = env.reset(rng);
    // Walk right to the button, pushing only while standing on it.
    for (int i = 0; i < 4; ++i) st = env.step(st, env.encode_action(gravity::right, kSkipWrite), rng).next;
    ASSERT_EQ(st.observation, gravity::kButtonCell);
    st = env.step(st, env.encode_action(gravity::left, kPushWrite), rng).next;
    const std::size_t stored = st.memory;
    EXPECT_EQ(env.memory().state_label(stored), "<o" + std::to_string(gravity::kButtonCell) + ">");
    for (int i = 0; i < 3; ++i) {
        st = env.step(st, env.encode_action(gravity::left, kSkipWrite), rng).next;
        EXPECT_EQ(st.memory, stored);
    }
    st = env.step(st, env.encode_action(gravity::up, kPushWrite), rng).next;
    EXPECT_NE(st.memory, stored);
}

TEST(ObservationMemory, BufferIsASubsequenceOfPushedObservations) {
    for (const char* spec : {"O1", "O2", "OA1", "OA2"}) {
        const auto env = make_augmented(build_gravity(), parse_memory_spec(spec));
        const bool with_action = std::string(spec).rfind("OA", 0) == 0;
        const std::size_t k = spec[std::string(spec).size() - 1] - '0';
        const BufferCodec codec(k, with_action ? 25 * 4 : 25);
        Rng rng(17);
        auto st = env.reset(rng);
        std::deque<std::size_t> pushed;
        for (int t = 0; t < 500; ++t) {
            const std::size_t action = uniform_index(rng, env.num_actions());
            const auto [a, w] = env.decode_action(action);
            if (w == kPushWrite) {
                pushed.push_back(with_action ? st.observation * 4 + a : st.observation);
                if (pushed.size() > k) pushed.pop_front();
            }
            const auto r = env.step(st, action, rng);
            if (r.done) {
                st = env.reset(rng);
                pushed.clear();
                continue;
            }
            st = r.next;
            EXPECT_EQ(codec.decode(st.memory), as_slots(pushed, k)) << spec;
        }
    }
}

TEST(ObservationActionMemory, RecallOA1HasFourNodes) {
    const auto recall = build_recall();
    const auto oa1 = make_memory(parse_memory_spec("OA1"), 1, 3);
    EXPECT_EQ(oa1.num_memory_states(), 4u);
    // Executing <a2, push> from the empty buffer stores (o, a2).
    const std::size_t node = single(oa1, {0, kPushWrite, 0, 1, 0, 0});
    EXPECT_EQ(node, 2u);
    EXPECT_EQ(oa1.state_label(node), "<(o0,a1)>");
    EXPECT_EQ(single(oa1, {node, kSkipWrite, 0, 2, 0, 0}), node);
    (void)recall;
}

TEST(BuiltInFamilies, WritingRulesAreDeterministicFunctions) {
    for (const char* spec : {"none", "B1", "B2", "K1", "K2", "O1", "O2", "OA1", "OA2"}) {
        const auto mem = make_memory(parse_memory_spec(spec), 3, 2);
        EXPECT_TRUE(mem.is_deterministic());
        double eta = 0.0;
        for (double p : mem.initial_distribution()) {
            EXPECT_TRUE(p == 0.0 || p == 1.0);
            eta += p;
        }
        EXPECT_EQ(eta, 1.0);
        for (std::size_t m = 0; m < mem.num_memory_states(); ++m)
            for (std::size_t w = 0; w < mem.num_write_actions(); ++w)
                for (std::size_t o = 0; o < 3; ++o)
                    for (std::size_t a = 0; a < 2; ++a) {
                        const MemoryContext ctx{m, w, o, a, 0, (o + 1) % 3};
                        const std::size_t next = single(mem, ctx);
                        EXPECT_LT(next, mem.num_memory_states());
                        Rng rng(m * 31 + w);
                        EXPECT_EQ(mem.sample(ctx, rng), next);
                    }
    }
}

TEST(BuiltInFamilies, KOrderEqualsAlwaysPushingObservationBuffer) {
    const auto k2 = make_kk(2, 25);
    const auto o2 = make_ok(2, 25);
    Rng rng(9);
    std::size_t mk = 0, mo = 0;
    for (int t = 0; t < 300; ++t) {
        const MemoryContext ctx_k{mk, 0, uniform_index(rng, 25), uniform_index(rng, 4), 0, 0};
        MemoryContext ctx_o = ctx_k;
        ctx_o.memory = mo;
        ctx_o.write = kPushWrite;
        mk = single(k2, ctx_k);
        mo = single(o2, ctx_o);
        EXPECT_EQ(mk, mo);
    }
}

TEST(BuiltInFamilies, InvalidIndicesAreRejected) {
    const auto b1 = make_bk(1);
    EXPECT_THROW(b1.distribution({2, 0, 0, 0, 0, 0}), IndexError);
    EXPECT_THROW(b1.distribution({0, 2, 0, 0, 0, 0}), IndexError);
}
