// Walks through a non-Markovian shortcut: on the recall task with a one-slot
// observation-action buffer, one-step TD values disagree with the true
// returns of the optimal memoryless policy, and the disagreement flips the
// greedy choice at the empty buffer.
#include <cstdio>
#include <vector>

#include "memaug/analysis/improvement.hpp"
#include "memaug/analysis/observation_values.hpp"
#include "memaug/environments.hpp"

using namespace memaug;

int main() {
    const TabularPomdp recall = build_recall(0.95);
    const AugmentedEnv env = make_augmented(recall, parse_memory_spec("OA1"));
    const ProductPomdp product = build_product_pomdp(env);

    // Push every action: 1 at the empty buffer, 2 after (o,1), 3 after (o,2).
    const std::vector<std::size_t> actions = {env.encode_action(0, kPushWrite), env.encode_action(1, kPushWrite),
                                              env.encode_action(2, kPushWrite), env.encode_action(0, kPushWrite)};
    const auto policy = StochasticPolicy::deterministic(actions, env.num_actions());
    std::printf("expected return of the push-1-2-3 policy: %.4f\n\n", expected_return(product.pomdp, policy));

    const QTable td = td_fixed_point(product.pomdp, policy);
    const QTable mc = exact_obs_q(product.pomdp, policy);
    const std::size_t empty = env.encode_observation(0, 0);
    std::printf("values at %s\n%-6s %10s %10s\n", env.observation_label(empty).c_str(), "action", "TD", "true");
    for (std::size_t a = 0; a < env.num_actions(); ++a)
        std::printf("%-6s %10.4f %10.4f\n", env.action_label(a).c_str(), td(empty, a), mc(empty, a));

    std::printf("\nargmax flips (TD prefers an action the true values reject):\n");
    for (const auto& s : detect_shortcuts(product.pomdp, policy))
        if (s.flips_argmax)
            std::printf("  %s %s  TD %.4f  true %.4f\n", env.observation_label(s.observation).c_str(),
                        env.action_label(s.action).c_str(), s.td_value, s.mc_value);

    std::printf("\nidealised policy improvement on four-action recall (epsilon 0.05):\n");
    const TabularPomdp four = build_four_action_recall();
    for (const char* memory : {"B1", "B5", "OA1"}) {
        const auto trace = idealized_improvement(four, parse_memory_spec(memory), {.record_policies = false});
        std::printf("  %-4s %5zu iterations  limit %.4f  (%s)\n", memory, trace.steps.size(),
                    trace.limit_return.value_or(trace.steps.back().expected_return), to_string(trace.label).c_str());
    }
}
