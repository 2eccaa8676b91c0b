#pragma once

#include "memaug/learners/actor_critic.hpp"
#include "memaug/learners/common.hpp"
#include "memaug/learners/q_learning.hpp"
#include "memaug/learners/sarsa_lambda.hpp"

namespace memaug {

/// Runs the configured algorithm and keeps only its evaluation curve.
inline RunRecord run_learner(const AugmentedEnv& env, const LearnerConfig& config, std::uint64_t seed) {
    switch (config.algorithm) {
    case Algorithm::q_learning: return q_learning(env, config, seed).record;
    case Algorithm::sarsa_lambda: return sarsa_lambda(env, config, seed).record;
    case Algorithm::nstep_actor_critic: return nstep_actor_critic(env, config, seed).record;
    }
    throw UsageError("unknown algorithm");
}

} // namespace memaug
