#pragma once

#include <vector>

#include "memaug/evaluation.hpp"

namespace memaug {

/// P_pi(s | o) together with the state occupancy it is derived from.
///
/// With a horizon the occupancy counts expected visits per episode; without
/// one it is the discounted occupancy from mu. Terminal states never count.
struct OccupancyProjection {
    std::size_t num_states = 0;
    std::size_t num_observations = 0;
    std::vector<double> occupancy;        ///< d_pi(s)
    std::vector<double> observation_mass; ///< sum_s d_pi(s) omega(o | s)
    std::vector<double> conditional;      ///< row-major [o][s]: P_pi(s | o), zero rows for unvisited o

    double state_given_observation(std::size_t s, std::size_t o) const { return conditional[o * num_states + s]; }
    bool visited(std::size_t o) const { return observation_mass[o] > 0.0; }
};

inline OccupancyProjection project_occupancy(const TabularPomdp& pomdp, std::vector<double> occupancy) {
    OccupancyProjection out;
    out.num_states = pomdp.num_states();
    out.num_observations = pomdp.num_observations();
    out.occupancy = std::move(occupancy);
    out.observation_mass.assign(out.num_observations, 0.0);
    out.conditional.assign(out.num_observations * out.num_states, 0.0);
    for (std::size_t s = 0; s < out.num_states; ++s) {
        if (out.occupancy[s] <= 0.0 || pomdp.is_terminal(s)) continue;
        for (const auto& ob : pomdp.observations(s)) {
            const double w = out.occupancy[s] * ob.probability;
            out.conditional[ob.observation * out.num_states + s] += w;
            out.observation_mass[ob.observation] += w;
        }
    }
    for (std::size_t o = 0; o < out.num_observations; ++o) {
        if (out.observation_mass[o] <= 0.0) continue;
        for (std::size_t s = 0; s < out.num_states; ++s) out.conditional[o * out.num_states + s] /= out.observation_mass[o];
    }
    return out;
}

inline OccupancyProjection occupancy(const TabularPomdp& pomdp, const StochasticPolicy& policy) {
    return project_occupancy(pomdp, evaluate_policy(pomdp, policy).occupancy);
}

} // namespace memaug
