#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "memaug/pomdp.hpp"

namespace memaug {

/// Probability vector over hidden states. Equality is L-infinity within `tolerance`.
class Belief {
public:
    static constexpr double kDefaultTolerance = 1e-9;

    explicit Belief(std::vector<double> probs, double tolerance = kDefaultTolerance)
        : probs_(std::move(probs)), tolerance_(tolerance) {
        double total = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw UsageError("Belief: entries must be finite and non-negative");
            total += p;
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance)
            throw UsageError("Belief: probabilities sum to " + std::to_string(total));
    }

    static Belief point_mass(std::size_t num_states, std::size_t state) {
        std::vector<double> p(num_states, 0.0);
        p.at(state) = 1.0;
        return Belief(std::move(p));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t s) const { return probs_[s]; }
    const std::vector<double>& probabilities() const noexcept { return probs_; }
    double tolerance() const noexcept { return tolerance_; }

    double distance(const Belief& other) const {
        if (other.size() != size()) throw UsageError("Belief: size mismatch");
        double d = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) d = std::max(d, std::abs(probs_[i] - other.probs_[i]));
        return d;
    }

    bool approx_equal(const Belief& other) const { return distance(other) <= tolerance_; }
    bool operator==(const Belief& other) const { return approx_equal(other); }

private:
    std::vector<double> probs_;
    double tolerance_;
};

namespace detail {

inline Belief normalized_belief(std::vector<double> unnormalized, const char* what) {
    const double z = std::accumulate(unnormalized.begin(), unnormalized.end(), 0.0);
    if (!(z > 0.0)) throw InconsistentHistoryError(std::string(what) + ": observation has zero probability");
    for (double& p : unnormalized) p /= z;
    // Re-normalise once more so the sum is exact to the last ulp range.
    const double z2 = std::accumulate(unnormalized.begin(), unnormalized.end(), 0.0);
    for (double& p : unnormalized) p /= z2;
    return Belief(std::move(unnormalized));
}

} // namespace detail

/// b0(s) proportional to mu(s) * omega(o0 | s).
inline Belief initial_belief(const TabularPomdp& pomdp, std::size_t observation) {
    pomdp.check_observation(observation);
    std::vector<double> b(pomdp.num_states(), 0.0);
    const auto mu = pomdp.initial_distribution();
    for (std::size_t s = 0; s < pomdp.num_states(); ++s)
        if (mu[s] > 0.0) b[s] = mu[s] * pomdp.observation_probability(s, observation);
    return detail::normalized_belief(std::move(b), "initial_belief");
}

/// b'(s') proportional to omega(o | s') * sum_s p(s' | s, a) b(s).
inline Belief update_belief(const TabularPomdp& pomdp, const Belief& belief, std::size_t action,
                            std::size_t observation) {
    pomdp.check_action(action);
    pomdp.check_observation(observation);
    if (belief.size() != pomdp.num_states()) throw UsageError("update_belief: belief has wrong dimension");
    std::vector<double> predicted(pomdp.num_states(), 0.0);
    for (std::size_t s = 0; s < pomdp.num_states(); ++s) {
        if (belief[s] == 0.0) continue;
        for (const auto& t : pomdp.transitions(s, action)) predicted[t.next_state] += t.probability * belief[s];
    }
    for (std::size_t s = 0; s < pomdp.num_states(); ++s)
        if (predicted[s] > 0.0) predicted[s] *= pomdp.observation_probability(s, observation);
    return detail::normalized_belief(std::move(predicted), "update_belief");
}

} // namespace memaug
