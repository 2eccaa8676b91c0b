#pragma once

#include <map>
#include <string>

#include "memaug/pomdp.hpp"

namespace memaug {

/// 5x5 grid in which gravity pulls the agent down until the button is pressed.
///
/// Cells are indexed y * 5 + x with row 0 at the bottom; the hidden state is
/// cell + 25 * gravity, where gravity = 1 means the force is active. The
/// agent only observes its cell.
namespace gravity {

inline constexpr std::size_t kWidth = 5;
inline constexpr std::size_t kHeight = 5;
inline constexpr std::size_t kCells = kWidth * kHeight;

enum Action : std::size_t { up = 0, right = 1, down = 2, left = 3 };

inline constexpr std::size_t cell(std::size_t x, std::size_t y) { return y * kWidth + x; }
inline constexpr std::size_t state(std::size_t cell_index, bool gravity_on) {
    return cell_index + (gravity_on ? kCells : 0);
}

inline constexpr std::size_t kStartCell = cell(0, 0);
inline constexpr std::size_t kCookieCell = cell(0, 4);
inline constexpr std::size_t kButtonCell = cell(4, 0);
inline constexpr std::size_t kStartState = state(kStartCell, true);
inline constexpr double kPullProbability = 0.9;
inline constexpr std::size_t kDefaultHorizon = 1000;

/// Platform between rows 0 and 1 spanning columns 1..4.
inline bool blocked(std::size_t x, std::size_t y, std::size_t action) {
    switch (action) {
    case up:
        return y + 1 >= kHeight || (y == 0 && x >= 1);
    case down:
        return y == 0 || (y == 1 && x >= 1);
    case right:
        return x + 1 >= kWidth;
    case left:
        return x == 0;
    default:
        throw IndexError("gravity: action out of range");
    }
}

/// Target cell of a move; bumping a wall stays in place.
inline std::size_t move(std::size_t from, std::size_t action) {
    const std::size_t x = from % kWidth, y = from / kWidth;
    if (blocked(x, y, action)) return from;
    switch (action) {
    case up:
        return cell(x, y + 1);
    case down:
        return cell(x, y - 1);
    case right:
        return cell(x + 1, y);
    default:
        return cell(x - 1, y);
    }
}

inline std::string cell_label(std::size_t c) {
    return "(" + std::to_string(c % kWidth) + "," + std::to_string(c / kWidth) + ")";
}

} // namespace gravity

/// While gravity is on and a downward move is legal, every action resolves to
/// a downward move with probability 0.9 and to the intended move otherwise.
/// Entering the button from another cell toggles gravity; entering the cookie
/// yields reward 1 and ends the episode.
inline TabularPomdp build_gravity(std::size_t horizon = gravity::kDefaultHorizon, double discount = 0.95) {
    using namespace gravity;
    PomdpDefinition def;
    def.num_states = 2 * kCells;
    def.num_observations = kCells;
    def.num_actions = 4;
    def.rewards = {0.0, 1.0};
    def.discount = discount;
    def.horizon = horizon;
    def.initial_distribution.assign(def.num_states, 0.0);
    def.initial_distribution[kStartState] = 1.0;
    def.terminal.assign(def.num_states, false);
    def.terminal[state(kCookieCell, false)] = def.terminal[state(kCookieCell, true)] = true;

    def.dynamics.resize(def.num_states);
    for (std::size_t s = 0; s < def.num_states; ++s) {
        const std::size_t c = s % kCells;
        const bool on = s >= kCells;
        def.observation_fn.push_back({{c, 1.0}});
        def.state_labels.push_back(cell_label(c) + (on ? "g" : ""));
        if (def.terminal[s]) continue;
        for (std::size_t a = 0; a < 4; ++a) {
            std::map<std::size_t, double> moves;
            const bool pulled = on && !blocked(c % kWidth, c / kWidth, down);
            if (pulled) {
                moves[move(c, down)] += kPullProbability;
                moves[move(c, a)] += 1.0 - kPullProbability;
            } else {
                moves[move(c, a)] += 1.0;
            }
            std::map<std::size_t, double> outcomes;
            for (const auto& [target, p] : moves) {
                const bool flag = (target == kButtonCell && target != c) ? !on : on;
                outcomes[state(target, flag)] += p;
            }
            auto& row = def.dynamics[s].emplace_back();
            for (const auto& [next, p] : outcomes)
                row.push_back({next, (next % kCells == kCookieCell) ? std::size_t{1} : std::size_t{0}, p});
        }
    }
    for (std::size_t c = 0; c < kCells; ++c) def.observation_labels.push_back(cell_label(c));
    def.action_labels = {"up", "right", "down", "left"};
    return TabularPomdp(std::move(def));
}

} // namespace memaug
