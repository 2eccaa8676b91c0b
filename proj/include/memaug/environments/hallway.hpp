#pragma once

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "memaug/pomdp.hpp"

namespace memaug {

enum class HallwayVariant { cookie, keys };

/// Three 5x5 rooms joined by a 7-cell corridor.
///
/// The red room hangs off the left end of the corridor (red (4,2) <-> corridor 0),
/// the blue room off the right end (blue (0,2) <-> corridor 6) and the yellow
/// room below the middle (yellow (2,0) <-> corridor 3). Room coordinates are
/// (x, y) with y growing away from the corridor in the yellow room and
/// downwards in the red and blue rooms. Actions fail (the agent stays put)
/// with probability 0.05.
namespace hallway {

enum Region : std::size_t { red = 0, blue = 1, yellow = 2, corridor = 3 };
enum Action : std::size_t { up = 0, right = 1, down = 2, left = 3 };

inline constexpr std::size_t kRoomSide = 5;
inline constexpr std::size_t kRoomCells = kRoomSide * kRoomSide;
inline constexpr std::size_t kCorridorLength = 7;
inline constexpr std::size_t kPositions = 3 * kRoomCells + kCorridorLength;
inline constexpr double kFailProbability = 0.05;
inline constexpr std::size_t kDefaultHorizon = 10'000;

inline constexpr std::size_t room_cell(Region room, std::size_t x, std::size_t y) {
    return static_cast<std::size_t>(room) * kRoomCells + y * kRoomSide + x;
}
inline constexpr std::size_t corridor_cell(std::size_t i) { return 3 * kRoomCells + i; }
inline constexpr Region region_of(std::size_t pos) {
    return pos >= 3 * kRoomCells ? corridor : static_cast<Region>(pos / kRoomCells);
}

inline constexpr std::size_t kStartPosition = corridor_cell(3);
inline constexpr std::size_t kButton = room_cell(yellow, 2, 4);
inline constexpr std::size_t kCoffee = room_cell(yellow, 2, 4);
inline constexpr std::size_t kDoorA = room_cell(yellow, 2, 0);
inline constexpr std::size_t kDoorB = room_cell(yellow, 2, 2);
inline constexpr std::array<std::size_t, 2> kCookieSpots = {room_cell(red, 2, 2), room_cell(blue, 2, 2)};
/// Slot of key k (0 = A, 1 = B) in room r (0 = red, 1 = blue).
inline constexpr std::size_t key_slot(std::size_t key, std::size_t room) {
    return room_cell(static_cast<Region>(room), key == 0 ? 1 : 3, 2);
}

/// Yellow cells turned into walls by the keys variant (row 2 except door B).
inline bool is_inner_wall(std::size_t pos, HallwayVariant variant) {
    if (variant != HallwayVariant::keys || region_of(pos) != yellow) return false;
    const std::size_t local = pos - room_cell(yellow, 0, 0);
    return local / kRoomSide == 2 && local % kRoomSide != 2;
}

/// Geometric successor ignoring doors; bumping a wall stays in place.
inline std::size_t neighbour(std::size_t pos, std::size_t action, HallwayVariant variant) {
    std::size_t target = pos;
    const Region r = region_of(pos);
    if (r == corridor) {
        const std::size_t i = pos - corridor_cell(0);
        if (action == left) target = i == 0 ? room_cell(red, 4, 2) : corridor_cell(i - 1);
        if (action == right) target = i + 1 == kCorridorLength ? room_cell(blue, 0, 2) : corridor_cell(i + 1);
        if (action == down && i == 3) target = room_cell(yellow, 2, 0);
    } else {
        const std::size_t local = pos - room_cell(r, 0, 0);
        const std::size_t x = local % kRoomSide, y = local / kRoomSide;
        if (r == yellow) {
            // y grows away from the corridor, which lies above yellow (2,0).
            if (action == up) target = y == 0 ? (x == 2 ? corridor_cell(3) : pos) : room_cell(r, x, y - 1);
            if (action == down && y + 1 < kRoomSide) target = room_cell(r, x, y + 1);
        } else {
            if (action == up && y > 0) target = room_cell(r, x, y - 1);
            if (action == down && y + 1 < kRoomSide) target = room_cell(r, x, y + 1);
        }
        if (action == left) {
            if (x > 0) target = room_cell(r, x - 1, y);
            else if (r == blue && y == 2) target = corridor_cell(kCorridorLength - 1);
        }
        if (action == right) {
            if (x + 1 < kRoomSide) target = room_cell(r, x + 1, y);
            else if (r == red && y == 2) target = corridor_cell(0);
        }
    }
    return is_inner_wall(target, variant) ? pos : target;
}

inline std::string position_label(std::size_t pos) {
    static const char* const names[] = {"red", "blue", "yellow"};
    const Region r = region_of(pos);
    if (r == corridor) return "hall" + std::to_string(pos - corridor_cell(0));
    const std::size_t local = pos - room_cell(r, 0, 0);
    return std::string(names[r]) + "(" + std::to_string(local % kRoomSide) + "," + std::to_string(local / kRoomSide) +
           ")";
}

/// Key location codes for the keys variant.
enum KeyPlace : std::size_t { in_red = 0, in_blue = 1, carried = 2, used = 3 };

/// Hidden configuration; unused fields stay zero for the other variant.
struct World {
    std::size_t pos = kStartPosition;
    std::size_t cookie = 0; ///< 0 none, 1 red, 2 blue
    std::array<std::size_t, 2> keys{in_red, in_red};

    auto operator<=>(const World&) const = default;
};

inline bool door_open(const World& w, std::size_t key) { return w.keys[key] == used; }
inline bool carrying_any(const World& w) { return w.keys[0] == carried || w.keys[1] == carried; }

/// Effect of an attempted move (before the slip) as (next world, reward) outcomes.
inline std::vector<std::pair<World, double>> move_outcomes(const World& w, std::size_t action, HallwayVariant variant) {
    std::vector<std::pair<World, double>> out;
    World n = w;
    const std::size_t target = neighbour(w.pos, action, variant);
    if (target == w.pos) return {{n, 0.0}};

    if (variant == HallwayVariant::cookie) {
        n.pos = target;
        double reward = 0.0;
        if (n.cookie != 0 && target == kCookieSpots[n.cookie - 1]) {
            n.cookie = 0;
            reward = 1.0;
        }
        if (target == kButton) {
            // A new cookie replaces any existing one.
            World a = n, b = n;
            a.cookie = 1;
            b.cookie = 2;
            return {{a, reward}, {b, reward}};
        }
        return {{n, reward}};
    }

    // Keys variant: locked doors need the matching key, which is consumed.
    for (std::size_t k = 0; k < 2; ++k) {
        const std::size_t door = k == 0 ? kDoorA : kDoorB;
        if (target != door || door_open(n, k)) continue;
        if (n.keys[k] != carried) return {{n, 0.0}};
        n.keys[k] = used;
    }
    n.pos = target;
    if (target == kCoffee) {
        // Coffee: back to the corridor with freshly locked doors and new keys.
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) {
                World reset;
                reset.pos = kStartPosition;
                reset.keys = {a, b};
                out.push_back({reset, 1.0});
            }
        return out;
    }
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t room = 0; room < 2; ++room) {
            if (target != key_slot(k, room)) continue;
            if (n.keys[k] == room && !carrying_any(n)) n.keys[k] = carried;
            else if (n.keys[k] == carried) n.keys[k] = room;
        }
    return {{n, 0.0}};
}

/// What the agent sees: its position, what lies in its current room, and the key it holds.
inline std::vector<std::size_t> observation_key(const World& w, HallwayVariant variant) {
    std::vector<std::size_t> key{w.pos};
    const Region r = region_of(w.pos);
    if (variant == HallwayVariant::cookie) {
        key.push_back((r == red && w.cookie == 1) || (r == blue && w.cookie == 2) ? 1 : 0);
        return key;
    }
    for (std::size_t k = 0; k < 2; ++k) {
        if (r == red || r == blue) key.push_back(w.keys[k] == static_cast<std::size_t>(r) ? 1 : 0);
        else if (r == yellow) key.push_back(door_open(w, k) ? 1 : 0);
        else key.push_back(0);
        key.push_back(w.keys[k] == carried ? 1 : 0);
    }
    return key;
}

inline std::string world_label(const World& w, HallwayVariant variant) {
    std::string label = position_label(w.pos);
    if (variant == HallwayVariant::cookie) {
        static const char* const where[] = {"", "|cookie:red", "|cookie:blue"};
        return label + where[w.cookie];
    }
    static const char* const places[] = {"red", "blue", "held", "used"};
    return label + "|A:" + places[w.keys[0]] + "|B:" + places[w.keys[1]];
}

} // namespace hallway

struct HallwayModel {
    TabularPomdp pomdp;
    std::vector<hallway::World> worlds; ///< hidden world of each state index
};

/// Tabular encoding of the hallway domain over all reachable hidden worlds.
inline HallwayModel build_hallway_model(HallwayVariant variant, std::size_t horizon = hallway::kDefaultHorizon,
                                        double discount = 0.95) {
    using namespace hallway;
    std::map<World, std::size_t> index;
    std::vector<World> worlds;
    auto intern = [&](const World& w) {
        auto [it, inserted] = index.try_emplace(w, worlds.size());
        if (inserted) worlds.push_back(w);
        return it->second;
    };

    std::vector<std::pair<std::size_t, double>> initial;
    if (variant == HallwayVariant::cookie) {
        initial.push_back({intern(World{}), 1.0});
    } else {
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) {
                World w;
                w.keys = {a, b};
                initial.push_back({intern(w), 0.25});
            }
    }

    std::map<std::vector<std::size_t>, std::size_t> obs_index;
    std::vector<std::string> obs_labels;
    PomdpDefinition def;
    def.num_actions = 4;
    def.rewards = {0.0, 1.0};
    def.discount = discount;
    def.horizon = horizon;

    for (std::size_t s = 0; s < worlds.size(); ++s) {
        const World w = worlds[s];
        auto& rows = def.dynamics.emplace_back();
        for (std::size_t a = 0; a < 4; ++a) {
            std::map<std::pair<std::size_t, std::size_t>, double> merged;
            merged[{s, 0}] += kFailProbability;
            const auto outcomes = move_outcomes(w, a, variant);
            const double share = (1.0 - kFailProbability) / static_cast<double>(outcomes.size());
            for (const auto& [next, r] : outcomes) merged[{intern(next), r > 0.0 ? 1 : 0}] += share;
            auto& row = rows.emplace_back();
            for (const auto& [key, p] : merged) row.push_back({key.first, key.second, p});
        }
        const auto okey = observation_key(w, variant);
        auto [it, inserted] = obs_index.try_emplace(okey, obs_labels.size());
        if (inserted) {
            std::string label = position_label(w.pos);
            for (std::size_t i = 1; i < okey.size(); ++i) label += std::to_string(okey[i]);
            obs_labels.push_back(label);
        }
        def.observation_fn.push_back({{it->second, 1.0}});
        def.state_labels.push_back(world_label(w, variant));
    }

    def.num_states = worlds.size();
    def.num_observations = obs_labels.size();
    def.initial_distribution.assign(def.num_states, 0.0);
    for (const auto& [s, p] : initial) def.initial_distribution[s] += p;
    def.observation_labels = std::move(obs_labels);
    def.action_labels = {"up", "right", "down", "left"};
    return {TabularPomdp(std::move(def)), std::move(worlds)};
}

inline TabularPomdp build_hallway(HallwayVariant variant, std::size_t horizon = hallway::kDefaultHorizon,
                                  double discount = 0.95) {
    return build_hallway_model(variant, horizon, discount).pomdp;
}

inline HallwayVariant parse_hallway_variant(const std::string& name) {
    if (name == "cookie") return HallwayVariant::cookie;
    if (name == "keys") return HallwayVariant::keys;
    throw UsageError("unknown hallway variant '" + name + "'");
}

} // namespace memaug
