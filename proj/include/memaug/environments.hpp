#pragma once

#include <string>
#include <vector>

#include "memaug/environments/gravity.hpp"
#include "memaug/environments/hallway.hpp"
#include "memaug/environments/recall.hpp"

namespace memaug {

inline const std::vector<std::string>& environment_names() {
    static const std::vector<std::string> names = {"gravity",        "recall",         "variant_recall",
                                                   "four_action_recall", "hallway_cookie", "hallway_keys"};
    return names;
}

inline bool is_environment_name(const std::string& name) {
    for (const auto& n : environment_names())
        if (n == name) return true;
    return false;
}

/// Builds a named benchmark environment with its default parameters.
inline TabularPomdp make_environment(const std::string& name) {
    if (name == "gravity") return build_gravity();
    if (name == "recall") return build_recall();
    if (name == "variant_recall") return build_variant_recall();
    if (name == "four_action_recall") return build_four_action_recall();
    if (name == "hallway_cookie") return build_hallway(HallwayVariant::cookie);
    if (name == "hallway_keys") return build_hallway(HallwayVariant::keys);
    throw UsageError("unknown environment '" + name + "'");
}

} // namespace memaug
