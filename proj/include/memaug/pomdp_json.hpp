#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "memaug/pomdp.hpp"

namespace memaug {

/// JSON document layout:
///
///     {
///       "format": "tabular-pomdp", "version": 1,
///       "num_states": 3, "num_observations": 1, "num_actions": 2,
///       "rewards": [0.0, 1.0],
///       "discount": 0.95, "horizon": 3,            // horizon may be null
///       "initial": [1.0, 0.0, 0.0],
///       "terminal": [false, false, true],
///       "dynamics": [[[{"next": 1, "reward": 0, "prob": 1.0}], ...], ...],
///       "observations": [[{"obs": 0, "prob": 1.0}], ...],
///       "state_labels": [...], "observation_labels": [...], "action_labels": [...]
///     }
///
/// `dynamics[s][a]` lists (next state, reward index, probability) triples.
inline nlohmann::json pomdp_to_json(const TabularPomdp& pomdp) {
    using nlohmann::json;
    const auto& d = pomdp.definition();
    json doc;
    doc["format"] = "tabular-pomdp";
    doc["version"] = 1;
    doc["num_states"] = d.num_states;
    doc["num_observations"] = d.num_observations;
    doc["num_actions"] = d.num_actions;
    doc["rewards"] = d.rewards;
    doc["discount"] = d.discount;
    doc["horizon"] = d.horizon ? json(*d.horizon) : json(nullptr);
    doc["initial"] = d.initial_distribution;
    doc["terminal"] = d.terminal;
    json dyn = json::array();
    for (const auto& per_state : d.dynamics) {
        json row = json::array();
        for (const auto& outcomes : per_state) {
            json list = json::array();
            for (const auto& t : outcomes)
                list.push_back({{"next", t.next_state}, {"reward", t.reward_index}, {"prob", t.probability}});
            row.push_back(std::move(list));
        }
        dyn.push_back(std::move(row));
    }
    doc["dynamics"] = std::move(dyn);
    json obs = json::array();
    for (const auto& per_state : d.observation_fn) {
        json list = json::array();
        for (const auto& e : per_state) list.push_back({{"obs", e.observation}, {"prob", e.probability}});
        obs.push_back(std::move(list));
    }
    doc["observations"] = std::move(obs);
    doc["state_labels"] = d.state_labels;
    doc["observation_labels"] = d.observation_labels;
    doc["action_labels"] = d.action_labels;
    return doc;
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ValidationError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path + "/" + key, "missing field");
    return *it;
}

inline std::size_t as_count(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ValidationError(path, "expected a non-negative integer");
    return v.get<std::size_t>();
}

inline double as_real(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ValidationError(path, "expected a number");
    return v.get<double>();
}

inline const nlohmann::json& as_array(const nlohmann::json& v, const std::string& path) {
    if (!v.is_array()) throw ValidationError(path, "expected an array");
    return v;
}

inline std::vector<std::string> labels_from(const nlohmann::json& doc, const char* key) {
    std::vector<std::string> out;
    if (!doc.contains(key)) return out;
    const std::string path = std::string("/") + key;
    const auto& arr = as_array(doc[key], path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string()) throw ValidationError(path + "/" + std::to_string(i), "expected a string");
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

} // namespace detail

/// Parses and validates a POMDP document; the first violation is reported with its path.
inline TabularPomdp pomdp_from_json(const nlohmann::json& doc) {
    using detail::as_array;
    using detail::as_count;
    using detail::as_real;
    using detail::require;

    static const char* const known[] = {"format", "version", "num_states", "num_observations", "num_actions",
                                        "rewards", "discount", "horizon", "initial", "terminal", "dynamics",
                                        "observations", "state_labels", "observation_labels", "action_labels"};
    if (!doc.is_object()) throw ValidationError("", "expected a JSON object");
    for (const auto& [key, _] : doc.items())
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ValidationError("/" + key, "unknown field");
    if (doc.contains("format") && doc["format"] != "tabular-pomdp")
        throw ValidationError("/format", "expected \"tabular-pomdp\"");

    PomdpDefinition def;
    def.num_states = as_count(require(doc, "num_states", ""), "/num_states");
    def.num_observations = as_count(require(doc, "num_observations", ""), "/num_observations");
    def.num_actions = as_count(require(doc, "num_actions", ""), "/num_actions");
    const auto& rewards = as_array(require(doc, "rewards", ""), "/rewards");
    for (std::size_t i = 0; i < rewards.size(); ++i)
        def.rewards.push_back(as_real(rewards[i], "/rewards/" + std::to_string(i)));
    def.discount = as_real(require(doc, "discount", ""), "/discount");
    if (doc.contains("horizon") && !doc["horizon"].is_null()) def.horizon = as_count(doc["horizon"], "/horizon");

    const auto& initial = as_array(require(doc, "initial", ""), "/initial");
    for (std::size_t i = 0; i < initial.size(); ++i)
        def.initial_distribution.push_back(as_real(initial[i], "/initial/" + std::to_string(i)));

    if (doc.contains("terminal")) {
        const auto& term = as_array(doc["terminal"], "/terminal");
        for (std::size_t i = 0; i < term.size(); ++i) {
            if (!term[i].is_boolean()) throw ValidationError("/terminal/" + std::to_string(i), "expected a boolean");
            def.terminal.push_back(term[i].get<bool>());
        }
    }

    const auto& dyn = as_array(require(doc, "dynamics", ""), "/dynamics");
    for (std::size_t s = 0; s < dyn.size(); ++s) {
        const std::string sp = "/dynamics/" + std::to_string(s);
        const auto& per_state = as_array(dyn[s], sp);
        auto& row = def.dynamics.emplace_back();
        for (std::size_t a = 0; a < per_state.size(); ++a) {
            const std::string ap = sp + "/" + std::to_string(a);
            const auto& list = as_array(per_state[a], ap);
            auto& outcomes = row.emplace_back();
            for (std::size_t k = 0; k < list.size(); ++k) {
                const std::string kp = ap + "/" + std::to_string(k);
                Transition t;
                t.next_state = as_count(require(list[k], "next", kp), kp + "/next");
                t.reward_index = as_count(require(list[k], "reward", kp), kp + "/reward");
                t.probability = as_real(require(list[k], "prob", kp), kp + "/prob");
                outcomes.push_back(t);
            }
        }
    }

    const auto& obs = as_array(require(doc, "observations", ""), "/observations");
    for (std::size_t s = 0; s < obs.size(); ++s) {
        const std::string sp = "/observations/" + std::to_string(s);
        const auto& list = as_array(obs[s], sp);
        auto& row = def.observation_fn.emplace_back();
        for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string kp = sp + "/" + std::to_string(k);
            ObservationProbability e;
            e.observation = as_count(require(list[k], "obs", kp), kp + "/obs");
            e.probability = as_real(require(list[k], "prob", kp), kp + "/prob");
            row.push_back(e);
        }
    }

    def.state_labels = detail::labels_from(doc, "state_labels");
    def.observation_labels = detail::labels_from(doc, "observation_labels");
    def.action_labels = detail::labels_from(doc, "action_labels");
    return TabularPomdp(std::move(def));
}

inline TabularPomdp load_pomdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("", "cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("", std::string("malformed JSON: ") + e.what());
    }
    return pomdp_from_json(doc);
}

} // namespace memaug
