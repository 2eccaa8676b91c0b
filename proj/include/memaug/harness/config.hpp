#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "memaug/analysis/improvement.hpp"
#include "memaug/analysis/sufficiency.hpp"
#include "memaug/environments.hpp"
#include "memaug/learners/common.hpp"

namespace memaug::harness {

inline constexpr int kSchemaVersion = 1;

namespace detail {

/// Reads one JSON object and rejects any key that was never asked for.
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) throw ValidationError(display(path_), "expected an object");
    }

    const std::string& path() const noexcept { return path_; }
    std::string path_of(const std::string& key) const { return path_ + "/" + key; }

    const nlohmann::json* find(const std::string& key) {
        used_.insert(key);
        const auto it = object_.find(key);
        return it == object_.end() ? nullptr : &*it;
    }
    const nlohmann::json& require(const std::string& key) {
        const auto* v = find(key);
        if (!v) throw ValidationError(path_of(key), "required field is missing");
        return *v;
    }

    /// Every key must have been consumed by a getter.
    void finish() const {
        for (auto it = object_.begin(); it != object_.end(); ++it)
            if (!used_.count(it.key())) throw ValidationError(path_of(it.key()), "unknown key");
    }

    static std::string display(const std::string& path) { return path.empty() ? "/" : path; }

private:
    const nlohmann::json& object_;
    std::string path_;
    std::set<std::string> used_;
};

inline std::string as_string(const nlohmann::json& v, const std::string& path) {
    if (!v.is_string()) throw ValidationError(path, "expected a string");
    return v.get<std::string>();
}
inline double as_number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ValidationError(path, "expected a number");
    return v.get<double>();
}
inline std::uint64_t as_unsigned(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ValidationError(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

} // namespace detail

/// Named benchmark plus the few constructor parameters each one exposes.
struct EnvironmentSpec {
    std::string name;
    std::optional<double> discount;     ///< recall, gravity, hallway_*
    std::optional<double> reward_scale; ///< four_action_recall
    std::optional<std::size_t> horizon; ///< gravity, hallway_*

    TabularPomdp build() const {
        if (name == "recall") return build_recall(discount.value_or(0.95));
        if (name == "four_action_recall") return build_four_action_recall(reward_scale.value_or(1.0));
        if (name == "gravity") return build_gravity(horizon.value_or(gravity::kDefaultHorizon), discount.value_or(0.95));
        if (name == "hallway_cookie" || name == "hallway_keys")
            return build_hallway(parse_hallway_variant(name == "hallway_cookie" ? "cookie" : "keys"),
                                 horizon.value_or(hallway::kDefaultHorizon), discount.value_or(0.95));
        return make_environment(name);
    }
};

/// Policy over the augmented alphabets: uniform, one action index per
/// observation, or a full row-stochastic table.
struct PolicySpec {
    enum class Kind { uniform, actions, table };
    Kind kind = Kind::uniform;
    std::vector<std::size_t> actions;
    std::vector<std::vector<double>> table;

    StochasticPolicy build(std::size_t num_observations, std::size_t num_actions, const std::string& path) const {
        if (kind == Kind::uniform) return StochasticPolicy::uniform(num_observations, num_actions);
        if (kind == Kind::actions) {
            if (actions.size() != num_observations)
                throw ValidationError(path, "expected " + std::to_string(num_observations) + " actions, got " +
                                                std::to_string(actions.size()));
            for (std::size_t o = 0; o < actions.size(); ++o)
                if (actions[o] >= num_actions)
                    throw ValidationError(path + "/" + std::to_string(o), "action index out of range");
            return StochasticPolicy::deterministic(actions, num_actions);
        }
        if (table.size() != num_observations)
            throw ValidationError(path, "expected " + std::to_string(num_observations) + " rows");
        std::vector<double> flat;
        for (std::size_t o = 0; o < table.size(); ++o) {
            if (table[o].size() != num_actions)
                throw ValidationError(path + "/" + std::to_string(o), "expected " + std::to_string(num_actions) + " entries");
            flat.insert(flat.end(), table[o].begin(), table[o].end());
        }
        try {
            return StochasticPolicy(num_observations, num_actions, std::move(flat));
        } catch (const UsageError& e) {
            throw ValidationError(path, e.what());
        }
    }
};

enum class ExactKind { exact_obs_q, detect_shortcuts, idealized_improvement, sufficiency_report };

inline std::string to_string(ExactKind k) {
    switch (k) {
    case ExactKind::exact_obs_q: return "exact_obs_q";
    case ExactKind::detect_shortcuts: return "detect_shortcuts";
    case ExactKind::idealized_improvement: return "idealized_improvement";
    case ExactKind::sufficiency_report: return "sufficiency_report";
    }
    return "?";
}

struct ExactRequest {
    ExactKind kind = ExactKind::exact_obs_q;
    PolicySpec policy;                  ///< evaluated policy, or the initial policy of an improvement run
    ImprovementOptions improvement;
    std::optional<std::size_t> depth;   ///< sufficiency history depth; default horizon - 1
    SufficiencyOptions sufficiency;
    double shortcut_tolerance = 1e-6;
};

enum class CommandKind { run, exact };

/// One validated experiment: an environment crossed with one or more memories,
/// either trained over seeds or analysed exactly.
struct ExperimentConfig {
    std::string name;
    CommandKind command = CommandKind::run;
    EnvironmentSpec environment;
    std::vector<MemorySpec> memories;
    LearnerConfig learner;
    std::vector<std::uint64_t> seeds;
    std::optional<std::string> output_dir;
    ExactRequest exact;
};

/// Bundled figure: a list of experiments whose results form one plot each.
struct FigureConfig {
    std::string figure;
    std::vector<ExperimentConfig> panels;
};

namespace detail {

inline bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (unsigned char c : s)
        if (!(std::isalnum(c) || c == '_' || c == '-' || c == '.')) return false;
    return s != "." && s != "..";
}

inline EnvironmentSpec parse_environment(ObjectReader& r) {
    EnvironmentSpec env;
    env.name = as_string(r.require("environment"), r.path_of("environment"));
    if (!is_environment_name(env.name))
        throw ValidationError(r.path_of("environment"), "unknown environment \"" + env.name + "\"");
    if (const auto* opts = r.find("environment_options")) {
        const std::string base = r.path_of("environment_options");
        ObjectReader o(*opts, base);
        const bool has_discount = env.name == "recall" || env.name == "gravity" || env.name.rfind("hallway", 0) == 0;
        const bool has_horizon = env.name == "gravity" || env.name.rfind("hallway", 0) == 0;
        if (const auto* v = o.find("discount")) {
            if (!has_discount) throw ValidationError(base + "/discount", "not configurable for " + env.name);
            env.discount = as_number(*v, base + "/discount");
            if (!(*env.discount >= 0.0 && *env.discount <= 1.0))
                throw ValidationError(base + "/discount", "must lie in [0, 1]");
        }
        if (const auto* v = o.find("reward_scale")) {
            if (env.name != "four_action_recall")
                throw ValidationError(base + "/reward_scale", "not configurable for " + env.name);
            env.reward_scale = as_number(*v, base + "/reward_scale");
            if (!(*env.reward_scale > 0.0)) throw ValidationError(base + "/reward_scale", "must be positive");
        }
        if (const auto* v = o.find("horizon")) {
            if (!has_horizon) throw ValidationError(base + "/horizon", "not configurable for " + env.name);
            env.horizon = as_unsigned(*v, base + "/horizon");
            if (*env.horizon == 0) throw ValidationError(base + "/horizon", "must be positive");
        }
        o.finish();
    }
    return env;
}

inline MemorySpec parse_memory(const nlohmann::json& v, const std::string& path) {
    const std::string text = as_string(v, path);
    const auto spec = try_parse_memory_spec(text);
    if (!spec) throw ValidationError(path, "unknown memory spec \"" + text + "\"");
    return *spec;
}

inline std::vector<MemorySpec> parse_memories(ObjectReader& r, bool required) {
    const auto* one = r.find("memory");
    const auto* many = r.find("memories");
    if (one && many) throw ValidationError(r.path_of("memories"), "give either memory or memories, not both");
    std::vector<MemorySpec> out;
    if (one) out.push_back(parse_memory(*one, r.path_of("memory")));
    if (many) {
        const std::string path = r.path_of("memories");
        if (!many->is_array()) throw ValidationError(path, "expected an array");
        for (std::size_t i = 0; i < many->size(); ++i) {
            out.push_back(parse_memory((*many)[i], path + "/" + std::to_string(i)));
            for (std::size_t j = 0; j + 1 < out.size(); ++j)
                if (out[j].str() == out.back().str())
                    throw ValidationError(path + "/" + std::to_string(i), "duplicate memory " + out.back().str());
        }
    }
    if (required && out.empty()) throw ValidationError(r.path_of("memories"), "at least one memory is required");
    return out;
}

inline std::vector<std::uint64_t> parse_seeds(const nlohmann::json& v, const std::string& path) {
    std::vector<std::uint64_t> seeds;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) seeds.push_back(as_unsigned(v[i], path + "/" + std::to_string(i)));
    } else if (v.is_object()) {
        ObjectReader r(v, path);
        const auto start = as_unsigned(r.require("start"), path + "/start");
        const auto count = as_unsigned(r.require("count"), path + "/count");
        r.finish();
        for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(start + i);
    } else {
        throw ValidationError(path, "expected an array of seeds or {start, count}");
    }
    if (seeds.empty()) throw ValidationError(path, "seed list is empty");
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (seeds[i] == seeds[j]) throw ValidationError(path, "duplicate seed " + std::to_string(seeds[i]));
    return seeds;
}

inline LearnerConfig parse_learner(const nlohmann::json& v, const std::string& path) {
    ObjectReader r(v, path);
    LearnerConfig c;
    auto number = [&](const char* key, double& field) {
        if (const auto* x = r.find(key)) field = as_number(*x, r.path_of(key));
    };
    auto count = [&](const char* key, std::size_t& field) {
        if (const auto* x = r.find(key)) field = as_unsigned(*x, r.path_of(key));
    };
    try {
        c.algorithm = parse_algorithm(as_string(r.require("algorithm"), r.path_of("algorithm")));
    } catch (const UsageError& e) {
        throw ValidationError(r.path_of("algorithm"), e.what());
    }
    number("learning_rate", c.learning_rate);
    number("alpha_decay", c.alpha_decay);
    number("policy_learning_rate", c.policy_learning_rate);
    number("value_learning_rate", c.value_learning_rate);
    number("epsilon", c.epsilon);
    number("lambda", c.lambda);
    count("n", c.n);
    number("discount", c.discount);
    if (const auto* x = r.find("initial_q")) c.initial_q = as_number(*x, r.path_of("initial_q"));
    count("total_steps", c.total_steps);
    count("eval_period", c.eval_period);
    count("eval_steps", c.eval_steps);
    count("eval_episodes", c.eval_episodes);
    count("eval_episode_cap", c.eval_episode_cap);
    try {
        if (const auto* x = r.find("eval_mode")) c.eval_mode = parse_evaluation_mode(as_string(*x, r.path_of("eval_mode")));
        if (const auto* x = r.find("metric")) c.metric = parse_metric(as_string(*x, r.path_of("metric")));
    } catch (const UsageError& e) {
        throw ValidationError(path, e.what());
    }
    r.finish();
    try {
        c.validate();
    } catch (const UsageError& e) {
        throw ValidationError(path, e.what());
    }
    return c;
}

inline PolicySpec parse_policy(const nlohmann::json& v, const std::string& path) {
    PolicySpec p;
    if (v.is_string()) {
        if (v.get<std::string>() != "uniform") throw ValidationError(path, "the only named policy is \"uniform\"");
        return p;
    }
    ObjectReader r(v, path);
    const auto* actions = r.find("actions");
    const auto* table = r.find("table");
    r.finish();
    if ((actions != nullptr) == (table != nullptr)) throw ValidationError(path, "give exactly one of actions or table");
    if (actions) {
        const std::string ap = path + "/actions";
        if (!actions->is_array()) throw ValidationError(ap, "expected an array");
        p.kind = PolicySpec::Kind::actions;
        for (std::size_t i = 0; i < actions->size(); ++i)
            p.actions.push_back(as_unsigned((*actions)[i], ap + "/" + std::to_string(i)));
    } else {
        const std::string tp = path + "/table";
        if (!table->is_array()) throw ValidationError(tp, "expected an array of rows");
        p.kind = PolicySpec::Kind::table;
        for (std::size_t i = 0; i < table->size(); ++i) {
            const std::string rp = tp + "/" + std::to_string(i);
            if (!(*table)[i].is_array()) throw ValidationError(rp, "expected an array");
            std::vector<double> row;
            for (std::size_t j = 0; j < (*table)[i].size(); ++j)
                row.push_back(as_number((*table)[i][j], rp + "/" + std::to_string(j)));
            p.table.push_back(std::move(row));
        }
    }
    return p;
}

inline ExactRequest parse_request(const nlohmann::json& v, const std::string& path) {
    ObjectReader r(v, path);
    ExactRequest q;
    const std::string kind = as_string(r.require("kind"), r.path_of("kind"));
    if (kind == "exact_obs_q") q.kind = ExactKind::exact_obs_q;
    else if (kind == "detect_shortcuts") q.kind = ExactKind::detect_shortcuts;
    else if (kind == "idealized_improvement") q.kind = ExactKind::idealized_improvement;
    else if (kind == "sufficiency_report") q.kind = ExactKind::sufficiency_report;
    else throw ValidationError(r.path_of("kind"), "unknown request kind \"" + kind + "\"");

    if (const auto* p = r.find("policy")) {
        if (q.kind == ExactKind::sufficiency_report) throw ValidationError(r.path_of("policy"), "not used by sufficiency_report");
        q.policy = parse_policy(*p, r.path_of("policy"));
    }
    if (const auto* x = r.find("epsilon")) q.improvement.epsilon = as_number(*x, r.path_of("epsilon"));
    if (const auto* x = r.find("max_iterations")) q.improvement.max_iterations = as_unsigned(*x, r.path_of("max_iterations"));
    if (const auto* x = r.find("tolerance")) {
        const double t = as_number(*x, r.path_of("tolerance"));
        q.improvement.tolerance = t;
        q.sufficiency.tolerance = t;
        q.shortcut_tolerance = t;
    }
    if (const auto* x = r.find("depth")) q.depth = as_unsigned(*x, r.path_of("depth"));
    if (const auto* x = r.find("k_cap")) q.sufficiency.k_cap = as_unsigned(*x, r.path_of("k_cap"));
    if (const auto* x = r.find("history_cap")) q.sufficiency.history_cap = as_unsigned(*x, r.path_of("history_cap"));
    r.finish();
    if (!(q.improvement.epsilon > 0.0 && q.improvement.epsilon <= 1.0))
        throw ValidationError(r.path_of("epsilon"), "must lie in (0, 1]");
    if (!(q.improvement.tolerance > 0.0)) throw ValidationError(r.path_of("tolerance"), "must be positive");
    return q;
}

/// Body shared by stand-alone experiment files and figure panels.
inline ExperimentConfig parse_experiment_body(ObjectReader& r, std::optional<CommandKind> expected) {
    ExperimentConfig c;
    c.name = as_string(r.require("name"), r.path_of("name"));
    if (!is_identifier(c.name))
        throw ValidationError(r.path_of("name"), "must be a non-empty file-name-safe identifier");
    c.environment = parse_environment(r);
    const auto* learner = r.find("learner");
    const auto* request = r.find("request");
    if (const auto* x = r.find("output_dir")) c.output_dir = as_string(*x, r.path_of("output_dir"));
    if ((learner != nullptr) == (request != nullptr))
        throw ValidationError(ObjectReader::display(r.path()), "give exactly one of learner or request");
    c.command = learner ? CommandKind::run : CommandKind::exact;
    if (expected && *expected != c.command)
        throw ValidationError(learner ? r.path_of("learner") : r.path_of("request"),
                              expected == CommandKind::run ? "the run command needs a learner block"
                                                           : "the exact command needs a request block");
    if (learner) {
        c.memories = parse_memories(r, true);
        c.learner = parse_learner(*learner, r.path_of("learner"));
        c.seeds = parse_seeds(r.require("seeds"), r.path_of("seeds"));
    } else {
        c.exact = parse_request(*request, r.path_of("request"));
        c.memories = parse_memories(r, c.exact.kind != ExactKind::sufficiency_report);
        if (c.exact.kind == ExactKind::sufficiency_report && !c.memories.empty())
            throw ValidationError(r.path_of("memories"), "sufficiency_report analyses the environment alone");
        if (r.find("seeds")) throw ValidationError(r.path_of("seeds"), "exact analyses take no seeds");
    }
    return c;
}

inline void check_schema(ObjectReader& r) {
    const auto& v = r.require("schema_version");
    const auto version = as_unsigned(v, r.path_of("schema_version"));
    if (version != kSchemaVersion)
        throw ValidationError(r.path_of("schema_version"), "unsupported version " + std::to_string(version) +
                                                               ", expected " + std::to_string(kSchemaVersion));
}

} // namespace detail

/// Parses and validates one experiment document. Throws ValidationError with
/// a JSON-pointer path on the first problem.
inline ExperimentConfig parse_experiment(const nlohmann::json& doc, std::optional<CommandKind> expected = std::nullopt) {
    detail::ObjectReader r(doc, "");
    detail::check_schema(r);
    auto c = detail::parse_experiment_body(r, expected);
    r.finish();
    return c;
}

inline FigureConfig parse_figure(const nlohmann::json& doc) {
    detail::ObjectReader r(doc, "");
    detail::check_schema(r);
    FigureConfig f;
    f.figure = detail::as_string(r.require("figure"), "/figure");
    const auto& panels = r.require("panels");
    if (!panels.is_array() || panels.empty()) throw ValidationError("/panels", "expected a non-empty array");
    for (std::size_t i = 0; i < panels.size(); ++i) {
        detail::ObjectReader p(panels[i], "/panels/" + std::to_string(i));
        f.panels.push_back(detail::parse_experiment_body(p, std::nullopt));
        p.finish();
        for (std::size_t j = 0; j + 1 < f.panels.size(); ++j)
            if (f.panels[j].name == f.panels.back().name)
                throw ValidationError("/panels/" + std::to_string(i) + "/name", "duplicate panel name");
    }
    r.finish();
    return f;
}

/// Reads a JSON file; unreadable or malformed input is a ValidationError.
inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string(), std::string("malformed JSON: ") + e.what());
    }
}

} // namespace memaug::harness
