#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include "memaug/analysis/improvement.hpp"
#include "memaug/analysis/observation_values.hpp"
#include "memaug/analysis/sufficiency.hpp"
#include "memaug/harness/config.hpp"
#include "memaug/harness/io.hpp"
#include "memaug/harness/stats.hpp"
#include "memaug/learners.hpp"

namespace memaug::harness {

namespace fs = std::filesystem;

/// Exit codes of the command-line front end.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCapacity = 3;

struct CommandOptions {
    std::size_t jobs = 1;
    std::optional<fs::path> out;    ///< overrides MEMLAB_OUT and the config's output_dir
    std::uint64_t seed_offset = 0;  ///< added to every configured seed
    std::ostream* log = nullptr;    ///< progress lines; never affects artifacts
};

/// --out, then $MEMLAB_OUT, then the config's output_dir, then "results".
inline fs::path output_root(const CommandOptions& options, const std::optional<std::string>& configured) {
    if (options.out) return *options.out;
    if (const char* env = std::getenv("MEMLAB_OUT"); env && *env) return env;
    if (configured) return *configured;
    return "results";
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are
/// rethrown after every worker stops; the lowest failing index wins.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct MemorySeries {
    MemorySpec memory;
    std::vector<std::uint64_t> seeds;
    std::vector<RunRecord> runs; ///< in seed order
    std::vector<SummaryRow> summary;
    fs::path directory;
};

struct RunResult {
    fs::path directory;
    std::vector<MemorySeries> series; ///< in config order
};

/// Trains every (memory, seed) pair and writes one CSV per run plus a summary
/// per memory under <root>/<name>/<memory>/.
inline RunResult run_experiment(const ExperimentConfig& config, const fs::path& root, const CommandOptions& options = {}) {
    if (config.command != CommandKind::run) throw UsageError("run_experiment: config has no learner block");
    const TabularPomdp base = config.environment.build();
    std::vector<AugmentedEnv> envs;
    for (const auto& m : config.memories) envs.push_back(make_augmented(base, m));

    std::vector<std::uint64_t> seeds;
    for (auto s : config.seeds) seeds.push_back(s + options.seed_offset);
    const std::size_t per_memory = seeds.size();
    std::vector<RunRecord> records(envs.size() * per_memory);
    std::mutex log_mutex;
    parallel_for(records.size(), options.jobs, [&](std::size_t i) {
        const std::size_t m = i / per_memory, k = i % per_memory;
        records[i] = run_learner(envs[m], config.learner, seeds[k]);
        if (options.log) {
            std::lock_guard lock(log_mutex);
            *options.log << "[" << config.name << "] " << config.memories[m].str() << " seed " << seeds[k] << " done\n";
        }
    });

    RunResult result;
    result.directory = root / config.name;
    for (std::size_t m = 0; m < envs.size(); ++m) {
        MemorySeries s;
        s.memory = config.memories[m];
        s.seeds = seeds;
        s.runs.assign(records.begin() + static_cast<std::ptrdiff_t>(m * per_memory),
                      records.begin() + static_cast<std::ptrdiff_t>((m + 1) * per_memory));
        s.summary = summarize(s.runs);
        s.directory = result.directory / s.memory.str();
        for (std::size_t k = 0; k < per_memory; ++k)
            write_file_atomic(s.directory / ("seed_" + std::to_string(seeds[k]) + ".csv"), run_csv(s.runs[k]));
        write_file_atomic(s.directory / "summary.csv", summary_csv(s.summary));
        result.series.push_back(std::move(s));
    }
    return result;
}

struct ExactOutcome {
    std::optional<MemorySpec> memory; ///< absent for sufficiency_report
    nlohmann::json document;
    std::optional<ImprovementTrace> trace;
};

struct ExactResult {
    fs::path directory;
    std::vector<ExactOutcome> outcomes; ///< in config order
};

namespace detail {

inline nlohmann::json optional_number(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline nlohmann::json q_table_json(const QTable& q) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t o = 0; o < q.rows(); ++o) rows.push_back(std::vector<double>(q.row(o).begin(), q.row(o).end()));
    return rows;
}

inline nlohmann::json labels_json(const AugmentedEnv& env) {
    nlohmann::json obs = nlohmann::json::array(), act = nlohmann::json::array();
    for (std::size_t o = 0; o < env.num_observations(); ++o) obs.push_back(env.observation_label(o));
    for (std::size_t a = 0; a < env.num_actions(); ++a) act.push_back(env.action_label(a));
    return {{"observations", obs}, {"actions", act}};
}

inline nlohmann::json sufficiency_json(const SufficiencyReport& r) {
    return {{"depth", r.depth},
            {"num_histories", r.num_histories},
            {"beliefs_per_observation", r.beliefs_per_observation},
            {"u", r.u},
            {"bit_memory_bound", r.bit_memory_bound},
            {"tolerance", r.tolerance},
            {"k_cap", r.k_cap},
            {"observation_buffer_k", r.observation_buffer_k ? nlohmann::json(*r.observation_buffer_k) : nlohmann::json()},
            {"observation_action_buffer_k",
             r.observation_action_buffer_k ? nlohmann::json(*r.observation_action_buffer_k) : nlohmann::json()},
            {"complete", r.complete}};
}

inline std::string trace_csv(const ImprovementTrace& trace) {
    std::string s = "iteration,expected_return\n";
    for (const auto& step : trace.steps) s += std::to_string(step.iteration) + "," + format_number(step.expected_return) + "\n";
    return s;
}

inline void write_json(const fs::path& path, const nlohmann::json& doc) { write_file_atomic(path, doc.dump(2) + "\n"); }

} // namespace detail

/// Runs the configured exact analysis for every memory and writes JSON (and
/// for improvement runs a trace CSV) under <root>/<name>/.
inline ExactResult exact_experiment(const ExperimentConfig& config, const fs::path& root, const CommandOptions& options = {}) {
    if (config.command != CommandKind::exact) throw UsageError("exact_experiment: config has no request block");
    const TabularPomdp base = config.environment.build();
    const auto& req = config.exact;
    ExactResult result;
    result.directory = root / config.name;

    if (req.kind == ExactKind::sufficiency_report) {
        ExactOutcome out;
        try {
            out.document = detail::sufficiency_json(sufficiency_report(base, req.depth, req.sufficiency));
        } catch (const SufficiencyCapacityError& e) {
            detail::write_json(result.directory / "sufficiency.partial.json", detail::sufficiency_json(e.partial()));
            throw;
        }
        out.document["environment"] = config.environment.name;
        detail::write_json(result.directory / "sufficiency.json", out.document);
        result.outcomes.push_back(std::move(out));
        return result;
    }

    // Build every product first so capacity problems surface before any output.
    std::vector<AugmentedEnv> envs;
    std::vector<ProductPomdp> products;
    for (const auto& m : config.memories) {
        envs.push_back(make_augmented(base, m));
        products.push_back(build_product_pomdp(envs.back(), {req.improvement.product_cap}));
    }
    for (std::size_t i = 0; i < envs.size(); ++i) {
        const auto& env = envs[i];
        const auto& pomdp = products[i].pomdp;
        const fs::path dir = result.directory / config.memories[i].str();
        const auto policy = req.policy.build(env.num_observations(), env.num_actions(), "/request/policy");
        ExactOutcome out;
        out.memory = config.memories[i];
        out.document = detail::labels_json(env);
        out.document["environment"] = config.environment.name;
        out.document["memory"] = config.memories[i].str();
        switch (req.kind) {
        case ExactKind::exact_obs_q: {
            const auto eval = evaluate_observations(pomdp, policy);
            std::vector<bool> visited;
            for (std::size_t o = 0; o < pomdp.num_observations(); ++o) visited.push_back(eval.projection.visited(o));
            out.document["visited"] = visited;
            out.document["q"] = detail::q_table_json(eval.q);
            out.document["expected_return"] = eval.expected_return;
            detail::write_json(dir / "exact_obs_q.json", out.document);
            break;
        }
        case ExactKind::detect_shortcuts: {
            nlohmann::json detections = nlohmann::json::array();
            std::size_t flips = 0;
            for (const auto& s : detect_shortcuts(pomdp, policy, req.shortcut_tolerance)) {
                flips += s.flips_argmax ? 1 : 0;
                detections.push_back({{"observation", s.observation},
                                      {"observation_label", env.observation_label(s.observation)},
                                      {"action", s.action},
                                      {"action_label", env.action_label(s.action)},
                                      {"td_value", s.td_value},
                                      {"mc_value", s.mc_value},
                                      {"flips_argmax", s.flips_argmax}});
            }
            out.document["detections"] = detections;
            out.document["count"] = detections.size();
            out.document["argmax_flips"] = flips;
            detail::write_json(dir / "shortcuts.json", out.document);
            break;
        }
        case ExactKind::idealized_improvement: {
            auto opts = req.improvement;
            opts.record_policies = false;
            auto trace = idealized_improvement(base, config.memories[i], opts, policy);
            out.document = {{"environment", config.environment.name},
                            {"memory", config.memories[i].str()},
                            {"epsilon", opts.epsilon},
                            {"iterations", trace.steps.size()},
                            {"converged", trace.converged},
                            {"label", to_string(trace.label)},
                            {"final_return", trace.steps.back().expected_return},
                            {"limit_return", detail::optional_number(trace.limit_return)},
                            {"reference_value", detail::optional_number(trace.reference_value)}};
            write_file_atomic(dir / "trace.csv", detail::trace_csv(trace));
            detail::write_json(dir / "improvement.json", out.document);
            out.trace = std::move(trace);
            break;
        }
        case ExactKind::sufficiency_report: break;
        }
        if (options.log) *options.log << "[" << config.name << "] " << config.memories[i].str() << " done\n";
        result.outcomes.push_back(std::move(out));
    }
    return result;
}

inline const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {"fig2", "fig3", "fig4", "fig6", "fig9"};
    return ids;
}

namespace detail {

/// step, then median and half_std per memory.
inline std::string wide_run_csv(const RunResult& run) {
    std::string s = "step";
    for (const auto& series : run.series) s += "," + series.memory.str() + "," + series.memory.str() + "_half_std";
    s += "\n";
    const std::size_t rows = run.series.front().summary.size();
    for (std::size_t i = 0; i < rows; ++i) {
        s += std::to_string(run.series.front().summary[i].step);
        for (const auto& series : run.series)
            s += "," + format_number(series.summary[i].median) + "," + format_number(series.summary[i].half_std);
        s += "\n";
    }
    return s;
}

/// iteration, then expected return per memory; a trace that stopped early
/// leaves its later cells empty.
inline std::string wide_trace_csv(const ExactResult& exact) {
    std::string s = "iteration";
    std::size_t rows = 0;
    for (const auto& o : exact.outcomes) {
        s += "," + o.memory->str();
        rows = std::max(rows, o.trace->steps.size());
    }
    s += "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        s += std::to_string(i);
        for (const auto& o : exact.outcomes)
            s += "," + (i < o.trace->steps.size() ? format_number(o.trace->steps[i].expected_return) : std::string());
        s += "\n";
    }
    return s;
}

} // namespace detail

struct FigureResult {
    fs::path directory;
    std::vector<fs::path> plots; ///< one plot-ready CSV per panel
};

/// Runs the bundled config <config_dir>/<figure>.json and writes its panels
/// plus one plot-ready CSV per panel under <root>/<figure>/.
inline FigureResult reproduce_figure(const std::string& figure, const fs::path& config_dir, const CommandOptions& options = {}) {
    const auto& ids = figure_ids();
    if (std::find(ids.begin(), ids.end(), figure) == ids.end()) {
        std::string known;
        for (const auto& id : ids) known += (known.empty() ? "" : ", ") + id;
        throw UsageError("unknown figure \"" + figure + "\"; expected one of " + known);
    }
    const FigureConfig config = parse_figure(read_json_file(config_dir / (figure + ".json")));
    if (config.figure != figure) throw ValidationError("/figure", "expected \"" + figure + "\"");

    FigureResult result;
    result.directory = output_root(options, std::nullopt) / figure;
    for (const auto& panel : config.panels) {
        const fs::path plot = result.directory / (panel.name + ".csv");
        if (panel.command == CommandKind::run) {
            write_file_atomic(plot, detail::wide_run_csv(run_experiment(panel, result.directory, options)));
        } else {
            if (panel.exact.kind != ExactKind::idealized_improvement)
                throw ValidationError("/panels", "figure panels support only idealized_improvement requests");
            write_file_atomic(plot, detail::wide_trace_csv(exact_experiment(panel, result.directory, options)));
        }
        result.plots.push_back(plot);
    }
    return result;
}

inline RunResult cmd_run(const fs::path& config_path, const CommandOptions& options = {}) {
    const auto config = parse_experiment(read_json_file(config_path), CommandKind::run);
    return run_experiment(config, output_root(options, config.output_dir), options);
}

inline ExactResult cmd_exact(const fs::path& config_path, const CommandOptions& options = {}) {
    const auto config = parse_experiment(read_json_file(config_path), CommandKind::exact);
    return exact_experiment(config, output_root(options, config.output_dir), options);
}

/// Maps the exception in flight to an exit code: configuration problems 2,
/// capacity limits 3, anything else 1.
inline int exit_code_for(const std::exception_ptr& error) {
    try {
        std::rethrow_exception(error);
    } catch (const CapacityError&) {
        return kExitCapacity;
    } catch (const ValidationError&) {
        return kExitConfig;
    } catch (const UsageError&) {
        return kExitConfig;
    } catch (const UnsupportedConfigurationError&) {
        return kExitConfig;
    } catch (const nlohmann::json::exception&) {
        return kExitConfig;
    } catch (...) {
        return kExitOther;
    }
}

} // namespace memaug::harness
