// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is 0 only when every criterion passes; with --report it is 0
// whenever all criteria were evaluated, so a failing verdict stays visible in
// the output without aborting a test run.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "memaug/analysis/closed_form.hpp"
#include "memaug/analysis/improvement.hpp"
#include "memaug/analysis/observation_values.hpp"
#include "memaug/analysis/policy_search.hpp"
#include "memaug/analysis/sufficiency.hpp"
#include "memaug/environments.hpp"
#include "memaug/harness/stats.hpp"
#include "memaug/learners.hpp"

using namespace memaug;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

ProductPomdp product_of(const TabularPomdp& base, const char* spec) {
    return build_product_pomdp(make_augmented(base, parse_memory_spec(spec)));
}

std::size_t pair(std::size_t a, std::size_t w, std::size_t writes = 2) { return a * writes + w; }

StochasticPolicy point_policy(std::size_t observations, std::size_t actions, const std::map<std::size_t, std::size_t>& choice) {
    std::vector<std::size_t> acts(observations, 0);
    for (auto [o, a] : choice) acts[o] = a;
    return StochasticPolicy::deterministic(acts, actions);
}

std::string fmt(const char* format, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

bool near(double x, double y, double tol) { return std::abs(x - y) <= tol; }

// ---------------------------------------------------------------------------

Verdict q_value_table() {
    const TabularPomdp task = build_four_action_recall();
    const auto product = product_of(task, "B1");
    const auto uniform = StochasticPolicy::uniform(2, 8);
    const QTable generic = exact_obs_q(product.pomdp, uniform);
    const QTable closed = closed_form_q_b1(task, uniform);
    const std::array<std::array<double, 4>, 2> printed = {{{-0.916, 0.2916, -1.4583, -0.47916}, {-1.25, 0.5, -2.375, 0.5625}}};
    double table_gap = 0.0;
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t w = 0; w < 2; ++w) table_gap = std::max(table_gap, std::abs(generic(m, pair(a, w)) - printed[m][a]));
    const double agreement = generic.max_abs_difference(closed);
    return {table_gap <= 1e-3 && agreement <= 1e-9,
            "max gap to printed table " + fmt("%.2e", table_gap) + ", generic vs closed form " + fmt("%.2e", agreement)};
}

Verdict local_optimum() {
    const TabularPomdp task = build_four_action_recall();
    const auto product = product_of(task, "B1");
    const auto local = point_policy(2, 8, {{0, pair(1, 1)}, {1, pair(3, 1)}});
    const QTable q = exact_obs_q(product.pomdp, local);
    bool greedy_is_local = true;
    for (std::size_t m = 0; m < 2; ++m) greedy_is_local = greedy_is_local && local(m, greedy_pair_action(q.row(m), 2)) == 1.0;

    std::ostringstream detail;
    detail << "greedy(q of pi_l) == pi_l: " << (greedy_is_local ? "yes" : "no");
    bool pass = greedy_is_local;
    for (const auto& [spec, target] : std::vector<std::pair<const char*, double>>{{"B2", 0.75}, {"B5", 0.75}, {"OA1", 1.0}}) {
        const auto trace = idealized_improvement(task, parse_memory_spec(spec), {.record_policies = false});
        const bool ok = trace.converged && trace.limit_return && near(*trace.limit_return, target, 1e-6);
        pass = pass && ok;
        detail << "; " << spec << " -> " << (trace.limit_return ? fmt("%.9f", *trace.limit_return) : "not converged");
    }
    return {pass, detail.str()};
}

Verdict variant_recall() {
    const TabularPomdp task = build_variant_recall();
    const auto oa1 = idealized_improvement(task, parse_memory_spec("OA1"), {.record_policies = false});
    const auto oa2 = idealized_improvement(task, parse_memory_spec("OA2"), {.record_policies = false});
    // OA1 may chatter instead of meeting the stopping rule; then the settled
    // plateau of the last 1000 iterations is what it converges to.
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = oa1.steps.size() - std::min<std::size_t>(1000, oa1.steps.size()); i < oa1.steps.size(); ++i) {
        lo = std::min(lo, oa1.steps[i].expected_return);
        hi = std::max(hi, oa1.steps[i].expected_return);
    }
    const double oa1_value = oa1.converged ? *oa1.limit_return : hi;
    const bool oa1_settled = oa1.converged || hi - lo < 0.01;
    const bool oa1_ok = oa1_settled && oa1_value < 3.0 - 1e-6;
    const bool oa2_ok = oa2.converged && oa2.limit_return && near(*oa2.limit_return, 3.0, 1e-6);
    std::ostringstream detail;
    detail << "OA1 " << (oa1.converged ? "converged to " + fmt("%.6f", oa1_value)
                                       : "stopping rule unmet after " + std::to_string(oa1.steps.size()) +
                                             " iterations, last 1000 returns in [" + fmt("%.4f", lo) + ", " +
                                             fmt("%.4f", hi) + "]")
           << "; OA2 -> " << (oa2.limit_return ? fmt("%.9f", *oa2.limit_return) : "not converged");
    return {oa1_ok && oa2_ok, detail.str()};
}

Verdict shortcut() {
    const auto product = product_of(build_recall(0.95), "OA1");
    const auto blue = point_policy(4, 6, {{0, pair(0, 1)}, {1, pair(1, 1)}, {2, pair(2, 1)}, {3, pair(0, 1)}});
    const QTable td = td_fixed_point(product.pomdp, blue);
    const QTable mc = exact_obs_q(product.pomdp, blue);
    const std::size_t push1 = pair(0, 1), push2 = pair(1, 1);
    const bool values = near(td(0, push2), 0.95, 1e-9) && near(td(0, push1), 0.9025, 1e-9) && near(mc(0, push2), 0.0, 1e-9);
    std::size_t oa1_flips = 0;
    bool flip_at_push2 = false;
    const auto oa1 = detect_shortcuts(product.pomdp, blue);
    for (const auto& s : oa1)
        if (s.flips_argmax) {
            ++oa1_flips;
            flip_at_push2 = s.observation == 0 && s.action == push2;
        }
    const auto blue_b2 = point_policy(4, 12, {{0, pair(0, 1, 4)}, {1, pair(1, 2, 4)}, {2, pair(2, 3, 4)}, {3, pair(0, 0, 4)}});
    const auto b2 = detect_shortcuts(product_of(build_recall(0.95), "B2").pomdp, blue_b2);
    std::ostringstream detail;
    detail << "TD Q(empty,2push)=" << fmt("%.6f", td(0, push2)) << " TD Q(empty,1push)=" << fmt("%.6f", td(0, push1))
           << " true Q(empty,2push)=" << fmt("%.6f", mc(0, push2)) << "; OA1 flips " << oa1_flips << ", detections OA1 "
           << oa1.size() << " vs B2 " << b2.size();
    return {values && oa1_flips == 1 && flip_at_push2 && b2.size() > oa1.size(), detail.str()};
}

Verdict oracle_equivalence() {
    double worst = 0.0;
    std::ostringstream detail;
    for (const char* spec : {"B1", "B2", "K1", "O1", "OA1"}) {
        const auto env = make_augmented(build_recall(), parse_memory_spec(spec));
        const auto product = build_product_pomdp(env);
        const double gap = oracle::max_sequence_gap(env, product.pomdp, 3);
        worst = std::max(worst, gap);
        detail << spec << " " << fmt("%.1e", gap) << " ";
    }
    detail << "(max L-inf gap over every length-3 action sequence)";
    return {worst < 1e-9, detail.str()};
}

Verdict expressiveness() {
    const auto with_memory = exhaustive_policy_search(product_of(build_recall(1.0), "OA1").pomdp);
    const auto raw = exhaustive_policy_search(build_recall(1.0));
    const auto report = sufficiency_report(build_four_action_recall());
    std::ostringstream detail;
    detail << "recall+OA1 best " << fmt("%.6f", with_memory.value) << ", raw recall best " << fmt("%.6f", raw.value)
           << "; four-action u=" << report.u << " bit bound=" << report.bit_memory_bound;
    return {near(with_memory.value, 1.0, 1e-9) && raw.value < with_memory.value - 1e-9 && report.u == 5 &&
                report.bit_memory_bound == 5,
            detail.str()};
}

Verdict q_learning_oscillation() {
    const auto env = make_augmented(build_recall(0.95), parse_memory_spec("OA1"));
    LearnerConfig config; // epsilon 0.01, step size 0.1, discount 0.95, optimistic init
    config.total_steps = 1'000'000;
    config.eval_period = 10'000;
    config.eval_mode = EvaluationMode::greedy;
    config.metric = Metric::episode_return;
    std::size_t oscillating = 0;
    const std::size_t seeds = 30;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        const auto record = q_learning(env, config, seed).record;
        bool reached = false, dropped = false;
        for (const auto& s : record.samples) {
            if (s.value == 1.0) reached = true;
            else if (reached && s.value == 0.0) dropped = true;
        }
        oscillating += dropped ? 1 : 0;
    }
    const double share = static_cast<double>(oscillating) / static_cast<double>(seeds);
    return {share >= 0.8, std::to_string(oscillating) + "/" + std::to_string(seeds) +
                              " seeds reach return 1 and later fall back to 0 (threshold 80%)"};
}

/// Median over seeds of the last evaluation of each run.
double median_final(const AugmentedEnv& env, const LearnerConfig& config, std::size_t seeds) {
    std::vector<double> finals;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) finals.push_back(run_learner(env, config, seed).samples.back().value);
    return harness::median(finals);
}

Verdict gravity_ordering() {
    LearnerConfig config;
    config.total_steps = 20'000'000;
    config.eval_period = 1'000'000;
    config.metric = Metric::reward_per_100_steps;
    const TabularPomdp gravity = build_gravity();
    std::map<std::string, double> med;
    for (const char* spec : {"O1", "OA1", "B1", "none"})
        med[spec] = median_final(make_augmented(gravity, parse_memory_spec(spec)), config, 30);
    std::ostringstream detail;
    detail << "median final reward per 100 steps: O1 " << fmt("%.3f", med["O1"]) << ", OA1 " << fmt("%.3f", med["OA1"])
           << ", B1 " << fmt("%.3f", med["B1"]) << ", None " << fmt("%.3f", med["none"]);
    return {med["O1"] >= med["OA1"] && med["OA1"] > med["B1"] && med["O1"] > med["none"], detail.str()};
}

Verdict sarsa_lambda_checks() {
    const TabularPomdp gravity = build_gravity();
    LearnerConfig config;
    config.algorithm = Algorithm::sarsa_lambda;
    config.lambda = 0.0;
    config.total_steps = 300'000;
    config.eval_period = 50'000;
    config.eval_steps = 2'000;
    bool identical = true;
    for (const char* spec : {"O1", "B1"})
        for (std::uint64_t seed : {0u, 1u, 2u}) {
            const auto env = make_augmented(gravity, parse_memory_spec(spec));
            const auto learner = sarsa_lambda(env, config, seed);
            const auto reference = oracle::one_step_sarsa(env, config, seed);
            identical = identical && learner.q.values() == reference.q.values();
            for (std::size_t i = 0; i < learner.record.samples.size(); ++i)
                identical = identical && learner.record.samples[i].value == reference.record.samples[i].value;
        }

    config.lambda = 0.5;
    config.total_steps = 5'000'000;
    config.eval_period = 500'000;
    config.eval_steps = 10'000;
    const double o1 = median_final(make_augmented(gravity, parse_memory_spec("O1")), config, 30);
    const double b1 = median_final(make_augmented(gravity, parse_memory_spec("B1")), config, 30);
    return {identical && o1 > b1, std::string("lambda 0 bit-identical to one-step Sarsa: ") + (identical ? "yes" : "no") +
                                      "; lambda 0.5 median final O1 " + fmt("%.3f", o1) + " vs B1 " + fmt("%.3f", b1)};
}

Verdict scale_invariance() {
    const double factor = 10.0;
    bool same_policies = true, scaled_returns = true;
    std::size_t snapshots = 0;
    for (const char* spec : {"B1", "B2", "OA1"}) {
        const auto base = idealized_improvement(build_four_action_recall(1.0), parse_memory_spec(spec));
        const auto big = idealized_improvement(build_four_action_recall(factor), parse_memory_spec(spec));
        if (base.steps.size() != big.steps.size()) {
            same_policies = false;
            continue;
        }
        for (std::size_t i = 0; i < base.steps.size(); ++i) {
            same_policies = same_policies && *base.steps[i].policy == *big.steps[i].policy;
            const double expected = factor * base.steps[i].expected_return;
            scaled_returns = scaled_returns &&
                             std::abs(big.steps[i].expected_return - expected) <= 1e-12 * std::max(1.0, std::abs(expected));
            ++snapshots;
        }
    }
    return {same_policies && scaled_returns, std::to_string(snapshots) + " snapshots over B1, B2, OA1; policies identical: " +
                                                 (same_policies ? "yes" : "no") +
                                                 ", returns scaled by 10: " + (scaled_returns ? "yes" : "no")};
}

} // namespace

int main(int argc, char** argv) {
    bool report_only = false;
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--report") == 0) report_only = true;
        else only.push_back(std::atoi(argv[i]));
    }
    struct Criterion {
        const char* title;
        std::function<Verdict()> check;
        double budget_seconds; ///< runtime bound; the "minutes" criteria get an hour
    };
    const std::vector<Criterion> criteria = {
        {"q-value table (four-action recall, B1)", q_value_table, 1.0},
        {"local optimum and family limits", local_optimum, 10.0},
        {"variant recall OA1 below optimum, OA2 optimal", variant_recall, 10.0},
        {"non-Markovian shortcut", shortcut, 1.0},
        {"wrapper vs product trajectory distributions", oracle_equivalence, 5.0},
        {"expressiveness and sufficiency", expressiveness, 10.0},
        {"q-learning oscillation on recall + OA1", q_learning_oscillation, 3600.0},
        {"gravity ordering under q-learning", gravity_ordering, 3600.0},
        {"Sarsa(lambda) identity and ordering", sarsa_lambda_checks, 3600.0},
        {"reward scale invariance", scale_invariance, 10.0},
    };
    int failures = 0, evaluated = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > criteria[i].budget_seconds) {
            v.pass = false;
            v.detail += "; over the " + fmt("%.0f", criteria[i].budget_seconds) + " s budget";
        }
        std::printf("criterion %2d %s: %s [%s] (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", criteria[i].title,
                    v.detail.c_str(), seconds);
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
        ++evaluated;
    }
    std::printf("%d of %d criteria passed\n", evaluated - failures, evaluated);
    return (failures == 0 || report_only) ? 0 : 1;
}
