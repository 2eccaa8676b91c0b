#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "memaug/learners/common.hpp"

namespace memaug::harness {

/// Median of a non-empty sample; the mean of the two middle values when even.
inline double median(std::vector<double> xs) {
    if (xs.empty()) throw UsageError("median of an empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

/// Half of the population standard deviation (divisor n).
inline double half_std(const std::vector<double>& xs) {
    if (xs.empty()) throw UsageError("standard deviation of an empty sample");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return 0.5 * std::sqrt(ss / static_cast<double>(xs.size()));
}

struct SummaryRow {
    std::size_t step = 0;
    double median = 0.0;
    double half_std = 0.0;
    std::size_t n_seeds = 0;
};

/// Per-checkpoint statistics across runs. Every run must share one schedule.
inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs) {
    if (runs.empty()) throw UsageError("summarize: no runs");
    const auto& first = runs.front().samples;
    for (const auto& r : runs) {
        if (r.samples.size() != first.size()) throw UsageError("summarize: runs have different checkpoint counts");
        for (std::size_t i = 0; i < first.size(); ++i)
            if (r.samples[i].step != first[i].step) throw UsageError("summarize: runs have different checkpoint steps");
    }
    std::vector<SummaryRow> rows;
    std::vector<double> column(runs.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        for (std::size_t k = 0; k < runs.size(); ++k) column[k] = runs[k].samples[i].value;
        rows.push_back({first[i].step, median(column), half_std(column), runs.size()});
    }
    return rows;
}

} // namespace memaug::harness
