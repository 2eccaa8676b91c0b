#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "memaug/errors.hpp"
#include "memaug/pomdp.hpp"

namespace memaug {

/// Row-stochastic table pi[o] -> distribution over actions.
class StochasticPolicy {
public:
    StochasticPolicy(std::size_t num_observations, std::size_t num_actions, std::vector<double> table)
        : rows_(num_observations), cols_(num_actions), table_(std::move(table)) {
        if (cols_ == 0) throw UsageError("StochasticPolicy: no actions");
        if (table_.size() != rows_ * cols_) throw UsageError("StochasticPolicy: table has wrong size");
        for (std::size_t o = 0; o < rows_; ++o) validate_row(o);
    }

    static StochasticPolicy uniform(std::size_t num_observations, std::size_t num_actions) {
        return StochasticPolicy(num_observations, num_actions,
                                std::vector<double>(num_observations * num_actions, 1.0 / num_actions));
    }

    static StochasticPolicy deterministic(std::span<const std::size_t> actions, std::size_t num_actions) {
        std::vector<double> table(actions.size() * num_actions, 0.0);
        for (std::size_t o = 0; o < actions.size(); ++o) {
            if (actions[o] >= num_actions) throw IndexError("StochasticPolicy: action out of range");
            table[o * num_actions + actions[o]] = 1.0;
        }
        return StochasticPolicy(actions.size(), num_actions, std::move(table));
    }

    std::size_t num_observations() const noexcept { return rows_; }
    std::size_t num_actions() const noexcept { return cols_; }

    double operator()(std::size_t o, std::size_t a) const { return table_[o * cols_ + a]; }
    std::span<const double> row(std::size_t o) const {
        if (o >= rows_) throw IndexError("StochasticPolicy: observation out of range");
        return {table_.data() + o * cols_, cols_};
    }

    void set_row(std::size_t o, std::span<const double> probs) {
        if (o >= rows_) throw IndexError("StochasticPolicy: observation out of range");
        if (probs.size() != cols_) throw UsageError("StochasticPolicy: row has wrong size");
        std::copy(probs.begin(), probs.end(), table_.begin() + static_cast<std::ptrdiff_t>(o * cols_));
        validate_row(o);
    }

    const std::vector<double>& table() const noexcept { return table_; }

    bool operator==(const StochasticPolicy& other) const = default;

private:
    void validate_row(std::size_t o) const {
        double total = 0.0;
        for (std::size_t a = 0; a < cols_; ++a) {
            const double p = table_[o * cols_ + a];
            if (!(p >= 0.0) || !std::isfinite(p))
                throw UsageError("StochasticPolicy: row " + std::to_string(o) + " has an invalid entry");
            total += p;
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance)
            throw UsageError("StochasticPolicy: row " + std::to_string(o) + " sums to " + std::to_string(total));
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> table_;
};

/// Dense (observation-or-state, action) -> value table.
class QTable {
public:
    QTable() = default;
    QTable(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

    const std::vector<double>& values() const noexcept { return values_; }
    /// Row-major view of every entry, index r * cols + c.
    std::span<double> flat() noexcept { return values_; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double max_abs_difference(const QTable& other) const {
        if (other.rows_ != rows_ || other.cols_ != cols_) throw UsageError("QTable: shape mismatch");
        double d = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) d = std::max(d, std::abs(values_[i] - other.values_[i]));
        return d;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Lowest-index argmax of a row.
inline std::size_t argmax_lowest(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

} // namespace memaug
