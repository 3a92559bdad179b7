#include "trendpu/jenks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "trendpu/error.hpp"

namespace trendpu {

namespace {

void require_values(std::span<const double> values, const char* op) {
    if (values.size() < 2) {
        fail(ErrorKind::Size, std::string(op) + ": need at least 2 values, got " + std::to_string(values.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorKind::Domain, std::string(op) + ": non-finite value");
    }
}

std::vector<std::size_t> ascending_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return order;
}

std::vector<double> apply_order(std::span<const double> values, const std::vector<std::size_t>& order) {
    std::vector<double> sorted(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = values[order[i]];
    return sorted;
}

bool all_ties(const std::vector<double>& sorted) { return sorted.front() == sorted.back(); }

// Split b is admissible when it does not cut through a run of equal values.
bool admissible(const std::vector<double>& sorted, std::size_t b, bool degenerate) {
    return degenerate || sorted[b - 1] != sorted[b];
}

}  // namespace

double split_objective(std::span<const double> sorted_values, std::size_t break_index) {
    const std::size_t n = sorted_values.size();
    if (break_index < 1 || break_index >= n) fail(ErrorKind::Bounds, "split_objective: break index out of range");
    auto normalized_ss = [](std::span<const double> part) {
        const double mean = std::accumulate(part.begin(), part.end(), 0.0) / static_cast<double>(part.size());
        double ss = 0.0;
        for (double x : part) ss += (x - mean) * (x - mean);
        return ss / static_cast<double>(part.size());
    };
    return normalized_ss(sorted_values.first(break_index)) + normalized_ss(sorted_values.subspan(break_index));
}

std::vector<double> prefix_m2(std::span<const double> values) {
    std::vector<double> m2(values.size());
    double mean = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        // (n-1) s_n^2 = (n-2) s_{n-1}^2 + ((n-1)/n) (x_n - mean_{n-1})^2
        const auto n = static_cast<double>(k + 1);
        const double delta = values[k] - mean;
        acc += (n - 1.0) / n * delta * delta;
        mean += delta / n;
        m2[k] = acc;
    }
    return m2;
}

BreakResult natural_break_oracle(std::span<const double> values) {
    require_values(values, "natural_break_oracle");
    BreakResult result;
    result.sorted_order = ascending_order(values);
    const auto sorted = apply_order(values, result.sorted_order);
    const bool degenerate = all_ties(sorted);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b < sorted.size(); ++b) {
        if (!admissible(sorted, b, degenerate)) continue;
        const double obj = split_objective(sorted, b);
        if (obj < best) {
            best = obj;
            result.break_index = b;
        }
    }
    result.objective = best;
    return result;
}

BreakResult natural_break_fast(std::span<const double> values) {
    require_values(values, "natural_break_fast");
    BreakResult result;
    result.sorted_order = ascending_order(values);
    const auto sorted = apply_order(values, result.sorted_order);
    const std::size_t n = sorted.size();
    const bool degenerate = all_ties(sorted);

    // low[b-1]: M2 of the b smallest values; high_rev[m-1]: M2 of the m largest.
    const auto low = prefix_m2(sorted);
    std::vector<double> descending(sorted.rbegin(), sorted.rend());
    const auto high_rev = prefix_m2(descending);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b < n; ++b) {
        if (!admissible(sorted, b, degenerate)) continue;
        const std::size_t m = n - b;
        const double obj = low[b - 1] / static_cast<double>(b) + high_rev[m - 1] / static_cast<double>(m);
        if (obj < best) {
            best = obj;
            result.break_index = b;
        }
    }
    result.objective = best;
    return result;
}

Partition partition_by_trend(const std::map<ExampleId, double>& scores) {
    if (scores.size() < 2) {
        fail(ErrorKind::Size, "partition_by_trend: need at least 2 examples, got " + std::to_string(scores.size()));
    }
    std::vector<ExampleId> ids;
    std::vector<double> values;
    ids.reserve(scores.size());
    values.reserve(scores.size());
    for (const auto& [id, s] : scores) {
        ids.push_back(id);
        values.push_back(s);
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (std::isfinite(*lo) && *lo == *hi) {
        fail(ErrorKind::Degenerate, "partition_by_trend: degenerate distribution, all trend scores are equal");
    }

    Partition out;
    out.result = natural_break_fast(values);
    const std::size_t b = out.result.break_index;
    for (std::size_t pos = 0; pos < out.result.sorted_order.size(); ++pos) {
        const auto label = pos < b ? PseudoLabel::PseudoNegative : PseudoLabel::PseudoPositive;
        out.labels.emplace(ids[out.result.sorted_order[pos]], label);
    }
    out.low_count = b;
    out.high_count = values.size() - b;
    return out;
}

}  // namespace trendpu
