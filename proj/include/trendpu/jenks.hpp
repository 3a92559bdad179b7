#pragma once

// Two-class Fisher natural break over one-dimensional values.
//
// Objective for a split of the ascending-sorted values into a low cluster of
// size b and a high cluster of size N - b:
//
//     M2(low) / b + M2(high) / (N - b)
//
// where M2 is the sum of squared deviations from the cluster mean. A split is
// never placed between two equal values unless every position is such a split
// (all values equal), so equal values always land in the same cluster.

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "trendpu/types.hpp"

namespace trendpu {

struct BreakResult {
    std::size_t break_index = 0;  // size of the low cluster, in [1, N-1]
    double objective = 0.0;
    std::vector<std::size_t> sorted_order;  // sorted position -> original index
};

enum class PseudoLabel { PseudoPositive, PseudoNegative };

using PseudoLabels = std::map<ExampleId, PseudoLabel>;

/// Exhaustive O(N^2) evaluation of every admissible split.
BreakResult natural_break_oracle(std::span<const double> values);

/// Sort, one ascending and one descending running-statistics sweep, then scan.
BreakResult natural_break_fast(std::span<const double> values);

/// Objective of the split at `break_index` over already sorted values,
/// computed from scratch with two-pass means.
double split_objective(std::span<const double> sorted_values, std::size_t break_index);

/// Running sum of squared deviations (Welford) for every prefix length 1..N.
std::vector<double> prefix_m2(std::span<const double> values);

struct Partition {
    PseudoLabels labels;
    BreakResult result;
    std::size_t low_count = 0;
    std::size_t high_count = 0;
};

/// High-score cluster -> PseudoPositive, low-score cluster -> PseudoNegative.
/// Throws ErrorKind::Degenerate when every score is equal.
Partition partition_by_trend(const std::map<ExampleId, double>& scores);

}  // namespace trendpu
