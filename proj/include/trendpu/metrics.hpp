#pragma once

#include <optional>
#include <span>

#include "trendpu/types.hpp"

namespace trendpu {

/// Binary classification metrics with label 0 (positive) as the positive class.
struct Metrics {
    std::size_t count = 0;
    double accuracy = 0.0;
    double precision = 0.0;  // 0 when nothing is predicted positive
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auc;  // absent when scores are not given or one class is missing
};

/// Mann-Whitney estimate of P(score(pos) > score(neg)), ties counted one half.
/// Higher scores mean "more positive". Returns nullopt if a class is empty.
std::optional<double> roc_auc(std::span<const double> positive_scores, std::span<const Label> truth);

/// `positive_scores` may be empty, in which case AUC is omitted.
Metrics evaluate(std::span<const Label> predicted, std::span<const Label> truth,
                 std::span<const double> positive_scores = {});

}  // namespace trendpu
