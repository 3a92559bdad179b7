#pragma once

// Trend statistics over per-example score traces: the robust influence
// function, the Mann-Kendall test and the three pairwise trend estimators.

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "trendpu/types.hpp"

namespace trendpu {

/// One unlabeled example's positive-class probabilities, one per snapshot.
struct ScoreTrace {
    ExampleId id{};
    std::vector<double> scores;

    std::size_t length() const noexcept { return scores.size(); }
};

enum class TrendDirection { Increasing, Decreasing, NoTrend };

std::string_view to_string(TrendDirection d) noexcept;

struct TrendVerdict {
    std::int64_t s_statistic = 0;
    double variance = 0.0;
    double z_value = 0.0;
    double gamma = 1.0;  // two-sided p-value
    TrendDirection direction = TrendDirection::NoTrend;
};

enum class TrendEstimator { EmpiricalMean, Full, Simplified };

std::string_view to_string(TrendEstimator e) noexcept;
TrendEstimator parse_estimator(std::string_view name);

struct TrendScoreParams {
    double alpha = 2.0;
    TrendEstimator estimator = TrendEstimator::Full;
};

inline constexpr double kDefaultSignificance = 0.05;

/// sign(x) * ln(1 + |x| + x^2/2). Odd, strictly increasing, |psi(x)| <= |x|.
double psi(double x);

/// Standard normal CDF.
double normal_cdf(double z) noexcept;

std::int64_t mk_s_statistic(std::span<const double> trace);

/// Tie-corrected variance of S; ties are exact floating-point equality.
double mk_variance(std::span<const double> trace);

TrendVerdict mk_test(std::span<const double> trace, double significance_level = kDefaultSignificance);

/// Plain mean of all ordered pairwise differences p_j - p_i, i < j.
double empirical_mean_score(std::span<const double> trace);

/// Mean of psi(alpha * (p_j - p_i)) over all pairs i < j.
double trend_score(std::span<const double> trace, const TrendScoreParams& params);

/// Mean of psi(alpha * (p_{i+1} - p_i)) over consecutive snapshots.
double simplified_trend_score(std::span<const double> trace, const TrendScoreParams& params);

/// Dispatches on params.estimator.
double score_trace(std::span<const double> trace, const TrendScoreParams& params);

/// Scores every trace; all traces must share one length.
std::map<ExampleId, double> score_all(std::span<const ScoreTrace> traces, const TrendScoreParams& params);

}  // namespace trendpu
