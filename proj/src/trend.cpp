#include "trendpu/trend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "trendpu/error.hpp"

namespace trendpu {

namespace {

void require_trace(std::span<const double> trace, const char* op) {
    if (trace.size() < 2) {
        fail(ErrorKind::Length, std::string(op) + ": trace needs at least 2 snapshots, got " +
                                    std::to_string(trace.size()));
    }
    for (double p : trace) {
        if (!std::isfinite(p)) fail(ErrorKind::Domain, std::string(op) + ": non-finite score in trace");
    }
}

void require_alpha(const TrendScoreParams& params) {
    if (!(params.alpha > 0.0) || !std::isfinite(params.alpha)) {
        fail(ErrorKind::Config, "trend score: alpha must be a positive finite number");
    }
}

double pair_count(std::size_t t) { return 0.5 * static_cast<double>(t) * static_cast<double>(t - 1); }

int sign_of(double x) noexcept { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::string_view to_string(TrendDirection d) noexcept {
    switch (d) {
        case TrendDirection::Increasing: return "increasing";
        case TrendDirection::Decreasing: return "decreasing";
        case TrendDirection::NoTrend: return "no_trend";
    }
    return "?";
}

std::string_view to_string(TrendEstimator e) noexcept {
    switch (e) {
        case TrendEstimator::EmpiricalMean: return "empirical";
        case TrendEstimator::Full: return "full";
        case TrendEstimator::Simplified: return "simplified";
    }
    return "?";
}

TrendEstimator parse_estimator(std::string_view name) {
    if (name == "full") return TrendEstimator::Full;
    if (name == "simplified") return TrendEstimator::Simplified;
    if (name == "empirical") return TrendEstimator::EmpiricalMean;
    fail(ErrorKind::Config, "unknown estimator '" + std::string(name) + "' (expected full|simplified|empirical)");
}

double psi(double x) {
    if (!std::isfinite(x)) fail(ErrorKind::Domain, "psi: non-finite input");
    // Evaluated on |x| so that psi(-x) == -psi(x) bit for bit.
    const double a = std::fabs(x);
    const double magnitude = std::log1p(a + 0.5 * a * a);
    return x < 0.0 ? -magnitude : magnitude;
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::int64_t mk_s_statistic(std::span<const double> trace) {
    require_trace(trace, "mk_s_statistic");
    std::int64_t s = 0;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        for (std::size_t j = i + 1; j < trace.size(); ++j) s += sign_of(trace[j] - trace[i]);
    }
    return s;
}

double mk_variance(std::span<const double> trace) {
    require_trace(trace, "mk_variance");
    const auto n = static_cast<double>(trace.size());

    std::vector<double> sorted(trace.begin(), trace.end());
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto tp = static_cast<double>(j - i);
        if (j - i > 1) tie_term += tp * (tp - 1.0) * (2.0 * tp + 5.0);
        i = j;
    }
    const double var = (n * (n - 1.0) * (2.0 * n + 5.0) - tie_term) / 18.0;
    return std::max(var, 0.0);
}

TrendVerdict mk_test(std::span<const double> trace, double significance_level) {
    if (!(significance_level > 0.0 && significance_level < 1.0)) {
        fail(ErrorKind::Config, "mk_test: significance level must lie in (0, 1)");
    }
    TrendVerdict v;
    v.s_statistic = mk_s_statistic(trace);
    v.variance = mk_variance(trace);
    if (v.variance <= 0.0) {
        // Constant trace: no information about direction.
        v.z_value = 0.0;
        v.gamma = 1.0;
        v.direction = TrendDirection::NoTrend;
        return v;
    }
    const double sd = std::sqrt(v.variance);
    const auto s = static_cast<double>(v.s_statistic);
    if (v.s_statistic > 0) {
        v.z_value = (s - 1.0) / sd;
    } else if (v.s_statistic < 0) {
        v.z_value = (s + 1.0) / sd;
    } else {
        v.z_value = 0.0;
    }
    v.gamma = std::erfc(std::fabs(v.z_value) / std::numbers::sqrt2);
    if (v.gamma > significance_level || v.z_value == 0.0) {
        v.direction = TrendDirection::NoTrend;
    } else {
        v.direction = v.z_value > 0.0 ? TrendDirection::Increasing : TrendDirection::Decreasing;
    }
    return v;
}

double empirical_mean_score(std::span<const double> trace) {
    require_trace(trace, "empirical_mean_score");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        for (std::size_t j = i + 1; j < trace.size(); ++j) sum += trace[j] - trace[i];
    }
    return sum / pair_count(trace.size());
}

double trend_score(std::span<const double> trace, const TrendScoreParams& params) {
    require_trace(trace, "trend_score");
    require_alpha(params);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        for (std::size_t j = i + 1; j < trace.size(); ++j) sum += psi(params.alpha * (trace[j] - trace[i]));
    }
    return sum / pair_count(trace.size());
}

double simplified_trend_score(std::span<const double> trace, const TrendScoreParams& params) {
    require_trace(trace, "simplified_trend_score");
    require_alpha(params);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) sum += psi(params.alpha * (trace[i + 1] - trace[i]));
    return sum / static_cast<double>(trace.size() - 1);
}

double score_trace(std::span<const double> trace, const TrendScoreParams& params) {
    switch (params.estimator) {
        case TrendEstimator::EmpiricalMean: return empirical_mean_score(trace);
        case TrendEstimator::Full: return trend_score(trace, params);
        case TrendEstimator::Simplified: return simplified_trend_score(trace, params);
    }
    fail(ErrorKind::Config, "score_trace: unknown estimator");
}

std::map<ExampleId, double> score_all(std::span<const ScoreTrace> traces, const TrendScoreParams& params) {
    std::map<ExampleId, double> out;
    if (traces.empty()) return out;
    const std::size_t t = traces.front().length();
    for (const auto& trace : traces) {
        if (trace.length() != t) {
            fail(ErrorKind::Shape, "score_all: traces have mixed lengths (" + std::to_string(t) + " vs " +
                                       std::to_string(trace.length()) + ")");
        }
    }
    for (const auto& trace : traces) {
        const auto [_, inserted] = out.emplace(trace.id, score_trace(trace.scores, params));
        if (!inserted) fail(ErrorKind::Domain, "score_all: duplicate example id " + std::to_string(trace.id.value));
    }
    return out;
}

}  // namespace trendpu
