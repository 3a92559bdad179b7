#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "trendpu/matrix.hpp"
#include "trendpu/trend.hpp"
#include "trendpu/types.hpp"

namespace trendpu {

/// Per-class view of a trace matrix: snapshot-wise mean/std and the share of
/// examples whose Mann-Kendall verdict is decreasing, increasing or flat.
struct ClassTraceSummary {
    Label label = Label::Positive;
    std::size_t count = 0;
    std::vector<double> mean;
    std::vector<double> stddev;  // population
    double frac_decreasing = 0.0;
    double frac_increasing = 0.0;
    double frac_no_trend = 0.0;
    TrendVerdict mean_trace_verdict;
};

/// One block per class present in `truth`, positives first.
std::vector<ClassTraceSummary> summarize_traces(const Matrix& scores, std::span<const Label> truth,
                                                double significance = kDefaultSignificance);

/// Long-format CSV: class,snapshot,mean,std then class,verdict,fraction rows.
void write_trace_summary_csv(const std::vector<ClassTraceSummary>& summary, std::ostream& out);

}  // namespace trendpu
