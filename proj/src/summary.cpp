#include "trendpu/summary.hpp"

#include <cmath>
#include <ostream>

#include "trendpu/error.hpp"
#include "trendpu/format.hpp"

namespace trendpu {

std::vector<ClassTraceSummary> summarize_traces(const Matrix& scores, std::span<const Label> truth, double significance) {
    if (truth.size() != scores.rows()) fail(ErrorKind::Shape, "summarize_traces: labels and traces differ in length");
    const std::size_t t = scores.cols();
    std::vector<ClassTraceSummary> out;
    for (const Label label : {Label::Positive, Label::Negative}) {
        ClassTraceSummary s;
        s.label = label;
        s.mean.assign(t, 0.0);
        s.stddev.assign(t, 0.0);
        std::size_t dec = 0, inc = 0;
        for (std::size_t r = 0; r < scores.rows(); ++r) {
            if (truth[r] != label) continue;
            ++s.count;
            const auto row = scores.row(r);
            for (std::size_t k = 0; k < t; ++k) s.mean[k] += row[k];
            if (t >= 2) {
                const auto v = mk_test(row, significance);
                dec += v.direction == TrendDirection::Decreasing ? 1 : 0;
                inc += v.direction == TrendDirection::Increasing ? 1 : 0;
            }
        }
        if (s.count == 0) continue;
        const auto n = static_cast<double>(s.count);
        for (auto& m : s.mean) m /= n;
        for (std::size_t r = 0; r < scores.rows(); ++r) {
            if (truth[r] != label) continue;
            const auto row = scores.row(r);
            for (std::size_t k = 0; k < t; ++k) s.stddev[k] += (row[k] - s.mean[k]) * (row[k] - s.mean[k]);
        }
        for (auto& v : s.stddev) v = std::sqrt(v / n);
        s.frac_decreasing = static_cast<double>(dec) / n;
        s.frac_increasing = static_cast<double>(inc) / n;
        s.frac_no_trend = static_cast<double>(s.count - dec - inc) / n;
        if (t >= 2) s.mean_trace_verdict = mk_test(s.mean, significance);
        out.push_back(std::move(s));
    }
    return out;
}

void write_trace_summary_csv(const std::vector<ClassTraceSummary>& summary, std::ostream& out) {
    out << "class,snapshot,mean,std\n";
    for (const auto& s : summary) {
        for (std::size_t k = 0; k < s.mean.size(); ++k) {
            out << as_int(s.label) << ',' << k + 1 << ',' << format_real(s.mean[k]) << ',' << format_real(s.stddev[k])
                << '\n';
        }
    }
    out << "class,verdict,fraction,count\n";
    for (const auto& s : summary) {
        out << as_int(s.label) << ",decreasing," << format_real(s.frac_decreasing) << ',' << s.count << '\n';
        out << as_int(s.label) << ",increasing," << format_real(s.frac_increasing) << ',' << s.count << '\n';
        out << as_int(s.label) << ",no_trend," << format_real(s.frac_no_trend) << ',' << s.count << '\n';
        out << as_int(s.label) << ",mean_trace_" << to_string(s.mean_trace_verdict.direction) << ','
            << format_real(s.mean_trace_verdict.gamma) << ',' << s.count << '\n';
    }
}

}  // namespace trendpu
