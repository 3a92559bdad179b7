#include "trendpu/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "trendpu/error.hpp"

namespace trendpu {

std::optional<double> roc_auc(std::span<const double> positive_scores, std::span<const Label> truth) {
    if (positive_scores.size() != truth.size()) fail(ErrorKind::Shape, "roc_auc: scores and labels differ in length");
    const std::size_t n = truth.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return positive_scores[a] < positive_scores[b]; });

    // Sum of midranks of the positives.
    double rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && positive_scores[order[j]] == positive_scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (truth[order[k]] == Label::Positive) {
                rank_sum += midrank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

Metrics evaluate(std::span<const Label> predicted, std::span<const Label> truth, std::span<const double> positive_scores) {
    if (predicted.size() != truth.size()) fail(ErrorKind::Shape, "evaluate: predictions and truth differ in length");
    if (truth.empty()) fail(ErrorKind::Size, "evaluate: nothing to evaluate");

    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pred_pos = predicted[i] == Label::Positive;
        const bool true_pos = truth[i] == Label::Positive;
        if (pred_pos && true_pos) ++tp;
        else if (pred_pos) ++fp;
        else if (true_pos) ++fn;
        else ++tn;
    }
    Metrics m;
    m.count = truth.size();
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.count);
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (!positive_scores.empty()) m.auc = roc_auc(positive_scores, truth);
    return m;
}

}  // namespace trendpu
