#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trendpu/matrix.hpp"
#include "trendpu/rng.hpp"
#include "trendpu/types.hpp"

namespace trendpu {

/// Two isotropic Gaussians N(+v, sigma^2 I) (positives, label 0) and
/// N(-v, sigma^2 I) (negatives, label 1).
struct GaussianConfig {
    std::size_t dim = 2;
    double sigma = 0.5;
    std::vector<double> direction;  // unit vector; empty -> ones / sqrt(dim)
    std::size_t n = 1000;
    double pi = 0.5;  // positive class prior
};

/// Normalized all-ones direction.
std::vector<double> default_direction(std::size_t dim);

/// The mixture is only a non-trivial problem when the cluster radius
/// sigma * sqrt(dim) exceeds 2. Returns a message when it does not.
std::optional<std::string> nontriviality_warning(const GaussianConfig& config);

struct LabeledDataset {
    std::vector<ExampleId> ids;
    Matrix features;
    std::vector<Label> labels;

    std::size_t size() const noexcept { return ids.size(); }
};

LabeledDataset gen_two_gaussians(const GaussianConfig& config, std::uint64_t seed);

class EvaluationAccess;

/// Labeled positives plus an unlabeled mixture. The true labels, when known,
/// are reachable only through EvaluationAccess.
class PUDataset {
public:
    PUDataset() = default;
    PUDataset(std::vector<ExampleId> ids, Matrix features, std::vector<bool> labeled_positive,
              std::optional<std::vector<Label>> hidden_labels);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t dim() const noexcept { return features_.cols(); }
    const std::vector<ExampleId>& ids() const noexcept { return ids_; }
    const Matrix& features() const noexcept { return features_; }
    const std::vector<bool>& labeled_positive() const noexcept { return labeled_; }
    bool has_hidden_labels() const noexcept { return hidden_.has_value(); }

    std::vector<std::size_t> labeled_indices() const;
    std::vector<std::size_t> unlabeled_indices() const;
    std::size_t labeled_count() const;
    std::size_t unlabeled_count() const { return size() - labeled_count(); }

    friend bool operator==(const PUDataset&, const PUDataset&) = default;

private:
    friend class EvaluationAccess;

    std::vector<ExampleId> ids_;
    Matrix features_;
    std::vector<bool> labeled_;
    std::optional<std::vector<Label>> hidden_;
};

/// The only route to ground-truth labels: used by evaluation and persistence.
class EvaluationAccess {
public:
    static const std::optional<std::vector<Label>>& hidden_labels(const PUDataset& pu) { return pu.hidden_; }
};

/// Treats a fully labeled dataset as test data: nothing labeled, truth hidden.
PUDataset as_unlabeled(const LabeledDataset& data);

/// SCAR split: `n_labeled` positives chosen uniformly at random are labeled.
PUDataset make_pu_split(const LabeledDataset& dataset, std::size_t n_labeled, std::uint64_t seed);

/// CSV schema: header `id,label,labeled,f0,f1,...` where label is 0, 1 or NA
/// (the label column may be omitted entirely) and labeled is 0 or 1.
PUDataset load_csv(std::istream& in);
PUDataset load_csv(const std::string& path);
void save_csv(const PUDataset& pu, std::ostream& out);
void save_csv(const PUDataset& pu, const std::string& path);

struct BatchPair {
    std::vector<std::size_t> positive_rows;   // dataset row indices
    std::vector<std::size_t> unlabeled_rows;
    Matrix positive_batch;
    Matrix unlabeled_batch;
};

/// One epoch of balanced batches: a shuffled pass over the unlabeled rows in
/// chunks of `batch_size` (short tail dropped), each paired with
/// `batch_size` labeled positives drawn with replacement.
class BalancedBatchSampler {
public:
    BalancedBatchSampler(const PUDataset& pu, std::size_t batch_size, std::uint64_t epoch_seed);

    std::size_t batches_per_epoch() const noexcept { return unlabeled_order_.size() / batch_size_; }

    /// Next pair, or nullopt at the end of the epoch.
    std::optional<BatchPair> next();

private:
    const PUDataset* pu_;
    std::size_t batch_size_;
    std::vector<std::size_t> labeled_;
    std::vector<std::size_t> unlabeled_order_;
    std::size_t cursor_ = 0;
    Rng rng_;
};

std::vector<BatchPair> balanced_batches(const PUDataset& pu, std::size_t batch_size, std::uint64_t epoch_seed);

}  // namespace trendpu
