#pragma once

// End-to-end training procedure:
//
//   1. train against the negativity assumption with balanced P/U batches,
//      recording every unlabeled example's positive-class probability once
//      per `snapshot_interval` optimizer steps;
//   2. pick the stop snapshot;
//   3. turn each truncated trace into a trend score;
//   4. split the scores at the natural break into pseudo-positives and
//      pseudo-negatives;
//   5. retrain from a fresh initialization on the pseudo-labels.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trendpu/data.hpp"
#include "trendpu/jenks.hpp"
#include "trendpu/metrics.hpp"
#include "trendpu/model.hpp"
#include "trendpu/trend.hpp"

namespace trendpu {

enum class StopStrategy { FixedT, MixupValidation };

std::string_view to_string(StopStrategy s) noexcept;
StopStrategy parse_stop_strategy(std::string_view name);

struct PipelineConfig {
    std::vector<std::size_t> hidden_dims;  // empty -> logistic regression
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t snapshot_interval = 512;  // optimizer steps per snapshot; 0 -> one pass over U
    std::size_t max_snapshots = 30;
    TrendScoreParams trend{};
    StopStrategy stop = StopStrategy::FixedT;
    std::size_t retrain_epochs = 30;
    double significance = kDefaultSignificance;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Steps per snapshot after resolving the "one pass over U" shorthand.
std::size_t resolved_snapshot_interval(const PipelineConfig& config, std::size_t unlabeled_count);

/// n_u x T positive-class probabilities, rows aligned with `ids`.
struct TraceMatrix {
    std::vector<ExampleId> ids;
    std::vector<std::size_t> rows;  // dataset row of each trace
    Matrix scores;
    std::size_t snapshot_interval = 0;
    std::vector<double> validation_curve;  // per snapshot, MixupValidation only
    std::vector<std::string> warnings;

    std::size_t snapshot_count() const noexcept { return scores.cols(); }
    std::vector<ScoreTrace> traces(std::size_t t_stop) const;
};

struct TrainResult {
    TraceMatrix traces;
    ModelParams model;
    std::size_t steps = 0;
};

TrainResult train_and_trace(const PUDataset& pu, const PipelineConfig& config);

/// Index (1-based) maximizing the validation curve; earliest on ties.
std::size_t argmax_snapshot(const std::vector<double>& curve);

/// Stop snapshot in [2, T]. FixedT returns T.
std::size_t select_stop(const TraceMatrix& traces, const PipelineConfig& config);

std::map<ExampleId, double> compute_trend_scores(const TraceMatrix& traces, std::size_t t_stop,
                                                 const TrendScoreParams& params);

/// Fraction of pseudo-positives among the unlabeled examples.
double estimate_prior(const PseudoLabels& labels);

/// Same fraction expressed over labeled + unlabeled data.
double whole_data_prior(double unlabeled_prior, std::size_t n_labeled, std::size_t n_unlabeled);

struct RetrainResult {
    ModelParams model;
    std::vector<double> epoch_losses;
};

RetrainResult retrain(const PUDataset& pu, const PseudoLabels& labels, const PipelineConfig& config);

/// Metrics of pseudo-labels against hidden truth on the unlabeled rows; AUC
/// ranks the trend scores.
Metrics evaluate_pseudo_labels(const PUDataset& pu, const PseudoLabels& labels,
                               const std::map<ExampleId, double>& scores);

/// Metrics of a trained model on every row of `data` (threshold p > 0.5).
Metrics evaluate_model(const ModelParams& model, const PUDataset& data);

struct StageTimings {
    double train_seconds = 0.0;
    double score_seconds = 0.0;
    double partition_seconds = 0.0;
    double retrain_seconds = 0.0;
    double evaluate_seconds = 0.0;
};

struct RunReport {
    PipelineConfig config;
    std::size_t n_total = 0;
    std::size_t n_labeled = 0;
    std::size_t n_unlabeled = 0;
    std::size_t input_dim = 0;
    std::size_t optimizer_steps = 0;
    std::size_t t_stop = 0;

    std::size_t break_index = 0;
    double break_objective = 0.0;
    double break_threshold = 0.0;  // midpoint of the two scores around the break
    std::size_t pseudo_positive_count = 0;
    std::size_t pseudo_negative_count = 0;

    double prior_unlabeled = 0.0;
    double prior_whole = 0.0;
    std::optional<double> true_prior_unlabeled;

    std::optional<Metrics> unlabeled_metrics;
    std::optional<Metrics> test_metrics;
    std::vector<std::string> warnings;

    // Artifacts.
    TraceMatrix traces;
    std::map<ExampleId, double> scores;
    PseudoLabels labels;
    ModelParams trace_model;
    ModelParams final_model;

    StageTimings timings;  // not part of the deterministic report
};

/// Runs every stage. Errors keep their kind and are prefixed with the stage name.
RunReport run_pipeline(const PipelineConfig& config, const PUDataset& train, const PUDataset* test = nullptr);

}  // namespace trendpu
