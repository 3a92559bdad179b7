#include "trendpu/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "trendpu/error.hpp"
#include "trendpu/rng.hpp"

namespace trendpu {

namespace {

// Seed streams derived from PipelineConfig::seed.
enum SeedStream : std::uint64_t {
    kInitStream = 1,
    kHoldoutStream = 2,
    kRetrainInitStream = 3,
    kMixupStream = 4,
    kEpochStream = 1'000,
    kRetrainEpochStream = 1'000'000,
};

constexpr double kHoldoutFraction = 0.2;
constexpr std::size_t kMinLabeledForMixup = 5;
constexpr std::size_t kMixturesPerHeldOut = 4;

const std::vector<Label>& require_truth(const PUDataset& pu, const char* what) {
    const auto& hidden = EvaluationAccess::hidden_labels(pu);
    if (!hidden) fail(ErrorKind::EvaluationUnavailable, std::string(what) + ": dataset carries no true labels");
    return *hidden;
}

struct Holdout {
    PUDataset train;
    Matrix mixtures;
};

// Removes ~20% of the labeled positives from training and mixes each of them
// 1:1 with random unlabeled rows to form validation points.
Holdout make_mixup_holdout(const PUDataset& pu, std::uint64_t seed) {
    auto labeled = pu.labeled_indices();
    const auto unlabeled = pu.unlabeled_indices();
    Rng rng(derive_seed(seed, kHoldoutStream));
    rng.shuffle(std::span<std::size_t>(labeled));
    const auto held = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(kHoldoutFraction * static_cast<double>(labeled.size()))));

    std::vector<bool> drop(pu.size(), false);
    for (std::size_t i = 0; i < held; ++i) drop[labeled[i]] = true;

    std::vector<ExampleId> ids;
    std::vector<std::size_t> keep;
    std::vector<bool> mask;
    for (std::size_t r = 0; r < pu.size(); ++r) {
        if (drop[r]) continue;
        keep.push_back(r);
        ids.push_back(pu.ids()[r]);
        mask.push_back(pu.labeled_positive()[r]);
    }
    std::optional<std::vector<Label>> hidden;
    if (const auto& h = EvaluationAccess::hidden_labels(pu)) {
        hidden.emplace();
        for (auto r : keep) hidden->push_back((*h)[r]);
    }

    Holdout out{PUDataset(std::move(ids), pu.features().gather(keep), std::move(mask), std::move(hidden)),
                Matrix(held * kMixturesPerHeldOut, pu.dim())};
    Rng mix_rng(derive_seed(seed, kMixupStream));
    for (std::size_t k = 0; k < out.mixtures.rows(); ++k) {
        const auto pos = pu.features().row(labeled[k % held]);
        const auto unl = pu.features().row(unlabeled[mix_rng.below(unlabeled.size())]);
        auto dst = out.mixtures.row(k);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = 0.5 * pos[c] + 0.5 * unl[c];
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

template <class Fn>
auto run_stage(const char* name, double& seconds, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        } else {
            auto result = fn();
            seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return result;
        }
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
    }
}

}  // namespace

std::string_view to_string(StopStrategy s) noexcept {
    return s == StopStrategy::FixedT ? "fixed" : "mixup";
}

StopStrategy parse_stop_strategy(std::string_view name) {
    if (name == "fixed") return StopStrategy::FixedT;
    if (name == "mixup") return StopStrategy::MixupValidation;
    fail(ErrorKind::Config, "unknown stop strategy '" + std::string(name) + "' (expected fixed|mixup)");
}

void PipelineConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail(ErrorKind::Config, "learning_rate must be positive");
    if (batch_size == 0) fail(ErrorKind::Config, "batch_size must be positive");
    if (max_snapshots < 2) fail(ErrorKind::Config, "max_snapshots must be at least 2");
    if (!(trend.alpha > 0.0) || !std::isfinite(trend.alpha)) fail(ErrorKind::Config, "alpha must be positive");
    if (retrain_epochs == 0) fail(ErrorKind::Config, "retrain_epochs must be positive");
    if (!(significance > 0.0 && significance < 1.0)) fail(ErrorKind::Config, "significance must lie in (0, 1)");
    for (auto w : hidden_dims) {
        if (w == 0) fail(ErrorKind::Config, "hidden layer widths must be positive");
    }
}

std::size_t resolved_snapshot_interval(const PipelineConfig& config, std::size_t unlabeled_count) {
    if (config.snapshot_interval > 0) return config.snapshot_interval;
    return std::max<std::size_t>(1, unlabeled_count / config.batch_size);
}

std::vector<ScoreTrace> TraceMatrix::traces(std::size_t t_stop) const {
    if (t_stop > snapshot_count()) fail(ErrorKind::Bounds, "trace truncation beyond recorded snapshots");
    std::vector<ScoreTrace> out(ids.size());
    for (std::size_t r = 0; r < ids.size(); ++r) {
        out[r].id = ids[r];
        const auto row = scores.row(r);
        out[r].scores.assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(t_stop));
    }
    return out;
}

TrainResult train_and_trace(const PUDataset& pu, const PipelineConfig& config) {
    config.validate();
    TrainResult result;
    auto& traces = result.traces;

    const PUDataset* train = &pu;
    std::optional<Holdout> holdout;
    if (config.stop == StopStrategy::MixupValidation) {
        if (pu.labeled_count() < kMinLabeledForMixup) {
            traces.warnings.push_back("mixup validation needs at least " + std::to_string(kMinLabeledForMixup) +
                                      " labeled positives; falling back to a fixed stop");
        } else {
            holdout = make_mixup_holdout(pu, config.seed);
            train = &holdout->train;
        }
    }

    const auto unlabeled_rows = pu.unlabeled_indices();
    const Matrix unlabeled = pu.features().gather(unlabeled_rows);
    traces.rows = unlabeled_rows;
    for (auto r : unlabeled_rows) traces.ids.push_back(pu.ids()[r]);
    traces.snapshot_interval = resolved_snapshot_interval(config, unlabeled_rows.size());
    traces.scores = Matrix(unlabeled_rows.size(), config.max_snapshots);

    const ModelSpec spec{pu.dim(), config.hidden_dims};
    result.model = init_params(spec, derive_seed(config.seed, kInitStream));
    AdamState adam = make_adam_state(result.model, AdamConfig{.learning_rate = config.learning_rate});
    Gradients grad;

    std::size_t snapshots = 0;
    for (std::uint64_t epoch = 0; snapshots < config.max_snapshots; ++epoch) {
        BalancedBatchSampler sampler(*train, config.batch_size, derive_seed(config.seed, kEpochStream + epoch));
        while (snapshots < config.max_snapshots) {
            auto pair = sampler.next();
            if (!pair) break;
            const double loss = batch_loss_and_gradient(result.model, pair->positive_batch, pair->unlabeled_batch, grad);
            ++result.steps;
            if (!std::isfinite(loss)) {
                fail(ErrorKind::Numeric, "non-finite training loss at optimizer step " + std::to_string(result.steps));
            }
            adam_step(result.model, grad, adam);
            if (result.steps % traces.snapshot_interval != 0) continue;

            const auto p = predict_scores(result.model, unlabeled);
            for (std::size_t r = 0; r < p.size(); ++r) traces.scores(r, snapshots) = p[r];
            if (holdout) traces.validation_curve.push_back(mean_of(predict_scores(result.model, holdout->mixtures)));
            ++snapshots;
        }
    }
    return result;
}

std::size_t argmax_snapshot(const std::vector<double>& curve) {
    if (curve.empty()) fail(ErrorKind::Size, "argmax_snapshot: empty validation curve");
    return static_cast<std::size_t>(std::max_element(curve.begin(), curve.end()) - curve.begin()) + 1;
}

std::size_t select_stop(const TraceMatrix& traces, const PipelineConfig& config) {
    const std::size_t t = traces.snapshot_count();
    if (t < 2) fail(ErrorKind::Size, "select_stop: need at least 2 snapshots");
    if (config.stop == StopStrategy::FixedT || traces.validation_curve.empty()) return t;
    // A trend needs two points.
    return std::clamp<std::size_t>(argmax_snapshot(traces.validation_curve), 2, t);
}

std::map<ExampleId, double> compute_trend_scores(const TraceMatrix& traces, std::size_t t_stop,
                                                 const TrendScoreParams& params) {
    if (t_stop < 2 || t_stop > traces.snapshot_count()) {
        fail(ErrorKind::Bounds, "t_stop = " + std::to_string(t_stop) + " outside [2, " +
                                    std::to_string(traces.snapshot_count()) + "]");
    }
    const auto truncated = traces.traces(t_stop);
    return score_all(truncated, params);
}

double estimate_prior(const PseudoLabels& labels) {
    if (labels.empty()) fail(ErrorKind::Size, "estimate_prior: no labels");
    const auto positives = std::count_if(labels.begin(), labels.end(),
                                         [](const auto& kv) { return kv.second == PseudoLabel::PseudoPositive; });
    return static_cast<double>(positives) / static_cast<double>(labels.size());
}

double whole_data_prior(double unlabeled_prior, std::size_t n_labeled, std::size_t n_unlabeled) {
    const auto nl = static_cast<double>(n_labeled);
    const auto nu = static_cast<double>(n_unlabeled);
    return (nl + unlabeled_prior * nu) / (nl + nu);
}

RetrainResult retrain(const PUDataset& pu, const PseudoLabels& labels, const PipelineConfig& config) {
    config.validate();
    std::vector<std::size_t> rows;
    std::vector<int> targets;
    std::size_t pseudo_pos = 0, pseudo_neg = 0;
    for (std::size_t r = 0; r < pu.size(); ++r) {
        if (pu.labeled_positive()[r]) {
            rows.push_back(r);
            targets.push_back(as_int(Label::Positive));
            continue;
        }
        const auto it = labels.find(pu.ids()[r]);
        if (it == labels.end()) {
            fail(ErrorKind::Domain, "retrain: unlabeled example " + std::to_string(pu.ids()[r].value) + " has no pseudo-label");
        }
        const bool positive = it->second == PseudoLabel::PseudoPositive;
        (positive ? pseudo_pos : pseudo_neg)++;
        rows.push_back(r);
        targets.push_back(as_int(positive ? Label::Positive : Label::Negative));
    }
    if (pseudo_pos == 0 || pseudo_neg == 0) {
        fail(ErrorKind::Degenerate, "retrain: a pseudo-class is empty (" + std::to_string(pseudo_pos) + " positive, " +
                                        std::to_string(pseudo_neg) + " negative)");
    }

    RetrainResult out;
    out.model = init_params(ModelSpec{pu.dim(), config.hidden_dims}, derive_seed(config.seed, kRetrainInitStream));
    AdamState adam = make_adam_state(out.model, AdamConfig{.learning_rate = config.learning_rate});
    Gradients grad;
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.retrain_epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, kRetrainEpochStream + epoch));
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<std::size_t> batch_rows;
            std::vector<int> batch_targets;
            for (std::size_t k = start; k < end; ++k) {
                batch_rows.push_back(rows[order[k]]);
                batch_targets.push_back(targets[order[k]]);
            }
            const std::vector<double> weights(batch_rows.size(), 1.0 / static_cast<double>(batch_rows.size()));
            const double loss = weighted_loss(out.model, pu.features().gather(batch_rows), batch_targets, weights, &grad);
            ++step;
            if (!std::isfinite(loss)) {
                fail(ErrorKind::Numeric, "non-finite retraining loss at optimizer step " + std::to_string(step));
            }
            adam_step(out.model, grad, adam);
            epoch_loss += loss * static_cast<double>(batch_rows.size());
        }
        out.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return out;
}

Metrics evaluate_pseudo_labels(const PUDataset& pu, const PseudoLabels& labels, const std::map<ExampleId, double>& scores) {
    const auto& truth_all = require_truth(pu, "evaluate_pseudo_labels");
    std::vector<Label> predicted, truth;
    std::vector<double> s;
    for (auto r : pu.unlabeled_indices()) {
        const auto id = pu.ids()[r];
        const auto it = labels.find(id);
        if (it == labels.end()) fail(ErrorKind::Domain, "evaluate: example " + std::to_string(id.value) + " has no pseudo-label");
        predicted.push_back(it->second == PseudoLabel::PseudoPositive ? Label::Positive : Label::Negative);
        truth.push_back(truth_all[r]);
        if (const auto sit = scores.find(id); sit != scores.end()) s.push_back(sit->second);
    }
    if (s.size() != truth.size()) s.clear();
    return evaluate(predicted, truth, s);
}

Metrics evaluate_model(const ModelParams& model, const PUDataset& data) {
    const auto& truth = require_truth(data, "evaluate_model");
    const auto p = predict_scores(model, data.features());
    std::vector<Label> predicted(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) predicted[i] = p[i] > 0.5 ? Label::Positive : Label::Negative;
    return evaluate(predicted, truth, p);
}

RunReport run_pipeline(const PipelineConfig& config, const PUDataset& train, const PUDataset* test) {
    RunReport report;
    report.config = config;
    try {
        config.validate();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage 'config': ") + e.what());
    }
    report.n_total = train.size();
    report.n_labeled = train.labeled_count();
    report.n_unlabeled = train.unlabeled_count();
    report.input_dim = train.dim();
    auto& tm = report.timings;

    auto trained = run_stage("train", tm.train_seconds, [&] { return train_and_trace(train, config); });
    report.traces = std::move(trained.traces);
    report.trace_model = std::move(trained.model);
    report.optimizer_steps = trained.steps;
    report.warnings = report.traces.warnings;

    report.scores = run_stage("score", tm.score_seconds, [&] {
        report.t_stop = select_stop(report.traces, config);
        return compute_trend_scores(report.traces, report.t_stop, config.trend);
    });

    run_stage("partition", tm.partition_seconds, [&] {
        auto part = partition_by_trend(report.scores);
        report.labels = std::move(part.labels);
        report.break_index = part.result.break_index;
        report.break_objective = part.result.objective;
        std::vector<double> values;
        for (const auto& [_, s] : report.scores) values.push_back(s);
        const auto& ord = part.result.sorted_order;
        report.break_threshold = 0.5 * (values[ord[part.result.break_index - 1]] + values[ord[part.result.break_index]]);
        report.pseudo_negative_count = part.low_count;
        report.pseudo_positive_count = part.high_count;
        report.prior_unlabeled = estimate_prior(report.labels);
        report.prior_whole = whole_data_prior(report.prior_unlabeled, report.n_labeled, report.n_unlabeled);
    });

    report.final_model = run_stage("retrain", tm.retrain_seconds, [&] { return retrain(train, report.labels, config).model; });

    run_stage("evaluate", tm.evaluate_seconds, [&] {
        if (train.has_hidden_labels()) {
            report.unlabeled_metrics = evaluate_pseudo_labels(train, report.labels, report.scores);
            const auto& truth = *EvaluationAccess::hidden_labels(train);
            std::size_t pos = 0;
            for (auto r : train.unlabeled_indices()) pos += truth[r] == Label::Positive ? 1 : 0;
            report.true_prior_unlabeled = static_cast<double>(pos) / static_cast<double>(report.n_unlabeled);
        }
        if (test) report.test_metrics = evaluate_model(report.final_model, *test);
    });
    return report;
}

}  // namespace trendpu
