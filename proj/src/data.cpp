#include "trendpu/data.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "trendpu/error.hpp"
#include "trendpu/format.hpp"

namespace trendpu {

std::vector<double> default_direction(std::size_t dim) {
    if (dim == 0) fail(ErrorKind::Config, "dimension must be positive");
    return std::vector<double>(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
}

std::optional<std::string> nontriviality_warning(const GaussianConfig& config) {
    const double radius = config.sigma * std::sqrt(static_cast<double>(config.dim));
    if (radius > 2.0) return std::nullopt;
    return "cluster radius sigma*sqrt(dim) = " + format_real(radius) +
           " is not above 2; the two classes are nearly trivially separable";
}

LabeledDataset gen_two_gaussians(const GaussianConfig& config, std::uint64_t seed) {
    if (config.dim == 0) fail(ErrorKind::Config, "gen_two_gaussians: dim must be positive");
    if (!(config.sigma > 0.0) || !std::isfinite(config.sigma)) fail(ErrorKind::Config, "gen_two_gaussians: sigma must be positive");
    if (!(config.pi > 0.0 && config.pi < 1.0)) fail(ErrorKind::Config, "gen_two_gaussians: pi must lie in (0, 1)");

    const auto v = config.direction.empty() ? default_direction(config.dim) : config.direction;
    if (v.size() != config.dim) fail(ErrorKind::Config, "gen_two_gaussians: direction has the wrong dimension");
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (std::fabs(norm - 1.0) > 1e-9) fail(ErrorKind::Config, "gen_two_gaussians: direction must be a unit vector");

    const double expected_pos = config.pi * static_cast<double>(config.n);
    const double expected_neg = (1.0 - config.pi) * static_cast<double>(config.n);
    if (expected_pos < 1.0 || expected_neg < 1.0) {
        fail(ErrorKind::Degenerate, "gen_two_gaussians: pi * n and (1 - pi) * n must both be at least 1");
    }
    const auto n_pos = static_cast<std::size_t>(std::llround(expected_pos));

    Rng rng(seed);
    std::vector<Label> labels(config.n, Label::Negative);
    std::fill_n(labels.begin(), n_pos, Label::Positive);
    rng.shuffle(std::span<Label>(labels));

    LabeledDataset out;
    out.features = Matrix(config.n, config.dim);
    out.labels = labels;
    out.ids.resize(config.n);
    for (std::size_t r = 0; r < config.n; ++r) {
        out.ids[r] = ExampleId{static_cast<std::int64_t>(r)};
        const double sign = labels[r] == Label::Positive ? 1.0 : -1.0;
        auto row = out.features.row(r);
        for (std::size_t c = 0; c < config.dim; ++c) row[c] = sign * v[c] + config.sigma * rng.normal();
    }
    return out;
}

PUDataset::PUDataset(std::vector<ExampleId> ids, Matrix features, std::vector<bool> labeled_positive,
                     std::optional<std::vector<Label>> hidden_labels)
    : ids_(std::move(ids)), features_(std::move(features)), labeled_(std::move(labeled_positive)),
      hidden_(std::move(hidden_labels)) {
    if (features_.rows() != ids_.size() || labeled_.size() != ids_.size()) {
        fail(ErrorKind::Shape, "PUDataset: ids, features and labeled mask disagree in length");
    }
    if (hidden_) {
        if (hidden_->size() != ids_.size()) fail(ErrorKind::Shape, "PUDataset: hidden labels have the wrong length");
        for (std::size_t r = 0; r < ids_.size(); ++r) {
            if (labeled_[r] && (*hidden_)[r] != Label::Positive) {
                fail(ErrorKind::Domain, "PUDataset: labeled row " + std::to_string(ids_[r].value) +
                                            " carries a negative true label");
            }
        }
    }
}

std::vector<std::size_t> PUDataset::labeled_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < labeled_.size(); ++r) {
        if (labeled_[r]) out.push_back(r);
    }
    return out;
}

std::vector<std::size_t> PUDataset::unlabeled_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < labeled_.size(); ++r) {
        if (!labeled_[r]) out.push_back(r);
    }
    return out;
}

std::size_t PUDataset::labeled_count() const {
    return static_cast<std::size_t>(std::count(labeled_.begin(), labeled_.end(), true));
}

PUDataset as_unlabeled(const LabeledDataset& data) {
    return PUDataset(data.ids, data.features, std::vector<bool>(data.size(), false), data.labels);
}

PUDataset make_pu_split(const LabeledDataset& dataset, std::size_t n_labeled, std::uint64_t seed) {
    std::vector<std::size_t> positives;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        if (dataset.labels[r] == Label::Positive) positives.push_back(r);
    }
    if (n_labeled > positives.size()) {
        fail(ErrorKind::Size, "make_pu_split: n_labeled = " + std::to_string(n_labeled) + " exceeds the " +
                                  std::to_string(positives.size()) + " available positives");
    }
    Rng rng(seed);
    // Partial Fisher-Yates: the first n_labeled slots become a uniform sample.
    for (std::size_t i = 0; i < n_labeled; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(positives.size() - i));
        std::swap(positives[i], positives[j]);
    }
    std::vector<bool> labeled(dataset.size(), false);
    for (std::size_t i = 0; i < n_labeled; ++i) labeled[positives[i]] = true;
    return PUDataset(dataset.ids, dataset.features, std::move(labeled), dataset.labels);
}

PUDataset load_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, "line 1: missing header");
    const auto header = split_csv_line(line);

    std::size_t col = 0;
    if (header.size() <= col || header[col] != "id") fail(ErrorKind::Parse, "line 1: first column must be 'id'");
    ++col;
    const bool has_label_column = header.size() > col && header[col] == "label";
    if (has_label_column) ++col;
    if (header.size() <= col || header[col] != "labeled") {
        fail(ErrorKind::Parse, "line 1: expected 'labeled' column after id" + std::string(has_label_column ? ",label" : ""));
    }
    ++col;
    const std::size_t first_feature = col;
    for (std::size_t c = first_feature; c < header.size(); ++c) {
        if (header[c] != "f" + std::to_string(c - first_feature)) {
            fail(ErrorKind::Parse, "line 1: expected feature column 'f" + std::to_string(c - first_feature) + "', got '" +
                                       header[c] + "'");
        }
    }
    const std::size_t dim = header.size() - first_feature;
    if (dim == 0) fail(ErrorKind::Parse, "line 1: no feature columns");

    std::vector<ExampleId> ids;
    Matrix features(0, dim);
    std::vector<bool> labeled;
    std::vector<Label> labels;
    std::size_t na_count = 0;
    std::vector<double> row(dim);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                       " fields, got " + std::to_string(fields.size()));
        }
        ids.push_back(ExampleId{parse_int(fields[0], line_no)});
        if (has_label_column) {
            if (fields[1] == "NA") {
                ++na_count;
                labels.push_back(Label::Negative);
            } else {
                const auto v = parse_int(fields[1], line_no);
                if (v != 0 && v != 1) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": label must be 0, 1 or NA");
                labels.push_back(v == 0 ? Label::Positive : Label::Negative);
            }
        }
        const auto flag = parse_int(fields[first_feature - 1], line_no);
        if (flag != 0 && flag != 1) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": labeled must be 0 or 1");
        labeled.push_back(flag == 1);
        for (std::size_t c = 0; c < dim; ++c) row[c] = parse_real(fields[first_feature + c], line_no);
        features.append_row(row);
    }

    std::optional<std::vector<Label>> hidden;
    if (has_label_column && na_count == 0) {
        hidden = std::move(labels);
    } else if (has_label_column && na_count != ids.size()) {
        fail(ErrorKind::Parse, "label column mixes NA with known labels; use all NA or omit the column");
    }
    return PUDataset(std::move(ids), std::move(features), std::move(labeled), std::move(hidden));
}

PUDataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open dataset: " + path);
    return load_csv(in);
}

void save_csv(const PUDataset& pu, std::ostream& out) {
    out << "id,label,labeled";
    for (std::size_t c = 0; c < pu.dim(); ++c) out << ",f" << c;
    out << '\n';
    const auto& hidden = EvaluationAccess::hidden_labels(pu);
    for (std::size_t r = 0; r < pu.size(); ++r) {
        out << pu.ids()[r].value << ',';
        if (hidden) {
            out << as_int((*hidden)[r]);
        } else {
            out << "NA";
        }
        out << ',' << (pu.labeled_positive()[r] ? 1 : 0);
        for (double x : pu.features().row(r)) out << ',' << format_real(x);
        out << '\n';
    }
}

void save_csv(const PUDataset& pu, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path);
    save_csv(pu, out);
}

BalancedBatchSampler::BalancedBatchSampler(const PUDataset& pu, std::size_t batch_size, std::uint64_t epoch_seed)
    : pu_(&pu), batch_size_(batch_size), labeled_(pu.labeled_indices()), unlabeled_order_(pu.unlabeled_indices()),
      rng_(epoch_seed) {
    if (batch_size_ == 0) fail(ErrorKind::Config, "batch size must be positive");
    if (labeled_.empty()) fail(ErrorKind::Config, "balanced batches need at least one labeled positive");
    if (unlabeled_order_.size() < batch_size_) {
        fail(ErrorKind::Config, "unlabeled set (" + std::to_string(unlabeled_order_.size()) +
                                    " rows) is smaller than the batch size " + std::to_string(batch_size_));
    }
    rng_.shuffle(std::span<std::size_t>(unlabeled_order_));
}

std::optional<BatchPair> BalancedBatchSampler::next() {
    if (cursor_ + batch_size_ > unlabeled_order_.size()) return std::nullopt;
    BatchPair pair;
    pair.unlabeled_rows.assign(unlabeled_order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                               unlabeled_order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + batch_size_));
    cursor_ += batch_size_;
    pair.positive_rows.resize(batch_size_);
    for (auto& r : pair.positive_rows) r = labeled_[rng_.below(labeled_.size())];
    pair.positive_batch = pu_->features().gather(pair.positive_rows);
    pair.unlabeled_batch = pu_->features().gather(pair.unlabeled_rows);
    return pair;
}

std::vector<BatchPair> balanced_batches(const PUDataset& pu, std::size_t batch_size, std::uint64_t epoch_seed) {
    BalancedBatchSampler sampler(pu, batch_size, epoch_seed);
    std::vector<BatchPair> out;
    while (auto pair = sampler.next()) out.push_back(std::move(*pair));
    return out;
}

}  // namespace trendpu
