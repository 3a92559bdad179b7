#include "trendpu/artifacts.hpp"

#include <istream>
#include <ostream>
#include <set>

#include "trendpu/error.hpp"
#include "trendpu/format.hpp"

namespace trendpu {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::size_t> parse_dims(const std::string& text) {
    std::vector<std::size_t> dims;
    if (trim(text).empty()) return dims;
    for (const auto& part : split_csv_line(text)) dims.push_back(parse_size(part, 0));
    return dims;
}

std::string join_dims(const std::vector<std::size_t>& dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(dims[i]);
    }
    return out;
}

}  // namespace

TraceMatrix TraceFile::to_trace_matrix() const {
    TraceMatrix tm;
    tm.ids = ids;
    tm.scores = scores;
    tm.rows.resize(ids.size());
    for (std::size_t r = 0; r < ids.size(); ++r) tm.rows[r] = r;
    return tm;
}

void write_trace_csv(const TraceMatrix& traces, const PUDataset& pu, std::ostream& out) {
    const auto& hidden = EvaluationAccess::hidden_labels(pu);
    out << "example_id,true_label";
    for (std::size_t t = 1; t <= traces.snapshot_count(); ++t) out << ",p_" << t;
    out << '\n';
    for (std::size_t r = 0; r < traces.ids.size(); ++r) {
        out << traces.ids[r].value << ',';
        if (hidden) {
            out << as_int((*hidden)[traces.rows[r]]);
        } else {
            out << "NA";
        }
        for (double p : traces.scores.row(r)) out << ',' << format_real(p);
        out << '\n';
    }
}

TraceFile read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, "line 1: missing trace header");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "example_id" || header[1] != "true_label") {
        fail(ErrorKind::Parse, "line 1: expected 'example_id,true_label,p_1,...'");
    }
    const std::size_t t = header.size() - 2;
    for (std::size_t k = 0; k < t; ++k) {
        if (header[k + 2] != "p_" + std::to_string(k + 1)) fail(ErrorKind::Parse, "line 1: bad snapshot column " + header[k + 2]);
    }
    TraceFile file;
    file.scores = Matrix(0, t);
    std::vector<Label> labels;
    std::size_t na = 0;
    std::vector<double> row(t);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                       " fields, got " + std::to_string(f.size()));
        }
        file.ids.push_back(ExampleId{parse_int(f[0], line_no)});
        if (f[1] == "NA") {
            ++na;
            labels.push_back(Label::Negative);
        } else {
            const auto v = parse_int(f[1], line_no);
            if (v != 0 && v != 1) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": true_label must be 0, 1 or NA");
            labels.push_back(v == 0 ? Label::Positive : Label::Negative);
        }
        for (std::size_t k = 0; k < t; ++k) {
            row[k] = parse_real(f[k + 2], line_no);
            if (!(row[k] >= 0.0 && row[k] <= 1.0)) {
                fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": trace score outside [0, 1]");
            }
        }
        file.scores.append_row(row);
    }
    if (na == 0 && !file.ids.empty()) {
        file.truth = std::move(labels);
    } else if (na != file.ids.size()) {
        fail(ErrorKind::Parse, "true_label column mixes NA with known labels");
    }
    return file;
}

void write_score_csv(const std::map<ExampleId, double>& scores, const PseudoLabels* labels, std::ostream& out) {
    out << "example_id,trend_score,pseudo_label\n";
    for (const auto& [id, s] : scores) {
        out << id.value << ',' << format_real(s) << ',';
        if (labels) {
            const auto it = labels->find(id);
            if (it == labels->end()) fail(ErrorKind::Domain, "write_score_csv: missing label for " + std::to_string(id.value));
            out << (it->second == PseudoLabel::PseudoPositive ? 0 : 1);
        } else {
            out << "NA";
        }
        out << '\n';
    }
}

ScoreFile read_score_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, "line 1: missing score header");
    const auto header = split_csv_line(line);
    if (header != std::vector<std::string>{"example_id", "trend_score", "pseudo_label"}) {
        fail(ErrorKind::Parse, "line 1: expected 'example_id,trend_score,pseudo_label'");
    }
    ScoreFile file;
    PseudoLabels labels;
    std::size_t na = 0, rows = 0, line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 3 fields");
        const ExampleId id{parse_int(f[0], line_no)};
        if (!file.scores.emplace(id, parse_real(f[1], line_no)).second) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": duplicate example id");
        }
        ++rows;
        if (f[2] == "NA") {
            ++na;
        } else {
            const auto v = parse_int(f[2], line_no);
            if (v != 0 && v != 1) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": pseudo_label must be 0, 1 or NA");
            labels.emplace(id, v == 0 ? PseudoLabel::PseudoPositive : PseudoLabel::PseudoNegative);
        }
    }
    if (na == 0 && rows > 0) {
        file.labels = std::move(labels);
    } else if (na != rows) {
        fail(ErrorKind::Parse, "pseudo_label column mixes NA with labels");
    }
    return file;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorKind::Config, "config line " + std::to_string(line_no) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) fail(ErrorKind::Config, "config line " + std::to_string(line_no) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

const std::vector<std::string>& pipeline_config_keys() {
    static const std::vector<std::string> keys{
        "hidden_dims", "learning_rate", "batch_size", "snapshot_interval", "max_snapshots", "alpha",
        "estimator",   "stop",          "retrain_epochs", "significance", "seed"};
    return keys;
}

PipelineConfig apply_key_values(const std::map<std::string, std::string>& kv, PipelineConfig c) {
    for (const auto& [key, value] : kv) {
        try {
            if (key == "hidden_dims") c.hidden_dims = parse_dims(value);
            else if (key == "learning_rate") c.learning_rate = parse_real(value, 0);
            else if (key == "batch_size") c.batch_size = parse_size(value, 0);
            else if (key == "snapshot_interval") c.snapshot_interval = parse_size(value, 0);
            else if (key == "max_snapshots") c.max_snapshots = parse_size(value, 0);
            else if (key == "alpha") c.trend.alpha = parse_real(value, 0);
            else if (key == "estimator") c.trend.estimator = parse_estimator(value);
            else if (key == "stop") c.stop = parse_stop_strategy(value);
            else if (key == "retrain_epochs") c.retrain_epochs = parse_size(value, 0);
            else if (key == "significance") c.significance = parse_real(value, 0);
            else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_size(value, 0));
            else fail(ErrorKind::Config, "unknown configuration key '" + key + "'");
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Config) throw;
            throw Error(ErrorKind::Config, "configuration key '" + key + "': invalid value '" + value + "'");
        }
    }
    return c;
}

KeyValues to_key_values(const PipelineConfig& c) {
    return {
        {"hidden_dims", join_dims(c.hidden_dims)},
        {"learning_rate", format_real(c.learning_rate)},
        {"batch_size", std::to_string(c.batch_size)},
        {"snapshot_interval", std::to_string(c.snapshot_interval)},
        {"max_snapshots", std::to_string(c.max_snapshots)},
        {"alpha", format_real(c.trend.alpha)},
        {"estimator", std::string(to_string(c.trend.estimator))},
        {"stop", std::string(to_string(c.stop))},
        {"retrain_epochs", std::to_string(c.retrain_epochs)},
        {"significance", format_real(c.significance)},
        {"seed", std::to_string(c.seed)},
    };
}

nlohmann::ordered_json metrics_to_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["count"] = m.count;
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["auc"] = m.auc ? nlohmann::ordered_json(*m.auc) : nlohmann::ordered_json(nullptr);
    return j;
}

nlohmann::ordered_json report_to_json(const RunReport& r) {
    using J = nlohmann::ordered_json;
    J j;
    j["format"] = "trendpu-report/1";
    J config = J::object();
    for (const auto& [k, v] : to_key_values(r.config)) config[k] = v;
    j["config"] = config;
    j["dataset"] = {{"n_total", r.n_total}, {"n_labeled", r.n_labeled}, {"n_unlabeled", r.n_unlabeled},
                    {"input_dim", r.input_dim}};
    J training;
    training["optimizer_steps"] = r.optimizer_steps;
    training["snapshot_interval"] = r.traces.snapshot_interval;
    training["snapshots"] = r.traces.snapshot_count();
    training["t_stop"] = r.t_stop;
    training["validation_curve"] = r.traces.validation_curve;
    j["training"] = training;
    j["partition"] = {{"break_index", r.break_index},
                      {"objective", r.break_objective},
                      {"threshold", r.break_threshold},
                      {"pseudo_positive", r.pseudo_positive_count},
                      {"pseudo_negative", r.pseudo_negative_count}};
    J prior;
    prior["unlabeled"] = r.prior_unlabeled;
    prior["whole_data"] = r.prior_whole;
    prior["true_unlabeled"] = r.true_prior_unlabeled ? J(*r.true_prior_unlabeled) : J(nullptr);
    prior["definition"] = "unlabeled = pseudo-positive fraction of the unlabeled set; whole_data counts labeled positives too";
    j["prior"] = prior;
    j["metrics"] = {{"unlabeled", r.unlabeled_metrics ? metrics_to_json(*r.unlabeled_metrics) : J(nullptr)},
                    {"test", r.test_metrics ? metrics_to_json(*r.test_metrics) : J(nullptr)}};
    j["warnings"] = r.warnings;
    return j;
}

nlohmann::ordered_json timings_to_json(const StageTimings& t) {
    return {{"train_seconds", t.train_seconds},
            {"score_seconds", t.score_seconds},
            {"partition_seconds", t.partition_seconds},
            {"retrain_seconds", t.retrain_seconds},
            {"evaluate_seconds", t.evaluate_seconds}};
}

PipelineConfig config_from_report(const nlohmann::json& report) {
    if (!report.contains("config") || !report["config"].is_object()) {
        fail(ErrorKind::Config, "report has no config block");
    }
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : report["config"].items()) {
        if (!v.is_string()) fail(ErrorKind::Config, "report config value for '" + k + "' is not a string");
        kv[k] = v.get<std::string>();
    }
    return apply_key_values(kv);
}

}  // namespace trendpu
