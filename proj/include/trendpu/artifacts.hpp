#pragma once

// File formats written and read by the command-line tool.
//
//   traces   example_id,true_label,p_1,...,p_T      (true_label NA when unknown)
//   scores   example_id,trend_score,pseudo_label    (pseudo_label 0 = positive, 1 = negative, NA = not partitioned)
//   config   key=value lines, '#' comments
//   report   JSON object, keys in a fixed order

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "trendpu/data.hpp"
#include "trendpu/jenks.hpp"
#include "trendpu/pipeline.hpp"

namespace trendpu {

struct TraceFile {
    std::vector<ExampleId> ids;
    std::optional<std::vector<Label>> truth;
    Matrix scores;

    TraceMatrix to_trace_matrix() const;
};

void write_trace_csv(const TraceMatrix& traces, const PUDataset& pu, std::ostream& out);
TraceFile read_trace_csv(std::istream& in);

struct ScoreFile {
    std::map<ExampleId, double> scores;
    std::optional<PseudoLabels> labels;
};

void write_score_csv(const std::map<ExampleId, double>& scores, const PseudoLabels* labels, std::ostream& out);
ScoreFile read_score_csv(std::istream& in);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses key=value lines. Duplicate keys: the last one wins.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Keys understood by PipelineConfig.
const std::vector<std::string>& pipeline_config_keys();

/// Applies known keys over `base`; throws ErrorKind::Config on unknown keys
/// or malformed values.
PipelineConfig apply_key_values(const std::map<std::string, std::string>& kv, PipelineConfig base = {});

KeyValues to_key_values(const PipelineConfig& config);

nlohmann::ordered_json metrics_to_json(const Metrics& m);
nlohmann::ordered_json report_to_json(const RunReport& report);
nlohmann::ordered_json timings_to_json(const StageTimings& t);

/// Reads the `config` block of a saved report back into a configuration.
PipelineConfig config_from_report(const nlohmann::json& report);

}  // namespace trendpu
