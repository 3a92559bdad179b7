// Command-line front end. Exit codes: 0 success, 1 verification failure,
// 2 usage / configuration / file errors, 3 degenerate or unlearnable input,
// 4 numeric failure, 5 any other library error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trendpu/artifacts.hpp"
#include "trendpu/data.hpp"
#include "trendpu/error.hpp"
#include "trendpu/format.hpp"
#include "trendpu/pipeline.hpp"
#include "trendpu/summary.hpp"
#include "trendpu/theory.hpp"
#include "trendpu/trend.hpp"
#include "trendpu/verify.hpp"

using namespace trendpu;
namespace fs = std::filesystem;

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Parse:
        case ErrorKind::Io:
            return 2;
        case ErrorKind::Degenerate:
        case ErrorKind::Size:
        case ErrorKind::Unlearnable:
            return 3;
        case ErrorKind::Numeric:
            return 4;
        default:
            return 5;
    }
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path);
    return out;
}

std::string cli_flag(const std::string& key) {
    std::string flag = "--" + key;
    for (auto& c : flag) {
        if (c == '_') c = '-';
    }
    return flag;
}

// --config FILE, --from-report FILE and one flag per configuration key.
// Precedence: report < config file < flags.
struct ConfigOptions {
    std::string config_path;
    std::string report_path;
    std::map<std::string, std::string> flags;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
        app->add_option("--from-report", report_path, "reuse the configuration recorded in a report.json")
            ->check(CLI::ExistingFile);
        for (const auto& key : pipeline_config_keys()) {
            app->add_option_function<std::string>(
                cli_flag(key), [this, key](const std::string& v) { flags[key] = v; }, "override '" + key + "'");
        }
    }

    PipelineConfig resolve() const {
        PipelineConfig c;
        if (!report_path.empty()) {
            auto in = open_in(report_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                fail(ErrorKind::Parse, report_path + ": " + e.what());
            }
            c = config_from_report(j);
        }
        if (!config_path.empty()) {
            auto in = open_in(config_path);
            c = apply_key_values(parse_key_values(in), c);
        }
        c = apply_key_values(flags, c);
        c.validate();
        return c;
    }
};

void print_metrics(const char* name, const Metrics& m) {
    std::printf("%s: n=%zu accuracy=%s precision=%s recall=%s f1=%s auc=%s\n", name, m.count,
                format_real(m.accuracy).c_str(), format_real(m.precision).c_str(), format_real(m.recall).c_str(),
                format_real(m.f1).c_str(), m.auc ? format_real(*m.auc).c_str() : "NA");
}

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_summary(const Matrix& scores, const std::vector<Label>& truth, double significance, const std::string& path) {
    const auto summary = summarize_traces(scores, truth, significance);
    auto out = open_out(path);
    write_trace_summary_csv(summary, out);
    for (const auto& s : summary) {
        std::printf("class %d: n=%zu decreasing=%s increasing=%s no_trend=%s mean-trace=%s (gamma %s)\n", as_int(s.label),
                    s.count, format_real(s.frac_decreasing).c_str(), format_real(s.frac_increasing).c_str(),
                    format_real(s.frac_no_trend).c_str(), std::string(to_string(s.mean_trace_verdict.direction)).c_str(),
                    format_real(s.mean_trace_verdict.gamma).c_str());
    }
}

TraceFile load_traces(const std::string& path) {
    auto in = open_in(path);
    return read_trace_csv(in);
}

ScoreFile load_scores(const std::string& path) {
    auto in = open_in(path);
    return read_score_csv(in);
}

std::string in_dir(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trend-based pseudo-labeling for positive-unlabeled learning"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "sample the two-Gaussian mixture and a SCAR positive-unlabeled split");
    GaussianConfig gcfg;
    std::size_t n_labeled = 0;
    std::uint64_t data_seed = 0;
    std::string gen_out, gen_test_out;
    std::size_t test_n = 0;
    gen->add_option("--dim", gcfg.dim, "feature dimension p")->capture_default_str();
    gen->add_option("--sigma", gcfg.sigma, "per-coordinate standard deviation")->capture_default_str();
    gen->add_option("--n", gcfg.n, "number of rows")->capture_default_str();
    gen->add_option("--pi", gcfg.pi, "positive class prior")->capture_default_str();
    gen->add_option("--labeled", n_labeled, "labeled positives")->required();
    gen->add_option("--seed", data_seed, "random seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output CSV")->required();
    gen->add_option("--test-out", gen_test_out, "optional independent test set CSV (nothing labeled)");
    gen->add_option("--test-n", test_n, "test set size (default: --n)");

    // train
    auto* train = app.add_subcommand("train", "resampled PU training with score-trace recording");
    ConfigOptions train_cfg;
    train_cfg.attach(train);
    std::string train_data, train_dir;
    train->add_option("--data", train_data, "dataset CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--out-dir", train_dir, "directory for traces.csv and trace_model.txt")->required();

    // score-trends
    auto* score = app.add_subcommand("score-trends", "trend score of every trace");
    std::string score_traces, score_out, estimator = "full";
    double alpha = 2.0;
    std::size_t t_stop = 0;
    score->add_option("--traces", score_traces, "trace CSV")->required()->check(CLI::ExistingFile);
    score->add_option("--alpha", alpha, "scaling of the differences")->capture_default_str();
    score->add_option("--estimator", estimator, "full|simplified|empirical")->capture_default_str();
    score->add_option("--t-stop", t_stop, "use the first t snapshots (default: all)");
    score->add_option("--out", score_out, "score CSV")->required();

    // mk-test
    auto* mk = app.add_subcommand("mk-test", "Mann-Kendall test of a sequence or of every trace");
    std::string mk_values, mk_traces, mk_out;
    double mk_level = kDefaultSignificance;
    auto* mk_values_opt = mk->add_option("--values", mk_values, "comma-separated sequence");
    auto* mk_traces_opt = mk->add_option("--traces", mk_traces, "trace CSV")->check(CLI::ExistingFile);
    mk_values_opt->excludes(mk_traces_opt);
    mk->add_option("--significance", mk_level, "test level")->capture_default_str();
    mk->add_option("--out", mk_out, "per-trace verdict CSV (with --traces)");

    // partition
    auto* part = app.add_subcommand("partition", "natural-break split of trend scores into pseudo-labels");
    std::string part_scores, part_out;
    part->add_option("--scores", part_scores, "score CSV")->required()->check(CLI::ExistingFile);
    part->add_option("--out", part_out, "score CSV with pseudo-labels")->required();

    // retrain
    auto* re = app.add_subcommand("retrain", "supervised retraining on pseudo-labels from a fresh initialization");
    ConfigOptions re_cfg;
    re_cfg.attach(re);
    std::string re_data, re_scores, re_test, re_model;
    re->add_option("--data", re_data, "training dataset CSV")->required()->check(CLI::ExistingFile);
    re->add_option("--scores", re_scores, "partitioned score CSV")->required()->check(CLI::ExistingFile);
    re->add_option("--test", re_test, "test dataset CSV")->check(CLI::ExistingFile);
    re->add_option("--model-out", re_model, "checkpoint path")->required();

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "every stage end to end");
    ConfigOptions pipe_cfg;
    pipe_cfg.attach(pipe);
    std::string pipe_data, pipe_test, pipe_dir;
    pipe->add_option("--data", pipe_data, "training dataset CSV")->required()->check(CLI::ExistingFile);
    pipe->add_option("--test", pipe_test, "test dataset CSV")->check(CLI::ExistingFile);
    pipe->add_option("--out-dir", pipe_dir, "output directory")->required();

    // verify
    auto* ver = app.add_subcommand("verify", "property and oracle suites");
    std::string suite = "all";
    std::size_t trials = 0, max_n = 500;
    double epsilon = 0.05;
    std::uint64_t verify_seed = 0;
    ver->add_option("--suite", suite, "jenks|gradients|concentration|hyperplane|all")
        ->check(CLI::IsMember({"jenks", "gradients", "concentration", "hyperplane", "all"}))
        ->capture_default_str();
    ver->add_option("--trials", trials, "cases per suite (default: 200 jenks, 50 gradients, 1000 concentration, 50 hyperplane)");
    ver->add_option("--max-n", max_n, "largest jenks input")->capture_default_str();
    ver->add_option("--epsilon", epsilon, "concentration confidence parameter")->capture_default_str();
    ver->add_option("--seed", verify_seed, "random seed")->capture_default_str();

    // concentration
    auto* conc = app.add_subcommand("concentration", "Monte Carlo check of the trend-score concentration bound");
    ConcentrationConfig ccfg;
    std::string conc_out;
    conc->add_option("--t", ccfg.t, "snapshots per trace")->capture_default_str();
    conc->add_option("--alpha", ccfg.alpha)->capture_default_str();
    conc->add_option("--mu", ccfg.mu, "mean of the differences")->capture_default_str();
    conc->add_option("--sigma-d", ccfg.sigma_d, "standard deviation of the differences")->capture_default_str();
    conc->add_option("--epsilon", ccfg.epsilon)->capture_default_str();
    conc->add_option("--trials", ccfg.trials)->capture_default_str();
    conc->add_option("--seed", ccfg.seed)->capture_default_str();
    conc->add_option("--out", conc_out, "per-trial CSV");

    // trace-summary
    auto* summ = app.add_subcommand("trace-summary", "per-class mean traces and trend verdicts");
    std::string summ_traces, summ_out;
    double summ_level = kDefaultSignificance;
    summ->add_option("--traces", summ_traces, "trace CSV with true labels")->required()->check(CLI::ExistingFile);
    summ->add_option("--significance", summ_level)->capture_default_str();
    summ->add_option("--out", summ_out, "summary CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            if (auto warning = nontriviality_warning(gcfg)) std::fprintf(stderr, "warning: %s\n", warning->c_str());
            const auto data = gen_two_gaussians(gcfg, derive_seed(data_seed, 0));
            const auto pu = make_pu_split(data, n_labeled, derive_seed(data_seed, 1));
            save_csv(pu, gen_out);
            const auto& truth = *EvaluationAccess::hidden_labels(pu);
            std::size_t pos = 0;
            for (auto l : truth) pos += l == Label::Positive;
            std::size_t unl_pos = 0;
            for (auto r : pu.unlabeled_indices()) unl_pos += truth[r] == Label::Positive;
            std::printf("rows=%zu positives=%zu negatives=%zu labeled=%zu unlabeled=%zu unlabeled_prior=%s sigma*sqrt(dim)=%s\n",
                        pu.size(), pos, pu.size() - pos, pu.labeled_count(), pu.unlabeled_count(),
                        format_real(static_cast<double>(unl_pos) / static_cast<double>(pu.unlabeled_count())).c_str(),
                        format_real(gcfg.sigma * std::sqrt(static_cast<double>(gcfg.dim))).c_str());
            if (!gen_test_out.empty()) {
                auto tcfg = gcfg;
                if (test_n) tcfg.n = test_n;
                save_csv(as_unlabeled(gen_two_gaussians(tcfg, derive_seed(data_seed, 2))), gen_test_out);
                std::printf("test rows=%zu\n", tcfg.n);
            }
        } else if (*train) {
            const auto config = train_cfg.resolve();
            const auto pu = load_csv(train_data);
            fs::create_directories(train_dir);
            const auto result = train_and_trace(pu, config);
            auto out = open_out(in_dir(train_dir, "traces.csv"));
            write_trace_csv(result.traces, pu, out);
            save_checkpoint(result.model, in_dir(train_dir, "trace_model.txt"));
            for (const auto& w : result.traces.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            std::printf("steps=%zu snapshots=%zu snapshot_interval=%zu t_stop=%zu\n", result.steps,
                        result.traces.snapshot_count(), result.traces.snapshot_interval,
                        select_stop(result.traces, config));
        } else if (*score) {
            const auto file = load_traces(score_traces);
            const auto tm = file.to_trace_matrix();
            const std::size_t t = t_stop ? t_stop : tm.snapshot_count();
            const auto scores = compute_trend_scores(tm, t, {alpha, parse_estimator(estimator)});
            auto out = open_out(score_out);
            write_score_csv(scores, nullptr, out);
            std::printf("scored=%zu t=%zu\n", scores.size(), t);
        } else if (*mk) {
            if (!mk_values.empty()) {
                std::vector<double> x;
                for (const auto& part_text : split_csv_line(mk_values)) x.push_back(parse_real(part_text, 1));
                const auto v = mk_test(x, mk_level);
                std::printf("S=%lld var=%s Z=%s gamma=%s verdict=%s\n", static_cast<long long>(v.s_statistic),
                            format_real(v.variance).c_str(), format_real(v.z_value).c_str(),
                            format_real(v.gamma).c_str(), std::string(to_string(v.direction)).c_str());
            } else if (!mk_traces.empty()) {
                const auto file = load_traces(mk_traces);
                std::map<TrendDirection, std::size_t> counts;
                std::optional<std::ofstream> out;
                if (!mk_out.empty()) {
                    out = open_out(mk_out);
                    *out << "example_id,s,z,gamma,verdict\n";
                }
                for (std::size_t r = 0; r < file.ids.size(); ++r) {
                    const auto v = mk_test(file.scores.row(r), mk_level);
                    ++counts[v.direction];
                    if (out) {
                        *out << file.ids[r].value << ',' << v.s_statistic << ',' << format_real(v.z_value) << ','
                             << format_real(v.gamma) << ',' << to_string(v.direction) << '\n';
                    }
                }
                std::printf("traces=%zu increasing=%zu decreasing=%zu no_trend=%zu\n", file.ids.size(),
                            counts[TrendDirection::Increasing], counts[TrendDirection::Decreasing],
                            counts[TrendDirection::NoTrend]);
            } else {
                fail(ErrorKind::Config, "mk-test needs --values or --traces");
            }
        } else if (*part) {
            const auto file = load_scores(part_scores);
            const auto p = partition_by_trend(file.scores);
            auto out = open_out(part_out);
            write_score_csv(file.scores, &p.labels, out);
            std::printf("break_index=%zu objective=%s pseudo_positive=%zu pseudo_negative=%zu prior=%s\n",
                        p.result.break_index, format_real(p.result.objective).c_str(), p.high_count, p.low_count,
                        format_real(estimate_prior(p.labels)).c_str());
        } else if (*re) {
            const auto config = re_cfg.resolve();
            const auto pu = load_csv(re_data);
            const auto file = load_scores(re_scores);
            if (!file.labels) fail(ErrorKind::Config, re_scores + " carries no pseudo-labels; run partition first");
            const auto result = retrain(pu, *file.labels, config);
            save_checkpoint(result.model, re_model);
            std::printf("epochs=%zu final_loss=%s\n", result.epoch_losses.size(),
                        format_real(result.epoch_losses.back()).c_str());
            if (!re_test.empty()) print_metrics("test", evaluate_model(result.model, load_csv(re_test)));
        } else if (*pipe) {
            const auto config = pipe_cfg.resolve();
            const auto train_set = load_csv(pipe_data);
            std::optional<PUDataset> test_set;
            if (!pipe_test.empty()) test_set = load_csv(pipe_test);
            fs::create_directories(pipe_dir);
            const auto r = run_pipeline(config, train_set, test_set ? &*test_set : nullptr);
            {
                auto out = open_out(in_dir(pipe_dir, "traces.csv"));
                write_trace_csv(r.traces, train_set, out);
            }
            {
                auto out = open_out(in_dir(pipe_dir, "scores.csv"));
                write_score_csv(r.scores, &r.labels, out);
            }
            save_checkpoint(r.trace_model, in_dir(pipe_dir, "trace_model.txt"));
            save_checkpoint(r.final_model, in_dir(pipe_dir, "model.txt"));
            write_json(report_to_json(r), in_dir(pipe_dir, "report.json"));
            write_json(timings_to_json(r.timings), in_dir(pipe_dir, "timings.json"));
            if (train_set.has_hidden_labels()) {
                const auto& hidden = *EvaluationAccess::hidden_labels(train_set);
                std::vector<Label> truth;
                for (auto row : r.traces.rows) truth.push_back(hidden[row]);
                write_summary(r.traces.scores, truth, config.significance, in_dir(pipe_dir, "trace_summary.csv"));
            }
            for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            std::printf("t_stop=%zu break_index=%zu pseudo_positive=%zu pseudo_negative=%zu prior_unlabeled=%s prior_whole=%s\n",
                        r.t_stop, r.break_index, r.pseudo_positive_count, r.pseudo_negative_count,
                        format_real(r.prior_unlabeled).c_str(), format_real(r.prior_whole).c_str());
            if (r.true_prior_unlabeled) std::printf("true_prior_unlabeled=%s\n", format_real(*r.true_prior_unlabeled).c_str());
            if (r.unlabeled_metrics) print_metrics("unlabeled", *r.unlabeled_metrics);
            if (r.test_metrics) print_metrics("test", *r.test_metrics);
        } else if (*ver) {
            std::vector<SuiteResult> results;
            auto pick = [&](std::size_t fallback) { return trials ? trials : fallback; };
            if (suite == "jenks" || suite == "all") results.push_back(verify_jenks({pick(200), max_n, verify_seed}));
            if (suite == "gradients" || suite == "all") results.push_back(verify_gradients(pick(50), verify_seed));
            if (suite == "concentration" || suite == "all")
                results.push_back(verify_concentration(epsilon, pick(1000), verify_seed));
            if (suite == "hyperplane" || suite == "all") results.push_back(verify_hyperplane(pick(50), verify_seed));
            bool ok = true;
            for (const auto& s : results) {
                for (const auto& p : s.properties) {
                    std::printf("%s %s: %s (%s)\n", p.passed ? "PASS" : "FAIL", s.suite.c_str(), p.name.c_str(),
                                p.detail.c_str());
                }
                ok = ok && s.passed();
            }
            return ok ? 0 : 1;
        } else if (*conc) {
            const auto rep = concentration_experiment(ccfg);
            std::printf("t=%zu bound=%s coverage=%s median_deviation=%s median_plugin_gap=%s\n", ccfg.t,
                        format_real(rep.bound).c_str(), format_real(rep.coverage).c_str(),
                        format_real(rep.median_deviation).c_str(), format_real(rep.median_plugin_gap).c_str());
            if (!conc_out.empty()) {
                auto out = open_out(conc_out);
                write_concentration_csv(rep, out);
            }
        } else if (*summ) {
            const auto file = load_traces(summ_traces);
            if (!file.truth) fail(ErrorKind::EvaluationUnavailable, summ_traces + " has no true labels");
            write_summary(file.scores, *file.truth, summ_level, summ_out);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    }
    return 0;
}
