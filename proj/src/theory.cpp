#include "trendpu/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "trendpu/error.hpp"
#include "trendpu/format.hpp"
#include "trendpu/rng.hpp"
#include "trendpu/trend.hpp"

namespace trendpu {

namespace {

double projection(std::span<const double> x, const HyperplaneSetting& setting) {
    if (x.size() != setting.direction.size()) fail(ErrorKind::Shape, "point and direction differ in dimension");
    return std::inner_product(x.begin(), x.end(), setting.direction.begin(), 0.0);
}

double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

void HyperplaneSetting::validate() const {
    if (direction.empty()) fail(ErrorKind::Config, "hyperplane setting: empty direction");
    const double norm = std::sqrt(std::inner_product(direction.begin(), direction.end(), direction.begin(), 0.0));
    if (std::fabs(norm - 1.0) > 1e-9) fail(ErrorKind::Config, "hyperplane setting: direction must be a unit vector");
    if (!(sigma > 0.0)) fail(ErrorKind::Config, "hyperplane setting: sigma must be positive");
    if (!(pi > 0.0 && pi < 1.0)) fail(ErrorKind::Config, "hyperplane setting: pi must lie in (0, 1)");
    if (!(ratio > 0.0)) fail(ErrorKind::Config, "hyperplane setting: |P|/|U| must be positive");
}

double g_pn(std::span<const double> x, const HyperplaneSetting& setting) {
    setting.validate();
    const double s2 = setting.sigma * setting.sigma;
    return 2.0 * projection(x, setting) / s2 + std::log(setting.pi / (1.0 - setting.pi));
}

double g_pu_along(double s, const HyperplaneSetting& setting) {
    const double s2 = setting.sigma * setting.sigma;
    const double a = std::log1p(-setting.pi) - 2.0 * s / s2;
    return -log_add_exp(a, std::log(setting.pi)) + std::log(setting.ratio);
}

double g_pu(std::span<const double> x, const HyperplaneSetting& setting) {
    setting.validate();
    return g_pu_along(projection(x, setting), setting);
}

double hyperplane_offset(const HyperplaneSetting& setting) {
    setting.validate();
    if (setting.ratio <= setting.pi) {
        fail(ErrorKind::Unlearnable, "decision hyperplane unlearnable: |P|/|U| = " + format_real(setting.ratio) +
                                         " does not exceed pi = " + format_real(setting.pi));
    }
    const double s2 = setting.sigma * setting.sigma;
    return -s2 * (std::log(setting.ratio - setting.pi) - std::log1p(-setting.pi)) / 2.0;
}

double solve_pu_root(const HyperplaneSetting& setting, double lo, double hi, double tol) {
    setting.validate();
    double f_lo = g_pu_along(lo, setting);
    const double f_hi = g_pu_along(hi, setting);
    if (f_lo > 0.0 || f_hi < 0.0) fail(ErrorKind::Domain, "solve_pu_root: root is not bracketed");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double f_mid = g_pu_along(mid, setting);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double concentration_bound(std::size_t t, double alpha, double sigma_d, double epsilon) {
    const double pairs = static_cast<double>(t) * static_cast<double>(t - 1);
    const double c = 2.0 * std::log(1.0 / epsilon) / pairs;
    const double scale = alpha * sigma_d;
    return 2.0 * scale * std::sqrt(c) / (1.0 - std::sqrt(c / (scale * scale)));
}

void ConcentrationConfig::validate() const {
    if (t < 2) fail(ErrorKind::Config, "concentration: t must be at least 2");
    if (!(alpha > 0.0)) fail(ErrorKind::Config, "concentration: alpha must be positive");
    if (!(sigma_d > 0.0)) fail(ErrorKind::Config, "concentration: sigma_d must be positive");
    if (!(epsilon > 0.0 && epsilon < 0.5)) fail(ErrorKind::Config, "concentration: epsilon must lie in (0, 0.5)");
    if (trials == 0) fail(ErrorKind::Config, "concentration: trials must be positive");
    const double pairs = static_cast<double>(t) * static_cast<double>(t - 1);
    const double ratio = 2.0 * std::log(1.0 / epsilon) / (pairs * alpha * alpha * sigma_d * sigma_d);
    if (!(ratio < 1.0)) {
        fail(ErrorKind::Config, "concentration: bound precondition violated, 2 ln(1/eps) / (t(t-1) alpha^2 sigma_d^2) = " +
                                    format_real(ratio) + " is not below 1");
    }
}

ConcentrationReport concentration_experiment(const ConcentrationConfig& config) {
    config.validate();
    ConcentrationReport report;
    report.config = config;
    report.bound = concentration_bound(config.t, config.alpha, config.sigma_d, config.epsilon);
    const std::size_t pairs = config.t * (config.t - 1) / 2;

    std::size_t inside = 0;
    std::vector<double> deviations, gaps;
    for (std::size_t k = 0; k < config.trials; ++k) {
        Rng rng(derive_seed(config.seed, k));
        double robust = 0.0, plain = 0.0;
        for (std::size_t i = 0; i < pairs; ++i) {
            const double d = rng.normal(config.mu, config.sigma_d);
            robust += psi(config.alpha * d);
            plain += d;
        }
        robust /= static_cast<double>(pairs);
        plain /= static_cast<double>(pairs);

        ConcentrationTrial trial;
        trial.trial = k;
        trial.deviation = std::fabs(robust - config.alpha * config.mu);
        trial.plugin_gap = std::fabs(config.alpha * plain - robust);
        trial.inside = trial.deviation < report.bound;
        inside += trial.inside ? 1 : 0;
        deviations.push_back(trial.deviation);
        gaps.push_back(trial.plugin_gap);
        report.trials.push_back(trial);
    }
    report.coverage = static_cast<double>(inside) / static_cast<double>(config.trials);
    report.median_deviation = median(std::move(deviations));
    report.median_plugin_gap = median(std::move(gaps));
    return report;
}

void write_concentration_csv(const ConcentrationReport& report, std::ostream& out) {
    out << "trial,deviation,bound,inside\n";
    for (const auto& t : report.trials) {
        out << t.trial << ',' << format_real(t.deviation) << ',' << format_real(report.bound) << ','
            << (t.inside ? 1 : 0) << '\n';
    }
    out << "summary," << format_real(report.median_deviation) << ',' << format_real(report.bound) << ','
        << format_real(report.coverage) << '\n';
}

}  // namespace trendpu
