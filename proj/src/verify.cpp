#include "trendpu/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trendpu/error.hpp"
#include "trendpu/format.hpp"
#include "trendpu/jenks.hpp"
#include "trendpu/model.hpp"
#include "trendpu/rng.hpp"
#include "trendpu/theory.hpp"

namespace trendpu {

bool SuiteResult::passed() const {
    return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed; });
}

namespace {

// Tracks a property across many cases, remembering the first failure.
class PropertyTracker {
public:
    explicit PropertyTracker(std::string name) : name_(std::move(name)) {}

    void check(bool ok, const std::string& failing_case) {
        ++cases_;
        if (ok) {
            ++ok_;
        } else if (first_failure_.empty()) {
            first_failure_ = failing_case;
        }
    }

    PropertyResult result(const std::string& extra = {}) const {
        PropertyResult r{name_, ok_ == cases_, std::to_string(ok_) + "/" + std::to_string(cases_) + " cases"};
        if (!extra.empty()) r.detail += "; " + extra;
        if (!first_failure_.empty()) r.detail += "; first failure: " + first_failure_;
        return r;
    }

private:
    std::string name_;
    std::size_t cases_ = 0;
    std::size_t ok_ = 0;
    std::string first_failure_;
};

std::vector<double> jenks_input(Rng& rng, std::size_t n, bool bimodal) {
    std::vector<double> v(n);
    for (auto& x : v) {
        if (bimodal) {
            x = rng.uniform() < 0.5 ? rng.normal(-1.0, 0.3) : rng.normal(1.5, 0.5);
        } else {
            x = rng.uniform(-1.0, 1.0);
        }
    }
    return v;
}

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double norm = 0.0;
    while (norm < 1e-6) {
        norm = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
    }
    for (auto& x : v) x /= norm;
    return v;
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& x : m.values()) x = rng.normal();
    return m;
}

// Smallest |pre-activation| over hidden units; finite differences are only
// meaningful away from the rectifier kink.
double min_hidden_margin(const ModelParams& params, const Matrix& batch) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        std::vector<double> a(batch.row(r).begin(), batch.row(r).end());
        for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
            const auto& layer = params.layers[l];
            std::vector<double> z(layer.bias);
            for (std::size_t o = 0; o < z.size(); ++o) {
                for (std::size_t i = 0; i < a.size(); ++i) z[o] += layer.weights(o, i) * a[i];
                margin = std::min(margin, std::fabs(z[o]));
                z[o] = std::max(z[o], 0.0);
            }
            a = std::move(z);
        }
    }
    return margin;
}

}  // namespace

SuiteResult verify_jenks(const JenksSweepOptions& options) {
    if (options.max_n < 2) fail(ErrorKind::Config, "verify jenks: max_n must be at least 2");
    SuiteResult suite{"jenks", {}};
    PropertyTracker same_break("fast break index equals oracle");
    PropertyTracker same_objective("objectives agree to 1e-9");
    PropertyTracker recompute("objective equals two-pass recomputation to 1e-9");

    for (std::size_t k = 0; k < options.trials; ++k) {
        Rng rng(derive_seed(options.seed, k));
        const auto n = 2 + static_cast<std::size_t>(rng.below(options.max_n - 1));
        const bool bimodal = k % 2 == 1;
        const auto values = jenks_input(rng, n, bimodal);
        const std::string tag = "trial=" + std::to_string(k) + " seed=" + std::to_string(options.seed) +
                                " n=" + std::to_string(n) + (bimodal ? " bimodal" : " uniform");

        const auto fast = natural_break_fast(values);
        const auto oracle = natural_break_oracle(values);
        std::vector<double> sorted(values);
        std::sort(sorted.begin(), sorted.end());
        const double at_fast = split_objective(sorted, fast.break_index);
        // Either index is acceptable when the two splits tie.
        const bool tie = std::fabs(at_fast - oracle.objective) <= 1e-12;
        same_break.check(fast.break_index == oracle.break_index || tie,
                         tag + " fast=" + std::to_string(fast.break_index) + " oracle=" + std::to_string(oracle.break_index));
        same_objective.check(std::fabs(fast.objective - oracle.objective) <= 1e-9,
                             tag + " fast=" + format_real(fast.objective) + " oracle=" + format_real(oracle.objective));
        recompute.check(std::fabs(fast.objective - at_fast) <= 1e-9, tag);
    }
    suite.properties = {same_break.result(), same_objective.result(), recompute.result()};
    return suite;
}

SuiteResult verify_gradients(std::size_t fixtures, std::uint64_t seed) {
    SuiteResult suite{"gradients", {}};
    PropertyTracker prop("analytic vs central differences, max relative error < 1e-4");
    constexpr double kStep = 1e-5;
    double worst = 0.0;

    for (std::size_t k = 0; k < fixtures; ++k) {
        Rng rng(derive_seed(seed, k));
        ModelSpec spec;
        spec.input_dim = 1 + static_cast<std::size_t>(rng.below(6));
        if (k % 2 == 1) spec.hidden_dims = {2 + static_cast<std::size_t>(rng.below(4)), 2 + static_cast<std::size_t>(rng.below(4))};

        ModelParams params;
        Matrix pos, unl;
        for (int attempt = 0;; ++attempt) {
            params = init_params(spec, rng.below(1u << 30));
            pos = random_matrix(rng, 1 + static_cast<std::size_t>(rng.below(5)), spec.input_dim);
            unl = random_matrix(rng, 1 + static_cast<std::size_t>(rng.below(5)), spec.input_dim);
            if (spec.hidden_dims.empty() || (min_hidden_margin(params, pos) > 1e-3 && min_hidden_margin(params, unl) > 1e-3)) break;
            if (attempt > 100) fail(ErrorKind::Numeric, "verify gradients: could not draw a kink-free fixture");
        }

        const auto analytic = backward(params, pos, unl).flatten();
        auto theta = params.flatten();
        double fixture_worst = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            ModelParams probe = params;
            theta[i] = saved + kStep;
            probe.assign_flat(theta);
            const double up = batch_loss(probe, pos, unl);
            theta[i] = saved - kStep;
            probe.assign_flat(theta);
            const double down = batch_loss(probe, pos, unl);
            theta[i] = saved;
            const double numeric = (up - down) / (2.0 * kStep);
            const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
            fixture_worst = std::max(fixture_worst, std::fabs(analytic[i] - numeric) / denom);
        }
        worst = std::max(worst, fixture_worst);
        std::ostringstream tag;
        tag << "fixture=" << k << " seed=" << seed << " input_dim=" << spec.input_dim << " hidden=" << spec.hidden_dims.size()
            << " rel_err=" << format_real(fixture_worst);
        prop.check(fixture_worst < 1e-4, tag.str());
    }
    suite.properties = {prop.result("worst relative error " + format_real(worst))};
    return suite;
}

SuiteResult verify_concentration(double epsilon, std::size_t trials, std::uint64_t seed) {
    SuiteResult suite{"concentration", {}};
    double median_t10 = 0.0, median_t40 = 0.0;
    for (std::size_t t : {10u, 20u, 40u}) {
        ConcentrationConfig cfg;
        cfg.t = t;
        cfg.alpha = 2.0;
        cfg.mu = 0.1;
        cfg.sigma_d = 0.2;
        cfg.epsilon = epsilon;
        cfg.trials = trials;
        cfg.seed = derive_seed(seed, t);
        const auto report = concentration_experiment(cfg);
        const double required = 1.0 - 2.0 * epsilon;
        std::ostringstream detail;
        detail << "coverage=" << format_real(report.coverage) << " required>=" << format_real(required)
               << " bound=" << format_real(report.bound) << " median_deviation=" << format_real(report.median_deviation)
               << " median_plugin_gap=" << format_real(report.median_plugin_gap);
        suite.properties.push_back({"coverage at t=" + std::to_string(t), report.coverage >= required, detail.str()});
        if (t == 10) median_t10 = report.median_deviation;
        if (t == 40) median_t40 = report.median_deviation;
    }
    const double ratio = median_t10 / median_t40;
    suite.properties.push_back({"median deviation t=10 / t=40 >= 2", ratio >= 2.0, "ratio=" + format_real(ratio)});
    return suite;
}

SuiteResult verify_hyperplane(std::size_t settings, std::uint64_t seed) {
    SuiteResult suite{"hyperplane", {}};
    PropertyTracker offset("offset(|P|/|U| = 1) = 0 to 1e-12");
    PropertyTracker root("numeric root of g_pu along v at 0 within 1e-9");
    PropertyTracker side("g_pu agrees in sign with v.x off the plane");
    PropertyTracker monotone("g_pu strictly increasing along v");
    PropertyTracker unlearnable("|P|/|U| <= pi raises unlearnable");
    PropertyTracker finite("g_pu finite for |v.x|/sigma^2 up to 1e4");

    for (std::size_t k = 0; k < settings; ++k) {
        Rng rng(derive_seed(seed, k));
        HyperplaneSetting s;
        s.direction = random_unit(rng, 2 + static_cast<std::size_t>(rng.below(9)));
        s.sigma = rng.uniform(0.2, 2.0);
        s.pi = rng.uniform(0.05, 0.95);
        s.ratio = 1.0;
        std::ostringstream tag;
        tag << "setting=" << k << " seed=" << seed << " dim=" << s.direction.size() << " sigma=" << format_real(s.sigma)
            << " pi=" << format_real(s.pi);

        offset.check(std::fabs(hyperplane_offset(s)) <= 1e-12, tag.str());
        root.check(std::fabs(solve_pu_root(s)) <= 1e-9, tag.str());

        bool same_side = true;
        for (int j = 0; j < 20; ++j) {
            std::vector<double> x(s.direction.size());
            for (auto& xi : x) xi = rng.normal(0.0, 2.0);
            double proj = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) proj += x[i] * s.direction[i];
            if (std::fabs(proj) < 1e-6) continue;
            same_side = same_side && g_pu(x, s) * proj > 0.0;
        }
        side.check(same_side, tag.str());

        // Far from the plane g_pu saturates to a constant in double precision,
        // so strictness is checked within a few sigma^2 of it.
        const double scale = s.sigma * s.sigma;
        bool increasing = true;
        double prev = g_pu_along(-2.0 * scale, s);
        for (int j = -19; j <= 20; ++j) {
            const double cur = g_pu_along(0.1 * j * scale, s);
            increasing = increasing && cur > prev;
            prev = cur;
        }
        monotone.check(increasing, tag.str());

        HyperplaneSetting bad = s;
        bad.ratio = s.pi * rng.uniform(0.1, 1.0);
        bool threw = false;
        try {
            hyperplane_offset(bad);
        } catch (const Error& e) {
            threw = e.kind() == ErrorKind::Unlearnable;
        }
        unlearnable.check(threw, tag.str() + " ratio=" + format_real(bad.ratio));

        finite.check(std::isfinite(g_pu_along(1e4 * scale, s)) && std::isfinite(g_pu_along(-1e4 * scale, s)), tag.str());
    }
    suite.properties = {offset.result(), root.result(), side.result(), monotone.result(), unlearnable.result(), finite.result()};
    return suite;
}

}  // namespace trendpu
