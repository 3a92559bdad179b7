#pragma once

// Executable forms of the analytical results behind the method: Bayes score
// functions for the two-Gaussian mixture, and a Monte Carlo check of the
// concentration bound for the robust trend score.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace trendpu {

/// Two-Gaussian mixture N(+v, sigma^2 I) / N(-v, sigma^2 I) with positive
/// prior pi, trained with |P| / |U| = ratio.
struct HyperplaneSetting {
    std::vector<double> direction;  // unit vector v
    double sigma = 1.0;
    double pi = 0.5;
    double ratio = 1.0;

    void validate() const;
};

/// PN log-odds: 2 v.x / sigma^2 + ln(pi / (1 - pi)).
double g_pn(std::span<const double> x, const HyperplaneSetting& setting);

/// PU score under the negativity assumption:
/// -ln[(1 - pi) exp(-2 v.x / sigma^2) + pi] + ln(ratio), evaluated in
/// log-sum-exp form.
double g_pu(std::span<const double> x, const HyperplaneSetting& setting);

/// g_pu at x = s * v, as a function of s alone.
double g_pu_along(double s, const HyperplaneSetting& setting);

/// Offset s where the PU decision hyperplane crosses x = s * v:
/// s = -sigma^2 (ln(ratio - pi) - ln(1 - pi)) / 2.
/// Throws ErrorKind::Unlearnable when ratio <= pi.
double hyperplane_offset(const HyperplaneSetting& setting);

/// Bisection root of g_pu_along on [lo, hi]; g_pu_along is increasing in s.
double solve_pu_root(const HyperplaneSetting& setting, double lo = -50.0, double hi = 50.0, double tol = 1e-13);

struct ConcentrationConfig {
    std::size_t t = 10;
    double alpha = 2.0;
    double mu = 0.1;
    double sigma_d = 0.2;
    double epsilon = 0.05;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// 2 a s sqrt(c) / (1 - sqrt(c / (a s)^2)) with c = 2 ln(1/eps) / (t (t - 1)).
double concentration_bound(std::size_t t, double alpha, double sigma_d, double epsilon);

struct ConcentrationTrial {
    std::size_t trial = 0;
    double deviation = 0.0;       // |S_hat - alpha * mu|
    double plugin_gap = 0.0;      // |alpha * S_tilde - S_hat|
    bool inside = false;
};

struct ConcentrationReport {
    ConcentrationConfig config;
    double bound = 0.0;
    std::vector<ConcentrationTrial> trials;
    double coverage = 0.0;
    double median_deviation = 0.0;
    double median_plugin_gap = 0.0;
};

/// Per trial: t(t-1)/2 i.i.d. N(mu, sigma_d^2) differences, S_hat is the mean
/// of psi(alpha * d), compared against the bound.
ConcentrationReport concentration_experiment(const ConcentrationConfig& config);

/// CSV `trial,deviation,bound,inside` and a trailing summary row.
void write_concentration_csv(const ConcentrationReport& report, std::ostream& out);

}  // namespace trendpu
