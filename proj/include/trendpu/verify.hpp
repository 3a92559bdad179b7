#pragma once

// Verification suites run by `trendpu verify`. Each suite checks a set of
// properties and records the inputs of the first failing case.

#include <cstdint>
#include <string>
#include <vector>

namespace trendpu {

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::vector<PropertyResult> properties;

    bool passed() const;
};

struct JenksSweepOptions {
    std::size_t trials = 200;
    std::size_t max_n = 500;
    std::uint64_t seed = 0;
};

/// Fast natural break against the exhaustive oracle on random uniform and
/// bimodal inputs.
SuiteResult verify_jenks(const JenksSweepOptions& options);

/// Analytic gradients of the resampling loss against central differences.
SuiteResult verify_gradients(std::size_t fixtures = 50, std::uint64_t seed = 0);

/// Coverage of the concentration bound at t = 10, 20, 40 and the t^-1 rate.
SuiteResult verify_concentration(double epsilon = 0.05, std::size_t trials = 1000, std::uint64_t seed = 0);

/// Balanced resampling recovers the balanced PN hyperplane.
SuiteResult verify_hyperplane(std::size_t settings = 50, std::uint64_t seed = 0);

}  // namespace trendpu
