#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "trendpu/data.hpp"
#include "trendpu/error.hpp"

using namespace trendpu;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::Io;
}

std::string error_text(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("gaussian generation") {
    GaussianConfig cfg{10, 0.5, {}, 10000, 0.5};
    const auto data = gen_two_gaussians(cfg, 1);
    REQUIRE(data.size() == 10000);
    const auto v = default_direction(10);
    std::vector<double> mean(10, 0.0), sq(10, 0.0);
    std::size_t pos = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (data.labels[r] != Label::Positive) continue;
        ++pos;
        for (std::size_t c = 0; c < 10; ++c) mean[c] += data.features(r, c);
    }
    CHECK(pos == 5000);
    for (std::size_t c = 0; c < 10; ++c) {
        mean[c] /= static_cast<double>(pos);
        CHECK(std::fabs(mean[c] - v[c]) < 0.02);
    }
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (data.labels[r] != Label::Positive) continue;
        for (std::size_t c = 0; c < 10; ++c) sq[c] += (data.features(r, c) - mean[c]) * (data.features(r, c) - mean[c]);
    }
    for (std::size_t c = 0; c < 10; ++c) CHECK(std::fabs(sq[c] / static_cast<double>(pos) / 0.25 - 1.0) < 0.1);

    const auto again = gen_two_gaussians(cfg, 1);
    CHECK(again.features == data.features);
    CHECK(again.labels == data.labels);

    cfg.n = 11;
    const auto odd = gen_two_gaussians(cfg, 2);
    const auto odd_pos = std::count(odd.labels.begin(), odd.labels.end(), Label::Positive);
    CHECK(std::abs(2 * odd_pos - 11) <= 1);

    CHECK(kind_of([] { gen_two_gaussians(GaussianConfig{2, 0.5, {}, 10, 0.01}, 0); }) == ErrorKind::Degenerate);
    CHECK(kind_of([] { gen_two_gaussians(GaussianConfig{2, 0.5, {}, 10, 0.99}, 0); }) == ErrorKind::Degenerate);
    CHECK(kind_of([] { gen_two_gaussians(GaussianConfig{2, 0.5, {1.0, 1.0}, 10, 0.5}, 0); }) == ErrorKind::Config);
    CHECK(kind_of([] { gen_two_gaussians(GaussianConfig{2, -1.0, {}, 10, 0.5}, 0); }) == ErrorKind::Config);

    CHECK(nontriviality_warning(GaussianConfig{50, 0.5, {}, 10, 0.5}) == std::nullopt);
    CHECK(nontriviality_warning(GaussianConfig{2, 0.5, {}, 10, 0.5}).has_value());
}

TEST_CASE("PU split") {
    const auto data = gen_two_gaussians(GaussianConfig{5, 0.5, {}, 2000, 0.5}, 3);
    const auto pu = make_pu_split(data, 200, 4);
    CHECK(pu.labeled_count() == 200);
    CHECK(pu.unlabeled_count() == 1800);
    const auto& truth = *EvaluationAccess::hidden_labels(pu);
    std::size_t unl_pos = 0;
    for (std::size_t i : pu.labeled_indices()) CHECK(truth[i] == Label::Positive);
    for (std::size_t i : pu.unlabeled_indices()) unl_pos += truth[i] == Label::Positive;
    CHECK(unl_pos == 800);
    CHECK(static_cast<double>(unl_pos) / 1800.0 == doctest::Approx(0.444).epsilon(1e-3));

    const auto all = make_pu_split(data, 1000, 4);
    for (std::size_t i : all.unlabeled_indices()) CHECK(truth[i] == Label::Negative);
    CHECK(kind_of([&] { make_pu_split(data, 1001, 4); }) == ErrorKind::Size);

    CHECK(make_pu_split(data, 200, 4) == pu);

    // SCAR: the labeled mean approaches the positive-class mean.
    const auto big = gen_two_gaussians(GaussianConfig{3, 0.5, {}, 20000, 0.5}, 8);
    const auto split = make_pu_split(big, 5000, 9);
    const auto v = default_direction(3);
    for (std::size_t c = 0; c < 3; ++c) {
        double m = 0.0;
        for (std::size_t i : split.labeled_indices()) m += split.features()(i, c);
        CHECK(std::fabs(m / 5000.0 - v[c]) < 0.03);
    }
}

TEST_CASE("PU dataset invariants") {
    Matrix x(3, 1, 0.0);
    const std::vector<ExampleId> ids{ExampleId{0}, ExampleId{1}, ExampleId{2}};
    CHECK(kind_of([&] {
              PUDataset(ids, x, {true, false, false}, std::vector{Label::Negative, Label::Positive, Label::Negative});
          }) == ErrorKind::Domain);
    CHECK(kind_of([&] { PUDataset(ids, x, {true, false}, std::nullopt); }) == ErrorKind::Shape);
    const auto empty_truth = as_unlabeled(gen_two_gaussians(GaussianConfig{2, 0.5, {}, 10, 0.5}, 0));
    CHECK(empty_truth.labeled_count() == 0);
    CHECK(empty_truth.has_hidden_labels());
}

TEST_CASE("CSV round trip") {
    const auto data = gen_two_gaussians(GaussianConfig{4, 0.7, {}, 300, 0.4}, 12);
    const auto pu = make_pu_split(data, 30, 13);
    std::stringstream buf;
    save_csv(pu, buf);
    const auto back = load_csv(buf);
    CHECK(back == pu);

    std::istringstream no_label("id,labeled,f0,f1\n5,1,0.5,0.25\n6,0,-1,2\n7,0,3,4\n");
    const auto loaded = load_csv(no_label);
    CHECK_FALSE(loaded.has_hidden_labels());
    CHECK(loaded.size() == 3);
    CHECK(loaded.ids()[1] == ExampleId{6});
    CHECK(loaded.features()(1, 1) == 2.0);

    std::istringstream na("id,label,labeled,f0\n1,NA,1,0.5\n2,NA,0,1\n3,NA,0,2\n");
    CHECK_FALSE(load_csv(na).has_hidden_labels());

    std::istringstream wrong_width("id,label,labeled,f0,f1\n1,0,1,0.5,0.5\n2,1,0,1\n");
    const auto msg = error_text([&] { load_csv(wrong_width); });
    CHECK(msg.find("line 3") != std::string::npos);

    std::istringstream bad_cell("id,label,labeled,f0\n1,0,1,abc\n");
    CHECK(kind_of([&] { load_csv(bad_cell); }) == ErrorKind::Parse);
    std::istringstream bad_header("name,label,labeled,f0\n");
    CHECK(kind_of([&] { load_csv(bad_header); }) == ErrorKind::Parse);
    std::istringstream mixed("id,label,labeled,f0\n1,0,1,0.5\n2,NA,0,1\n");
    CHECK(kind_of([&] { load_csv(mixed); }) == ErrorKind::Parse);
}

TEST_CASE("balanced batches") {
    const auto data = gen_two_gaussians(GaussianConfig{2, 0.5, {}, 700, 0.5}, 1);
    const auto pu = make_pu_split(data, 60, 2);
    REQUIRE(pu.unlabeled_count() == 640);
    const auto batches = balanced_batches(pu, 64, 5);
    CHECK(batches.size() == 10);
    std::set<std::size_t> seen;
    const auto labeled = pu.labeled_indices();
    const std::set<std::size_t> labeled_set(labeled.begin(), labeled.end());
    for (const auto& b : batches) {
        CHECK(b.positive_rows.size() == 64);
        CHECK(b.unlabeled_rows.size() == 64);
        CHECK(b.positive_batch.rows() == 64);
        CHECK(b.unlabeled_batch.rows() == 64);
        for (std::size_t r : b.unlabeled_rows) {
            CHECK(seen.insert(r).second);
            CHECK_FALSE(pu.labeled_positive()[r]);
        }
        for (std::size_t r : b.positive_rows) CHECK(labeled_set.count(r) == 1);
        CHECK(b.positive_batch == pu.features().gather(b.positive_rows));
    }
    CHECK(seen.size() == 640);

    const auto tail = balanced_batches(pu, 100, 5);
    CHECK(tail.size() == 6);

    const auto again = balanced_batches(pu, 64, 5);
    for (std::size_t i = 0; i < batches.size(); ++i) {
        CHECK(again[i].positive_rows == batches[i].positive_rows);
        CHECK(again[i].unlabeled_rows == batches[i].unlabeled_rows);
    }

    CHECK(kind_of([&] { balanced_batches(pu, 641, 5); }) == ErrorKind::Config);
}

TEST_CASE("single labeled positive appears in every positive batch") {
    const auto data = gen_two_gaussians(GaussianConfig{2, 0.5, {}, 200, 0.5}, 1);
    const auto pu = make_pu_split(data, 1, 2);
    const auto only = pu.labeled_indices().at(0);
    for (std::uint64_t e = 0; e < 100; ++e) {
        for (const auto& b : balanced_batches(pu, 16, e)) {
            for (std::size_t r : b.positive_rows) REQUIRE(r == only);
        }
    }
}

TEST_CASE("positive resampling is uniform") {
    const auto data = gen_two_gaussians(GaussianConfig{2, 0.5, {}, 200, 0.5}, 1);
    const auto pu = make_pu_split(data, 10, 2);
    std::map<std::size_t, double> counts;
    std::size_t draws = 0;
    for (std::uint64_t e = 0; draws < 10000; ++e) {
        for (const auto& b : balanced_batches(pu, 10, e)) {
            for (std::size_t r : b.positive_rows) {
                ++counts[r];
                ++draws;
            }
        }
    }
    const double expected = static_cast<double>(draws) / 10.0;
    double chi2 = 0.0;
    for (const auto& [_, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    // 0.99 quantile of chi-square with 9 degrees of freedom.
    CHECK(chi2 < 21.666);
}
