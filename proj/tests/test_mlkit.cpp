#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "lws/errors.hpp"
#include "lws/mlkit.hpp"
#include "lws/sim.hpp"

using namespace lws;
using namespace lws::ml;
using doctest::Approx;

namespace {

FeatureVector point(std::array<double, kFeatureCount> v, std::string label) {
    FeatureVector f;
    f.values = v;
    f.label = std::move(label);
    return f;
}

FeatureVector at(double x, double y, std::string label) {
    std::array<double, kFeatureCount> v{};
    v[0] = x;
    v[1] = y;
    return point(v, std::move(label));
}

std::vector<FeatureVector> breathing_rows(std::size_t per_class, std::uint64_t seed) {
    std::vector<FeatureVector> rows;
    for (std::size_t c = 0; c < sim::kBreathingClasses.size(); ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            sim::BreathingConfig cfg;
            cfg.label = sim::kBreathingClasses[c];
            cfg.noise.awgn_snr_db = 30.0;
            cfg.seed = seed + 1000 * c + i;
            auto f = extract_features(sim::simulate_breathing(cfg).series);
            f.label = std::string(sim::to_string(cfg.label));
            rows.push_back(std::move(f));
        }
    }
    return rows;
}

std::vector<FeatureVector> point_masses(std::size_t per_class) {
    std::vector<FeatureVector> rows;
    for (int c = 0; c < 4; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) rows.push_back(at(10.0 * c, -3.0 * c, "c" + std::to_string(c)));
    }
    return rows;
}

}  // namespace

TEST_CASE("features of a flatline") {
    TimeSeries flat{10.0, 0.0, std::vector<double>(601, 0.4)};
    const auto f = extract_features(flat);
    CHECK(f.values[0] == Approx(0.0));
    CHECK(f.values[1] == Approx(0.0));
    CHECK(f.values[2] == 0.0);
    CHECK(f.values[6] == 0.0);
    CHECK(f.values[7] == 1.0);
    CHECK(f.values[8] == 0.0);
}

TEST_CASE("features reject short or slow series") {
    TimeSeries shortie{10.0, 0.0, std::vector<double>(200, 1.0)};
    CHECK_THROWS_AS(extract_features(shortie), ValidationError);
    TimeSeries slow{2.0, 0.0, std::vector<double>(200, 1.0)};
    CHECK_THROWS_AS(extract_features(slow), ValidationError);
}

TEST_CASE("eupnea dominant frequency") {
    sim::BreathingConfig cfg;
    cfg.label = sim::BreathingClass::eupnea;
    cfg.rate_bpm = 15.0;
    cfg.noise.awgn_snr_db = 30.0;
    const auto f = extract_features(sim::simulate_breathing(cfg).series);
    CHECK(std::abs(f.values[2] - 0.25) <= 0.02);
    CHECK(f.values[3] > 0.5);
    CHECK(f.values[5] > 0.0);
}

TEST_CASE("kussmaul swings are much larger than hypopnea swings") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        sim::BreathingConfig k;
        k.label = sim::BreathingClass::kussmaul;
        k.seed = seed;
        sim::BreathingConfig h = k;
        h.label = sim::BreathingClass::hypopnea;
        const double pk = extract_features(sim::simulate_breathing(k).series).values[6];
        const double ph = extract_features(sim::simulate_breathing(h).series).values[6];
        CHECK(pk > 3.0 * ph);
    }
}

TEST_CASE("confusion matrix") {
    ConfusionMatrix cm{{"a", "b"}, {{3, 1}, {0, 4}}};
    CHECK(cm.total() == 8);
    CHECK(cm.correct() == 7);
    CHECK(cm.accuracy() == 7.0 / 8.0);
    CHECK(cm.to_table().find("a") != std::string::npos);
}

TEST_CASE("standardizer") {
    std::vector<FeatureVector> rows{at(1.0, 5.0, "x"), at(2.0, 5.0, "x"), at(3.0, 5.0, "y")};
    const auto s = Standardizer::fit(rows);
    CHECK(s.mean()[0] == Approx(2.0));
    CHECK(s.stddev()[0] == Approx(std::sqrt(2.0 / 3.0)));
    const auto z = s.apply(rows[2].values);
    CHECK(z[0] == Approx(std::sqrt(1.5)));
    CHECK(z[1] == 0.0);
    CHECK(z[5] == 0.0);
}

TEST_CASE("standardizer ignores anything outside the training set") {
    auto data = point_masses(5);
    std::vector<FeatureVector> train(data.begin(), data.begin() + 15);
    const auto before = Standardizer::fit(train);
    data[19].values[0] = 1e9;
    std::vector<FeatureVector> train_again(data.begin(), data.begin() + 15);
    const auto after = Standardizer::fit(train_again);
    CHECK(before.mean() == after.mean());
    CHECK(before.stddev() == after.stddev());
}

TEST_CASE("knn basics") {
    std::vector<FeatureVector> train{at(0.0, 0.0, "a"), at(1.0, 0.0, "b"), at(0.0, 1.0, "c")};
    CHECK(knn_fit_predict(train, at(1.0, 0.0, ""), 1).label == "b");
    const auto clamped = knn_fit_predict(train, at(0.2, 0.1, ""), 10);
    CHECK(clamped.k_clamped);
    CHECK_THROWS_AS(knn_fit_predict(train, at(0.0, 0.0, ""), 0), ValidationError);
}

TEST_CASE("knn separates distant clusters") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 0.1);
    std::vector<FeatureVector> train;
    for (int i = 0; i < 20; ++i) {
        train.push_back(at(-5.0 + g(rng), g(rng), "left"));
        train.push_back(at(5.0 + g(rng), g(rng), "right"));
    }
    for (std::size_t k = 1; k <= 20; ++k) {
        for (int i = 0; i < 10; ++i) {
            CHECK(knn_fit_predict(train, at(-5.0 + g(rng), g(rng), ""), k).label == "left");
            CHECK(knn_fit_predict(train, at(5.0 + g(rng), g(rng), ""), k).label == "right");
        }
    }
}

TEST_CASE("two-way vote ties go to the closer class") {
    std::vector<FeatureVector> train{at(0.0, 0.0, "far"), at(3.0, 0.0, "near"), at(10.0, 0.0, "x"), at(-10.0, 0.0, "y")};
    CHECK(knn_fit_predict(train, at(2.0, 0.0, ""), 2).label == "near");
    // Equal mean distance falls back to the label order.
    std::vector<FeatureVector> sym{at(-1.0, 0.0, "zeta"), at(1.0, 0.0, "alpha"), at(9.0, 0.0, "x"), at(-9.0, 0.0, "y")};
    CHECK(knn_fit_predict(sym, at(0.0, 0.0, ""), 2).label == "alpha");
}

TEST_CASE("knn is invariant to training order") {
    auto train = breathing_rows(6, 40);
    const auto queries = breathing_rows(2, 900);
    std::vector<std::string> expected;
    for (const auto& q : queries) expected.push_back(knn_fit_predict(train, q, 5).label);
    std::mt19937_64 rng(3);
    for (int round = 0; round < 5; ++round) {
        std::shuffle(train.begin(), train.end(), rng);
        for (std::size_t i = 0; i < queries.size(); ++i) CHECK(knn_fit_predict(train, queries[i], 5).label == expected[i]);
    }
}

TEST_CASE("cross-validation on point masses is perfect") {
    const auto data = point_masses(10);
    const auto cv = crossval_stratified(data, 5, 3, 1);
    CHECK(cv.accuracy == 1.0);
    CHECK(loocv(data, 3).accuracy == 1.0);
}

TEST_CASE("duplicate points with different labels defeat 1-nn") {
    std::vector<FeatureVector> data{at(1.0, 1.0, "a"), at(1.0, 1.0, "b")};
    CHECK(loocv(data, 1).accuracy == 0.0);
}

TEST_CASE("accuracy equals trace over total") {
    const auto data = breathing_rows(10, 5);
    const auto cv = crossval_stratified(data, 5, 5, 2);
    CHECK(cv.accuracy == static_cast<double>(cv.confusion.correct()) / static_cast<double>(cv.confusion.total()));
    CHECK(cv.confusion.total() == data.size());
    CHECK(cv.fold_accuracies.size() == 5);
}

TEST_CASE("cross-validation is deterministic") {
    const auto data = breathing_rows(10, 6);
    const auto a = crossval_stratified(data, 5, 5, 42);
    const auto b = crossval_stratified(data, 5, 5, 42);
    CHECK(a.confusion.counts == b.confusion.counts);
    CHECK(a.fold_accuracies == b.fold_accuracies);
}

TEST_CASE("cross-validation argument checks") {
    const auto data = point_masses(3);
    CHECK_THROWS_AS(crossval_stratified(data, 1, 3, 0), ValidationError);
    CHECK_THROWS_AS(crossval_stratified(data, 4, 3, 0), ValidationError);
}

TEST_CASE("breathing classes are separable and permuted labels are not") {
    const auto data = breathing_rows(50, 77);
    const auto cv = crossval_stratified(data, 10, 5, 8);
    CHECK(cv.accuracy >= 0.90);
    const auto lo = loocv(data, 5);
    CHECK(std::abs(lo.accuracy - cv.accuracy) <= 0.05);

    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto shuffled = data;
        std::vector<std::string> labels;
        for (const auto& r : shuffled) labels.push_back(*r.label);
        std::mt19937_64 rng(seed);
        std::shuffle(labels.begin(), labels.end(), rng);
        for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].label = labels[i];
        total += crossval_stratified(shuffled, 10, 5, seed).accuracy;
    }
    CHECK(std::abs(total / 5.0 - 0.125) <= 0.05);
}
