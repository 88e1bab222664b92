#ifndef LWS_MLKIT_HPP
#define LWS_MLKIT_HPP

// Breathing-pattern features, k-nearest-neighbour classification and
// cross-validation. Labels are plain strings so the same machinery serves
// any classification task.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lws/time_series.hpp"

namespace lws::ml {

inline constexpr std::size_t kFeatureCount = 9;

// Column order of every feature vector and of the features CSV (f1..f9).
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "rms",                  // of the detrended signal
    "variance",             // of the raw signal
    "dominant_freq_hz",     // 0 when no spectral peak stands out
    "peak_power_fraction",  // share of AC power within +-2 bins of the dominant bin
    "low_band_fraction",    // share of AC power below 0.1 Hz
    "zero_crossing_rate",   // detrended sign changes per second
    "peak_to_peak",
    "flat_fraction",        // samples with |slope| < 1e-4 * p2p per second
    "interpeak_cv",         // coefficient of variation of breath intervals
};

inline constexpr double kMinFeatureDurationS = 30.0;
inline constexpr double kMinFeatureSampleRateHz = 5.0;

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::optional<std::string> label;
    std::string source_id;
};

FeatureVector extract_features(const TimeSeries& ts);

struct ConfusionMatrix {
    std::vector<std::string> labels;                // rows = truth, columns = prediction
    std::vector<std::vector<std::size_t>> counts;

    std::size_t total() const;
    std::size_t correct() const;
    double accuracy() const;
    std::string to_table() const;
};

// Per-feature z-score statistics fitted on a training set. Zero-variance
// features map to 0 so they drop out of distances.
class Standardizer {
public:
    static Standardizer fit(std::span<const FeatureVector> train);
    std::array<double, kFeatureCount> apply(const std::array<double, kFeatureCount>& values) const;

    const std::array<double, kFeatureCount>& mean() const noexcept { return mean_; }
    const std::array<double, kFeatureCount>& stddev() const noexcept { return stddev_; }

private:
    std::array<double, kFeatureCount> mean_{};
    std::array<double, kFeatureCount> stddev_{};
};

inline constexpr std::size_t kDefaultNeighbours = 5;

struct KnnPrediction {
    std::string label;
    bool k_clamped = false;  // requested k exceeded the training size
};

// Euclidean KNN on features standardised with training statistics only.
// Vote ties go to the tied class with the smaller mean neighbour distance,
// then to the lexicographically smaller label.
class KnnClassifier {
public:
    KnnClassifier(std::span<const FeatureVector> train, std::size_t k = kDefaultNeighbours);

    KnnPrediction predict(const FeatureVector& query) const;
    const Standardizer& standardizer() const noexcept { return standardizer_; }

private:
    struct Point {
        std::array<double, kFeatureCount> z;
        std::string label;
    };
    Standardizer standardizer_;
    std::vector<Point> points_;
    std::size_t k_;
};

KnnPrediction knn_fit_predict(std::span<const FeatureVector> train, const FeatureVector& query,
                              std::size_t k = kDefaultNeighbours);

struct CrossValidation {
    double accuracy = 0.0;  // pooled: confusion.correct() / confusion.total()
    ConfusionMatrix confusion;
    std::vector<double> fold_accuracies;
};

// Seeded stratified k-fold evaluation; standardisation is refitted on the
// training folds of every split.
CrossValidation crossval_stratified(std::span<const FeatureVector> data, std::size_t k_folds, std::size_t knn_k,
                                    std::uint64_t seed);

CrossValidation loocv(std::span<const FeatureVector> data, std::size_t knn_k);

}  // namespace lws::ml

#endif  // LWS_MLKIT_HPP
