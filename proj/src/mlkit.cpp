#include "lws/mlkit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lws/dsp.hpp"
#include "lws/errors.hpp"

namespace lws::ml {

namespace {

constexpr double kFeatureBandLowHz = 0.05;
constexpr double kFeatureBandHighHz = 1.0;
constexpr double kLowBandHz = 0.1;
constexpr std::size_t kPeakHalfWidthBins = 2;
constexpr double kMinBreathSpacingS = 1.0;

double power_fraction_near_peak(const dsp::Spectrum& s, double total) {
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 1; k < s.magnitudes.size(); ++k) {
        const double f = s.frequency_at(k);
        if (f < kFeatureBandLowHz || f > kFeatureBandHighHz) continue;
        if (s.magnitudes[k] > best_mag) {
            best_mag = s.magnitudes[k];
            best = k;
        }
    }
    if (best == 0 || !(total > 0.0)) return 0.0;
    const std::size_t lo = best > kPeakHalfWidthBins ? best - kPeakHalfWidthBins : 1;
    const std::size_t hi = std::min(best + kPeakHalfWidthBins, s.magnitudes.size() - 1);
    double sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) sum += s.magnitudes[k] * s.magnitudes[k];
    return sum / total;
}

double interpeak_cv(std::span<const double> x, double sample_rate_hz) {
    const double top = *std::max_element(x.begin(), x.end());
    if (!(top > 0.0)) return 0.0;
    const auto min_gap = static_cast<std::size_t>(std::ceil(kMinBreathSpacingS * sample_rate_hz));

    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (!(x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > 0.5 * top)) continue;
        if (!peaks.empty() && i - peaks.back() < min_gap) {
            if (x[i] > x[peaks.back()]) peaks.back() = i;
            continue;
        }
        peaks.push_back(i);
    }
    if (peaks.size() < 3) return 0.0;

    std::vector<double> intervals;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        intervals.push_back(static_cast<double>(peaks[i] - peaks[i - 1]) / sample_rate_hz);
    }
    const double mean = std::accumulate(intervals.begin(), intervals.end(), 0.0) / static_cast<double>(intervals.size());
    double var = 0.0;
    for (double v : intervals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(intervals.size());
    return std::sqrt(var) / mean;
}

// Order-independent sum, so statistics do not depend on training-set order.
double sorted_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0);
}

std::vector<std::string> sorted_labels(std::span<const FeatureVector> data) {
    std::set<std::string> labels;
    for (const auto& fv : data) {
        if (!fv.label) throw ValidationError("label", "every sample needs a label (source " + fv.source_id + ")");
        labels.insert(*fv.label);
    }
    return {labels.begin(), labels.end()};
}

ConfusionMatrix empty_matrix(std::vector<std::string> labels) {
    ConfusionMatrix cm;
    cm.counts.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
    cm.labels = std::move(labels);
    return cm;
}

std::size_t label_index(const std::vector<std::string>& labels, const std::string& label) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());
}

}  // namespace

FeatureVector extract_features(const TimeSeries& ts) {
    ts.validate();
    if (ts.sample_rate_hz < kMinFeatureSampleRateHz) {
        throw ValidationError("sample_rate_hz", "feature extraction needs at least 5 Hz");
    }
    if (ts.duration_s() + 1e-9 < kMinFeatureDurationS) {
        throw ValidationError("duration_s", "feature extraction needs at least 30 s");
    }

    const auto& raw = ts.values_v;
    const double n = static_cast<double>(raw.size());
    const std::vector<double> x = dsp::detrend_linear(std::span<const double>(raw));

    FeatureVector fv;
    auto& f = fv.values;

    double ss = 0.0;
    for (double v : x) ss += v * v;
    f[0] = std::sqrt(ss / n);

    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
    double var = 0.0;
    for (double v : raw) var += (v - mean) * (v - mean);
    f[1] = var / n;

    const double nyquist_guard = 0.999 * ts.sample_rate_hz / 2.0;
    const double band_high = std::min(kFeatureBandHighHz, nyquist_guard);
    const dsp::Spectrum fine =
        dsp::fft_magnitude(x, ts.sample_rate_hz, 4 * dsp::next_power_of_two(x.size()));
    try {
        f[2] = dsp::spectral_peak(fine, kFeatureBandLowHz, band_high).frequency_hz;
    } catch (const NoSpectralPeak&) {
        f[2] = 0.0;
    }

    const dsp::Spectrum coarse = dsp::fft_magnitude(x, ts.sample_rate_hz);
    double total = 0.0;
    double low = 0.0;
    for (std::size_t k = 1; k < coarse.magnitudes.size(); ++k) {
        const double p = coarse.magnitudes[k] * coarse.magnitudes[k];
        total += p;
        if (coarse.frequency_at(k) < kLowBandHz) low += p;
    }
    f[3] = power_fraction_near_peak(coarse, total);
    f[4] = total > 0.0 ? low / total : 0.0;

    std::size_t crossings = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if ((x[i - 1] < 0.0) != (x[i] < 0.0)) ++crossings;
    }
    f[5] = static_cast<double>(crossings) / ts.duration_s();

    const auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
    const double p2p = *mx - *mn;
    f[6] = p2p;

    if (p2p > 0.0) {
        const double threshold = 1e-4 * p2p;
        std::size_t flat = 0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const std::size_t a = i == 0 ? 0 : i - 1;
            const std::size_t b = std::min(i + 1, raw.size() - 1);
            const double slope = (raw[b] - raw[a]) * ts.sample_rate_hz / static_cast<double>(b - a);
            if (std::abs(slope) < threshold) ++flat;
        }
        f[7] = static_cast<double>(flat) / n;
    } else {
        f[7] = 1.0;
    }

    f[8] = interpeak_cv(x, ts.sample_rate_hz);
    return fv;
}

// ---------------------------------------------------------------------------

std::size_t ConfusionMatrix::total() const {
    std::size_t sum = 0;
    for (const auto& row : counts) sum += std::accumulate(row.begin(), row.end(), std::size_t{0});
    return sum;
}

std::size_t ConfusionMatrix::correct() const {
    std::size_t sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) sum += counts[i][i];
    return sum;
}

double ConfusionMatrix::accuracy() const {
    const std::size_t t = total();
    return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

std::string ConfusionMatrix::to_table() const {
    std::size_t width = 5;
    for (const auto& l : labels) width = std::max(width, l.size());
    for (const auto& row : counts) {
        for (auto c : row) width = std::max(width, std::to_string(c).size());
    }
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "truth";
    for (const auto& l : labels) out << ' ' << std::right << std::setw(static_cast<int>(width)) << l;
    out << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << std::left << std::setw(static_cast<int>(width)) << labels[i];
        for (auto c : counts[i]) out << ' ' << std::right << std::setw(static_cast<int>(width)) << c;
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(std::span<const FeatureVector> train) {
    if (train.empty()) throw ValidationError("train", "cannot standardise an empty training set");
    Standardizer s;
    const double n = static_cast<double>(train.size());
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        std::vector<double> col;
        col.reserve(train.size());
        for (const auto& fv : train) col.push_back(fv.values[j]);
        const double mean = sorted_sum(col) / n;
        std::vector<double> sq;
        sq.reserve(col.size());
        for (double v : col) sq.push_back((v - mean) * (v - mean));
        s.mean_[j] = mean;
        s.stddev_[j] = std::sqrt(sorted_sum(std::move(sq)) / n);
        const double scale = std::abs(mean);
        if (s.stddev_[j] <= 1e-14 * scale) s.stddev_[j] = 0.0;
    }
    return s;
}

std::array<double, kFeatureCount> Standardizer::apply(const std::array<double, kFeatureCount>& values) const {
    std::array<double, kFeatureCount> z{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        z[j] = stddev_[j] > 0.0 ? (values[j] - mean_[j]) / stddev_[j] : 0.0;
    }
    return z;
}

KnnClassifier::KnnClassifier(std::span<const FeatureVector> train, std::size_t k)
    : standardizer_(Standardizer::fit(train)), k_(k) {
    if (k == 0) throw ValidationError("k", "must be at least 1");
    points_.reserve(train.size());
    for (const auto& fv : train) {
        if (!fv.label) throw ValidationError("label", "training sample " + fv.source_id + " has no label");
        points_.push_back({standardizer_.apply(fv.values), *fv.label});
    }
}

KnnPrediction KnnClassifier::predict(const FeatureVector& query) const {
    const auto z = standardizer_.apply(query.values);

    struct Neighbour {
        double distance;
        const Point* point;
    };
    std::vector<Neighbour> all;
    all.reserve(points_.size());
    for (const auto& p : points_) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < kFeatureCount; ++j) d2 += (p.z[j] - z[j]) * (p.z[j] - z[j]);
        all.push_back({std::sqrt(d2), &p});
    }
    // Total order on (distance, label, coordinates).
    const auto before = [](const Neighbour& a, const Neighbour& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.point->label != b.point->label) return a.point->label < b.point->label;
        return a.point->z < b.point->z;
    };

    KnnPrediction out;
    std::size_t k = k_;
    if (k > all.size()) {
        k = all.size();
        out.k_clamped = true;
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), before);

    std::map<std::string, std::pair<std::size_t, double>> votes;  // label -> (count, distance sum)
    for (std::size_t i = 0; i < k; ++i) {
        auto& v = votes[all[i].point->label];
        v.first += 1;
        v.second += all[i].distance;
    }
    const std::pair<std::size_t, double>* best = nullptr;
    for (const auto& [label, v] : votes) {
        const bool better = best == nullptr || v.first > best->first ||
                            (v.first == best->first && v.second / static_cast<double>(v.first) <
                                                           best->second / static_cast<double>(best->first));
        if (better) {
            best = &v;
            out.label = label;
        }
    }
    return out;
}

KnnPrediction knn_fit_predict(std::span<const FeatureVector> train, const FeatureVector& query, std::size_t k) {
    return KnnClassifier(train, k).predict(query);
}

// ---------------------------------------------------------------------------

CrossValidation crossval_stratified(std::span<const FeatureVector> data, std::size_t k_folds, std::size_t knn_k,
                                    std::uint64_t seed) {
    if (k_folds < 2) throw ValidationError("k_folds", "need at least two folds");
    const auto labels = sorted_labels(data);

    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < data.size(); ++i) by_label[*data[i].label].push_back(i);
    for (const auto& [label, idx] : by_label) {
        if (idx.size() < k_folds) {
            throw ValidationError("label", "class '" + label + "' has " + std::to_string(idx.size()) +
                                               " members, fewer than " + std::to_string(k_folds) + " folds");
        }
    }

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> fold_of(data.size());
    std::size_t offset = 0;
    for (auto& [label, idx] : by_label) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t pos = 0; pos < idx.size(); ++pos) fold_of[idx[pos]] = (offset + pos) % k_folds;
        offset += idx.size();
    }

    CrossValidation out;
    out.confusion = empty_matrix(labels);
    for (std::size_t fold = 0; fold < k_folds; ++fold) {
        std::vector<FeatureVector> train;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold_of[i] == fold) {
                test.push_back(i);
            } else {
                train.push_back(data[i]);
            }
        }
        const KnnClassifier model(train, knn_k);
        std::size_t hits = 0;
        for (std::size_t i : test) {
            const auto predicted = model.predict(data[i]).label;
            ++out.confusion.counts[label_index(labels, *data[i].label)][label_index(labels, predicted)];
            if (predicted == *data[i].label) ++hits;
        }
        out.fold_accuracies.push_back(static_cast<double>(hits) / static_cast<double>(test.size()));
    }
    out.accuracy = out.confusion.accuracy();
    return out;
}

CrossValidation loocv(std::span<const FeatureVector> data, std::size_t knn_k) {
    if (data.size() < 2) throw ValidationError("data", "leave-one-out needs at least two samples");
    const auto labels = sorted_labels(data);

    CrossValidation out;
    out.confusion = empty_matrix(labels);
    std::vector<FeatureVector> train;
    train.reserve(data.size() - 1);
    for (std::size_t i = 0; i < data.size(); ++i) {
        train.clear();
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (j != i) train.push_back(data[j]);
        }
        const auto predicted = KnnClassifier(train, knn_k).predict(data[i]).label;
        ++out.confusion.counts[label_index(labels, *data[i].label)][label_index(labels, predicted)];
        out.fold_accuracies.push_back(predicted == *data[i].label ? 1.0 : 0.0);
    }
    out.accuracy = out.confusion.accuracy();
    return out;
}

}  // namespace lws::ml
