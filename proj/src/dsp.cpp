#include "lws/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lws/errors.hpp"

namespace lws::dsp {

namespace {

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

double hamming(std::size_t m, std::size_t n_taps) {
    if (n_taps == 1) return 1.0;
    return 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) /
                                  static_cast<double>(n_taps - 1));
}

void check_taps(std::size_t n_taps) {
    if (n_taps == 0 || n_taps % 2 == 0) throw ValidationError("n_taps", "must be odd and positive");
}

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("y", "x and y lengths differ");
    if (x.size() < 2) throw ValidationError("x", "a line fit needs at least two points");
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
        throw EstimationError("rank_deficient", "all abscissae coincide; the line is undetermined");
    }

    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }

    LineFit fit;
    fit.n = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.residual_rms = std::sqrt(ss_res / static_cast<double>(x.size()));
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::vector<std::complex<double>>& data) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n)) throw ValidationError("fft_length", "must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::size_t half = len / 2;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                // Twiddles from the angle directly; a running product drifts at n = 1024.
                const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
                const std::complex<double> u = data[start + k];
                const std::complex<double> v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
    }
}

Spectrum fft_magnitude(std::span<const double> x, double sample_rate_hz,
                       std::optional<std::size_t> zero_pad_to) {
    if (x.size() < 2) throw ValidationError("values_v", "spectrum needs at least two samples");
    if (!(sample_rate_hz > 0.0)) throw ValidationError("sample_rate_hz", "must be positive");
    const std::size_t n = zero_pad_to.value_or(next_power_of_two(x.size()));
    if (n < x.size() || !is_power_of_two(n)) {
        throw ValidationError("zero_pad_to", "must be a power of two no shorter than the signal");
    }

    const double mean = mean_of(x);
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i] - mean;
    fft_inplace(buf);

    Spectrum s;
    s.fft_length = n;
    s.freq_resolution_hz = sample_rate_hz / static_cast<double>(n);
    s.magnitudes.resize(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) s.magnitudes[k] = std::abs(buf[k]);
    return s;
}

Spectrum fft_magnitude(const TimeSeries& x, std::optional<std::size_t> zero_pad_to) {
    return fft_magnitude(x.values_v, x.sample_rate_hz, zero_pad_to);
}

double spectral_energy(const Spectrum& s) {
    const std::size_t n = s.fft_length;
    if (n < 2 || s.magnitudes.size() != n / 2 + 1) {
        throw ValidationError("magnitudes", "spectrum shape does not match its fft_length");
    }
    double sum = s.magnitudes.front() * s.magnitudes.front() + s.magnitudes.back() * s.magnitudes.back();
    for (std::size_t k = 1; k + 1 < s.magnitudes.size(); ++k) sum += 2.0 * s.magnitudes[k] * s.magnitudes[k];
    return sum / static_cast<double>(n);
}

double spectral_flatness(const Spectrum& s, double band_low_hz, double band_high_hz) {
    double log_sum = 0.0;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        const double f = s.frequency_at(k);
        if (f < band_low_hz || f > band_high_hz) continue;
        const double p = s.magnitudes[k] * s.magnitudes[k];
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
        sum += p;
        ++count;
    }
    if (count == 0) throw ValidationError("band", "band does not intersect the spectrum support");
    const double n = static_cast<double>(count);
    return std::exp(log_sum / n) / (sum / n);
}

SpectralPeak spectral_peak(const Spectrum& s, double band_low_hz, double band_high_hz, double guard_factor,
                           double max_flatness) {
    if (!(band_low_hz < band_high_hz)) throw ValidationError("band", "low edge must be below high edge");

    std::vector<double> in_band;
    SpectralPeak peak;
    bool found = false;
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        const double f = s.frequency_at(k);
        if (f < band_low_hz || f > band_high_hz) continue;
        in_band.push_back(s.magnitudes[k]);
        if (!found || s.magnitudes[k] > peak.magnitude) {
            peak = {f, s.magnitudes[k]};
            found = true;
        }
    }
    if (!found) throw ValidationError("band", "band does not intersect the spectrum support");

    auto mid = in_band.begin() + static_cast<std::ptrdiff_t>(in_band.size() / 2);
    std::nth_element(in_band.begin(), mid, in_band.end());
    double median = *mid;
    if (in_band.size() % 2 == 0) {
        const double lower = *std::max_element(in_band.begin(), mid);
        median = 0.5 * (median + lower);
    }

    if (!(peak.magnitude > 0.0) || peak.magnitude < guard_factor * median) {
        throw NoSpectralPeak("no spectral peak in [" + std::to_string(band_low_hz) + ", " +
                             std::to_string(band_high_hz) + "] Hz stands out from the band median");
    }
    if (spectral_flatness(s, band_low_hz, band_high_hz) > max_flatness) {
        throw NoSpectralPeak("spectrum in [" + std::to_string(band_low_hz) + ", " + std::to_string(band_high_hz) +
                             "] Hz is noise-like");
    }
    return peak;
}

// ---------------------------------------------------------------------------

std::vector<double> design_bandpass(double low_hz, double high_hz, double sample_rate_hz, std::size_t n_taps) {
    check_taps(n_taps);
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate_hz / 2.0)) {
        throw ValidationError("band", "need 0 < low < high < sample_rate/2");
    }
    const double fl = low_hz / sample_rate_hz;
    const double fh = high_hz / sample_rate_hz;
    const double centre = static_cast<double>(n_taps - 1) / 2.0;

    std::vector<double> taps(n_taps);
    for (std::size_t m = 0; m < n_taps; ++m) {
        const double k = static_cast<double>(m) - centre;
        taps[m] = hamming(m, n_taps) * (2.0 * fh * sinc(2.0 * fh * k) - 2.0 * fl * sinc(2.0 * fl * k));
    }
    const double gain = fir_gain(taps, 0.5 * (low_hz + high_hz), sample_rate_hz);
    for (double& t : taps) t /= gain;
    return taps;
}

std::vector<double> design_lowpass(double cutoff_hz, double sample_rate_hz, std::size_t n_taps) {
    check_taps(n_taps);
    if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0)) {
        throw ValidationError("cutoff_hz", "need 0 < cutoff < sample_rate/2");
    }
    const double fc = cutoff_hz / sample_rate_hz;
    const double centre = static_cast<double>(n_taps - 1) / 2.0;
    std::vector<double> taps(n_taps);
    for (std::size_t m = 0; m < n_taps; ++m) {
        taps[m] = hamming(m, n_taps) * 2.0 * fc * sinc(2.0 * fc * (static_cast<double>(m) - centre));
    }
    const double dc = std::accumulate(taps.begin(), taps.end(), 0.0);
    for (double& t : taps) t /= dc;
    return taps;
}

double fir_gain(std::span<const double> taps, double freq_hz, double sample_rate_hz) {
    std::complex<double> h{0.0, 0.0};
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    for (std::size_t m = 0; m < taps.size(); ++m) {
        h += taps[m] * std::polar(1.0, -w * static_cast<double>(m));
    }
    return std::abs(h);
}

std::vector<double> apply_fir_centered(std::span<const double> x, std::span<const double> taps) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto n_taps = static_cast<std::ptrdiff_t>(taps.size());
    const std::ptrdiff_t delay = (n_taps - 1) / 2;
    std::vector<double> y(x.size(), 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const std::ptrdiff_t m_lo = std::max<std::ptrdiff_t>(0, i + delay - (n - 1));
        const std::ptrdiff_t m_hi = std::min<std::ptrdiff_t>(n_taps - 1, i + delay);
        for (std::ptrdiff_t m = m_lo; m <= m_hi; ++m) acc += taps[m] * x[i + delay - m];
        y[i] = acc;
    }
    return y;
}

TimeSeries bandpass_fir(const TimeSeries& x, double low_hz, double high_hz, std::size_t n_taps) {
    x.validate();
    const auto taps = design_bandpass(low_hz, high_hz, x.sample_rate_hz, n_taps);
    if (x.size() <= n_taps) throw ValidationError("values_v", "series must be longer than the filter");
    return {x.sample_rate_hz, x.start_time_s, apply_fir_centered(x.values_v, taps)};
}

TimeSeries lowpass_fir(const TimeSeries& x, double cutoff_hz, std::size_t n_taps) {
    x.validate();
    const auto taps = design_lowpass(cutoff_hz, x.sample_rate_hz, n_taps);
    if (x.size() <= n_taps) throw ValidationError("values_v", "series must be longer than the filter");
    return {x.sample_rate_hz, x.start_time_s, apply_fir_centered(x.values_v, taps)};
}

// ---------------------------------------------------------------------------

std::vector<double> detrend_linear(std::span<const double> x) {
    if (x.size() < 2) throw ValidationError("values_v", "detrending needs at least two samples");
    std::vector<double> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0.0);
    const LineFit fit = fit_line(idx, x);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - (fit.intercept + fit.slope * idx[i]);
    return out;
}

TimeSeries detrend_linear(const TimeSeries& x) {
    return {x.sample_rate_hz, x.start_time_s, detrend_linear(std::span<const double>(x.values_v))};
}

ZScore zscore(std::span<const double> x) {
    if (x.size() < 2) throw ValidationError("values", "z-score needs at least two values");
    ZScore z;
    z.mean = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - z.mean) * (v - z.mean);
    z.stddev = std::sqrt(ss / static_cast<double>(x.size()));

    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    const bool all_equal = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
    z.degenerate = all_equal || z.stddev <= 1e-14 * scale;
    z.values.assign(x.size(), 0.0);
    if (z.degenerate) return z;
    for (std::size_t i = 0; i < x.size(); ++i) z.values[i] = (x[i] - z.mean) / z.stddev;
    return z;
}

// ---------------------------------------------------------------------------

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
    if (bins == 0) throw ValidationError("bin_count", "must be at least 1");
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ValidationError("bin_edges", "range must be finite with lo < hi");
    }
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    edges.back() = hi;
    return edges;
}

std::size_t bin_index(std::span<const double> edges, double value) {
    const std::size_t bins = edges.size() - 1;
    if (value < edges.front()) return 0;
    if (value >= edges.back()) return bins - 1;
    const auto it = std::upper_bound(edges.begin(), edges.end(), value);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

EmpiricalDistribution empirical_distribution(std::span<const double> x, std::span<const double> bin_edges,
                                             double smoothing_eps) {
    if (bin_edges.size() < 2) throw ValidationError("bin_edges", "need at least two edges");
    for (std::size_t i = 1; i < bin_edges.size(); ++i) {
        if (!(bin_edges[i] > bin_edges[i - 1])) throw ValidationError("bin_edges", "must be strictly increasing");
    }
    if (x.empty()) throw ValidationError("values", "distribution needs at least one sample");
    if (!(smoothing_eps >= 0.0)) throw ValidationError("smoothing_eps", "must be non-negative");

    EmpiricalDistribution d;
    d.bin_edges.assign(bin_edges.begin(), bin_edges.end());
    const std::size_t bins = bin_edges.size() - 1;
    std::vector<double> counts(bins, 0.0);
    for (double v : x) counts[bin_index(bin_edges, v)] += 1.0;

    const double denom = static_cast<double>(x.size()) + static_cast<double>(bins) * smoothing_eps;
    d.pdf.resize(bins);
    d.cdf.resize(bins);
    double running = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        d.pdf[i] = (counts[i] + smoothing_eps) / denom;
        running += d.pdf[i];
        d.cdf[i] = running;
    }
    return d;
}

double kl_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
    if (p.bin_edges != q.bin_edges || p.pdf.size() != q.pdf.size()) {
        throw ValidationError("bin_edges", "distributions must share identical binning");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.pdf.size(); ++i) {
        if (p.pdf[i] <= 0.0) continue;
        if (!(q.pdf[i] > 0.0)) {
            throw ValidationError("pdf", "reference distribution has an empty bin; smooth it first");
        }
        kl += p.pdf[i] * std::log(p.pdf[i] / q.pdf[i]);
    }
    return kl;
}

}  // namespace lws::dsp
