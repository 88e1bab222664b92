#ifndef LWS_DSP_HPP
#define LWS_DSP_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lws/time_series.hpp"

namespace lws::dsp {

// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    double r_squared = 1.0;
    std::size_t n = 0;
};

// Closed-form fit on centred sums. Throws ValidationError for mismatched or
// too-short inputs and EstimationError("rank_deficient") when all x coincide.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Spectra

// One-sided magnitude spectrum, bins 0..fft_length/2. Magnitudes are the
// unnormalised |X_k| of the (zero-padded) DFT.
struct Spectrum {
    double freq_resolution_hz = 0.0;
    std::size_t fft_length = 0;
    std::vector<double> magnitudes;

    double frequency_at(std::size_t bin) const noexcept {
        return static_cast<double>(bin) * freq_resolution_hz;
    }
};

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

// In-place iterative radix-2 FFT (forward, e^{-i...} convention).
// Size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data);

// Magnitude spectrum of the mean-removed signal, zero padded to
// zero_pad_to (default: next power of two >= length).
Spectrum fft_magnitude(std::span<const double> x, double sample_rate_hz,
                       std::optional<std::size_t> zero_pad_to = std::nullopt);
Spectrum fft_magnitude(const TimeSeries& x, std::optional<std::size_t> zero_pad_to = std::nullopt);

// Time-domain energy implied by a one-sided spectrum (Parseval).
double spectral_energy(const Spectrum& s);

struct SpectralPeak {
    double frequency_hz = 0.0;
    double magnitude = 0.0;
};

inline constexpr double kPeakGuardFactor = 3.0;
inline constexpr double kMaxSpectralFlatness = 0.15;

// Geometric over arithmetic mean of |X|^2 inside the band: near 0 for a
// tonal spectrum, around 0.5 or more for white noise.
double spectral_flatness(const Spectrum& s, double band_low_hz, double band_high_hz);

// Largest bin inside [band_low_hz, band_high_hz]; ties go to the lower
// frequency. Throws NoSpectralPeak unless the peak is positive, at least
// guard_factor times the median in-band magnitude, and the in-band
// flatness does not exceed max_flatness.
SpectralPeak spectral_peak(const Spectrum& s, double band_low_hz, double band_high_hz,
                           double guard_factor = kPeakGuardFactor, double max_flatness = kMaxSpectralFlatness);

// ---------------------------------------------------------------------------
// FIR filtering

inline constexpr std::size_t kDefaultTaps = 255;

// Hamming-windowed sinc designs. Bandpass taps are scaled for unit gain at
// the band centre; lowpass taps for unit gain at DC.
std::vector<double> design_bandpass(double low_hz, double high_hz, double sample_rate_hz,
                                    std::size_t n_taps = kDefaultTaps);
std::vector<double> design_lowpass(double cutoff_hz, double sample_rate_hz,
                                   std::size_t n_taps = kDefaultTaps);

// |H(f)| of a tap set.
double fir_gain(std::span<const double> taps, double freq_hz, double sample_rate_hz);

// Linear-phase convolution with the (n_taps-1)/2 group delay removed, so
// output sample i aligns with input sample i. Samples beyond the ends are
// treated as zero.
std::vector<double> apply_fir_centered(std::span<const double> x, std::span<const double> taps);

TimeSeries bandpass_fir(const TimeSeries& x, double low_hz, double high_hz,
                        std::size_t n_taps = kDefaultTaps);
TimeSeries lowpass_fir(const TimeSeries& x, double cutoff_hz, std::size_t n_taps = kDefaultTaps);

// ---------------------------------------------------------------------------
// Detrending and standardisation

std::vector<double> detrend_linear(std::span<const double> x);
TimeSeries detrend_linear(const TimeSeries& x);

struct ZScore {
    std::vector<double> values;
    double mean = 0.0;
    double stddev = 0.0;  // population
    bool degenerate = false;
};

// Degenerate (zero-variance) input yields all zeros with the flag set.
ZScore zscore(std::span<const double> x);

// ---------------------------------------------------------------------------
// Empirical distributions

inline constexpr double kDefaultSmoothing = 1e-9;

struct EmpiricalDistribution {
    std::vector<double> bin_edges;  // B + 1 strictly increasing
    std::vector<double> pdf;        // B
    std::vector<double> cdf;        // B

    std::size_t bin_count() const noexcept { return pdf.size(); }
};

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

// Index of the bin holding value; out-of-range values clamp to the end bins.
std::size_t bin_index(std::span<const double> edges, double value);

// pdf = (count + eps) / (N + B eps); cdf is the running sum.
EmpiricalDistribution empirical_distribution(std::span<const double> x, std::span<const double> bin_edges,
                                             double smoothing_eps = kDefaultSmoothing);

// sum p ln(p / q) in nats. Throws ValidationError on mismatched edges or
// when q has an empty bin where p has mass.
double kl_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

}  // namespace lws::dsp

#endif  // LWS_DSP_HPP
