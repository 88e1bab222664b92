#ifndef LWS_ESTIMATORS_HPP
#define LWS_ESTIMATORS_HPP

// Inverse problems on photodetector series: channel calibration, vehicle
// speed, vital-sign rates, occupancy and structural displacement.
//
// Every estimator reports how many samples it had to discard, so noisy
// inputs degrade visibly instead of silently.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lws/dsp.hpp"
#include "lws/optics.hpp"
#include "lws/time_series.hpp"

namespace lws::est {

// Converts recorded voltages back to optical power: removes a known
// ambient offset, then inverts the detector model.
struct SensorReadout {
    optics::Photodetector detector;
    double ambient_offset_v = 0.0;

    double power(double voltage_v) const;
};

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationResult {
    optics::ChannelParams channel;
    double r_squared = 1.0;
    double residual_rms_db = 0.0;
    std::size_t n_points = 0;
    std::size_t distinct_distances = 0;
    bool low_confidence = false;  // fewer than three distinct distances
};

// Least-squares line through (10 log10 D, 10 log10 P): intercept K_dB,
// slope -gamma. Needs positive powers and at least two distinct distances.
CalibrationResult calibrate_channel(std::span<const double> distances_m, std::span<const double> powers_w,
                                    double lambertian_order);

// ---------------------------------------------------------------------------
// Vehicle speed

struct SpeedSample {
    double t_s = 0.0;  // midpoint of the differenced pair
    double speed_mps = 0.0;
};

struct InstantaneousSpeeds {
    std::vector<SpeedSample> samples;
    std::size_t samples_dropped = 0;
};

// Differenced ranges between consecutive usable samples. Sensitive to noise;
// kept as the baseline the regression estimator is compared against.
InstantaneousSpeeds estimate_speed_instantaneous(const TimeSeries& ts, const optics::ChannelParams& ch,
                                                 double lateral_offset_m, const SensorReadout& readout = {});

struct SpeedEstimate {
    double speed_mps = 0.0;
    double initial_range_m = 0.0;
    double residual_rms = 0.0;  // metres, in the range domain
    std::size_t n_samples_used = 0;
    std::size_t samples_dropped = 0;
    bool receding = false;  // non-positive speed: vehicle moving away or fit failure
};

// Transforms each sample to its along-road range sqrt((P/K)^(-2/gamma) - d^2)
// and fits range = R0 - V t.
SpeedEstimate estimate_speed_ls(const TimeSeries& ts, const optics::ChannelParams& ch, double lateral_offset_m,
                                const SensorReadout& readout = {});

inline constexpr double kBetaMin = 1e-4;
inline constexpr double kBetaTolerance = 1e-10;
inline constexpr double kBetaPowerResidual = 1e-8;

// Root of curved_power(beta) = power on [kBetaMin, pi - kBetaMin] by
// bisection, or nullopt when the power is outside the attainable range.
std::optional<double> solve_beta(const optics::ChannelParams& ch, double radius_m, double power_w);

struct CurvedSpeedEstimate {
    double angular_speed_rad_s = 0.0;
    double initial_beta_rad = 0.0;
    double linear_speed_mps = 0.0;  // angular_speed * radius
    double residual_rms = 0.0;      // radians
    double max_power_residual = 0.0;
    std::size_t n_samples_used = 0;
    std::size_t samples_dropped = 0;
};

CurvedSpeedEstimate estimate_speed_curved(const TimeSeries& ts, const optics::ChannelParams& ch, double radius_m,
                                          const SensorReadout& readout = {});

// ---------------------------------------------------------------------------
// Vital-sign rates

struct Band {
    double low_hz;
    double high_hz;
};

inline constexpr Band kRespirationBand{0.1, 0.5};
inline constexpr Band kHeartBand{0.8, 2.2};
inline constexpr std::size_t kRateZeroPadFactor = 8;

struct RateEstimate {
    double rate_bpm = 0.0;  // 60 * f_max
    double f_max_hz = 0.0;
    double peak_magnitude = 0.0;
    Band band{0.0, 0.0};
};

// detrend -> bandpass -> zero-padded FFT -> spectral peak. Throws
// NoSpectralPeak for flat or aperiodic input.
RateEstimate estimate_rate(const TimeSeries& ts, double band_low_hz, double band_high_hz,
                           std::size_t n_taps = dsp::kDefaultTaps);

// ---------------------------------------------------------------------------
// Occupancy

struct OccupancyDatabase {
    std::vector<double> bin_edges;
    std::map<int, dsp::EmpiricalDistribution> entries;  // keyed by occupant count
    double smoothing_eps = dsp::kDefaultSmoothing;

    void validate() const;
};

struct LabeledRun {
    int occupant_count = 0;
    TimeSeries series;
};

inline constexpr std::size_t kDefaultOccupancyBins = 20;
inline constexpr std::size_t kMinOccupancySlots = 100;

// One smoothed distribution per label over edges spanning the pooled range.
OccupancyDatabase build_occupancy_db(std::span<const LabeledRun> runs, std::size_t bin_count = kDefaultOccupancyBins,
                                     double smoothing_eps = dsp::kDefaultSmoothing);

struct OccupancyEstimate {
    int n_hat = 0;
    std::map<int, double> scores;  // KL(query || entry), nats
    bool low_confidence = false;
};

// Label with the smallest divergence; ties resolve to the smaller count.
OccupancyEstimate estimate_occupancy(const TimeSeries& ts, const OccupancyDatabase& db);

// ---------------------------------------------------------------------------
// Displacement

struct DisplacementEstimate {
    TimeSeries displacement;  // metres; invalid samples hold 0
    std::vector<bool> valid;
    std::size_t invalid_count = 0;
};

DisplacementEstimate estimate_displacement(const TimeSeries& ts, const optics::ChannelParams& ch,
                                           double reference_distance_m, const SensorReadout& readout = {});

// Low-pass cutoff for reading a peak: twice the dominant oscillation
// frequency, raised if needed so that frequency stays clear of the filter's
// transition band. nullopt when the series has no dominant oscillation.
std::optional<double> displacement_smoothing_cutoff(const DisplacementEstimate& est,
                                                    std::size_t n_taps = dsp::kDefaultTaps);

// Largest |displacement| over valid samples. With a cutoff, the series is
// low-pass filtered first and the filter's edge transients are excluded.
double peak_displacement(const DisplacementEstimate& est, std::optional<double> lowpass_cutoff_hz = std::nullopt,
                         std::size_t n_taps = dsp::kDefaultTaps);

}  // namespace lws::est

#endif  // LWS_ESTIMATORS_HPP
