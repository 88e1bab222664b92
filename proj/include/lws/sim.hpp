#ifndef LWS_SIM_HPP
#define LWS_SIM_HPP

// Forward simulator for photodetector time series. Every generator is a
// pure function of its config; the seed inside the config selects the
// random streams and identical configs give bit-identical output.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lws/optics.hpp"
#include "lws/time_series.hpp"

namespace lws::sim {

// Independent random streams derived from one run seed.
enum class Stream : std::uint64_t { parameters = 0, noise = 1, waveform = 2 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream);

struct NoiseConfig {
    double ambient_dc_v = 0.0;
    // Additive white Gaussian noise relative to the clean signal's variance;
    // nullopt means no random noise.
    std::optional<double> awgn_snr_db;

    void validate() const;
};

// Adds the ambient offset, then zero-mean Gaussian noise with variance
// var(clean) / 10^(snr/10). No-op copy when there is nothing to add.
TimeSeries apply_noise(const TimeSeries& clean, const NoiseConfig& noise, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Vehicles

inline constexpr double kVehicleSampleRateHz = 100.0;

// Vehicle approaching a roadside sensor at constant speed. Range to the
// sensor plane is R0 - V t, link distance sqrt(R^2 + d^2).
struct StraightPassConfig {
    double speed_mps = 20.0;
    double initial_range_m = 100.0;
    double lateral_offset_m = 5.0;
    optics::ChannelParams channel;
    optics::Photodetector detector;
    double duration_s = 2.5;
    double sample_rate_hz = kVehicleSampleRateHz;
    NoiseConfig noise;
    std::uint64_t seed = 0;

    void validate() const;
};

// Vehicle on a curve of radius r; the subtended angle follows beta0 - omega t.
struct CurvedPassConfig {
    double angular_speed_rad_s = 0.05;
    double initial_beta_rad = 1.0;
    double radius_m = 100.0;
    optics::ChannelParams channel;
    optics::Photodetector detector;
    double duration_s = 10.0;
    double sample_rate_hz = kVehicleSampleRateHz;
    NoiseConfig noise;
    std::uint64_t seed = 0;

    void validate() const;
    double linear_speed_mps() const noexcept { return angular_speed_rad_s * radius_m; }
};

// Number of samples covering [0, duration] inclusive of both ends.
std::size_t sample_count(double duration_s, double sample_rate_hz);

TimeSeries simulate_straight_pass(const StraightPassConfig& cfg);
TimeSeries simulate_curved_pass(const CurvedPassConfig& cfg);

// ---------------------------------------------------------------------------
// Breathing

enum class BreathingClass { eupnea, apnea, tachypnea, bradypnea, hyperpnea, hypopnea, kussmaul, faulty };
enum class FaultMode { flatline, clipped, noise };

inline constexpr std::array<BreathingClass, 8> kBreathingClasses = {
    BreathingClass::eupnea,    BreathingClass::apnea,    BreathingClass::tachypnea, BreathingClass::bradypnea,
    BreathingClass::hyperpnea, BreathingClass::hypopnea, BreathingClass::kussmaul,  BreathingClass::faulty};

std::string_view to_string(BreathingClass c);
std::string_view to_string(FaultMode m);
std::optional<BreathingClass> parse_breathing_class(std::string_view name);
std::optional<FaultMode> parse_fault_mode(std::string_view name);

// Allowed rate (breaths/min) and relative depth per class. Faulty has none.
struct ClassRange {
    double rate_lo_bpm;
    double rate_hi_bpm;
    double depth_lo;
    double depth_hi;
};
std::optional<ClassRange> class_range(BreathingClass c);

inline constexpr double kChestExcursionM = 0.005;     // chest travel at depth 1
inline constexpr double kMinApneaPauseS = 10.0;
inline constexpr double kMaxApneaPauseS = 15.0;
inline constexpr double kMinApneaDurationS = 40.0;
inline constexpr double kBreathingSampleRateHz = 10.0;

struct BreathingConfig {
    BreathingClass label = BreathingClass::eupnea;
    std::optional<double> rate_bpm;  // sampled from the class range when absent
    std::optional<double> depth;     // likewise
    std::optional<FaultMode> fault_mode;
    double baseline_distance_m = 0.5;
    optics::ChannelParams channel;
    optics::Photodetector detector;
    double duration_s = 60.0;
    double sample_rate_hz = kBreathingSampleRateHz;
    NoiseConfig noise;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BreathingRun {
    TimeSeries series;
    std::vector<double> displacement_m;  // chest excursion toward the sensor
    BreathingClass label = BreathingClass::eupnea;
    double rate_bpm = 0.0;
    double depth = 0.0;
    std::optional<FaultMode> fault_mode;
};

BreathingRun simulate_breathing(const BreathingConfig& cfg);

// ---------------------------------------------------------------------------
// Occupancy

struct OccupancyConfig {
    int occupant_count = 0;
    double crossing_prob_per_slot = 0.3;
    double blockage_attenuation = 0.1;  // power factor per blocking person
    double slot_duration_s = 1.0;
    std::size_t n_slots = 500;
    double baseline_power_w = 1e-6;
    optics::Photodetector detector;
    NoiseConfig noise;
    std::uint64_t seed = 0;

    void validate() const;
};

struct OccupancyRun {
    TimeSeries series;     // one sample per slot
    std::vector<int> blockers;
};

OccupancyRun simulate_occupancy(const OccupancyConfig& cfg);

// ---------------------------------------------------------------------------
// Structural displacement (bridge deck oscillating about a reference range)

struct DisplacementConfig {
    double reference_distance_m = 2.0;
    double amplitude_m = 0.005;
    double frequency_hz = 1.0;
    optics::ChannelParams channel;
    optics::Photodetector detector;
    double duration_s = 10.0;
    double sample_rate_hz = 100.0;
    NoiseConfig noise;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DisplacementRun {
    TimeSeries series;
    std::vector<double> displacement_m;  // D(t) - reference
};

DisplacementRun simulate_displacement(const DisplacementConfig& cfg);

}  // namespace lws::sim

#endif  // LWS_SIM_HPP
