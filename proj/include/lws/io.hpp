#ifndef LWS_IO_HPP
#define LWS_IO_HPP

// File formats exchanged between CLI commands.
//
//   time series CSV    t_s,v_volts
//   calibration CSV    d_m,p_w
//   features CSV       source_id,label,f1,...,f9
//   JSON artifacts     carry "schema_version": "1"; unknown fields are ignored
//
// CSV is LF-terminated and locale independent; numbers are written in
// shortest round-trip form so re-reading reproduces the exact doubles.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lws/dsp.hpp"
#include "lws/estimators.hpp"
#include "lws/mlkit.hpp"
#include "lws/optics.hpp"
#include "lws/sim.hpp"
#include "lws/time_series.hpp"

namespace lws::io {

using json = nlohmann::json;

inline constexpr std::string_view kSchemaVersion = "1";
inline constexpr std::string_view kTimeSeriesHeader = "t_s,v_volts";
inline constexpr std::string_view kCalibrationHeader = "d_m,p_w";

std::string format_double(double v);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
json read_json(const std::filesystem::path& path);
std::string dump_json(const json& j);

// ---------------------------------------------------------------------------
// CSV

std::string time_series_csv(const TimeSeries& ts);
// Sample rate comes from the hint when given (e.g. from run metadata),
// otherwise from the timestamps, which must be uniform.
TimeSeries parse_time_series_csv(std::string_view text, std::optional<double> sample_rate_hint = std::nullopt);

struct CalibrationSamples {
    std::vector<double> distances_m;
    std::vector<double> powers_w;
};
std::string calibration_csv(const CalibrationSamples& samples);
CalibrationSamples parse_calibration_csv(std::string_view text);

std::string features_csv(std::span<const ml::FeatureVector> rows);
std::vector<ml::FeatureVector> parse_features_csv(std::string_view text);

// ---------------------------------------------------------------------------
// JSON

json to_json(const optics::ChannelParams& ch);
optics::ChannelParams channel_from_json(const json& j);

json to_json(const optics::Photodetector& det);
optics::Photodetector detector_from_json(const json& j);

json to_json(const sim::NoiseConfig& noise);
sim::NoiseConfig noise_from_json(const json& j);

json to_json(const dsp::Spectrum& s);
dsp::Spectrum spectrum_from_json(const json& j);

json to_json(const dsp::EmpiricalDistribution& d);
dsp::EmpiricalDistribution distribution_from_json(const json& j);

json to_json(const est::OccupancyDatabase& db);
est::OccupancyDatabase occupancy_db_from_json(const json& j);

json to_json(const ml::ConfusionMatrix& cm);

// Scenario configs, discriminated by "kind".
sim::StraightPassConfig straight_pass_from_json(const json& j);
sim::CurvedPassConfig curved_pass_from_json(const json& j);
sim::BreathingConfig breathing_from_json(const json& j);
sim::OccupancyConfig occupancy_from_json(const json& j);

json to_json(const sim::StraightPassConfig& cfg);
json to_json(const sim::CurvedPassConfig& cfg);
json to_json(const sim::BreathingConfig& cfg);
json to_json(const sim::OccupancyConfig& cfg);

// Sidecar written next to every simulated series.
struct RunMetadata {
    std::string kind;
    double sample_rate_hz = 1.0;
    std::uint64_t seed = 0;
    std::optional<optics::ChannelParams> channel;
    optics::Photodetector detector;
    sim::NoiseConfig noise;
    json ground_truth = json::object();
    json config = json::object();
};

json to_json(const RunMetadata& meta);
RunMetadata metadata_from_json(const json& j);

// "<dir>/<stem>.meta.json" for "<dir>/<stem>.csv".
std::filesystem::path metadata_path_for(const std::filesystem::path& csv_path);

}  // namespace lws::io

#endif  // LWS_IO_HPP
