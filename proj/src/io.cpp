#include "lws/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lws/errors.hpp"

namespace lws::io {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

// Non-empty lines with any trailing CR removed.
std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

double parse_double(std::string_view s, const std::string& field, std::size_t line_no) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw ValidationError(field, "line " + std::to_string(line_no) + ": not a finite number: '" +
                                         std::string(s) + "'");
    }
    return v;
}

void check_header(std::string_view got, std::string_view expected) {
    if (got != expected) {
        throw ValidationError("header", "expected CSV header '" + std::string(expected) + "', got '" +
                                            std::string(got) + "'");
    }
}

void check_schema(const json& j) {
    if (!j.is_object()) throw ValidationError("document", "expected a JSON object");
    if (j.contains("schema_version")) {
        const auto& v = j.at("schema_version");
        if (!v.is_string() || v.get<std::string>() != kSchemaVersion) {
            throw ValidationError("schema_version", "unsupported schema version (expected \"1\")");
        }
    }
}

double number(const json& j, const std::string& key, const std::string& prefix,
              std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key) || j.at(key).is_null()) {
        if (fallback) return *fallback;
        throw ValidationError(prefix + key, "required field is missing");
    }
    const auto& v = j.at(key);
    if (!v.is_number()) throw ValidationError(prefix + key, "expected a number");
    return v.get<double>();
}

std::uint64_t unsigned_integer(const json& j, const std::string& key, std::uint64_t fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_unsigned()) throw ValidationError(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

const json& object_field(const json& j, const std::string& key) {
    static const json empty = json::object();
    if (!j.contains(key) || j.at(key).is_null()) return empty;
    if (!j.at(key).is_object()) throw ValidationError(key, "expected an object");
    return j.at(key);
}

void check_kind(const json& j, std::string_view expected) {
    if (!j.contains("kind")) return;
    const auto& k = j.at("kind");
    if (!k.is_string() || k.get<std::string>() != expected) {
        throw ValidationError("kind", "expected \"" + std::string(expected) + "\"");
    }
}

std::vector<double> number_array(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw ValidationError(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw ValidationError(key, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

json with_schema(json j) {
    j["schema_version"] = kSchemaVersion;
    return j;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw IoError("could not format number");
    return {buf, ptr};
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.filename().string(), std::string("malformed JSON: ") + e.what());
    }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

std::string time_series_csv(const TimeSeries& ts) {
    std::string out(kTimeSeriesHeader);
    out += '\n';
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out += format_double(ts.time_at(i));
        out += ',';
        out += format_double(ts.values_v[i]);
        out += '\n';
    }
    return out;
}

TimeSeries parse_time_series_csv(std::string_view text, std::optional<double> sample_rate_hint) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ValidationError("header", "empty file; expected header 't_s,v_volts'");
    check_header(lines.front(), kTimeSeriesHeader);
    if (lines.size() < 2) throw ValidationError("values_v", "time series has no samples");

    std::vector<double> t;
    TimeSeries ts;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split(lines[i], ',');
        if (fields.size() != 2) {
            throw ValidationError("row", "line " + std::to_string(i + 1) + ": expected 2 columns");
        }
        t.push_back(parse_double(fields[0], "t_s", i + 1));
        ts.values_v.push_back(parse_double(fields[1], "v_volts", i + 1));
    }

    ts.start_time_s = t.front();
    if (sample_rate_hint) {
        ts.sample_rate_hz = *sample_rate_hint;
    } else if (t.size() >= 2) {
        const double span = t.back() - t.front();
        if (!(span > 0.0)) throw ValidationError("t_s", "timestamps must increase");
        ts.sample_rate_hz = static_cast<double>(t.size() - 1) / span;
    }
    const double step = 1.0 / ts.sample_rate_hz;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::abs(t[i] - ts.time_at(i)) > 1e-6 * step + 1e-9 * std::abs(t[i])) {
            throw ValidationError("t_s", "timestamps are not uniformly sampled (row " + std::to_string(i + 2) + ")");
        }
    }
    ts.validate();
    return ts;
}

std::string calibration_csv(const CalibrationSamples& samples) {
    std::string out(kCalibrationHeader);
    out += '\n';
    for (std::size_t i = 0; i < samples.distances_m.size(); ++i) {
        out += format_double(samples.distances_m[i]) + ',' + format_double(samples.powers_w[i]) + '\n';
    }
    return out;
}

CalibrationSamples parse_calibration_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ValidationError("header", "empty file; expected header 'd_m,p_w'");
    check_header(lines.front(), kCalibrationHeader);
    CalibrationSamples s;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split(lines[i], ',');
        if (fields.size() != 2) {
            throw ValidationError("row", "line " + std::to_string(i + 1) + ": expected 2 columns");
        }
        s.distances_m.push_back(parse_double(fields[0], "d_m", i + 1));
        s.powers_w.push_back(parse_double(fields[1], "p_w", i + 1));
    }
    return s;
}

namespace {

std::string features_header() {
    std::string h = "source_id,label";
    for (std::size_t j = 0; j < ml::kFeatureCount; ++j) h += ",f" + std::to_string(j + 1);
    return h;
}

}  // namespace

std::string features_csv(std::span<const ml::FeatureVector> rows) {
    std::string out = features_header() + '\n';
    for (const auto& row : rows) {
        if (row.source_id.find(',') != std::string::npos) {
            throw ValidationError("source_id", "must not contain commas");
        }
        out += row.source_id + ',' + row.label.value_or("");
        for (double v : row.values) out += ',' + format_double(v);
        out += '\n';
    }
    return out;
}

std::vector<ml::FeatureVector> parse_features_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ValidationError("header", "empty file; expected header '" + features_header() + "'");
    check_header(lines.front(), features_header());
    std::vector<ml::FeatureVector> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split(lines[i], ',');
        if (fields.size() != 2 + ml::kFeatureCount) {
            throw ValidationError("row", "line " + std::to_string(i + 1) + ": expected " +
                                             std::to_string(2 + ml::kFeatureCount) + " columns");
        }
        ml::FeatureVector fv;
        fv.source_id = std::string(fields[0]);
        if (!fields[1].empty()) fv.label = std::string(fields[1]);
        for (std::size_t j = 0; j < ml::kFeatureCount; ++j) {
            fv.values[j] = parse_double(fields[2 + j], "f" + std::to_string(j + 1), i + 1);
        }
        rows.push_back(std::move(fv));
    }
    return rows;
}

// ---------------------------------------------------------------------------

json to_json(const optics::ChannelParams& ch) {
    return with_schema({{"k_db", ch.k_db()}, {"gamma", ch.gamma}, {"n", ch.lambertian_order}});
}

optics::ChannelParams channel_from_json(const json& j) {
    check_schema(j);
    const std::string p = "channel.";
    auto ch = optics::ChannelParams{optics::from_db(number(j, "k_db", p)), number(j, "gamma", p),
                                    number(j, "n", p, 1.0)};
    try {
        ch.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(p + e.field(), e.what());
    }
    return ch;
}

json to_json(const optics::Photodetector& det) {
    return {{"area_m2", det.area_m2},
            {"responsivity_a_per_w", det.responsivity_a_per_w},
            {"dark_current_a", det.dark_current_a},
            {"transimpedance_gain_v_per_a", det.transimpedance_gain_v_per_a}};
}

optics::Photodetector detector_from_json(const json& j) {
    const optics::Photodetector d;
    const std::string p = "detector.";
    optics::Photodetector det{number(j, "area_m2", p, d.area_m2),
                              number(j, "responsivity_a_per_w", p, d.responsivity_a_per_w),
                              number(j, "dark_current_a", p, d.dark_current_a),
                              number(j, "transimpedance_gain_v_per_a", p, d.transimpedance_gain_v_per_a)};
    return det;
}

json to_json(const sim::NoiseConfig& noise) {
    json j{{"ambient_dc_v", noise.ambient_dc_v}};
    j["awgn_snr_db"] = noise.awgn_snr_db ? json(*noise.awgn_snr_db) : json("none");
    return j;
}

sim::NoiseConfig noise_from_json(const json& j) {
    sim::NoiseConfig noise;
    noise.ambient_dc_v = number(j, "ambient_dc_v", "noise.", 0.0);
    if (j.contains("awgn_snr_db")) {
        const auto& v = j.at("awgn_snr_db");
        if (v.is_number()) {
            noise.awgn_snr_db = v.get<double>();
        } else if (!(v.is_null() || (v.is_string() && v.get<std::string>() == "none"))) {
            throw ValidationError("noise.awgn_snr_db", "expected a number or \"none\"");
        }
    }
    return noise;
}

json to_json(const dsp::Spectrum& s) {
    return with_schema({{"freq_resolution_hz", s.freq_resolution_hz},
                        {"fft_length", s.fft_length},
                        {"magnitudes", s.magnitudes}});
}

dsp::Spectrum spectrum_from_json(const json& j) {
    check_schema(j);
    dsp::Spectrum s;
    s.freq_resolution_hz = number(j, "freq_resolution_hz", "");
    s.fft_length = static_cast<std::size_t>(unsigned_integer(j, "fft_length", 0));
    s.magnitudes = number_array(j, "magnitudes");
    return s;
}

json to_json(const dsp::EmpiricalDistribution& d) {
    return with_schema({{"bin_edges", d.bin_edges}, {"pdf", d.pdf}, {"cdf", d.cdf}});
}

dsp::EmpiricalDistribution distribution_from_json(const json& j) {
    check_schema(j);
    dsp::EmpiricalDistribution d{number_array(j, "bin_edges"), number_array(j, "pdf"), number_array(j, "cdf")};
    if (d.bin_edges.size() != d.pdf.size() + 1 || d.cdf.size() != d.pdf.size()) {
        throw ValidationError("pdf", "distribution arrays have inconsistent lengths");
    }
    return d;
}

json to_json(const est::OccupancyDatabase& db) {
    json entries = json::array();
    for (const auto& [n, d] : db.entries) entries.push_back({{"n", n}, {"pdf", d.pdf}, {"cdf", d.cdf}});
    return with_schema({{"bin_edges", db.bin_edges}, {"smoothing_eps", db.smoothing_eps}, {"entries", entries}});
}

est::OccupancyDatabase occupancy_db_from_json(const json& j) {
    check_schema(j);
    est::OccupancyDatabase db;
    db.bin_edges = number_array(j, "bin_edges");
    db.smoothing_eps = number(j, "smoothing_eps", "", dsp::kDefaultSmoothing);
    if (!j.contains("entries") || !j.at("entries").is_array()) {
        throw ValidationError("entries", "expected an array");
    }
    for (const auto& e : j.at("entries")) {
        if (!e.contains("n") || !e.at("n").is_number_integer()) throw ValidationError("entries.n", "expected an integer");
        dsp::EmpiricalDistribution d{db.bin_edges, number_array(e, "pdf"), {}};
        d.cdf = e.contains("cdf") ? number_array(e, "cdf") : std::vector<double>{};
        if (d.cdf.size() != d.pdf.size()) {
            double run = 0.0;
            d.cdf.clear();
            for (double p : d.pdf) d.cdf.push_back(run += p);
        }
        db.entries.emplace(e.at("n").get<int>(), std::move(d));
    }
    db.validate();
    return db;
}

json to_json(const ml::ConfusionMatrix& cm) {
    return with_schema({{"labels", cm.labels},
                        {"counts", cm.counts},
                        {"accuracy", cm.accuracy()},
                        {"total", cm.total()}});
}

// ---------------------------------------------------------------------------

namespace {

optics::ChannelParams config_channel(const json& j) {
    if (!j.contains("channel")) return {};
    return channel_from_json(object_field(j, "channel"));
}

}  // namespace

sim::StraightPassConfig straight_pass_from_json(const json& j) {
    check_schema(j);
    check_kind(j, "straight_pass");
    const sim::StraightPassConfig d;
    sim::StraightPassConfig cfg;
    cfg.speed_mps = number(j, "speed_mps", "");
    cfg.initial_range_m = number(j, "initial_range_m", "");
    cfg.lateral_offset_m = number(j, "lateral_offset_m", "", d.lateral_offset_m);
    cfg.channel = config_channel(j);
    cfg.detector = detector_from_json(object_field(j, "detector"));
    cfg.duration_s = number(j, "duration_s", "");
    cfg.sample_rate_hz = number(j, "sample_rate_hz", "", d.sample_rate_hz);
    cfg.noise = noise_from_json(object_field(j, "noise"));
    cfg.seed = unsigned_integer(j, "seed", 0);
    return cfg;
}

sim::CurvedPassConfig curved_pass_from_json(const json& j) {
    check_schema(j);
    check_kind(j, "curved_pass");
    const sim::CurvedPassConfig d;
    sim::CurvedPassConfig cfg;
    cfg.angular_speed_rad_s = number(j, "angular_speed_rad_s", "");
    cfg.initial_beta_rad = number(j, "initial_beta_rad", "");
    cfg.radius_m = number(j, "radius_m", "");
    cfg.channel = config_channel(j);
    cfg.detector = detector_from_json(object_field(j, "detector"));
    cfg.duration_s = number(j, "duration_s", "");
    cfg.sample_rate_hz = number(j, "sample_rate_hz", "", d.sample_rate_hz);
    cfg.noise = noise_from_json(object_field(j, "noise"));
    cfg.seed = unsigned_integer(j, "seed", 0);
    return cfg;
}

sim::BreathingConfig breathing_from_json(const json& j) {
    check_schema(j);
    check_kind(j, "breathing");
    const sim::BreathingConfig d;
    sim::BreathingConfig cfg;
    if (!j.contains("class_label") || !j.at("class_label").is_string()) {
        throw ValidationError("class_label", "required string naming a breathing class");
    }
    const auto label = sim::parse_breathing_class(j.at("class_label").get<std::string>());
    if (!label) throw ValidationError("class_label", "unknown breathing class");
    cfg.label = *label;
    if (j.contains("rate_bpm") && !j.at("rate_bpm").is_null()) cfg.rate_bpm = number(j, "rate_bpm", "");
    if (j.contains("depth") && !j.at("depth").is_null()) cfg.depth = number(j, "depth", "");
    if (j.contains("fault_mode") && !j.at("fault_mode").is_null()) {
        const auto& m = j.at("fault_mode");
        const auto mode = m.is_string() ? sim::parse_fault_mode(m.get<std::string>()) : std::nullopt;
        if (!mode) throw ValidationError("fault_mode", "expected flatline, clipped or noise");
        cfg.fault_mode = mode;
    }
    cfg.baseline_distance_m = number(j, "baseline_distance_m", "", d.baseline_distance_m);
    cfg.channel = config_channel(j);
    cfg.detector = detector_from_json(object_field(j, "detector"));
    cfg.duration_s = number(j, "duration_s", "", d.duration_s);
    cfg.sample_rate_hz = number(j, "sample_rate_hz", "", d.sample_rate_hz);
    cfg.noise = noise_from_json(object_field(j, "noise"));
    cfg.seed = unsigned_integer(j, "seed", 0);
    return cfg;
}

sim::OccupancyConfig occupancy_from_json(const json& j) {
    check_schema(j);
    check_kind(j, "occupancy");
    const sim::OccupancyConfig d;
    sim::OccupancyConfig cfg;
    if (!j.contains("occupant_count") || !j.at("occupant_count").is_number_integer()) {
        throw ValidationError("occupant_count", "required integer");
    }
    cfg.occupant_count = j.at("occupant_count").get<int>();
    cfg.crossing_prob_per_slot = number(j, "crossing_prob_per_slot", "", d.crossing_prob_per_slot);
    cfg.blockage_attenuation = number(j, "blockage_attenuation", "", d.blockage_attenuation);
    cfg.slot_duration_s = number(j, "slot_duration_s", "", d.slot_duration_s);
    cfg.n_slots = static_cast<std::size_t>(unsigned_integer(j, "n_slots", d.n_slots));
    cfg.baseline_power_w = number(j, "baseline_power_w", "", d.baseline_power_w);
    cfg.detector = detector_from_json(object_field(j, "detector"));
    cfg.noise = noise_from_json(object_field(j, "noise"));
    cfg.seed = unsigned_integer(j, "seed", 0);
    return cfg;
}

json to_json(const sim::StraightPassConfig& cfg) {
    return with_schema({{"kind", "straight_pass"},
                        {"speed_mps", cfg.speed_mps},
                        {"initial_range_m", cfg.initial_range_m},
                        {"lateral_offset_m", cfg.lateral_offset_m},
                        {"channel", to_json(cfg.channel)},
                        {"detector", to_json(cfg.detector)},
                        {"duration_s", cfg.duration_s},
                        {"sample_rate_hz", cfg.sample_rate_hz},
                        {"noise", to_json(cfg.noise)},
                        {"seed", cfg.seed}});
}

json to_json(const sim::CurvedPassConfig& cfg) {
    return with_schema({{"kind", "curved_pass"},
                        {"angular_speed_rad_s", cfg.angular_speed_rad_s},
                        {"initial_beta_rad", cfg.initial_beta_rad},
                        {"radius_m", cfg.radius_m},
                        {"channel", to_json(cfg.channel)},
                        {"detector", to_json(cfg.detector)},
                        {"duration_s", cfg.duration_s},
                        {"sample_rate_hz", cfg.sample_rate_hz},
                        {"noise", to_json(cfg.noise)},
                        {"seed", cfg.seed}});
}

json to_json(const sim::BreathingConfig& cfg) {
    json j{{"kind", "breathing"},
           {"class_label", std::string(sim::to_string(cfg.label))},
           {"baseline_distance_m", cfg.baseline_distance_m},
           {"channel", to_json(cfg.channel)},
           {"detector", to_json(cfg.detector)},
           {"duration_s", cfg.duration_s},
           {"sample_rate_hz", cfg.sample_rate_hz},
           {"noise", to_json(cfg.noise)},
           {"seed", cfg.seed}};
    if (cfg.rate_bpm) j["rate_bpm"] = *cfg.rate_bpm;
    if (cfg.depth) j["depth"] = *cfg.depth;
    if (cfg.fault_mode) j["fault_mode"] = std::string(sim::to_string(*cfg.fault_mode));
    return with_schema(std::move(j));
}

json to_json(const sim::OccupancyConfig& cfg) {
    return with_schema({{"kind", "occupancy"},
                        {"occupant_count", cfg.occupant_count},
                        {"crossing_prob_per_slot", cfg.crossing_prob_per_slot},
                        {"blockage_attenuation", cfg.blockage_attenuation},
                        {"slot_duration_s", cfg.slot_duration_s},
                        {"n_slots", cfg.n_slots},
                        {"baseline_power_w", cfg.baseline_power_w},
                        {"detector", to_json(cfg.detector)},
                        {"noise", to_json(cfg.noise)},
                        {"seed", cfg.seed}});
}

json to_json(const RunMetadata& meta) {
    json j{{"kind", meta.kind},
           {"sample_rate_hz", meta.sample_rate_hz},
           {"seed", meta.seed},
           {"detector", to_json(meta.detector)},
           {"noise", to_json(meta.noise)},
           {"ground_truth", meta.ground_truth},
           {"config", meta.config}};
    if (meta.channel) j["channel"] = to_json(*meta.channel);
    return with_schema(std::move(j));
}

RunMetadata metadata_from_json(const json& j) {
    check_schema(j);
    if (!j.contains("schema_version")) throw ValidationError("schema_version", "metadata must carry a schema version");
    RunMetadata meta;
    if (j.contains("kind") && j.at("kind").is_string()) meta.kind = j.at("kind").get<std::string>();
    meta.sample_rate_hz = number(j, "sample_rate_hz", "");
    meta.seed = unsigned_integer(j, "seed", 0);
    if (j.contains("channel") && j.at("channel").is_object()) meta.channel = channel_from_json(j.at("channel"));
    meta.detector = detector_from_json(object_field(j, "detector"));
    meta.noise = noise_from_json(object_field(j, "noise"));
    meta.ground_truth = object_field(j, "ground_truth");
    meta.config = object_field(j, "config");
    return meta;
}

std::filesystem::path metadata_path_for(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

}  // namespace lws::io
