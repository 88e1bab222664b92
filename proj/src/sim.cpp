#include "lws/sim.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "lws/errors.hpp"

namespace lws::sim {

namespace {

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be positive and finite");
}

void require_nonnegative(double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be non-negative and finite");
}

void validate_channel(const optics::ChannelParams& ch) {
    try {
        ch.validate();
    } catch (const ValidationError& e) {
        throw ValidationError("channel." + e.field(), e.what());
    }
}

void validate_detector(const optics::Photodetector& det) {
    try {
        det.validate();
    } catch (const ValidationError& e) {
        throw ValidationError("detector." + e.field(), e.what());
    }
}

void validate_noise(const NoiseConfig& noise) {
    try {
        noise.validate();
    } catch (const ValidationError& e) {
        throw ValidationError("noise." + e.field(), e.what());
    }
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

TimeSeries voltages_from_powers(const std::vector<double>& powers, const optics::Photodetector& det,
                                double sample_rate_hz) {
    TimeSeries ts{sample_rate_hz, 0.0, {}};
    ts.values_v.reserve(powers.size());
    for (double p : powers) ts.values_v.push_back(optics::detector_voltage(det, p));
    return ts;
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
    const auto s = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return std::mt19937_64(seq);
}

void NoiseConfig::validate() const {
    if (!std::isfinite(ambient_dc_v)) throw ValidationError("ambient_dc_v", "must be finite");
    if (awgn_snr_db && !std::isfinite(*awgn_snr_db)) throw ValidationError("awgn_snr_db", "must be finite");
}

TimeSeries apply_noise(const TimeSeries& clean, const NoiseConfig& noise, std::uint64_t seed) {
    if (clean.empty()) throw ValidationError("values_v", "cannot add noise to an empty series");
    noise.validate();
    TimeSeries out = clean;
    if (!noise.awgn_snr_db && noise.ambient_dc_v == 0.0) return out;

    for (double& v : out.values_v) v += noise.ambient_dc_v;
    if (!noise.awgn_snr_db) return out;

    const auto& x = clean.values_v;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    const double sigma = std::sqrt(var / std::pow(10.0, *noise.awgn_snr_db / 10.0));
    if (!(sigma > 0.0)) return out;

    auto rng = make_rng(seed, Stream::noise);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (double& v : out.values_v) v += gauss(rng);
    return out;
}

std::size_t sample_count(double duration_s, double sample_rate_hz) {
    return static_cast<std::size_t>(std::floor(duration_s * sample_rate_hz + 1e-9)) + 1;
}

// ---------------------------------------------------------------------------

void StraightPassConfig::validate() const {
    require_positive(speed_mps, "speed_mps");
    require_positive(initial_range_m, "initial_range_m");
    require_nonnegative(lateral_offset_m, "lateral_offset_m");
    validate_channel(channel);
    validate_detector(detector);
    require_positive(duration_s, "duration_s");
    require_positive(sample_rate_hz, "sample_rate_hz");
    validate_noise(noise);
    const double final_range = initial_range_m - speed_mps * duration_s;
    if (final_range < -1e-9 * initial_range_m || (lateral_offset_m == 0.0 && final_range <= 0.0)) {
        throw ValidationError("duration_s", "vehicle would reach or pass the sensor plane during the run");
    }
}

TimeSeries simulate_straight_pass(const StraightPassConfig& cfg) {
    cfg.validate();
    const std::size_t n = sample_count(cfg.duration_s, cfg.sample_rate_hz);
    std::vector<double> powers(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate_hz;
        const double range = std::max(cfg.initial_range_m - cfg.speed_mps * t, 0.0);
        const double dist = std::hypot(range, cfg.lateral_offset_m);
        powers[i] = optics::simplified_power(cfg.channel, dist);
    }
    return apply_noise(voltages_from_powers(powers, cfg.detector, cfg.sample_rate_hz), cfg.noise, cfg.seed);
}

void CurvedPassConfig::validate() const {
    require_positive(angular_speed_rad_s, "angular_speed_rad_s");
    require_positive(initial_beta_rad, "initial_beta_rad");
    if (!(initial_beta_rad < std::numbers::pi)) throw ValidationError("initial_beta_rad", "must be below pi");
    require_positive(radius_m, "radius_m");
    validate_channel(channel);
    validate_detector(detector);
    require_positive(duration_s, "duration_s");
    require_positive(sample_rate_hz, "sample_rate_hz");
    validate_noise(noise);
    if (!(initial_beta_rad - angular_speed_rad_s * duration_s > 0.0)) {
        throw ValidationError("duration_s", "beta would leave (0, pi) during the run");
    }
}

TimeSeries simulate_curved_pass(const CurvedPassConfig& cfg) {
    cfg.validate();
    const std::size_t n = sample_count(cfg.duration_s, cfg.sample_rate_hz);
    std::vector<double> powers(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate_hz;
        const double beta = cfg.initial_beta_rad - cfg.angular_speed_rad_s * t;
        powers[i] = optics::curved_power(cfg.channel, cfg.radius_m, beta);
    }
    return apply_noise(voltages_from_powers(powers, cfg.detector, cfg.sample_rate_hz), cfg.noise, cfg.seed);
}

// ---------------------------------------------------------------------------

std::string_view to_string(BreathingClass c) {
    switch (c) {
        case BreathingClass::eupnea: return "eupnea";
        case BreathingClass::apnea: return "apnea";
        case BreathingClass::tachypnea: return "tachypnea";
        case BreathingClass::bradypnea: return "bradypnea";
        case BreathingClass::hyperpnea: return "hyperpnea";
        case BreathingClass::hypopnea: return "hypopnea";
        case BreathingClass::kussmaul: return "kussmaul";
        case BreathingClass::faulty: return "faulty";
    }
    return "unknown";
}

std::string_view to_string(FaultMode m) {
    switch (m) {
        case FaultMode::flatline: return "flatline";
        case FaultMode::clipped: return "clipped";
        case FaultMode::noise: return "noise";
    }
    return "unknown";
}

std::optional<BreathingClass> parse_breathing_class(std::string_view name) {
    for (auto c : kBreathingClasses) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

std::optional<FaultMode> parse_fault_mode(std::string_view name) {
    for (auto m : {FaultMode::flatline, FaultMode::clipped, FaultMode::noise}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

std::optional<ClassRange> class_range(BreathingClass c) {
    switch (c) {
        case BreathingClass::eupnea: return ClassRange{12.0, 20.0, 1.0, 1.0};
        case BreathingClass::apnea: return ClassRange{12.0, 20.0, 1.0, 1.0};
        case BreathingClass::bradypnea: return ClassRange{6.0, 11.0, 1.0, 1.0};
        case BreathingClass::tachypnea: return ClassRange{21.0, 40.0, 1.0, 1.0};
        case BreathingClass::hyperpnea: return ClassRange{12.0, 20.0, 1.5, 2.0};
        case BreathingClass::hypopnea: return ClassRange{9.0, 15.0, 0.3, 0.5};
        case BreathingClass::kussmaul: return ClassRange{21.0, 35.0, 1.8, 2.2};
        case BreathingClass::faulty: return std::nullopt;
    }
    return std::nullopt;
}

void BreathingConfig::validate() const {
    const auto range = class_range(label);
    const std::string name(to_string(label));
    if (range) {
        if (rate_bpm && !(*rate_bpm >= range->rate_lo_bpm && *rate_bpm <= range->rate_hi_bpm)) {
            throw ValidationError("rate_bpm", "outside the " + name + " range [" + std::to_string(range->rate_lo_bpm) +
                                                  ", " + std::to_string(range->rate_hi_bpm) + "] bpm");
        }
        if (depth && !(*depth >= range->depth_lo && *depth <= range->depth_hi)) {
            throw ValidationError("depth", "outside the " + name + " depth range");
        }
        if (fault_mode) throw ValidationError("fault_mode", "only the faulty class has a fault mode");
    } else {
        if (rate_bpm && *rate_bpm != 0.0) throw ValidationError("rate_bpm", "faulty data has no breathing rate");
        if (depth && !(*depth >= 0.0)) throw ValidationError("depth", "must be non-negative");
    }
    require_positive(baseline_distance_m, "baseline_distance_m");
    const double max_depth = range ? range->depth_hi : 1.0;
    if (!(baseline_distance_m > 2.0 * max_depth * kChestExcursionM)) {
        throw ValidationError("baseline_distance_m", "too close: chest would reach the sensor");
    }
    validate_channel(channel);
    validate_detector(detector);
    require_positive(duration_s, "duration_s");
    require_positive(sample_rate_hz, "sample_rate_hz");
    if (range && !(sample_rate_hz > 2.0 * range->rate_hi_bpm / 60.0)) {
        throw ValidationError("sample_rate_hz", "below the Nyquist rate for the class");
    }
    if (label == BreathingClass::apnea && duration_s < kMinApneaDurationS) {
        throw ValidationError("duration_s", "apnea runs need at least 40 s to hold a full pause");
    }
    validate_noise(noise);
}

BreathingRun simulate_breathing(const BreathingConfig& cfg) {
    cfg.validate();
    auto rng = make_rng(cfg.seed, Stream::parameters);
    BreathingRun run;
    run.label = cfg.label;

    const std::size_t n = sample_count(cfg.duration_s, cfg.sample_rate_hz);
    const double dt = 1.0 / cfg.sample_rate_hz;
    run.displacement_m.assign(n, 0.0);

    if (const auto range = class_range(cfg.label)) {
        run.rate_bpm = cfg.rate_bpm.value_or(uniform(rng, range->rate_lo_bpm, range->rate_hi_bpm));
        run.depth = cfg.depth.value_or(uniform(rng, range->depth_lo, range->depth_hi));
        const double f = run.rate_bpm / 60.0;
        const double amp = run.depth * kChestExcursionM;

        if (cfg.label == BreathingClass::apnea) {
            // Whole breaths starting and ending at full exhale, separated by pauses.
            const double period = 1.0 / f;
            double seg_start = 0.0;
            while (seg_start < cfg.duration_s) {
                const int cycles = std::uniform_int_distribution<int>(2, 4)(rng);
                const double breathe_end = seg_start + cycles * period;
                const double pause = uniform(rng, kMinApneaPauseS, kMaxApneaPauseS);
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = static_cast<double>(i) * dt;
                    if (t >= seg_start && t < breathe_end) {
                        run.displacement_m[i] = amp * (1.0 - std::cos(2.0 * std::numbers::pi * f * (t - seg_start))) / 2.0;
                    }
                }
                seg_start = breathe_end + pause;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) * dt;
                run.displacement_m[i] = amp * (1.0 + std::sin(2.0 * std::numbers::pi * f * t)) / 2.0;
            }
        }
    } else {
        const FaultMode mode = cfg.fault_mode.value_or(
            static_cast<FaultMode>(std::uniform_int_distribution<int>(0, 2)(rng)));
        run.fault_mode = mode;
        run.depth = cfg.depth.value_or(1.0);
        if (mode == FaultMode::noise) {
            auto wave = make_rng(cfg.seed, Stream::waveform);
            std::normal_distribution<double> gauss(0.0, run.depth * kChestExcursionM / 2.0);
            for (double& x : run.displacement_m) x = gauss(wave);
        }
    }

    std::vector<double> powers(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dist = cfg.baseline_distance_m - run.displacement_m[i];
        powers[i] = optics::simplified_power(cfg.channel, std::max(dist, 1e-6));
    }
    TimeSeries clean = voltages_from_powers(powers, cfg.detector, cfg.sample_rate_hz);
    if (run.fault_mode == FaultMode::clipped) {
        // Front end pinned at its rail by an overload, e.g. direct sunlight.
        const double rail = optics::detector_voltage(cfg.detector, 4.0 * powers.front());
        std::fill(clean.values_v.begin(), clean.values_v.end(), rail);
    }
    run.series = apply_noise(clean, cfg.noise, cfg.seed);
    return run;
}

// ---------------------------------------------------------------------------

void OccupancyConfig::validate() const {
    if (occupant_count < 0) throw ValidationError("occupant_count", "must be non-negative");
    if (!(crossing_prob_per_slot >= 0.0 && crossing_prob_per_slot <= 1.0)) {
        throw ValidationError("crossing_prob_per_slot", "must lie in [0, 1]");
    }
    if (!(blockage_attenuation >= 0.0 && blockage_attenuation < 1.0)) {
        throw ValidationError("blockage_attenuation", "must lie in [0, 1)");
    }
    require_positive(slot_duration_s, "slot_duration_s");
    if (n_slots < 1) throw ValidationError("n_slots", "must be at least 1");
    require_positive(baseline_power_w, "baseline_power_w");
    validate_detector(detector);
    validate_noise(noise);
}

OccupancyRun simulate_occupancy(const OccupancyConfig& cfg) {
    cfg.validate();
    auto rng = make_rng(cfg.seed, Stream::parameters);
    std::binomial_distribution<int> blockers(cfg.occupant_count, cfg.crossing_prob_per_slot);

    OccupancyRun run;
    run.blockers.resize(cfg.n_slots);
    std::vector<double> powers(cfg.n_slots);
    for (std::size_t i = 0; i < cfg.n_slots; ++i) {
        run.blockers[i] = blockers(rng);
        powers[i] = cfg.baseline_power_w * std::pow(cfg.blockage_attenuation, run.blockers[i]);
    }
    run.series = apply_noise(voltages_from_powers(powers, cfg.detector, 1.0 / cfg.slot_duration_s), cfg.noise,
                             cfg.seed);
    return run;
}

// ---------------------------------------------------------------------------

void DisplacementConfig::validate() const {
    require_positive(reference_distance_m, "reference_distance_m");
    require_nonnegative(amplitude_m, "amplitude_m");
    if (!(amplitude_m < reference_distance_m)) {
        throw ValidationError("amplitude_m", "must be smaller than reference_distance_m");
    }
    require_nonnegative(frequency_hz, "frequency_hz");
    validate_channel(channel);
    validate_detector(detector);
    require_positive(duration_s, "duration_s");
    require_positive(sample_rate_hz, "sample_rate_hz");
    validate_noise(noise);
}

DisplacementRun simulate_displacement(const DisplacementConfig& cfg) {
    cfg.validate();
    const std::size_t n = sample_count(cfg.duration_s, cfg.sample_rate_hz);
    DisplacementRun run;
    run.displacement_m.resize(n);
    std::vector<double> powers(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate_hz;
        run.displacement_m[i] = cfg.amplitude_m * std::sin(2.0 * std::numbers::pi * cfg.frequency_hz * t);
        powers[i] = optics::simplified_power(cfg.channel, cfg.reference_distance_m + run.displacement_m[i]);
    }
    run.series = apply_noise(voltages_from_powers(powers, cfg.detector, cfg.sample_rate_hz), cfg.noise, cfg.seed);
    return run;
}

}  // namespace lws::sim
