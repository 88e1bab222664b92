#include "lws/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lws/errors.hpp"

namespace lws::est {

double SensorReadout::power(double voltage_v) const {
    return optics::power_from_voltage(detector, voltage_v - ambient_offset_v);
}

// ---------------------------------------------------------------------------

CalibrationResult calibrate_channel(std::span<const double> distances_m, std::span<const double> powers_w,
                                    double lambertian_order) {
    if (distances_m.size() != powers_w.size()) {
        throw ValidationError("p_w", "distance and power columns differ in length");
    }
    if (distances_m.size() < 2) throw ValidationError("d_m", "calibration needs at least two points");
    if (!(lambertian_order > 0.0)) throw ValidationError("n", "Lambertian order must be positive");

    std::vector<double> d_db(distances_m.size());
    std::vector<double> p_db(powers_w.size());
    for (std::size_t i = 0; i < distances_m.size(); ++i) {
        if (!(distances_m[i] > 0.0) || !std::isfinite(distances_m[i])) {
            throw ValidationError("d_m", "distances must be positive and finite");
        }
        if (!(powers_w[i] > 0.0) || !std::isfinite(powers_w[i])) {
            throw ValidationError("p_w", "powers must be positive and finite");
        }
        d_db[i] = optics::to_db(distances_m[i]);
        p_db[i] = optics::to_db(powers_w[i]);
    }

    std::vector<double> distinct(distances_m.begin(), distances_m.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    const dsp::LineFit fit = dsp::fit_line(d_db, p_db);
    const double gamma = -fit.slope;
    if (!(gamma > 0.0)) {
        throw EstimationError("nonphysical_fit", "fitted path-loss exponent is not positive");
    }

    CalibrationResult out;
    out.channel = optics::ChannelParams{optics::from_db(fit.intercept), gamma, lambertian_order};
    out.r_squared = fit.r_squared;
    out.residual_rms_db = fit.residual_rms;
    out.n_points = distances_m.size();
    out.distinct_distances = distinct.size();
    out.low_confidence = distinct.size() < 3;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_series(const TimeSeries& ts, std::size_t min_len) {
    ts.validate();
    if (ts.size() < min_len) {
        throw ValidationError("values_v", "need at least " + std::to_string(min_len) + " samples");
    }
}

// Along-road range for one sample, or nullopt when the reading cannot be
// inverted (non-positive power or D below the lateral offset).
std::optional<double> range_from_voltage(double voltage_v, const optics::ChannelParams& ch,
                                         double lateral_offset_m, const SensorReadout& readout, bool strict) {
    const double p = readout.power(voltage_v);
    if (!(p > 0.0)) return std::nullopt;
    const double d_squared = std::pow(p / ch.k_lin, -2.0 / ch.gamma);
    const double r_squared = d_squared - lateral_offset_m * lateral_offset_m;
    if (strict ? !(r_squared > 0.0) : !(r_squared >= 0.0)) return std::nullopt;
    if (!std::isfinite(r_squared)) return std::nullopt;
    return std::sqrt(r_squared);
}

}  // namespace

InstantaneousSpeeds estimate_speed_instantaneous(const TimeSeries& ts, const optics::ChannelParams& ch,
                                                 double lateral_offset_m, const SensorReadout& readout) {
    check_series(ts, 2);
    ch.validate();
    if (!(lateral_offset_m >= 0.0)) throw ValidationError("lateral_offset_m", "must be non-negative");

    InstantaneousSpeeds out;
    std::optional<std::pair<double, double>> prev;  // (t, range)
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto range = range_from_voltage(ts.values_v[i], ch, lateral_offset_m, readout, false);
        if (!range) {
            ++out.samples_dropped;
            continue;
        }
        const double t = ts.time_at(i);
        if (prev) {
            out.samples.push_back({0.5 * (prev->first + t), -(*range - prev->second) / (t - prev->first)});
        }
        prev = std::make_pair(t, *range);
    }
    return out;
}

SpeedEstimate estimate_speed_ls(const TimeSeries& ts, const optics::ChannelParams& ch, double lateral_offset_m,
                                const SensorReadout& readout) {
    check_series(ts, 3);
    ch.validate();
    if (!(lateral_offset_m >= 0.0)) throw ValidationError("lateral_offset_m", "must be non-negative");

    std::vector<double> t;
    std::vector<double> y;
    SpeedEstimate out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto range = range_from_voltage(ts.values_v[i], ch, lateral_offset_m, readout, true);
        if (!range) {
            ++out.samples_dropped;
            continue;
        }
        t.push_back(ts.time_at(i));
        y.push_back(*range);
    }
    if (t.size() < 3) {
        throw EstimationError("insufficient_samples", "fewer than 3 usable samples after transformation (" +
                                                          std::to_string(out.samples_dropped) + " dropped)");
    }

    const dsp::LineFit fit = dsp::fit_line(t, y);
    out.speed_mps = -fit.slope;
    out.initial_range_m = fit.intercept;
    out.residual_rms = fit.residual_rms;
    out.n_samples_used = t.size();
    out.receding = !(out.speed_mps > 0.0);
    return out;
}

std::optional<double> solve_beta(const optics::ChannelParams& ch, double radius_m, double power_w) {
    double lo = kBetaMin;
    double hi = std::numbers::pi - kBetaMin;
    if (!(power_w > 0.0)) return std::nullopt;
    if (power_w > optics::curved_power(ch, radius_m, lo) || power_w < optics::curved_power(ch, radius_m, hi)) {
        return std::nullopt;
    }
    // Power falls with beta, so a midpoint that is still too bright lies left of the root.
    // Bisect to the resolution of double rather than stopping at kBetaTolerance.
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (optics::curved_power(ch, radius_m, mid) > power_w) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

CurvedSpeedEstimate estimate_speed_curved(const TimeSeries& ts, const optics::ChannelParams& ch, double radius_m,
                                          const SensorReadout& readout) {
    check_series(ts, 3);
    ch.validate();
    if (!(radius_m > 0.0)) throw ValidationError("radius_m", "must be positive");

    CurvedSpeedEstimate out;
    std::vector<double> t;
    std::vector<double> beta;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double p = readout.power(ts.values_v[i]);
        const auto b = solve_beta(ch, radius_m, p);
        if (!b) {
            ++out.samples_dropped;
            continue;
        }
        const double residual = std::abs(optics::curved_power(ch, radius_m, *b) - p) / p;
        if (!(residual < kBetaPowerResidual)) {
            ++out.samples_dropped;
            continue;
        }
        out.max_power_residual = std::max(out.max_power_residual, residual);
        t.push_back(ts.time_at(i));
        beta.push_back(*b);
    }
    if (t.size() < 3) {
        throw EstimationError("insufficient_samples", "fewer than 3 solvable samples (" +
                                                          std::to_string(out.samples_dropped) + " dropped)");
    }

    const dsp::LineFit fit = dsp::fit_line(t, beta);
    out.angular_speed_rad_s = -fit.slope;
    out.initial_beta_rad = fit.intercept;
    out.linear_speed_mps = out.angular_speed_rad_s * radius_m;
    out.residual_rms = fit.residual_rms;
    out.n_samples_used = t.size();
    return out;
}

// ---------------------------------------------------------------------------

RateEstimate estimate_rate(const TimeSeries& ts, double band_low_hz, double band_high_hz, std::size_t n_taps) {
    check_series(ts, 2);
    if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz)) {
        throw ValidationError("band", "need 0 < low < high");
    }
    if (!(band_high_hz < ts.sample_rate_hz / 2.0)) {
        throw ValidationError("band", "upper edge must stay below the Nyquist frequency");
    }
    if (ts.duration_s() + 1e-9 < 3.0 / band_low_hz) {
        throw ValidationError("duration_s", "need at least three cycles of the lowest band frequency");
    }

    const std::vector<double> detrended = dsp::detrend_linear(std::span<const double>(ts.values_v));
    double scale = 0.0;
    for (double v : ts.values_v) scale = std::max(scale, std::abs(v));
    double residual = 0.0;
    for (double v : detrended) residual = std::max(residual, std::abs(v));
    if (!(residual > 1e-12 * scale)) throw NoSpectralPeak("signal is flat after detrending");

    const TimeSeries filtered =
        dsp::bandpass_fir(TimeSeries{ts.sample_rate_hz, ts.start_time_s, detrended}, band_low_hz, band_high_hz, n_taps);
    const std::size_t pad = dsp::next_power_of_two(kRateZeroPadFactor * filtered.size());
    const dsp::Spectrum spectrum = dsp::fft_magnitude(filtered, pad);
    const dsp::SpectralPeak peak = dsp::spectral_peak(spectrum, band_low_hz, band_high_hz);

    RateEstimate out;
    out.f_max_hz = peak.frequency_hz;
    out.rate_bpm = 60.0 * peak.frequency_hz;
    out.peak_magnitude = peak.magnitude;
    out.band = {band_low_hz, band_high_hz};
    return out;
}

// ---------------------------------------------------------------------------

void OccupancyDatabase::validate() const {
    if (bin_edges.size() < 2) throw ValidationError("bin_edges", "need at least two edges");
    for (std::size_t i = 1; i < bin_edges.size(); ++i) {
        if (!(bin_edges[i] > bin_edges[i - 1])) throw ValidationError("bin_edges", "must be strictly increasing");
    }
    if (entries.size() < 2) throw ValidationError("entries", "database needs at least two occupancy labels");
    for (const auto& [n, dist] : entries) {
        if (n < 0) throw ValidationError("entries", "occupant counts must be non-negative");
        if (dist.bin_edges != bin_edges || dist.pdf.size() + 1 != bin_edges.size()) {
            throw ValidationError("entries", "entry " + std::to_string(n) + " does not share the database binning");
        }
    }
}

OccupancyDatabase build_occupancy_db(std::span<const LabeledRun> runs, std::size_t bin_count, double smoothing_eps) {
    std::map<int, std::vector<double>> pooled;
    for (const auto& run : runs) {
        run.series.validate();
        if (run.occupant_count < 0) throw ValidationError("occupant_count", "must be non-negative");
        auto& values = pooled[run.occupant_count];
        values.insert(values.end(), run.series.values_v.begin(), run.series.values_v.end());
    }
    if (pooled.size() < 2) throw ValidationError("runs", "need runs for at least two distinct occupancy labels");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& [n, values] : pooled) {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }
    if (!(hi > lo)) {
        const double pad = std::max(std::abs(hi) * 1e-6, 1e-12);
        lo -= pad;
        hi += pad;
    }

    OccupancyDatabase db;
    db.bin_edges = dsp::uniform_edges(lo, hi, bin_count);
    db.smoothing_eps = smoothing_eps;
    for (const auto& [n, values] : pooled) {
        db.entries.emplace(n, dsp::empirical_distribution(values, db.bin_edges, smoothing_eps));
    }
    return db;
}

OccupancyEstimate estimate_occupancy(const TimeSeries& ts, const OccupancyDatabase& db) {
    ts.validate();
    db.validate();
    const dsp::EmpiricalDistribution query = dsp::empirical_distribution(ts.values_v, db.bin_edges, db.smoothing_eps);

    OccupancyEstimate out;
    out.low_confidence = ts.size() < kMinOccupancySlots;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [n, entry] : db.entries) {
        const double score = dsp::kl_divergence(query, entry);
        out.scores[n] = score;
        if (score < best) {  // ascending keys: ties keep the smaller count
            best = score;
            out.n_hat = n;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

DisplacementEstimate estimate_displacement(const TimeSeries& ts, const optics::ChannelParams& ch,
                                           double reference_distance_m, const SensorReadout& readout) {
    ts.validate();
    ch.validate();
    if (!(reference_distance_m > 0.0)) throw ValidationError("reference_distance_m", "must be positive");

    DisplacementEstimate out;
    out.displacement = TimeSeries{ts.sample_rate_hz, ts.start_time_s, std::vector<double>(ts.size(), 0.0)};
    out.valid.assign(ts.size(), false);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double p = readout.power(ts.values_v[i]);
        if (!(p > 0.0)) {
            ++out.invalid_count;
            continue;
        }
        out.displacement.values_v[i] = optics::distance_from_power(ch, p) - reference_distance_m;
        out.valid[i] = true;
    }
    return out;
}

std::optional<double> displacement_smoothing_cutoff(const DisplacementEstimate& est, std::size_t n_taps) {
    const auto& ts = est.displacement;
    const double fs = ts.sample_rate_hz;
    if (ts.size() <= n_taps + 1) return std::nullopt;
    const dsp::Spectrum spectrum = dsp::fft_magnitude(ts, dsp::next_power_of_two(4 * ts.size()));
    try {
        const double f_dom = dsp::spectral_peak(spectrum, 2.0 / ts.duration_s(), fs / 2.0).frequency_hz;
        // The Hamming transition band is about 3.3 fs / n_taps wide.
        const double cutoff = std::max(2.0 * f_dom, f_dom + 1.65 * fs / static_cast<double>(n_taps));
        if (cutoff >= fs / 2.0) return std::nullopt;
        return cutoff;
    } catch (const NoSpectralPeak&) {
        return std::nullopt;
    }
}

double peak_displacement(const DisplacementEstimate& est, std::optional<double> lowpass_cutoff_hz,
                         std::size_t n_taps) {
    std::vector<double> x = est.displacement.values_v;
    std::size_t skip = 0;
    if (lowpass_cutoff_hz) {
        x = dsp::lowpass_fir(est.displacement, *lowpass_cutoff_hz, n_taps).values_v;
        skip = (n_taps - 1) / 2;
    }
    double peak = 0.0;
    bool any = false;
    for (std::size_t i = skip; i + skip < x.size(); ++i) {
        if (!est.valid[i]) continue;
        peak = std::max(peak, std::abs(x[i]));
        any = true;
    }
    if (!any) throw EstimationError("insufficient_samples", "no valid displacement samples to read a peak from");
    return peak;
}

}  // namespace lws::est
