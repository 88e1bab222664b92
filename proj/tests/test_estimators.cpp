#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "lws/errors.hpp"
#include "lws/estimators.hpp"
#include "lws/optics.hpp"
#include "lws/sim.hpp"

using namespace lws;
using namespace lws::est;
using doctest::Approx;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double variance(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m) / static_cast<double>(v.size());
    return acc;
}

TimeSeries tones(std::vector<std::pair<double, double>> parts, double fs, double duration) {
    TimeSeries ts{fs, 0.0, {}};
    const auto n = sim::sample_count(duration, fs);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        double v = 2.0;
        for (auto [f, a] : parts) v += a * std::sin(2.0 * std::numbers::pi * f * t);
        ts.values_v.push_back(v);
    }
    return ts;
}

sim::OccupancyConfig room(int n, std::uint64_t seed) {
    sim::OccupancyConfig cfg;
    cfg.occupant_count = n;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("sensor readout undoes the detector and ambient offset") {
    SensorReadout r;
    r.detector.transimpedance_gain_v_per_a = 1e3;
    r.detector.responsivity_a_per_w = 0.5;
    r.detector.dark_current_a = 2e-9;
    r.ambient_offset_v = 0.1;
    const double p = 3e-6;
    CHECK(r.power(optics::detector_voltage(r.detector, p) + 0.1) == Approx(p).epsilon(1e-9));
}

TEST_CASE("calibration recovers K and gamma from noiseless data") {
    const std::vector<double> d{5.0, 10.0, 20.0, 40.0};
    std::vector<double> p;
    for (double x : d) p.push_back(1e-4 / (x * x));
    const auto fit = calibrate_channel(d, p, 1.0);
    CHECK(rel(fit.channel.gamma, 2.0) < 1e-9);
    CHECK(rel(fit.channel.k_lin, 1e-4) < 1e-9);
    CHECK(fit.r_squared == Approx(1.0));
    CHECK_FALSE(fit.low_confidence);
    CHECK(fit.distinct_distances == 4);
}

TEST_CASE("calibration on two distances is an exact but low-confidence fit") {
    const std::vector<double> d{2.0, 8.0, 8.0};
    const std::vector<double> p{1e-3 * std::pow(2.0, -2.5), 1e-3 * std::pow(8.0, -2.5), 1e-3 * std::pow(8.0, -2.5)};
    const auto fit = calibrate_channel(d, p, 1.0);
    CHECK(fit.channel.gamma == Approx(2.5).epsilon(1e-12));
    CHECK(fit.low_confidence);
    CHECK(fit.distinct_distances == 2);
}

TEST_CASE("calibration failures") {
    try {
        calibrate_channel(std::vector<double>{3.0, 3.0, 3.0}, std::vector<double>{1e-6, 2e-6, 3e-6}, 1.0);
        FAIL("expected EstimationError");
    } catch (const EstimationError& e) {
        CHECK(e.reason() == "rank_deficient");
    }
    try {
        calibrate_channel(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{1e-6, 2e-6, 3e-6}, 1.0);
        FAIL("expected EstimationError");
    } catch (const EstimationError& e) {
        CHECK(e.reason() == "nonphysical_fit");
    }
    CHECK_THROWS_AS(calibrate_channel(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{1e-6, 0.0, 3e-6}, 1.0),
                    ValidationError);
}

TEST_CASE("calibration under 20 dB noise") {
    std::vector<double> d(200);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 5.0 + 10.0 * static_cast<double>(i) / 199.0;
    TimeSeries clean{1.0, 0.0, {}};
    for (double x : d) clean.values_v.push_back(1e-4 / (x * x));
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        sim::NoiseConfig noise;
        noise.awgn_snr_db = 20.0;
        const auto noisy = sim::apply_noise(clean, noise, seed);
        std::vector<double> dd;
        std::vector<double> pp;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (noisy.values_v[i] <= 0.0) continue;
            dd.push_back(d[i]);
            pp.push_back(noisy.values_v[i]);
        }
        errs.push_back(rel(calibrate_channel(dd, pp, 1.0).channel.gamma, 2.0));
    }
    std::sort(errs.begin(), errs.end());
    CHECK(0.5 * (errs[49] + errs[50]) < 0.02);
}

TEST_CASE("least-squares speed on noiseless passes") {
    sim::StraightPassConfig cfg;
    cfg.speed_mps = 20.0;
    cfg.initial_range_m = 100.0;
    cfg.lateral_offset_m = 5.0;
    cfg.duration_s = 2.5;
    const auto e = estimate_speed_ls(sim::simulate_straight_pass(cfg), cfg.channel, 5.0);
    CHECK(rel(e.speed_mps, 20.0) < 1e-6);
    CHECK(rel(e.initial_range_m, 100.0) < 1e-6);
    CHECK(e.samples_dropped == 0);
    CHECK_FALSE(e.receding);
}

TEST_CASE("zero lateral offset reduces the transform to link distance") {
    sim::StraightPassConfig cfg;
    cfg.lateral_offset_m = 0.0;
    cfg.speed_mps = 12.0;
    cfg.initial_range_m = 60.0;
    cfg.duration_s = 2.0;
    const auto e = estimate_speed_ls(sim::simulate_straight_pass(cfg), cfg.channel, 0.0);
    CHECK(rel(e.speed_mps, 12.0) < 1e-9);
    CHECK(rel(e.initial_range_m, 60.0) < 1e-9);
}

TEST_CASE("speed estimate depends on P/K only") {
    sim::StraightPassConfig cfg;
    cfg.noise.awgn_snr_db = 25.0;
    cfg.seed = 9;
    const auto ts = sim::simulate_straight_pass(cfg);
    const auto base = estimate_speed_ls(ts, cfg.channel, 5.0);
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
        auto scaled = ts;
        for (auto& v : scaled.values_v) v *= c;
        auto ch = cfg.channel;
        ch.k_lin *= c;
        const auto e = estimate_speed_ls(scaled, ch, 5.0);
        CHECK(std::abs(e.speed_mps - base.speed_mps) < 1e-9 * std::abs(base.speed_mps));
        CHECK(std::abs(e.initial_range_m - base.initial_range_m) < 1e-9 * base.initial_range_m);
    }
}

TEST_CASE("instantaneous speed") {
    sim::StraightPassConfig cfg;
    cfg.speed_mps = 25.0;
    cfg.initial_range_m = 90.0;
    cfg.duration_s = 2.0;
    const auto inst = estimate_speed_instantaneous(sim::simulate_straight_pass(cfg), cfg.channel, 5.0);
    REQUIRE(inst.samples.size() == 200);
    for (const auto& s : inst.samples) CHECK(rel(s.speed_mps, 25.0) < 1e-6);

    TimeSeries still{100.0, 0.0, std::vector<double>(50, optics::simplified_power(cfg.channel, 30.0))};
    for (const auto& s : estimate_speed_instantaneous(still, cfg.channel, 5.0).samples) CHECK(s.speed_mps == 0.0);
}

TEST_CASE("least squares beats differencing on paired noisy runs") {
    sim::StraightPassConfig base;
    base.speed_mps = 20.0;
    base.initial_range_m = 100.0;
    base.duration_s = 2.5;
    base.noise.awgn_snr_db = 20.0;
    std::vector<double> ls;
    std::vector<double> inst;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto cfg = base;
        cfg.seed = seed;
        const auto ts = sim::simulate_straight_pass(cfg);
        ls.push_back(estimate_speed_ls(ts, cfg.channel, 5.0).speed_mps - 20.0);
        for (const auto& s : estimate_speed_instantaneous(ts, cfg.channel, 5.0).samples) inst.push_back(s.speed_mps - 20.0);
    }
    CHECK(variance(inst) > 10.0 * variance(ls));
}

TEST_CASE("too few usable samples") {
    TimeSeries ts{100.0, 0.0, {1e-6, -1.0, -1.0, -1.0}};
    try {
        estimate_speed_ls(ts, optics::ChannelParams{}, 5.0);
        FAIL("expected EstimationError");
    } catch (const EstimationError& e) {
        CHECK(e.reason() == "insufficient_samples");
    }
}

TEST_CASE("beta solver") {
    const optics::ChannelParams ch{1e-4, 2.0, 1.0};
    for (double beta : {0.01, 0.2, 1.0, 2.5, 3.1}) {
        const auto b = solve_beta(ch, 100.0, optics::curved_power(ch, 100.0, beta));
        REQUIRE(b.has_value());
        CHECK(std::abs(*b - beta) < 1e-9);
    }
    CHECK_FALSE(solve_beta(ch, 100.0, 1e3).has_value());
    CHECK_FALSE(solve_beta(ch, 100.0, 0.0).has_value());
}

TEST_CASE("curved-road speed") {
    sim::CurvedPassConfig cfg;
    cfg.angular_speed_rad_s = 0.05;
    cfg.initial_beta_rad = 1.0;
    cfg.radius_m = 100.0;
    const auto ts = sim::simulate_curved_pass(cfg);
    const auto e = estimate_speed_curved(ts, cfg.channel, cfg.radius_m);
    CHECK(rel(e.angular_speed_rad_s, 0.05) < 1e-6);
    CHECK(rel(e.initial_beta_rad, 1.0) < 1e-6);
    CHECK(e.linear_speed_mps == e.angular_speed_rad_s * 100.0);
    CHECK(e.linear_speed_mps == Approx(5.0).epsilon(1e-6));
    for (double p : ts.values_v) {
        const double beta = *solve_beta(cfg.channel, cfg.radius_m, p);
        CHECK(std::abs(optics::curved_power(cfg.channel, cfg.radius_m, beta) - p) / p < 1e-8);
    }

    TimeSeries still{100.0, 0.0, std::vector<double>(200, optics::curved_power(cfg.channel, 100.0, 0.7))};
    CHECK(std::abs(estimate_speed_curved(still, cfg.channel, 100.0).angular_speed_rad_s) < 1e-9);
}

TEST_CASE("respiration and heart rates") {
    const auto single = tones({{0.25, 1.0}}, 10.0, 60.0);
    CHECK(estimate_rate(single, 0.1, 0.5).rate_bpm == Approx(15.0).epsilon(0.5 / 15.0));

    const auto composite = tones({{0.25, 1.0}, {1.2, 0.1}}, 20.0, 60.0);
    CHECK(std::abs(estimate_rate(composite, kRespirationBand.low_hz, kRespirationBand.high_hz).rate_bpm - 15.0) <= 0.5);
    CHECK(std::abs(estimate_rate(composite, kHeartBand.low_hz, kHeartBand.high_hz).rate_bpm - 72.0) <= 0.5);
}

TEST_CASE("rate estimation rejects flat and aperiodic input") {
    TimeSeries flat{10.0, 0.0, std::vector<double>(601, 0.8)};
    CHECK_THROWS_AS(estimate_rate(flat, 0.1, 0.5), NoSpectralPeak);

    TimeSeries ramp{10.0, 0.0, {}};
    for (int i = 0; i < 601; ++i) ramp.values_v.push_back(0.1 * i);
    CHECK_THROWS_AS(estimate_rate(ramp, 0.1, 0.5), NoSpectralPeak);

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto rng = sim::make_rng(seed, sim::Stream::noise);
        std::normal_distribution<double> g;
        TimeSeries noise{10.0, 0.0, std::vector<double>(601)};
        for (auto& v : noise.values_v) v = g(rng);
        CHECK_THROWS_AS(estimate_rate(noise, 0.1, 0.5), NoSpectralPeak);
    }
}

TEST_CASE("rate estimation preconditions") {
    const auto shortie = tones({{0.25, 1.0}}, 10.0, 20.0);
    CHECK_THROWS_AS(estimate_rate(shortie, 0.1, 0.5), ValidationError);
    const auto slow = tones({{0.25, 1.0}}, 2.0, 60.0);
    CHECK_THROWS_AS(estimate_rate(slow, 0.8, 2.2), ValidationError);
}

TEST_CASE("simulated breathing rate is recovered") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        sim::BreathingConfig cfg;
        cfg.label = sim::BreathingClass::eupnea;
        cfg.noise.awgn_snr_db = 30.0;
        cfg.seed = seed;
        const auto run = sim::simulate_breathing(cfg);
        CHECK(std::abs(estimate_rate(run.series, 0.1, 0.5).rate_bpm - run.rate_bpm) <= 0.5);
    }
}

TEST_CASE("occupancy database") {
    std::vector<LabeledRun> runs;
    for (int n = 0; n <= 3; ++n) runs.push_back({n, sim::simulate_occupancy(room(n, 200 + static_cast<std::uint64_t>(n))).series});
    const auto db = build_occupancy_db(runs);
    CHECK(db.entries.size() == 4);
    CHECK(db.bin_edges.size() == kDefaultOccupancyBins + 1);
    for (const auto& [n, d] : db.entries) {
        CHECK(d.bin_edges == db.bin_edges);
        double sum = 0.0;
        for (double p : d.pdf) sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    // The empty room sits at baseline, the highest level.
    CHECK(db.entries.at(0).pdf.back() > 0.99);

    for (const auto& run : runs) CHECK(estimate_occupancy(run.series, db).n_hat == run.occupant_count);

    std::vector<LabeledRun> one{runs[0]};
    CHECK_THROWS_AS(build_occupancy_db(one), ValidationError);
}

TEST_CASE("occupancy classifies fresh runs") {
    std::vector<LabeledRun> runs;
    for (int n = 0; n <= 3; ++n) {
        for (std::uint64_t r = 0; r < 3; ++r) runs.push_back({n, sim::simulate_occupancy(room(n, 300 + 10 * static_cast<std::uint64_t>(n) + r)).series});
    }
    const auto db = build_occupancy_db(runs);
    int correct = 0;
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        const auto e = estimate_occupancy(sim::simulate_occupancy(room(2, 9000 + trial)).series, db);
        CHECK(db.entries.count(e.n_hat) == 1);
        CHECK(e.scores.size() == 4);
        if (e.n_hat == 2) ++correct;
    }
    CHECK(correct >= 190);
}

TEST_CASE("occupancy ties go to the smaller count") {
    std::vector<LabeledRun> runs;
    const auto a = sim::simulate_occupancy(room(1, 1)).series;
    runs.push_back({4, a});
    runs.push_back({2, a});
    runs.push_back({0, sim::simulate_occupancy(room(0, 2)).series});
    const auto db = build_occupancy_db(runs);
    for (int i = 0; i < 3; ++i) CHECK(estimate_occupancy(a, db).n_hat == 2);
}

TEST_CASE("short occupancy queries are flagged") {
    std::vector<LabeledRun> runs;
    for (int n = 0; n <= 1; ++n) runs.push_back({n, sim::simulate_occupancy(room(n, 7)).series});
    const auto db = build_occupancy_db(runs);
    auto cfg = room(1, 8);
    cfg.n_slots = 50;
    CHECK(estimate_occupancy(sim::simulate_occupancy(cfg).series, db).low_confidence);
}

TEST_CASE("displacement is the exact inverse of the simulated modulation") {
    sim::DisplacementConfig cfg;
    const auto run = sim::simulate_displacement(cfg);
    const auto e = estimate_displacement(run.series, cfg.channel, cfg.reference_distance_m);
    CHECK(e.invalid_count == 0);
    for (std::size_t i = 0; i < run.displacement_m.size(); ++i) {
        CHECK(std::abs(e.displacement.values_v[i] - run.displacement_m[i]) < 1e-12);
    }
    CHECK(rel(peak_displacement(e), 0.005) < 1e-3);

    TimeSeries still{100.0, 0.0, std::vector<double>(100, optics::simplified_power(cfg.channel, 2.0))};
    const auto z = estimate_displacement(still, cfg.channel, 2.0);
    for (double v : z.displacement.values_v) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("smoothed displacement peak under 30 dB noise") {
    sim::DisplacementConfig cfg;
    cfg.noise.awgn_snr_db = 30.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        const auto run = sim::simulate_displacement(cfg);
        double truth = 0.0;
        for (double x : run.displacement_m) truth = std::max(truth, std::abs(x));
        const auto e = estimate_displacement(run.series, cfg.channel, cfg.reference_distance_m);
        const auto cutoff = displacement_smoothing_cutoff(e);
        REQUIRE(cutoff.has_value());
        CHECK(*cutoff == Approx(2.0).epsilon(0.05));
        CHECK(rel(peak_displacement(e, *cutoff), truth) < 0.014);
    }
}

TEST_CASE("invalid displacement samples are counted") {
    TimeSeries ts{100.0, 0.0, {1e-5, -1.0, 1e-5, 0.0}};
    const auto e = estimate_displacement(ts, optics::ChannelParams{}, 3.0);
    CHECK(e.invalid_count == 2);
    CHECK_FALSE(e.valid[1]);
    CHECK(e.displacement.values_v[1] == 0.0);
}
