#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "doctest.h"
#include "lws/errors.hpp"
#include "lws/io.hpp"
#include "lws/sim.hpp"

using namespace lws;
using namespace lws::io;
using doctest::Approx;

namespace {

std::string field_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("numbers round-trip exactly") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
        CHECK(s.find(',') == std::string::npos);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(20.0) == "20");
}

TEST_CASE("time series csv round-trip") {
    sim::StraightPassConfig cfg;
    cfg.noise.awgn_snr_db = 20.0;
    const auto ts = sim::simulate_straight_pass(cfg);
    const std::string text = time_series_csv(ts);
    CHECK(text.rfind("t_s,v_volts\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    const auto back = parse_time_series_csv(text);
    CHECK(back.values_v == ts.values_v);
    CHECK(back.sample_rate_hz == Approx(ts.sample_rate_hz).epsilon(1e-12));
    CHECK(parse_time_series_csv(text, 100.0).sample_rate_hz == 100.0);
}

TEST_CASE("time series csv validation") {
    CHECK(field_of([] { parse_time_series_csv("time,volts\n0,1\n0.1,2\n"); }) == "header");
    try {
        parse_time_series_csv("t,v\n0,1\n");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("t_s,v_volts") != std::string::npos);
    }
    CHECK(field_of([] { parse_time_series_csv(""); }) == "header");
    CHECK(field_of([] { parse_time_series_csv("t_s,v_volts\n"); }) == "values_v");
    CHECK(field_of([] { parse_time_series_csv("t_s,v_volts\n0,1\n0.1\n"); }) == "row");
    CHECK(field_of([] { parse_time_series_csv("t_s,v_volts\n0,1\n0.1,abc\n"); }) == "v_volts");
    CHECK(field_of([] { parse_time_series_csv("t_s,v_volts\n0,1\n0.1,2\n0.3,3\n"); }) == "t_s");
    CHECK(field_of([] { parse_time_series_csv("t_s,v_volts\n0,1\n0,2\n"); }) == "t_s");
    CHECK(parse_time_series_csv("t_s,v_volts\r\n0,1\r\n0.5,2\r\n").sample_rate_hz == Approx(2.0));
}

TEST_CASE("calibration csv") {
    const CalibrationSamples s{{5.0, 10.0, 20.0}, {4e-6, 1e-6, 2.5e-7}};
    const auto back = parse_calibration_csv(calibration_csv(s));
    CHECK(back.distances_m == s.distances_m);
    CHECK(back.powers_w == s.powers_w);
    CHECK(field_of([] { parse_calibration_csv("d,p\n1,2\n"); }) == "header");
}

TEST_CASE("features csv") {
    ml::FeatureVector a;
    a.source_id = "eupnea_000";
    a.label = "eupnea";
    for (std::size_t i = 0; i < ml::kFeatureCount; ++i) a.values[i] = 0.1 * static_cast<double>(i) + 1e-17;
    ml::FeatureVector b = a;
    b.source_id = "query";
    b.label.reset();
    const std::vector<ml::FeatureVector> rows{a, b};
    const std::string text = features_csv(rows);
    CHECK(text.rfind("source_id,label,f1,f2,f3,f4,f5,f6,f7,f8,f9\n", 0) == 0);
    const auto back = parse_features_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].values == a.values);
    CHECK(back[0].label == a.label);
    CHECK(back[0].source_id == "eupnea_000");
    CHECK_FALSE(back[1].label.has_value());
    CHECK(field_of([] { parse_features_csv("id,label\n"); }) == "header");
}

TEST_CASE("channel json") {
    const optics::ChannelParams ch{3.2e-5, 2.3, 4.0};
    const auto j = to_json(ch);
    CHECK(j.at("schema_version") == "1");
    const auto back = channel_from_json(j);
    CHECK(back.k_lin == Approx(ch.k_lin).epsilon(1e-12));
    CHECK(back.gamma == ch.gamma);
    CHECK(back.lambertian_order == ch.lambertian_order);

    CHECK(field_of([] { channel_from_json(json{{"gamma", 2.0}}); }) == "channel.k_db");
    CHECK(field_of([] { channel_from_json(json{{"k_db", -40}, {"gamma", -1.0}}); }) == "channel.gamma");
    CHECK(field_of([] { channel_from_json(json{{"schema_version", "2"}, {"k_db", -40}, {"gamma", 2}}); }) ==
          "schema_version");
    // Unknown fields are ignored.
    CHECK(channel_from_json(json{{"k_db", -40}, {"gamma", 2}, {"comment", "bench"}}).gamma == 2.0);
}

TEST_CASE("detector and noise json") {
    optics::Photodetector det;
    det.transimpedance_gain_v_per_a = 1e4;
    det.dark_current_a = 1e-9;
    const auto back = detector_from_json(to_json(det));
    CHECK(back.transimpedance_gain_v_per_a == 1e4);
    CHECK(back.dark_current_a == 1e-9);

    sim::NoiseConfig n;
    n.ambient_dc_v = 0.2;
    n.awgn_snr_db = 25.0;
    CHECK(noise_from_json(to_json(n)).awgn_snr_db == 25.0);
    CHECK_FALSE(noise_from_json(json{{"awgn_snr_db", "none"}}).awgn_snr_db.has_value());
    CHECK_FALSE(noise_from_json(json{{"awgn_snr_db", nullptr}}).awgn_snr_db.has_value());
    CHECK(field_of([] { noise_from_json(json{{"awgn_snr_db", "loud"}}); }) == "noise.awgn_snr_db");
}

TEST_CASE("spectrum, distribution and database json") {
    const dsp::Spectrum s{0.01, 8, {0.0, 1.5, 2.25, 0.5, 0.125}};
    const auto sb = spectrum_from_json(to_json(s));
    CHECK(sb.magnitudes == s.magnitudes);
    CHECK(sb.fft_length == 8);

    const auto d = dsp::empirical_distribution(std::vector<double>{0.1, 0.2, 0.9}, dsp::uniform_edges(0.0, 1.0, 4));
    const auto db_back = distribution_from_json(to_json(d));
    CHECK(db_back.pdf == d.pdf);
    CHECK(db_back.bin_edges == d.bin_edges);

    std::vector<est::LabeledRun> runs;
    for (int n = 0; n <= 2; ++n) {
        sim::OccupancyConfig cfg;
        cfg.occupant_count = n;
        cfg.seed = 5;
        runs.push_back({n, sim::simulate_occupancy(cfg).series});
    }
    const auto db = est::build_occupancy_db(runs);
    const auto back = occupancy_db_from_json(json::parse(dump_json(to_json(db))));
    CHECK(back.bin_edges == db.bin_edges);
    REQUIRE(back.entries.size() == 3);
    for (const auto& [n, e] : db.entries) CHECK(back.entries.at(n).pdf == e.pdf);
    CHECK(back.smoothing_eps == db.smoothing_eps);
}

TEST_CASE("scenario configs") {
    const auto straight = straight_pass_from_json(json::parse(
        R"({"kind":"straight_pass","speed_mps":15,"initial_range_m":80,"duration_s":2,"seed":4,"extra":true})"));
    CHECK(straight.speed_mps == 15.0);
    CHECK(straight.lateral_offset_m == 5.0);
    CHECK(straight.seed == 4);
    const auto again = straight_pass_from_json(to_json(straight));
    CHECK(again.initial_range_m == 80.0);
    CHECK(again.noise.awgn_snr_db == straight.noise.awgn_snr_db);

    CHECK(field_of([] { straight_pass_from_json(json{{"initial_range_m", 1}, {"duration_s", 1}}); }) == "speed_mps");
    CHECK(field_of([] { straight_pass_from_json(json{{"kind", "curved_pass"}}); }) == "kind");

    const auto curved = curved_pass_from_json(
        json::parse(R"({"angular_speed_rad_s":0.05,"initial_beta_rad":1,"radius_m":100,"duration_s":10})"));
    CHECK(curved_pass_from_json(to_json(curved)).radius_m == 100.0);
    CHECK(curved.linear_speed_mps() == Approx(5.0));

    const auto breathing = breathing_from_json(json::parse(R"({"class_label":"faulty","fault_mode":"clipped"})"));
    CHECK(breathing.label == sim::BreathingClass::faulty);
    CHECK(breathing.fault_mode == sim::FaultMode::clipped);
    CHECK(breathing_from_json(to_json(breathing)).fault_mode == sim::FaultMode::clipped);
    CHECK(field_of([] { breathing_from_json(json{{"class_label", "snoring"}}); }) == "class_label");

    const auto occ = occupancy_from_json(json::parse(R"({"kind":"occupancy","occupant_count":3})"));
    CHECK(occ.occupant_count == 3);
    CHECK(occupancy_from_json(to_json(occ)).n_slots == occ.n_slots);
    CHECK(field_of([] { occupancy_from_json(json{{"kind", "occupancy"}}); }) == "occupant_count");
}

TEST_CASE("run metadata") {
    RunMetadata m;
    m.kind = "straight_pass";
    m.sample_rate_hz = 100.0;
    m.seed = 12;
    m.channel = optics::ChannelParams{};
    m.noise.ambient_dc_v = 0.3;
    m.ground_truth = {{"speed_mps", 20.0}};
    const auto back = metadata_from_json(json::parse(dump_json(to_json(m))));
    CHECK(back.kind == "straight_pass");
    CHECK(back.seed == 12);
    CHECK(back.noise.ambient_dc_v == 0.3);
    CHECK(back.channel.has_value());
    CHECK(back.ground_truth.at("speed_mps") == 20.0);
    CHECK(field_of([] { metadata_from_json(json{{"kind", "x"}}); }) == "schema_version");

    CHECK(metadata_path_for("out/run1.csv") == std::filesystem::path("out/run1.meta.json"));
}

TEST_CASE("file helpers") {
    const auto dir = std::filesystem::temp_directory_path() / "lws_test_io";
    std::filesystem::create_directories(dir);
    write_text(dir / "x.txt", "hello\n");
    CHECK(read_text(dir / "x.txt") == "hello\n");
    CHECK_THROWS_AS(read_text(dir / "missing.txt"), IoError);
    write_text(dir / "bad.json", "{ not json");
    CHECK_THROWS_AS(read_json(dir / "bad.json"), ValidationError);
    std::filesystem::remove_all(dir);
}
