#include "lws/cli.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "lws/dsp.hpp"
#include "lws/errors.hpp"
#include "lws/estimators.hpp"
#include "lws/io.hpp"
#include "lws/mlkit.hpp"
#include "lws/optics.hpp"
#include "lws/sim.hpp"

namespace lws::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    bool quiet = false;

    void info(const std::string& line) const {
        if (!quiet) out << line << '\n';
    }
    void warn(const std::string& line) const {
        if (!quiet) err << "warning: " << line << '\n';
    }
    // JSON goes to --out when given, otherwise to standard output.
    void emit_json(const json& j) const {
        if (out_path.empty()) {
            out << io::dump_json(j);
        } else {
            io::write_text(out_path, io::dump_json(j));
        }
    }
};

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

fs::path strip_csv(const std::string& out) {
    fs::path p(out);
    if (p.extension() == ".csv") p.replace_extension();
    return p;
}

struct LoadedSeries {
    TimeSeries series;
    std::optional<io::RunMetadata> meta;
};

LoadedSeries load_series(const fs::path& csv) {
    LoadedSeries loaded;
    const fs::path meta_path = io::metadata_path_for(csv);
    if (fs::exists(meta_path)) loaded.meta = io::metadata_from_json(io::read_json(meta_path));
    const std::optional<double> hint =
        loaded.meta ? std::optional<double>(loaded.meta->sample_rate_hz) : std::nullopt;
    loaded.series = io::parse_time_series_csv(io::read_text(csv), hint);
    return loaded;
}

// Detector model and ambient offset: explicit --detector file first, then
// the run's metadata sidecar, then a unit detector.
est::SensorReadout readout_for(const LoadedSeries& loaded, const std::string& detector_path) {
    est::SensorReadout readout;
    if (loaded.meta) {
        readout.detector = loaded.meta->detector;
        readout.ambient_offset_v = loaded.meta->noise.ambient_dc_v;
    }
    if (!detector_path.empty()) readout.detector = io::detector_from_json(io::read_json(detector_path));
    readout.detector.validate();
    return readout;
}

json score(double estimate, double truth) {
    json s{{"truth", truth}, {"abs_err", std::abs(estimate - truth)}};
    s["rel_err"] = truth != 0.0 ? json(std::abs(estimate - truth) / std::abs(truth)) : json(nullptr);
    return s;
}

std::optional<double> truth_number(const LoadedSeries& loaded, const char* key) {
    if (!loaded.meta) return std::nullopt;
    const auto& gt = loaded.meta->ground_truth;
    if (!gt.contains(key) || !gt.at(key).is_number()) return std::nullopt;
    return gt.at(key).get<double>();
}

json estimate_document(std::string estimator, json params, json estimate, json diagnostics) {
    return json{{"schema_version", io::kSchemaVersion},
                {"estimator", std::move(estimator)},
                {"params", std::move(params)},
                {"estimate", std::move(estimate)},
                {"diagnostics", std::move(diagnostics)}};
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const Context& ctx, const std::string& family, const std::string& config_path) {
    if (ctx.out_path.empty()) throw ValidationError("out", "simulate needs --out <basename>");
    const json cfg_json = io::read_json(config_path);
    if (!cfg_json.is_object()) throw ValidationError("config", "expected a JSON object");
    const std::string kind = cfg_json.value("kind", family == "vehicle" ? "straight_pass" : family);

    io::RunMetadata meta;
    meta.kind = kind;
    TimeSeries series;

    if (family == "vehicle" && kind == "straight_pass") {
        auto cfg = io::straight_pass_from_json(cfg_json);
        if (ctx.seed) cfg.seed = *ctx.seed;
        series = sim::simulate_straight_pass(cfg);
        meta.channel = cfg.channel;
        meta.detector = cfg.detector;
        meta.noise = cfg.noise;
        meta.seed = cfg.seed;
        meta.config = io::to_json(cfg);
        meta.ground_truth = {{"speed_mps", cfg.speed_mps},
                             {"initial_range_m", cfg.initial_range_m},
                             {"lateral_offset_m", cfg.lateral_offset_m}};
    } else if (family == "vehicle" && kind == "curved_pass") {
        auto cfg = io::curved_pass_from_json(cfg_json);
        if (ctx.seed) cfg.seed = *ctx.seed;
        series = sim::simulate_curved_pass(cfg);
        meta.channel = cfg.channel;
        meta.detector = cfg.detector;
        meta.noise = cfg.noise;
        meta.seed = cfg.seed;
        meta.config = io::to_json(cfg);
        meta.ground_truth = {{"angular_speed_rad_s", cfg.angular_speed_rad_s},
                             {"initial_beta_rad", cfg.initial_beta_rad},
                             {"radius_m", cfg.radius_m},
                             {"linear_speed_mps", cfg.linear_speed_mps()}};
    } else if (family == "breathing" && kind == "breathing") {
        auto cfg = io::breathing_from_json(cfg_json);
        if (ctx.seed) cfg.seed = *ctx.seed;
        const auto run = sim::simulate_breathing(cfg);
        series = run.series;
        meta.channel = cfg.channel;
        meta.detector = cfg.detector;
        meta.noise = cfg.noise;
        meta.seed = cfg.seed;
        meta.config = io::to_json(cfg);
        meta.ground_truth = {{"class_label", std::string(sim::to_string(run.label))},
                             {"rate_bpm", run.rate_bpm},
                             {"depth", run.depth},
                             {"baseline_distance_m", cfg.baseline_distance_m}};
        if (run.fault_mode) meta.ground_truth["fault_mode"] = std::string(sim::to_string(*run.fault_mode));
    } else if (family == "occupancy" && kind == "occupancy") {
        auto cfg = io::occupancy_from_json(cfg_json);
        if (ctx.seed) cfg.seed = *ctx.seed;
        series = sim::simulate_occupancy(cfg).series;
        meta.detector = cfg.detector;
        meta.noise = cfg.noise;
        meta.seed = cfg.seed;
        meta.config = io::to_json(cfg);
        meta.ground_truth = {{"occupant_count", cfg.occupant_count},
                             {"crossing_prob_per_slot", cfg.crossing_prob_per_slot},
                             {"blockage_attenuation", cfg.blockage_attenuation},
                             {"baseline_power_w", cfg.baseline_power_w}};
    } else {
        throw ValidationError("kind", "config kind '" + kind + "' does not belong to 'simulate " + family + "'");
    }
    meta.sample_rate_hz = series.sample_rate_hz;

    const fs::path base = strip_csv(ctx.out_path);
    fs::path csv = base;
    csv += ".csv";
    fs::path meta_file = base;
    meta_file += ".meta.json";
    io::write_text(csv, io::time_series_csv(series));
    io::write_text(meta_file, io::dump_json(io::to_json(meta)));
    ctx.info("simulated " + kind + ": " + std::to_string(series.size()) + " samples at " +
             io::format_double(series.sample_rate_hz) + " Hz -> " + csv.string());
    return kOk;
}

// ---------------------------------------------------------------------------
// calibrate

int cmd_calibrate(const Context& ctx, const std::string& in_path, double lambertian_order,
                  std::optional<double> half_power_angle_deg) {
    const auto samples = io::parse_calibration_csv(io::read_text(in_path));
    if (samples.distances_m.size() < 3) throw ValidationError("rows", "calibration CSV needs at least 3 rows");
    if (half_power_angle_deg) {
        lambertian_order = optics::lambertian_order(*half_power_angle_deg * std::numbers::pi / 180.0);
    }
    const auto result = est::calibrate_channel(samples.distances_m, samples.powers_w, lambertian_order);

    json doc = io::to_json(result.channel);
    doc["diagnostics"] = {{"r_squared", result.r_squared},
                          {"residual_rms_db", result.residual_rms_db},
                          {"n_points", result.n_points},
                          {"distinct_distances", result.distinct_distances},
                          {"low_confidence", result.low_confidence}};
    ctx.emit_json(doc);

    std::string line = "calibrated: k_db=" + fixed(result.channel.k_db(), 4) + " gamma=" +
                       fixed(result.channel.gamma, 6) + " R^2=" + fixed(result.r_squared, 6) +
                       " residual_rms_db=" + fixed(result.residual_rms_db, 6);
    if (result.low_confidence) line += " (low confidence: fewer than 3 distinct distances)";
    if (ctx.out_path.empty()) {
        if (!ctx.quiet) ctx.err << line << '\n';
    } else {
        ctx.info(line);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateOptions {
    std::string in;
    std::string channel;
    std::string detector;
    double lateral_offset_m = 0.0;
    bool curved = false;
    std::optional<double> radius_m;
    std::string band = "resp";
    std::string db;
    std::optional<double> reference_m;
    std::string series_out;
};

optics::ChannelParams load_channel(const std::string& path) {
    if (path.empty()) throw ValidationError("channel", "this estimator needs --channel <file>");
    return io::channel_from_json(io::read_json(path));
}

int cmd_estimate_speed(const Context& ctx, const EstimateOptions& opt) {
    const auto loaded = load_series(opt.in);
    const auto ch = load_channel(opt.channel);
    const auto readout = readout_for(loaded, opt.detector);

    json doc;
    double estimate = 0.0;
    std::optional<double> truth;
    if (opt.curved) {
        if (!opt.radius_m) throw ValidationError("radius", "--curved needs --radius <m>");
        const auto e = est::estimate_speed_curved(loaded.series, ch, *opt.radius_m, readout);
        doc = estimate_document("speed_curved", {{"channel", io::to_json(ch)}, {"radius_m", *opt.radius_m}},
                                {{"angular_speed_rad_s", e.angular_speed_rad_s},
                                 {"initial_beta_rad", e.initial_beta_rad},
                                 {"linear_speed_mps", e.linear_speed_mps},
                                 {"n_samples_used", e.n_samples_used}},
                                {{"residual_rms", e.residual_rms},
                                 {"samples_dropped", e.samples_dropped},
                                 {"max_power_residual", e.max_power_residual}});
        estimate = e.linear_speed_mps;
        truth = truth_number(loaded, "linear_speed_mps");
    } else {
        const auto e = est::estimate_speed_ls(loaded.series, ch, opt.lateral_offset_m, readout);
        doc = estimate_document("speed_ls", {{"channel", io::to_json(ch)}, {"lateral_offset_m", opt.lateral_offset_m}},
                                {{"speed_mps", e.speed_mps},
                                 {"initial_range_m", e.initial_range_m},
                                 {"n_samples_used", e.n_samples_used},
                                 {"receding", e.receding}},
                                {{"residual_rms", e.residual_rms}, {"samples_dropped", e.samples_dropped}});
        if (e.receding) ctx.warn("estimated speed is not positive (receding vehicle or failed fit)");
        estimate = e.speed_mps;
        truth = truth_number(loaded, "speed_mps");
    }
    if (truth) doc["score"] = score(estimate, *truth);
    ctx.emit_json(doc);
    return kOk;
}

int cmd_estimate_vitals(const Context& ctx, const EstimateOptions& opt) {
    est::Band band{};
    if (opt.band == "resp") {
        band = est::kRespirationBand;
    } else if (opt.band == "heart") {
        band = est::kHeartBand;
    } else {
        throw ValidationError("band", "expected 'resp' or 'heart'");
    }
    const auto loaded = load_series(opt.in);
    const auto e = est::estimate_rate(loaded.series, band.low_hz, band.high_hz);
    json doc = estimate_document("rate_" + opt.band, {{"band_hz", {band.low_hz, band.high_hz}}},
                                 {{"rate_bpm", e.rate_bpm}, {"f_max_hz", e.f_max_hz}, {"peak_magnitude", e.peak_magnitude}},
                                 {{"residual_rms", nullptr}, {"samples_dropped", 0}});
    if (opt.band == "resp") {
        if (const auto truth = truth_number(loaded, "rate_bpm")) doc["score"] = score(e.rate_bpm, *truth);
    }
    ctx.emit_json(doc);
    return kOk;
}

int cmd_estimate_occupancy(const Context& ctx, const EstimateOptions& opt) {
    if (opt.db.empty()) throw ValidationError("db", "occupancy estimation needs --db <file>");
    const auto db = io::occupancy_db_from_json(io::read_json(opt.db));
    const auto loaded = load_series(opt.in);
    const auto e = est::estimate_occupancy(loaded.series, db);
    json scores = json::object();
    for (const auto& [n, s] : e.scores) scores[std::to_string(n)] = s;
    json doc = estimate_document("occupancy_kl", {{"bins", db.bin_edges.size() - 1}},
                                 {{"n_hat", e.n_hat}, {"divergence_nats", scores}},
                                 {{"residual_rms", nullptr},
                                  {"samples_dropped", 0},
                                  {"low_confidence", e.low_confidence}});
    if (e.low_confidence) ctx.warn("fewer than 100 slots; occupancy estimate is low confidence");
    if (const auto truth = truth_number(loaded, "occupant_count")) {
        doc["score"] = score(e.n_hat, *truth);
        doc["score"]["correct"] = static_cast<int>(*truth) == e.n_hat;
    }
    ctx.emit_json(doc);
    return kOk;
}

int cmd_estimate_displacement(const Context& ctx, const EstimateOptions& opt) {
    if (!opt.reference_m) throw ValidationError("reference", "displacement needs --reference <m>");
    const auto loaded = load_series(opt.in);
    const auto ch = load_channel(opt.channel);
    const auto readout = readout_for(loaded, opt.detector);
    const auto e = est::estimate_displacement(loaded.series, ch, *opt.reference_m, readout);

    json estimate{{"peak_displacement_m", est::peak_displacement(e)}, {"n_samples", e.displacement.size()}};
    if (const auto cutoff = est::displacement_smoothing_cutoff(e)) {
        estimate["smoothing_cutoff_hz"] = *cutoff;
        estimate["peak_displacement_smoothed_m"] = est::peak_displacement(e, *cutoff);
    }
    json doc = estimate_document("displacement", {{"channel", io::to_json(ch)}, {"reference_m", *opt.reference_m}},
                                 estimate, {{"residual_rms", nullptr}, {"samples_dropped", e.invalid_count}});
    if (!opt.series_out.empty()) {
        std::string csv = "t_s,displacement_m\n";
        for (std::size_t i = 0; i < e.displacement.size(); ++i) {
            if (!e.valid[i]) continue;
            csv += io::format_double(e.displacement.time_at(i)) + ',' +
                   io::format_double(e.displacement.values_v[i]) + '\n';
        }
        io::write_text(opt.series_out, csv);
    }
    ctx.emit_json(doc);
    return kOk;
}

// ---------------------------------------------------------------------------
// breathing

struct DatasetOptions {
    std::size_t per_class = 50;
    double duration_s = 60.0;
    double sample_rate_hz = sim::kBreathingSampleRateHz;
    std::string snr = "30";
    double baseline_m = 0.5;
};

std::optional<double> parse_snr(const std::string& text) {
    if (text == "none") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("snr", "expected a number in dB or 'none'");
    }
}

int cmd_build_dataset(const Context& ctx, const DatasetOptions& opt) {
    if (ctx.out_path.empty()) throw ValidationError("out", "build-dataset needs --out <features.csv>");
    if (opt.per_class == 0) throw ValidationError("per-class", "must be at least 1");
    const std::uint64_t seed = ctx.seed.value_or(0);

    std::vector<ml::FeatureVector> rows;
    for (std::size_t c = 0; c < sim::kBreathingClasses.size(); ++c) {
        const auto label = sim::kBreathingClasses[c];
        for (std::size_t i = 0; i < opt.per_class; ++i) {
            sim::BreathingConfig cfg;
            cfg.label = label;
            cfg.duration_s = opt.duration_s;
            cfg.sample_rate_hz = opt.sample_rate_hz;
            cfg.baseline_distance_m = opt.baseline_m;
            cfg.noise.awgn_snr_db = parse_snr(opt.snr);
            cfg.seed = derive_seed(seed, c, i);
            auto fv = ml::extract_features(sim::simulate_breathing(cfg).series);
            fv.label = std::string(sim::to_string(label));
            std::ostringstream id;
            id << sim::to_string(label) << '_' << std::setw(3) << std::setfill('0') << i;
            fv.source_id = id.str();
            rows.push_back(std::move(fv));
        }
    }
    io::write_text(ctx.out_path, io::features_csv(rows));
    ctx.info("wrote " + std::to_string(rows.size()) + " feature rows (" + std::to_string(opt.per_class) +
             " per class, 8 classes) -> " + ctx.out_path);
    return kOk;
}

int cmd_crossval(const Context& ctx, const std::string& features, std::size_t folds, std::size_t k,
                 const std::string& json_out) {
    const auto data = io::parse_features_csv(io::read_text(features));
    const auto cv = ml::crossval_stratified(data, folds, k, ctx.seed.value_or(0));
    ctx.info("accuracy: " + fixed(cv.accuracy, 4) + " (" + std::to_string(cv.confusion.correct()) + "/" +
             std::to_string(cv.confusion.total()) + ", " + std::to_string(folds) + "-fold, k=" + std::to_string(k) +
             ")");
    if (!ctx.quiet) ctx.out << cv.confusion.to_table();

    json doc = io::to_json(cv.confusion);
    doc["folds"] = folds;
    doc["k"] = k;
    doc["seed"] = ctx.seed.value_or(0);
    doc["fold_accuracies"] = cv.fold_accuracies;
    const std::string path = !json_out.empty() ? json_out : ctx.out_path;
    if (!path.empty()) io::write_text(path, io::dump_json(doc));
    return kOk;
}

int cmd_classify(const Context& ctx, const std::string& features, const std::string& in, std::size_t k) {
    const auto train = io::parse_features_csv(io::read_text(features));
    const auto loaded = load_series(in);
    const auto query = ml::extract_features(loaded.series);
    const auto prediction = ml::knn_fit_predict(train, query, k);
    if (prediction.k_clamped) ctx.warn("k exceeds the training size; using all training rows");
    ctx.out << prediction.label << '\n';
    if (!ctx.out_path.empty()) {
        json doc{{"schema_version", io::kSchemaVersion}, {"label", prediction.label}, {"k", k}};
        io::write_text(ctx.out_path, io::dump_json(doc));
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// occupancy build-db

int cmd_build_db(const Context& ctx, const std::vector<std::string>& run_entries, std::size_t bins) {
    std::vector<est::LabeledRun> runs;
    for (const auto& entry : run_entries) {
        const auto eq = entry.rfind('=');
        const std::string path = eq == std::string::npos ? entry : entry.substr(0, eq);
        const auto loaded = load_series(path);
        est::LabeledRun run;
        run.series = loaded.series;
        if (eq != std::string::npos) {
            try {
                run.occupant_count = std::stoi(entry.substr(eq + 1));
            } catch (const std::exception&) {
                throw ValidationError("run", "bad occupant count in '" + entry + "'");
            }
        } else if (const auto n = truth_number(loaded, "occupant_count")) {
            run.occupant_count = static_cast<int>(*n);
        } else {
            throw ValidationError("run", "'" + path + "' has no occupant_count metadata; pass it as path=N");
        }
        runs.push_back(std::move(run));
    }
    const auto db = est::build_occupancy_db(runs, bins);
    ctx.emit_json(io::to_json(db));
    if (!ctx.out_path.empty()) {
        ctx.info("occupancy database: " + std::to_string(db.entries.size()) + " labels, " + std::to_string(bins) +
                 " bins -> " + ctx.out_path);
    }
    return kOk;
}

void print_failure(const Context& ctx, const std::string& reason, const std::string& message) {
    json doc{{"schema_version", io::kSchemaVersion}, {"status", "error"}, {"reason", reason}, {"message", message}};
    ctx.out << io::dump_json(doc);
    if (!ctx.quiet) ctx.err << "error: " << reason << ": " << message << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Light-wave sensing simulator and estimators", "lws"};
    app.require_subcommand(1);
    app.fallthrough();

    Context ctx{out, err, std::nullopt, "", false};
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "RNG seed (overrides config seeds)");
    app.add_option("--out", ctx.out_path, "Output path");
    app.add_flag("--quiet", ctx.quiet, "Suppress informational output");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate a photodetector series");
    simulate->require_subcommand(1);
    simulate->fallthrough();
    std::string config_path;
    std::map<std::string, CLI::App*> sim_kinds;
    for (const char* family : {"vehicle", "breathing", "occupancy"}) {
        auto* sub = simulate->add_subcommand(family, std::string("Simulate a ") + family + " scenario");
        sub->add_option("--config", config_path, "Scenario JSON")->required();
        sub->fallthrough();
        sim_kinds[family] = sub;
    }

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "Fit K and gamma from d_m,p_w samples");
    calibrate->fallthrough();
    std::string calib_in;
    double lambertian_n = 1.0;
    std::optional<double> half_angle_deg;
    calibrate->add_option("--in", calib_in, "Calibration CSV (d_m,p_w)")->required();
    calibrate->add_option("--n", lambertian_n, "Lambertian order stored with the channel");
    calibrate->add_option("--half-power-angle-deg", half_angle_deg, "Derive n from the LED half-power angle");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Run an estimator on a series");
    estimate->require_subcommand(1);
    estimate->fallthrough();
    EstimateOptions eo;
    auto* est_speed = estimate->add_subcommand("speed", "Vehicle speed");
    auto* est_vitals = estimate->add_subcommand("vitals", "Respiration or heart rate");
    auto* est_occ = estimate->add_subcommand("occupancy", "Occupant count");
    auto* est_disp = estimate->add_subcommand("displacement", "Structural displacement");
    for (auto* sub : {est_speed, est_vitals, est_occ, est_disp}) {
        sub->add_option("--in", eo.in, "Time series CSV (t_s,v_volts)")->required();
        sub->fallthrough();
    }
    for (auto* sub : {est_speed, est_disp}) {
        sub->add_option("--channel", eo.channel, "Channel JSON")->required();
        sub->add_option("--detector", eo.detector, "Detector JSON (default: run metadata)");
    }
    est_speed->add_option("--lateral-offset", eo.lateral_offset_m, "Sensor offset from the lane, m");
    est_speed->add_flag("--curved", eo.curved, "Use the curved-road model");
    est_speed->add_option("--radius", eo.radius_m, "Road radius of curvature, m");
    est_vitals->add_option("--band", eo.band, "resp or heart")->check(CLI::IsMember({"resp", "heart"}));
    est_occ->add_option("--db", eo.db, "Occupancy database JSON")->required();
    est_disp->add_option("--reference", eo.reference_m, "Reference distance, m")->required();
    est_disp->add_option("--series-out", eo.series_out, "Write the displacement series here");

    // breathing
    auto* breathing = app.add_subcommand("breathing", "Breathing-pattern dataset and classifier");
    breathing->require_subcommand(1);
    breathing->fallthrough();
    DatasetOptions dso;
    auto* build = breathing->add_subcommand("build-dataset", "Simulate labelled runs and extract features");
    build->fallthrough();
    build->add_option("--per-class", dso.per_class, "Runs per class");
    build->add_option("--duration", dso.duration_s, "Run length, s");
    build->add_option("--sample-rate", dso.sample_rate_hz, "Sample rate, Hz");
    build->add_option("--snr", dso.snr, "AWGN SNR in dB, or none");
    build->add_option("--baseline", dso.baseline_m, "Sensor-to-chest distance, m");
    std::string features_path;
    std::size_t folds = 10;
    std::size_t knn_k = ml::kDefaultNeighbours;
    std::string cv_json;
    auto* crossval = breathing->add_subcommand("crossval", "Stratified k-fold cross-validation");
    crossval->fallthrough();
    crossval->add_option("--features", features_path, "Features CSV")->required();
    crossval->add_option("--folds", folds, "Number of folds");
    crossval->add_option("--k", knn_k, "Neighbours");
    crossval->add_option("--json", cv_json, "Write the confusion matrix JSON here (default: --out)");
    std::string classify_in;
    auto* classify = breathing->add_subcommand("classify", "Classify one series against a features CSV");
    classify->fallthrough();
    classify->add_option("--features", features_path, "Training features CSV")->required();
    classify->add_option("--in", classify_in, "Time series CSV")->required();
    classify->add_option("--k", knn_k, "Neighbours");

    // occupancy build-db
    auto* occupancy = app.add_subcommand("occupancy", "Occupancy database tools");
    occupancy->require_subcommand(1);
    occupancy->fallthrough();
    auto* build_db = occupancy->add_subcommand("build-db", "Build a KL-divergence database from labelled runs");
    build_db->fallthrough();
    std::vector<std::string> run_entries;
    std::size_t bins = est::kDefaultOccupancyBins;
    build_db->add_option("--run", run_entries, "Run CSV, optionally path=N")->required();
    build_db->add_option("--bins", bins, "Histogram bins");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    }
    if (seed_opt->count() > 0) ctx.seed = seed_value;

    try {
        for (const auto& [family, sub] : sim_kinds) {
            if (sub->parsed()) return cmd_simulate(ctx, family, config_path);
        }
        if (calibrate->parsed()) return cmd_calibrate(ctx, calib_in, lambertian_n, half_angle_deg);
        if (est_speed->parsed()) return cmd_estimate_speed(ctx, eo);
        if (est_vitals->parsed()) return cmd_estimate_vitals(ctx, eo);
        if (est_occ->parsed()) return cmd_estimate_occupancy(ctx, eo);
        if (est_disp->parsed()) return cmd_estimate_displacement(ctx, eo);
        if (build->parsed()) return cmd_build_dataset(ctx, dso);
        if (crossval->parsed()) return cmd_crossval(ctx, features_path, folds, knn_k, cv_json);
        if (classify->parsed()) return cmd_classify(ctx, features_path, classify_in, knn_k);
        if (build_db->parsed()) return cmd_build_db(ctx, run_entries, bins);
        err << "error: no command given\n";
        return kBadInput;
    } catch (const EstimationError& e) {
        print_failure(ctx, e.reason(), e.what());
        return kEstimationFailure;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const io::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        return kBadInput;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    }
}

}  // namespace lws::cli
