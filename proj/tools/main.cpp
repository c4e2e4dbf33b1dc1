// Command-line front end: dataset generation, benchmark sweeps, network
// training, evaluation, detector calibration and bias-variance analysis.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nanonmr/bench.hpp"
#include "nanonmr/classifier_bayes.hpp"
#include "nanonmr/classifier_mlp.hpp"
#include "nanonmr/dataset.hpp"
#include "nanonmr/eval.hpp"
#include "nanonmr/rng.hpp"
#include "nanonmr/scenario.hpp"

namespace {

using nanonmr::Dataset;
using nanonmr::ScenarioConfig;
using nlohmann::json;

struct CommonOpts {
    std::string preset;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::vector<double> delta_omega;
    std::vector<std::string> methods;
    unsigned threads = 0;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_methods = true) {
    cmd->add_option("--preset", opts.preset,
                    "Scenario preset name (ideal, phase_noise, magnetic_noise, amplitude_noise, "
                    "mixed_noise, low_efficiency, resolution)");
    cmd->add_option("--config", opts.config_path, "Scenario config JSON file");
    cmd->add_option("--seed", opts.seed, "Override the scenario seed");
    cmd->add_option("--delta-omega", opts.delta_omega,
                    "Override the sweep grid (rad/s); repeatable")
        ->delimiter(',');
    if (with_methods) {
        cmd->add_option("--methods", opts.methods, "Subset of bayes,corr,dl,linear")
            ->delimiter(',');
    }
    cmd->add_option("--threads", opts.threads, "Worker thread count (0 = auto)");
    cmd->add_flag("--force", opts.force, "Overwrite existing output files");
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

ScenarioConfig resolve_config(const CommonOpts& opts) {
    if (!opts.preset.empty() && !opts.config_path.empty()) {
        throw std::invalid_argument("give either --preset or --config, not both");
    }
    ScenarioConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = nanonmr::load_config(opts.config_path);
    } else if (!opts.preset.empty()) {
        cfg = nanonmr::make_preset(opts.preset);
    } else {
        throw std::invalid_argument("one of --preset or --config is required");
    }
    if (opts.seed) cfg.seed = *opts.seed;
    if (!opts.delta_omega.empty()) cfg.sweep = opts.delta_omega;
    if (!opts.methods.empty()) cfg.methods = opts.methods;
    cfg.validate();
    return cfg;
}

void write_text(const std::filesystem::path& path, const std::string& text, bool force) {
    if (!force && std::filesystem::exists(path)) {
        throw std::runtime_error("refusing to overwrite existing file (use --force): " +
                                 path.string());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out.good()) throw std::runtime_error("write failed: " + path.string());
}

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---- generate ---------------------------------------------------------------

int cmd_generate(const CommonOpts& opts, const std::string& out_dir,
                 std::size_t n_per_class_override) {
    ScenarioConfig cfg = resolve_config(opts);
    if (n_per_class_override > 0) cfg.n_train_per_class = n_per_class_override;
    const unsigned threads = resolve_threads(opts.threads);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    json manifest;
    manifest["scenario"] = cfg.scenario_name;
    manifest["config_hash"] = hash_hex(nanonmr::config_hash(cfg));
    manifest["seed"] = cfg.seed;
    json files = json::array();

    for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
        const nanonmr::PointSeeds seeds = nanonmr::point_seeds(cfg.seed, i);
        Dataset ds;
        if (cfg.is_resolution) {
            const auto [r0, r1] = nanonmr::resolution_specs(cfg, cfg.sweep[i]);
            ds = nanonmr::generate_dataset(r0, r1, cfg.n_train_per_class, seeds.train_data,
                                           threads);
            ds.class_names = {"single", "split"};
        } else {
            const auto [s0, s1] = nanonmr::discrimination_specs(cfg, cfg.sweep[i]);
            ds = nanonmr::generate_dataset(s0, s1, cfg.n_train_per_class, seeds.train_data,
                                           threads);
            ds.class_names = {"omega1", "omega2"};
        }
        ds.scenario = cfg.scenario_name;

        const fs::path path = fs::path(out_dir) / ("point" + std::to_string(i) + ".txt");
        if (!opts.force && fs::exists(path)) {
            throw std::runtime_error("refusing to overwrite existing file (use --force): " +
                                     path.string());
        }
        nanonmr::write_dataset(ds, path.string());

        json entry;
        entry["path"] = path.string();
        entry["delta_omega_rad_s"] = cfg.sweep[i];
        entry["seed"] = seeds.train_data;
        entry["n_records"] = ds.records.size();
        entry["n_intervals"] = ds.n_intervals;
        files.push_back(entry);
    }
    manifest["files"] = files;

    const std::string text = manifest.dump(2) + "\n";
    write_text(fs::path(out_dir) / "manifest.json", text, opts.force);
    std::cout << text;
    return 0;
}

// ---- sweep ------------------------------------------------------------------

int cmd_sweep(const CommonOpts& opts, const std::string& out_dir) {
    const ScenarioConfig cfg = resolve_config(opts);
    const unsigned threads = resolve_threads(opts.threads);
    const nanonmr::SweepResult result = nanonmr::run_sweep(cfg, threads, &std::cerr);
    nanonmr::write_sweep_outputs(result, out_dir, opts.force);
    std::cout << nanonmr::sweep_csv_text(result);
    return 0;
}

// ---- train-dl ---------------------------------------------------------------

int cmd_train_dl(const CommonOpts& opts, const std::string& out_path,
                 const std::string& history_path) {
    ScenarioConfig cfg = resolve_config(opts);
    if (cfg.sweep.size() != 1) {
        throw std::invalid_argument(
            "train-dl needs exactly one sweep value (use --delta-omega once)");
    }
    const unsigned threads = resolve_threads(opts.threads);
    const nanonmr::PointData data = nanonmr::generate_point_data(cfg, cfg.sweep[0], 0, threads);
    const nanonmr::PointSeeds seeds = nanonmr::point_seeds(cfg.seed, 0);

    nanonmr::TrainConfig tc = cfg.train;
    tc.init_seed = seeds.dl_init;
    tc.shuffle_seed = seeds.dl_shuffle;
    const nanonmr::TrainResult trained = nanonmr::train_mlp(data.train, tc);

    if (!opts.force && std::filesystem::exists(out_path)) {
        throw std::runtime_error("refusing to overwrite existing file (use --force): " +
                                 out_path);
    }
    nanonmr::save_checkpoint(trained.model, tc, out_path);

    if (!history_path.empty()) {
        json h;
        h["train_loss"] = trained.history.train_loss;
        h["val_loss"] = trained.history.val_loss;
        h["best_epoch"] = trained.history.best_epoch;
        write_text(history_path, h.dump(2) + "\n", opts.force);
    }

    std::cerr << "trained " << trained.history.train_loss.size() << " epochs, best epoch "
              << trained.history.best_epoch << ", best val loss "
              << trained.history.val_loss[trained.history.best_epoch - 1] << "\n";
    std::cout << "checkpoint written to " << out_path << "\n";
    return 0;
}

// ---- eval -------------------------------------------------------------------

int cmd_eval(const CommonOpts& opts, const std::string& train_file, const std::string& test_file,
             const std::string& checkpoint_path, const std::string& out_path) {
    ScenarioConfig cfg = resolve_config(opts);
    if (cfg.sweep.size() != 1) {
        throw std::invalid_argument("eval needs exactly one sweep value (use --delta-omega once)");
    }
    const double delta = cfg.sweep[0];
    const unsigned threads = resolve_threads(opts.threads);

    nanonmr::PointData data;
    if (!train_file.empty() || !test_file.empty()) {
        if (test_file.empty()) throw std::invalid_argument("--train-file requires --test-file");
        data.test = nanonmr::read_dataset(test_file);
        if (!train_file.empty()) data.train = nanonmr::read_dataset(train_file);
    } else {
        data = nanonmr::generate_point_data(cfg, delta, 0, threads);
    }

    json methods = json::object();
    for (const std::string& method : cfg.methods) {
        if (method == "dl" && !checkpoint_path.empty()) {
            const nanonmr::Checkpoint ckpt = nanonmr::load_checkpoint(checkpoint_path);
            nanonmr::EvalReport report;
            std::vector<int> predictions(data.test.records.size());
            std::vector<double> scores(data.test.records.size());
            std::vector<int> labels(data.test.records.size());
            const auto t0 = std::chrono::steady_clock::now();
            for (std::size_t i = 0; i < data.test.records.size(); ++i) {
                const nanonmr::ScoreDecision d =
                    nanonmr::classify_mlp(ckpt.model, data.test.records[i].bits);
                predictions[i] = d.label;
                scores[i] = d.score;
                labels[i] = data.test.records[i].label;
            }
            report.predict_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            report.errors = nanonmr::error_probability(predictions, labels);
            report.roc = nanonmr::roc_auc(scores, labels);
            report.n_test = data.test.records.size();
            methods["dl"] = json::parse(nanonmr::report_to_json(report));
            continue;
        }
        if ((method == "corr" || method == "dl" || method == "linear") &&
            data.train.records.empty()) {
            throw std::invalid_argument("method " + method +
                                        " needs training data (--train-file or generated)");
        }
        const nanonmr::MethodOutcome out =
            nanonmr::run_method(method, cfg, delta, 0, data, threads);
        methods[out.method] = json::parse(nanonmr::report_to_json(out.report));
    }

    json doc;
    doc["scenario"] = cfg.scenario_name;
    doc["delta_omega_rad_s"] = delta;
    doc["config_hash"] = hash_hex(nanonmr::config_hash(cfg));
    doc["methods"] = methods;
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text, opts.force);
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

// ---- calibrate --------------------------------------------------------------

int cmd_calibrate(const CommonOpts& opts, const std::string& raw_path, double omega, double dt,
                  std::size_t n_intervals, double ratio, std::size_t n_mc,
                  std::uint64_t cal_seed, int g_index, const std::string& out_path) {
    const nanonmr::IngestResult ingested =
        nanonmr::ingest_raw_counts(raw_path, n_intervals, {});
    if (ingested.dataset.records.empty()) {
        throw std::invalid_argument("raw file holds no complete record of " +
                                    std::to_string(n_intervals) + " bits");
    }

    double bit_sum = 0.0;
    double power_sum = 0.0;
    const std::size_t bin = nanonmr::nearest_spectrum_bin(omega, dt, n_intervals);
    for (const auto& rec : ingested.dataset.records) {
        for (std::uint8_t b : rec.bits) bit_sum += b;
        power_sum += nanonmr::spectrum_power_at_bin(rec.bits, bin);
    }
    const double data_mean =
        bit_sum / (static_cast<double>(ingested.dataset.records.size()) *
                   static_cast<double>(n_intervals));
    const double target_power = power_sum / static_cast<double>(ingested.dataset.records.size());

    nanonmr::SignalSpec base = nanonmr::make_preset("low_efficiency").base;
    base.omega = omega;
    base.dt = dt;
    base.n_intervals = n_intervals;

    const nanonmr::CalibrationResult result =
        nanonmr::calibrate(base, data_mean, target_power, ratio, n_mc, cal_seed);

    json doc;
    doc["n_records"] = ingested.dataset.records.size();
    doc["discarded_bits"] = ingested.discarded_bits;
    doc["data_mean"] = data_mean;
    doc["signal_bin"] = bin;
    doc["target_power"] = target_power;
    doc["eta_true"] = result.eta_true;
    doc["eta_false"] = result.eta_false;
    doc["g_rad_s"] = result.g;
    doc["achieved_power"] = result.achieved_power;
    doc["zero_contrast"] = result.zero_contrast;
    std::cout << doc.dump(2) << "\n";

    if (!out_path.empty()) {
        ScenarioConfig cfg = nanonmr::make_preset("low_efficiency");
        cfg.base.omega = omega;
        cfg.base.dt = dt;
        cfg.base.n_intervals = n_intervals;
        cfg.base.detector = nanonmr::DetectorSpec{result.eta_true, result.eta_false};
        if (!result.zero_contrast) {
            if (g_index == 1) {
                cfg.base.g = result.g;
            } else {
                cfg.g2 = result.g;
            }
        }
        if (opts.seed) cfg.seed = *opts.seed;
        if (!opts.delta_omega.empty()) cfg.sweep = opts.delta_omega;
        if (!opts.force && std::filesystem::exists(out_path)) {
            throw std::runtime_error("refusing to overwrite existing file (use --force): " +
                                     out_path);
        }
        nanonmr::save_config(cfg, out_path);
        std::cerr << "config written to " << out_path << "\n";
    }
    return 0;
}

// ---- bias-variance ----------------------------------------------------------

int cmd_bias_variance(const CommonOpts& opts, const std::string& method,
                      std::size_t n_resamples, const std::string& out_path) {
    ScenarioConfig cfg = resolve_config(opts);
    if (cfg.sweep.size() != 1) {
        throw std::invalid_argument(
            "bias-variance needs exactly one sweep value (use --delta-omega once)");
    }
    if (method != "dl" && method != "linear") {
        throw std::invalid_argument("bias-variance supports methods dl and linear");
    }
    const double delta = cfg.sweep[0];
    const unsigned threads = resolve_threads(opts.threads);
    const nanonmr::PointSeeds seeds = nanonmr::point_seeds(cfg.seed, 0);

    Dataset test;
    if (cfg.is_resolution) {
        const auto [r0, r1] = nanonmr::resolution_specs(cfg, delta);
        test = nanonmr::generate_dataset(r0, r1, cfg.n_test_per_class, seeds.test_data, threads);
    } else {
        const auto [s0, s1] = nanonmr::discrimination_specs(cfg, delta);
        test = nanonmr::generate_dataset(s0, s1, cfg.n_test_per_class, seeds.test_data, threads);
    }

    std::vector<double> targets(test.records.size());
    for (std::size_t i = 0; i < test.records.size(); ++i) {
        targets[i] = static_cast<double>(test.records[i].label);
    }

    const auto score_resample = [&](std::size_t r) {
        Dataset train;
        const std::uint64_t train_seed = nanonmr::derive_seed(seeds.train_data, r);
        if (cfg.is_resolution) {
            const auto [r0, r1] = nanonmr::resolution_specs(cfg, delta);
            train = nanonmr::generate_dataset(r0, r1, cfg.n_train_per_class, train_seed, threads);
        } else {
            const auto [s0, s1] = nanonmr::discrimination_specs(cfg, delta);
            train = nanonmr::generate_dataset(s0, s1, cfg.n_train_per_class, train_seed, threads);
        }
        std::vector<double> scores(test.records.size());
        if (method == "dl") {
            nanonmr::TrainConfig tc = cfg.train;
            tc.init_seed = nanonmr::derive_seed(seeds.dl_init, r);
            tc.shuffle_seed = nanonmr::derive_seed(seeds.dl_shuffle, r);
            const nanonmr::TrainResult trained = nanonmr::train_mlp(train, tc);
            for (std::size_t i = 0; i < test.records.size(); ++i) {
                scores[i] = nanonmr::classify_mlp(trained.model, test.records[i].bits).score;
            }
        } else {
            const nanonmr::LinearModel model = nanonmr::train_linear_baseline(train);
            for (std::size_t i = 0; i < test.records.size(); ++i) {
                scores[i] = nanonmr::classify_linear(model, test.records[i].bits).score;
            }
        }
        std::cerr << "resample " << (r + 1) << "/" << n_resamples << " done\n";
        return scores;
    };

    const nanonmr::BiasVariance bv =
        nanonmr::estimate_bias_variance(score_resample, targets, n_resamples);

    json doc;
    doc["scenario"] = cfg.scenario_name;
    doc["delta_omega_rad_s"] = delta;
    doc["method"] = method;
    doc["n_resamples"] = n_resamples;
    doc["n_test"] = test.records.size();
    doc["bias_sq"] = bv.bias_sq;
    doc["variance"] = bv.variance;
    doc["noise"] = bv.noise;
    doc["mse"] = bv.mse;
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text, opts.force);
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark harness for frequency discrimination and resolution from binary "
                 "measurement records"};
    app.require_subcommand(1);

    // generate
    CommonOpts gen_opts;
    std::string gen_out = "data";
    std::size_t gen_n = 0;
    CLI::App* gen = app.add_subcommand("generate", "Write dataset files for every sweep point");
    add_common(gen, gen_opts, false);
    gen->add_option("--out", gen_out, "Output directory");
    gen->add_option("--n-per-class", gen_n, "Records per class (default: training size)");

    // sweep
    CommonOpts sweep_opts;
    std::string sweep_out = "sweep_out";
    CLI::App* sweep = app.add_subcommand("sweep", "Run the full benchmark sweep");
    add_common(sweep, sweep_opts);
    sweep->add_option("--out", sweep_out, "Output directory");

    // train-dl
    CommonOpts train_opts;
    std::string train_out = "checkpoint.json";
    std::string train_history;
    CLI::App* train = app.add_subcommand("train-dl", "Train the network at one sweep value");
    add_common(train, train_opts, false);
    train->add_option("--out", train_out, "Checkpoint output path");
    train->add_option("--history-out", train_history, "Optional loss-history JSON path");

    // eval
    CommonOpts eval_opts;
    std::string eval_train_file, eval_test_file, eval_ckpt, eval_out;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate methods at one sweep value");
    add_common(eval, eval_opts);
    eval->add_option("--train-file", eval_train_file, "Training dataset file (else generated)");
    eval->add_option("--test-file", eval_test_file, "Test dataset file (else generated)");
    eval->add_option("--checkpoint", eval_ckpt, "Evaluate dl from this checkpoint");
    eval->add_option("--out", eval_out, "Report JSON path (default stdout)");

    // calibrate
    CommonOpts cal_opts;
    std::string cal_raw, cal_out;
    double cal_omega = nanonmr::kTwoPi * 250.0;
    double cal_dt = 1e-5;
    std::size_t cal_n = 25000;
    double cal_ratio = 0.7;
    std::size_t cal_mc = 200;
    std::uint64_t cal_seed = 12345;
    int cal_g_index = 1;
    CLI::App* cal = app.add_subcommand(
        "calibrate", "Fit detector efficiencies and coupling from a raw bit stream");
    add_common(cal, cal_opts, false);
    cal->add_option("--raw", cal_raw, "Raw 0/1 character stream")->required();
    cal->add_option("--omega", cal_omega, "Signal frequency (rad/s)");
    cal->add_option("--dt", cal_dt, "Interval length (s)");
    cal->add_option("--n-intervals", cal_n, "Bits per record");
    cal->add_option("--ratio", cal_ratio, "eta_false / eta_true");
    cal->add_option("--n-mc", cal_mc, "Monte-Carlo records per coupling trial");
    cal->add_option("--cal-seed", cal_seed, "Calibration RNG seed");
    cal->add_option("--g-index", cal_g_index, "Which class amplitude to set: 1 or 2")
        ->check(CLI::Range(1, 2));
    cal->add_option("--out", cal_out, "Write a scenario config JSON here");

    // bias-variance
    CommonOpts bv_opts;
    std::string bv_method = "dl";
    std::size_t bv_resamples = 10;
    std::string bv_out;
    CLI::App* bv = app.add_subcommand(
        "bias-variance", "Decompose the squared score error over retrainings");
    add_common(bv, bv_opts, false);
    bv->add_option("--method", bv_method, "dl or linear");
    bv->add_option("--resamples", bv_resamples, "Number of independent trainings");
    bv->add_option("--out", bv_out, "Report JSON path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(gen_opts, gen_out, gen_n);
        if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_out);
        if (train->parsed()) return cmd_train_dl(train_opts, train_out, train_history);
        if (eval->parsed()) {
            return cmd_eval(eval_opts, eval_train_file, eval_test_file, eval_ckpt, eval_out);
        }
        if (cal->parsed()) {
            return cmd_calibrate(cal_opts, cal_raw, cal_omega, cal_dt, cal_n, cal_ratio, cal_mc,
                                 cal_seed, cal_g_index, cal_out);
        }
        if (bv->parsed()) return cmd_bias_variance(bv_opts, bv_method, bv_resamples, bv_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
