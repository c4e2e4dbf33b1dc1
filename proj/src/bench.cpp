#include "nanonmr/bench.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "nanonmr/classifier_bayes.hpp"
#include "nanonmr/classifier_corr.hpp"
#include "nanonmr/classifier_mlp.hpp"
#include "nanonmr/parallel.hpp"
#include "nanonmr/rng.hpp"

namespace nanonmr {
namespace {

using nlohmann::json;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<int> labels_of(const Dataset& ds) {
    std::vector<int> labels(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) labels[i] = ds.records[i].label;
    return labels;
}

void finish_outcome(MethodOutcome& out, const Dataset& test, double fit_s, double predict_s) {
    const std::vector<int> labels = labels_of(test);
    out.report.errors = error_probability(out.predictions, labels);
    out.roc = roc_auc(out.scores, labels);
    out.report.roc = out.roc;
    out.report.n_test = test.records.size();
    out.report.fit_seconds = fit_s;
    out.report.predict_seconds = predict_s;
}

MethodOutcome run_bayes(const ScenarioConfig& cfg, double delta, const PointSeeds& seeds,
                        const Dataset& test, unsigned n_threads) {
    MethodOutcome out;
    out.method = "bayes";
    const auto t0 = std::chrono::steady_clock::now();
    const double fit_s = seconds_since(t0);  // no training phase

    const auto t1 = std::chrono::steady_clock::now();
    out.predictions.resize(test.records.size());
    out.scores.resize(test.records.size());
    if (cfg.is_resolution) {
        const ResolutionSpec r0 = resolution_specs(cfg, delta).first;
        const std::vector<ResolveDecision> decisions = resolve_batch(
            test.records, delta, r0, cfg.likelihood, seeds.resolve, n_threads);
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            out.predictions[i] = decisions[i].label;
            out.scores[i] = -decisions[i].margin;
        }
    } else {
        const auto [s0, s1] = discrimination_specs(cfg, delta);
        const std::vector<BayesDecision> decisions =
            discriminate_batch(test.records, s0, s1, cfg.likelihood, n_threads);
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            out.predictions[i] = decisions[i].label;
            out.scores[i] = -decisions[i].margin;
        }
    }
    finish_outcome(out, test, fit_s, seconds_since(t1));
    return out;
}

MethodOutcome run_corr(const PointData& data, const Dataset& test, unsigned n_threads) {
    MethodOutcome out;
    const std::size_t n = test.n_intervals;
    const std::size_t k_max = default_k_max(n);
    out.method = (k_max < n - 1) ? "corr_partial" : "corr";

    const auto t0 = std::chrono::steady_clock::now();
    const CorrelationCentroids centroids = fit_centroids(data.train, k_max);
    const double fit_s = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    out.predictions.resize(test.records.size());
    out.scores.resize(test.records.size());
    parallel_for_index(test.records.size(), n_threads, [&](std::size_t i) {
        const CorrDecision d = classify_corr(test.records[i].bits, centroids);
        out.predictions[i] = d.label;
        out.scores[i] = d.d0 - d.d1;
    });
    finish_outcome(out, test, fit_s, seconds_since(t1));
    return out;
}

MethodOutcome run_dl(const ScenarioConfig& cfg, const PointSeeds& seeds, const PointData& data,
                     const Dataset& test, unsigned n_threads) {
    MethodOutcome out;
    out.method = "dl";
    TrainConfig tc = cfg.train;
    tc.init_seed = seeds.dl_init;
    tc.shuffle_seed = seeds.dl_shuffle;

    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult trained = train_mlp(data.train, tc);
    const double fit_s = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    out.predictions.resize(test.records.size());
    out.scores.resize(test.records.size());
    parallel_for_index(test.records.size(), n_threads, [&](std::size_t i) {
        const ScoreDecision d = classify_mlp(trained.model, test.records[i].bits);
        out.predictions[i] = d.label;
        out.scores[i] = d.score;
    });
    finish_outcome(out, test, fit_s, seconds_since(t1));
    return out;
}

MethodOutcome run_linear(const PointData& data, const Dataset& test, unsigned n_threads) {
    MethodOutcome out;
    out.method = "linear";
    const auto t0 = std::chrono::steady_clock::now();
    const LinearModel model = train_linear_baseline(data.train);
    const double fit_s = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    out.predictions.resize(test.records.size());
    out.scores.resize(test.records.size());
    parallel_for_index(test.records.size(), n_threads, [&](std::size_t i) {
        const ScoreDecision d = classify_linear(model, test.records[i].bits);
        out.predictions[i] = d.label;
        out.scores[i] = d.score;
    });
    finish_outcome(out, test, fit_s, seconds_since(t1));
    return out;
}

json report_json(const EvalReport& r) { return json::parse(report_to_json(r)); }

void write_text_file(const std::filesystem::path& path, const std::string& text, bool force) {
    if (!force && std::filesystem::exists(path)) {
        throw std::runtime_error("refusing to overwrite existing file (use --force): " +
                                 path.string());
    }
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot open for writing: " + path.string());
    out << text;
    require(out.good(), "write failed: " + path.string());
}

}  // namespace

PointSeeds point_seeds(std::uint64_t scenario_seed, std::size_t point_index) {
    const std::uint64_t base = derive_seed(scenario_seed, point_index);
    PointSeeds s;
    s.train_data = derive_seed(base, 0);
    s.test_data = derive_seed(base, 1);
    s.resolve = derive_seed(base, 2);
    s.dl_init = derive_seed(base, 3);
    s.dl_shuffle = derive_seed(base, 4);
    return s;
}

PointData generate_point_data(const ScenarioConfig& cfg, double delta, std::size_t point_index,
                              unsigned n_threads) {
    const PointSeeds seeds = point_seeds(cfg.seed, point_index);
    PointData data;
    if (cfg.is_resolution) {
        const auto [r0, r1] = resolution_specs(cfg, delta);
        data.train = generate_dataset(r0, r1, cfg.n_train_per_class, seeds.train_data, n_threads);
        data.test = generate_dataset(r0, r1, cfg.n_test_per_class, seeds.test_data, n_threads);
        data.train.class_names = data.test.class_names = {"single", "split"};
    } else {
        const auto [s0, s1] = discrimination_specs(cfg, delta);
        data.train = generate_dataset(s0, s1, cfg.n_train_per_class, seeds.train_data, n_threads);
        data.test = generate_dataset(s0, s1, cfg.n_test_per_class, seeds.test_data, n_threads);
        data.train.class_names = data.test.class_names = {"omega1", "omega2"};
    }
    data.train.scenario = data.test.scenario = cfg.scenario_name;
    return data;
}

MethodOutcome run_method(const std::string& method, const ScenarioConfig& cfg, double delta,
                         std::size_t point_index, const PointData& data, unsigned n_threads) {
    const PointSeeds seeds = point_seeds(cfg.seed, point_index);
    if (method == "bayes") return run_bayes(cfg, delta, seeds, data.test, n_threads);
    if (method == "corr") return run_corr(data, data.test, n_threads);
    if (method == "dl") return run_dl(cfg, seeds, data, data.test, n_threads);
    if (method == "linear") return run_linear(data, data.test, n_threads);
    throw std::invalid_argument("unknown method: " + method);
}

SweepResult run_sweep(const ScenarioConfig& cfg, unsigned n_threads, std::ostream* progress) {
    cfg.validate();
    SweepResult result;
    result.config = cfg;
    result.hash = config_hash(cfg);
    result.points.reserve(cfg.sweep.size());

    for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
        const double delta = cfg.sweep[i];
        SweepPoint point;
        point.delta = delta;
        point.point_index = i;
        const PointData data = generate_point_data(cfg, delta, i, n_threads);
        if (progress) {
            *progress << "[" << cfg.scenario_name << "] point " << (i + 1) << "/"
                      << cfg.sweep.size() << " delta=" << format_g17(delta) << " train="
                      << data.train.records.size() << " test=" << data.test.records.size()
                      << "\n";
            progress->flush();
        }
        for (const std::string& method : cfg.methods) {
            MethodOutcome out = run_method(method, cfg, delta, i, data, n_threads);
            if (progress) {
                *progress << "[" << cfg.scenario_name << "]   " << out.method
                          << ": error=" << out.report.errors.error_probability
                          << " auc=" << out.roc.auc << " fit_s=" << out.report.fit_seconds
                          << " predict_s=" << out.report.predict_seconds << "\n";
                progress->flush();
            }
            point.methods.push_back(std::move(out));
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

std::string sweep_csv_text(const SweepResult& result) {
    std::string text = csv_header() + "\n";
    for (const SweepPoint& point : result.points) {
        for (const MethodOutcome& out : point.methods) {
            text += csv_row(result.config.scenario_name, point.delta, out.method, out.report,
                            result.config.seed);
            text += "\n";
        }
    }
    return text;
}

void write_sweep_outputs(const SweepResult& result, const std::string& out_dir, bool force) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    fs::create_directories(dir / "roc");

    write_text_file(dir / "sweep.csv", sweep_csv_text(result), force);

    char hash_buf[32];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(result.hash));

    json meta;
    meta["config"] = json::parse(config_to_json(result.config));
    meta["config_hash"] = std::string(hash_buf);
    meta["seed"] = result.config.seed;
    write_text_file(dir / "config.json", meta.dump(2) + "\n", force);

    json reports = json::array();
    for (const SweepPoint& point : result.points) {
        json p;
        p["delta_omega_rad_s"] = point.delta;
        p["point_index"] = point.point_index;
        json methods = json::object();
        for (const MethodOutcome& out : point.methods) methods[out.method] = report_json(out.report);
        p["methods"] = methods;
        reports.push_back(p);
    }
    json reports_doc;
    reports_doc["config_hash"] = std::string(hash_buf);
    reports_doc["points"] = reports;
    write_text_file(dir / "reports.json", reports_doc.dump(2) + "\n", force);

    for (const SweepPoint& point : result.points) {
        for (const MethodOutcome& out : point.methods) {
            std::string text = "fpr,tpr\n";
            for (const auto& [fpr, tpr] : out.roc.points) {
                text += format_g17(fpr) + "," + format_g17(tpr) + "\n";
            }
            const std::string name =
                "point" + std::to_string(point.point_index) + "_" + out.method + ".csv";
            write_text_file(dir / "roc" / name, text, force);
        }
    }
}

}  // namespace nanonmr
