#include "nanonmr/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nanonmr {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

// ---- enum <-> string -------------------------------------------------------

std::string to_string(PhiPolicy p) {
    switch (p) {
        case PhiPolicy::fixed: return "fixed";
        case PhiPolicy::uniform_random: return "uniform_random";
        case PhiPolicy::jump_once: return "jump_once";
    }
    fail("unknown phase policy");
}

PhiPolicy phi_policy_from(const std::string& s) {
    if (s == "fixed") return PhiPolicy::fixed;
    if (s == "uniform_random") return PhiPolicy::uniform_random;
    if (s == "jump_once") return PhiPolicy::jump_once;
    fail("unknown phase policy: " + s);
}

std::string to_string(OuStartPolicy p) {
    switch (p) {
        case OuStartPolicy::zero: return "zero";
        case OuStartPolicy::stationary_draw: return "stationary_draw";
    }
    fail("unknown start policy");
}

OuStartPolicy start_policy_from(const std::string& s) {
    if (s == "zero") return OuStartPolicy::zero;
    if (s == "stationary_draw") return OuStartPolicy::stationary_draw;
    fail("unknown start policy: " + s);
}

std::string to_string(Optimizer o) {
    switch (o) {
        case Optimizer::momentum: return "momentum";
        case Optimizer::adam: return "adam";
    }
    fail("unknown optimizer");
}

Optimizer optimizer_from(const std::string& s) {
    if (s == "momentum") return Optimizer::momentum;
    if (s == "adam") return Optimizer::adam;
    fail("unknown optimizer: " + s);
}

std::string to_string(InputEncoding e) {
    switch (e) {
        case InputEncoding::zero_one: return "zero_one";
        case InputEncoding::plus_minus: return "plus_minus";
    }
    fail("unknown input encoding");
}

InputEncoding encoding_from(const std::string& s) {
    if (s == "zero_one") return InputEncoding::zero_one;
    if (s == "plus_minus") return InputEncoding::plus_minus;
    fail("unknown input encoding: " + s);
}

// ---- struct <-> json -------------------------------------------------------

json to_json(const SignalSpec& s) {
    json j;
    j["omega_rad_s"] = s.omega;
    j["g_rad_s"] = s.g;
    j["phi_policy"] = to_string(s.phi_policy);
    j["phi_value"] = s.phi_value;
    j["dt_s"] = s.dt;
    j["n_intervals"] = s.n_intervals;
    j["eta_true"] = s.detector.eta_true;
    j["eta_false"] = s.detector.eta_false;
    j["phase_jump"] = s.noise.phase_jump;
    j["magnetic_enabled"] = s.noise.magnetic.has_value();
    if (s.noise.magnetic) {
        j["magnetic_sigma_b"] = s.noise.magnetic->sigma_b;
        j["magnetic_jump_once"] = s.noise.magnetic->jump_once;
    }
    j["amplitude_enabled"] = s.noise.amplitude.has_value();
    if (s.noise.amplitude) {
        j["amplitude_mean"] = s.noise.amplitude->mean;
        j["amplitude_sigma"] = s.noise.amplitude->sigma;
    }
    return j;
}

SignalSpec signal_from_json(const json& j) {
    SignalSpec s;
    s.omega = j.at("omega_rad_s").get<double>();
    s.g = j.at("g_rad_s").get<double>();
    s.phi_policy = phi_policy_from(j.at("phi_policy").get<std::string>());
    s.phi_value = j.at("phi_value").get<double>();
    s.dt = j.at("dt_s").get<double>();
    s.n_intervals = j.at("n_intervals").get<std::size_t>();
    s.detector.eta_true = j.at("eta_true").get<double>();
    s.detector.eta_false = j.at("eta_false").get<double>();
    s.noise.phase_jump = j.at("phase_jump").get<bool>();
    if (j.at("magnetic_enabled").get<bool>()) {
        MagneticNoise m;
        m.sigma_b = j.at("magnetic_sigma_b").get<double>();
        m.jump_once = j.at("magnetic_jump_once").get<bool>();
        s.noise.magnetic = m;
    }
    if (j.at("amplitude_enabled").get<bool>()) {
        AmplitudeNoise a;
        a.mean = j.at("amplitude_mean").get<double>();
        a.sigma = j.at("amplitude_sigma").get<double>();
        s.noise.amplitude = a;
    }
    return s;
}

json to_json(const ResolutionSpec& r) {
    json j;
    j["delta_c_rad_s"] = r.delta_c;
    j["delta_gap_rad_s"] = r.delta_gap;
    j["n_components"] = r.n_components;
    j["ou_mean"] = r.ou.mean;
    j["ou_reversion_speed"] = r.ou.reversion_speed;
    j["ou_volatility"] = r.ou.volatility;
    j["ou_x0_policy"] = to_string(r.ou.x0_policy);
    j["dt_s"] = r.dt;
    j["n_intervals"] = r.n_intervals;
    return j;
}

ResolutionSpec resolution_from_json(const json& j) {
    ResolutionSpec r;
    r.delta_c = j.at("delta_c_rad_s").get<double>();
    r.delta_gap = j.at("delta_gap_rad_s").get<double>();
    r.n_components = j.at("n_components").get<std::size_t>();
    r.ou.mean = j.at("ou_mean").get<double>();
    r.ou.reversion_speed = j.at("ou_reversion_speed").get<double>();
    r.ou.volatility = j.at("ou_volatility").get<double>();
    r.ou.x0_policy = start_policy_from(j.at("ou_x0_policy").get<std::string>());
    r.dt = j.at("dt_s").get<double>();
    r.n_intervals = j.at("n_intervals").get<std::size_t>();
    return r;
}

json to_json(const TrainConfig& t) {
    json j;
    j["learning_rate"] = t.learning_rate;
    j["batch_size"] = t.batch_size;
    j["max_epochs"] = t.max_epochs;
    j["early_stop_patience"] = t.early_stop_patience;
    j["init_seed"] = t.init_seed;
    j["shuffle_seed"] = t.shuffle_seed;
    j["validation_fraction"] = t.validation_fraction;
    j["optimizer"] = to_string(t.optimizer);
    j["momentum"] = t.momentum;
    j["input_encoding"] = to_string(t.input_encoding);
    j["hidden_sizes"] = t.hidden_sizes;
    return j;
}

TrainConfig train_from_json(const json& j) {
    TrainConfig t;
    t.learning_rate = j.at("learning_rate").get<double>();
    t.batch_size = j.at("batch_size").get<std::size_t>();
    t.max_epochs = j.at("max_epochs").get<std::size_t>();
    t.early_stop_patience = j.at("early_stop_patience").get<std::size_t>();
    t.init_seed = j.at("init_seed").get<std::uint64_t>();
    t.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
    t.validation_fraction = j.at("validation_fraction").get<double>();
    t.optimizer = optimizer_from(j.at("optimizer").get<std::string>());
    t.momentum = j.at("momentum").get<double>();
    t.input_encoding = encoding_from(j.at("input_encoding").get<std::string>());
    t.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
    return t;
}

json to_json(const LikelihoodConfig& c) {
    json j;
    j["phase_grid_size"] = c.phase_grid_size;
    j["probability_floor"] = c.probability_floor;
    j["ou_sample_count"] = c.ou_sample_count;
    return j;
}

LikelihoodConfig likelihood_from_json(const json& j) {
    LikelihoodConfig c;
    c.phase_grid_size = j.at("phase_grid_size").get<std::size_t>();
    c.probability_floor = j.at("probability_floor").get<double>();
    c.ou_sample_count = j.at("ou_sample_count").get<std::size_t>();
    return c;
}

json to_json(const ScenarioConfig& cfg) {
    json j;
    j["version"] = 1;
    j["preset"] = cfg.preset;
    j["scenario_name"] = cfg.scenario_name;
    j["is_resolution"] = cfg.is_resolution;
    j["base_signal"] = to_json(cfg.base);
    j["g2_rad_s"] = cfg.g2;
    j["resolution"] = to_json(cfg.resolution);
    j["sweep_rad_s"] = cfg.sweep;
    j["n_train_per_class"] = cfg.n_train_per_class;
    j["n_test_per_class"] = cfg.n_test_per_class;
    j["seed"] = cfg.seed;
    j["methods"] = cfg.methods;
    j["likelihood"] = to_json(cfg.likelihood);
    j["train"] = to_json(cfg.train);
    return j;
}

ScenarioConfig scenario_from_json(const json& j) {
    require(j.at("version").get<int>() == 1, "unsupported config version");
    ScenarioConfig cfg;
    cfg.preset = j.at("preset").get<std::string>();
    cfg.scenario_name = j.at("scenario_name").get<std::string>();
    cfg.is_resolution = j.at("is_resolution").get<bool>();
    cfg.base = signal_from_json(j.at("base_signal"));
    cfg.g2 = j.at("g2_rad_s").get<double>();
    cfg.resolution = resolution_from_json(j.at("resolution"));
    cfg.sweep = j.at("sweep_rad_s").get<std::vector<double>>();
    cfg.n_train_per_class = j.at("n_train_per_class").get<std::size_t>();
    cfg.n_test_per_class = j.at("n_test_per_class").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.methods = j.at("methods").get<std::vector<std::string>>();
    cfg.likelihood = likelihood_from_json(j.at("likelihood"));
    cfg.train = train_from_json(j.at("train"));
    return cfg;
}

bool known_method(const std::string& m) {
    return m == "bayes" || m == "corr" || m == "dl" || m == "linear";
}

// ---- preset table ----------------------------------------------------------

SignalSpec ideal_base() {
    SignalSpec s;
    s.omega = 10.0;
    s.g = 10.0;
    s.phi_policy = PhiPolicy::uniform_random;
    s.dt = 0.5;
    s.n_intervals = 1000;
    return s;
}

std::vector<double> ideal_sweep() {
    return {0.002, 0.004, 0.008, 0.016, 0.032, 0.064, 0.128, 0.256};
}

ScenarioConfig ideal_preset() {
    ScenarioConfig cfg;
    cfg.preset = "ideal";
    cfg.scenario_name = "ideal";
    cfg.base = ideal_base();
    cfg.g2 = 10.0;
    cfg.sweep = ideal_sweep();
    cfg.n_train_per_class = 4000;
    cfg.n_test_per_class = 1000;
    return cfg;
}

ScenarioConfig resolution_preset() {
    ScenarioConfig cfg;
    cfg.preset = "resolution";
    cfg.scenario_name = "resolution";
    cfg.is_resolution = true;
    ResolutionSpec r;
    r.delta_c = 0.5;
    r.delta_gap = 0.0;
    r.n_components = 2;
    const double t2 = 256.0;
    r.ou.mean = 0.0;
    r.ou.reversion_speed = 1.0 / t2;
    r.ou.volatility = (kPi / 10.0) * std::sqrt(4.0 / (kPi * t2));
    r.ou.x0_policy = OuStartPolicy::stationary_draw;
    r.dt = 1.0;
    r.n_intervals = 512;  // total time 2 * t2
    cfg.resolution = r;
    cfg.sweep = {0.005, 0.01, 0.02, 0.04, 0.08, 0.16};
    cfg.n_train_per_class = 4000;
    cfg.n_test_per_class = 500;
    return cfg;
}

}  // namespace

void ScenarioConfig::validate() const {
    require(!scenario_name.empty(), "scenario_name must not be empty");
    require(!sweep.empty(), "sweep grid must not be empty");
    for (double d : sweep) require(d >= 0.0, "sweep values must be >= 0");
    require(n_train_per_class >= 2, "need at least 2 training records per class");
    require(n_test_per_class >= 1, "need at least 1 test record per class");
    require(!methods.empty(), "method list must not be empty");
    for (const auto& m : methods) require(known_method(m), "unknown method: " + m);
    likelihood.validate();
    train.validate();
    if (is_resolution) {
        ResolutionSpec r = resolution;
        r.delta_gap = sweep.back();
        r.validate();
    } else {
        base.validate();
        require(g2 > 0.0, "g2 must be > 0");
        for (double d : sweep) {
            SignalSpec s1 = base;
            s1.omega = base.omega + d;
            s1.g = g2;
            s1.validate();
        }
    }
}

std::vector<std::string> preset_names() {
    return {"ideal",       "phase_noise",    "magnetic_noise", "amplitude_noise",
            "mixed_noise", "low_efficiency", "resolution"};
}

ScenarioConfig make_preset(const std::string& name) {
    if (name == "ideal") return ideal_preset();
    if (name == "phase_noise") {
        ScenarioConfig cfg = ideal_preset();
        cfg.preset = cfg.scenario_name = "phase_noise";
        cfg.base.noise.phase_jump = true;
        return cfg;
    }
    if (name == "magnetic_noise") {
        ScenarioConfig cfg = ideal_preset();
        cfg.preset = cfg.scenario_name = "magnetic_noise";
        cfg.base.noise.magnetic = MagneticNoise{2.0, true};  // sigma_b = g / 5
        return cfg;
    }
    if (name == "amplitude_noise") {
        ScenarioConfig cfg = ideal_preset();
        cfg.preset = cfg.scenario_name = "amplitude_noise";
        cfg.base.noise.amplitude = AmplitudeNoise{10.0, 10.0};
        return cfg;
    }
    if (name == "mixed_noise") {
        ScenarioConfig cfg = ideal_preset();
        cfg.preset = cfg.scenario_name = "mixed_noise";
        cfg.base.noise.phase_jump = true;
        cfg.base.noise.magnetic = MagneticNoise{2.0, true};
        cfg.base.noise.amplitude = AmplitudeNoise{10.0, 10.0};
        // The combined-noise decision surface is harder to fit than the single-
        // noise ones; the network needs a longer budget before early stopping.
        cfg.train.max_epochs = 400;
        cfg.train.early_stop_patience = 60;
        return cfg;
    }
    if (name == "low_efficiency") {
        ScenarioConfig cfg;
        cfg.preset = cfg.scenario_name = "low_efficiency";
        cfg.base.omega = kTwoPi * 250.0;
        cfg.base.g = kTwoPi * 12500.0;
        cfg.base.phi_policy = PhiPolicy::uniform_random;
        cfg.base.dt = 1e-5;
        cfg.base.n_intervals = 25000;
        cfg.base.detector = DetectorSpec{0.074, 0.052};
        cfg.g2 = kTwoPi * 11250.0;
        cfg.sweep = {kTwoPi * 1.6};
        cfg.n_train_per_class = 700;
        cfg.n_test_per_class = 180;
        return cfg;
    }
    if (name == "resolution") return resolution_preset();
    fail("unknown preset: " + name);
}

std::pair<SignalSpec, SignalSpec> discrimination_specs(const ScenarioConfig& cfg, double delta) {
    require(!cfg.is_resolution, "discrimination_specs: config is a resolution scenario");
    SignalSpec s0 = cfg.base;
    SignalSpec s1 = cfg.base;
    s1.omega = cfg.base.omega + delta;
    s1.g = cfg.g2;
    s0.validate();
    s1.validate();
    return {s0, s1};
}

std::pair<ResolutionSpec, ResolutionSpec> resolution_specs(const ScenarioConfig& cfg,
                                                           double delta) {
    require(cfg.is_resolution, "resolution_specs: config is a discrimination scenario");
    require(delta > 0.0, "resolution_specs: delta must be > 0");
    ResolutionSpec r0 = cfg.resolution;
    r0.delta_gap = 0.0;
    ResolutionSpec r1 = cfg.resolution;
    r1.delta_gap = delta;
    r0.validate();
    r1.validate();
    return {r0, r1};
}

std::string config_to_json(const ScenarioConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

ScenarioConfig config_from_json(const std::string& text) {
    json j = json::parse(text);
    ScenarioConfig cfg = scenario_from_json(j);
    cfg.validate();
    return cfg;
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open for writing: " + path);
    out << config_to_json(cfg);
    require(out.good(), "write failed: " + path);
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
    // nlohmann objects keep keys sorted, so dump() is canonical.
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace nanonmr
