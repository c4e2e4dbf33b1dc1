#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanonmr/classifier_bayes.hpp"
#include "nanonmr/classifier_mlp.hpp"
#include "nanonmr/signal_model.hpp"

namespace nanonmr {

// Complete description of one benchmark scenario: the class-generating
// physics, the sweep grid, dataset sizes, seeds and method list.
struct ScenarioConfig {
    std::string preset = "ideal";
    std::string scenario_name = "ideal";
    bool is_resolution = false;

    // Frequency discrimination: class 0 is base; class 1 copies it with
    // omega = base.omega + delta and amplitude g2.
    SignalSpec base;
    double g2 = 0.0;

    // Frequency resolution: class 0 is `resolution` with gap 0, class 1
    // with gap delta.
    ResolutionSpec resolution;

    std::vector<double> sweep;  // delta values, rad/s

    std::size_t n_train_per_class = 4000;
    std::size_t n_test_per_class = 1000;
    std::uint64_t seed = 20250814;
    std::vector<std::string> methods{"bayes", "corr", "dl", "linear"};
    LikelihoodConfig likelihood;
    TrainConfig train;

    void validate() const;
};

std::vector<std::string> preset_names();
ScenarioConfig make_preset(const std::string& name);

// Class specs at one sweep value.
std::pair<SignalSpec, SignalSpec> discrimination_specs(const ScenarioConfig& cfg, double delta);
std::pair<ResolutionSpec, ResolutionSpec> resolution_specs(const ScenarioConfig& cfg,
                                                           double delta);

std::string config_to_json(const ScenarioConfig& cfg);
ScenarioConfig config_from_json(const std::string& text);
void save_config(const ScenarioConfig& cfg, const std::string& path);
ScenarioConfig load_config(const std::string& path);

// FNV-1a over the canonical (sorted-key) JSON form.
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace nanonmr
