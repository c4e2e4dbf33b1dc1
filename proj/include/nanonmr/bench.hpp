#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nanonmr/dataset.hpp"
#include "nanonmr/eval.hpp"
#include "nanonmr/scenario.hpp"

namespace nanonmr {

// Deterministic seed roles derived from one per-sweep-point seed.
struct PointSeeds {
    std::uint64_t train_data = 0;
    std::uint64_t test_data = 0;
    std::uint64_t resolve = 0;   // likelihood-sampling streams for resolution
    std::uint64_t dl_init = 0;
    std::uint64_t dl_shuffle = 0;
};
PointSeeds point_seeds(std::uint64_t scenario_seed, std::size_t point_index);

// Train/test pair for one sweep value.
struct PointData {
    Dataset train;
    Dataset test;
};
PointData generate_point_data(const ScenarioConfig& cfg, double delta, std::size_t point_index,
                              unsigned n_threads);

struct MethodOutcome {
    std::string method;  // CSV label; "corr" becomes "corr_partial" when truncated
    EvalReport report;
    std::vector<int> predictions;
    std::vector<double> scores;  // larger means more class-1
    RocResult roc;
};

MethodOutcome run_method(const std::string& method, const ScenarioConfig& cfg, double delta,
                         std::size_t point_index, const PointData& data, unsigned n_threads);

struct SweepPoint {
    double delta = 0.0;
    std::size_t point_index = 0;
    std::vector<MethodOutcome> methods;
};

struct SweepResult {
    ScenarioConfig config;
    std::uint64_t hash = 0;
    std::vector<SweepPoint> points;
};

// Runs every (sweep value, method) cell. `progress`, when non-null, receives
// one human-readable line per finished cell.
SweepResult run_sweep(const ScenarioConfig& cfg, unsigned n_threads,
                      std::ostream* progress = nullptr);

// Writes sweep.csv, config.json, reports.json and roc/*.csv under out_dir.
// Refuses to overwrite existing files unless force is set.
void write_sweep_outputs(const SweepResult& result, const std::string& out_dir, bool force);

std::string sweep_csv_text(const SweepResult& result);

}  // namespace nanonmr
