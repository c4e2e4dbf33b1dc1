#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nanonmr/signal_model.hpp"

namespace nanonmr {

// One experiment's bit string plus its class label. meta carries optional
// generation parameters; it is not serialized by the dataset file format.
struct MeasurementRecord {
    std::vector<std::uint8_t> bits;
    int label = 0;
    std::map<std::string, std::string> meta;

    bool operator==(const MeasurementRecord& other) const {
        return bits == other.bits && label == other.label;
    }
};

struct Dataset {
    std::vector<MeasurementRecord> records;
    std::size_t n_intervals = 0;
    double dt_s = 0.0;
    std::string scenario;
    std::array<std::string, 2> class_names{"class0", "class1"};
};

// Samples one record: draws the nuisance realization, evaluates the
// per-interval success probabilities through the detector model, and draws
// each bit as an independent Bernoulli.
MeasurementRecord generate_record(const SignalSpec& spec, int label, RngStream& rng);

// Resolution counterpart: draws one OU quadrature path set (per component:
// A then B, each of length n_intervals+1 so that index j+1 is the value at
// interval j's end time) and samples the bits. The readout is ideal.
MeasurementRecord generate_record(const ResolutionSpec& spec, int label, RngStream& rng);

// 2*n_per_class records, interleaved label 0/1, record at position p drawn
// from substream (master_seed, p). Bit-identical across runs and thread
// counts.
Dataset generate_dataset(const SignalSpec& spec0, const SignalSpec& spec1,
                         std::size_t n_per_class, std::uint64_t master_seed,
                         unsigned n_threads = 1);
Dataset generate_dataset(const ResolutionSpec& spec0, const ResolutionSpec& spec1,
                         std::size_t n_per_class, std::uint64_t master_seed,
                         unsigned n_threads = 1);

// Stratified split: per class, a seeded shuffle selects round(train_fraction
// * class_size) records for the first dataset. Both halves keep the records
// in their original order. Rejects splits that leave any class empty on
// either side.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

// Text format. Line 1: JSON header {"version":1,"n_intervals":...,"dt_s":...,
// "scenario":...,"class_names":[...,...]}. Each following line:
// <label>,<bitchars> with exactly n_intervals characters from {0,1}.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

struct IngestResult {
    Dataset dataset;
    std::size_t discarded_bits = 0;  // trailing partial chunk, never padded
};

// Reads a raw stream of '0'/'1' characters (newlines ignored), chunks it
// into records of n_intervals bits, and attaches labels[i] to chunk i
// (all-zero labels when the mapping is empty).
IngestResult ingest_raw_counts(const std::string& path, std::size_t n_intervals,
                               const std::vector<int>& labels = {});

}  // namespace nanonmr
