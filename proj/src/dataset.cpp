#include "nanonmr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nanonmr/parallel.hpp"

namespace nanonmr {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::uint8_t bernoulli_bit(double q, RngStream& rng) {
    return rng.uniform() < q ? std::uint8_t{1} : std::uint8_t{0};
}

}  // namespace

MeasurementRecord generate_record(const SignalSpec& spec, int label, RngStream& rng) {
    spec.validate();
    const std::size_t n = spec.n_intervals;
    const NoiseRealization real = sample_noise_realization(spec, rng);

    MeasurementRecord rec;
    rec.label = label;
    rec.bits.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double q = detector_success_prob(noisy_success_prob(spec, real, j), spec.detector);
        rec.bits[j] = bernoulli_bit(q, rng);
    }
    return rec;
}

MeasurementRecord generate_record(const ResolutionSpec& spec, int label, RngStream& rng) {
    spec.validate();
    const std::size_t n = spec.n_intervals;

    // Per component: A path then B path, each with n+1 points so path[j+1]
    // is the value at the end time of interval j.
    std::vector<std::vector<double>> a_paths(spec.n_components);
    std::vector<std::vector<double>> b_paths(spec.n_components);
    for (std::size_t i = 0; i < spec.n_components; ++i) {
        a_paths[i] = sample_ou_path(spec.ou, n + 1, spec.dt, rng);
        b_paths[i] = sample_ou_path(spec.ou, n + 1, spec.dt, rng);
    }

    MeasurementRecord rec;
    rec.label = label;
    rec.bits.resize(n);
    std::vector<QuadraturePair> quads(spec.n_components);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < spec.n_components; ++i) {
            quads[i] = {a_paths[i][j + 1], b_paths[i][j + 1]};
        }
        const double t = spec.dt * static_cast<double>(j + 1);
        const double q = ou_success_prob(spec, quads, t);
        rec.bits[j] = bernoulli_bit(q, rng);
    }
    return rec;
}

namespace {

template <typename Spec>
Dataset generate_dataset_impl(const Spec& spec0, const Spec& spec1, std::size_t n_per_class,
                              std::uint64_t master_seed, unsigned n_threads) {
    require(spec0.dt == spec1.dt && spec0.n_intervals == spec1.n_intervals,
            "generate_dataset: class specs must share dt and n_intervals");
    spec0.validate();
    spec1.validate();

    Dataset ds;
    ds.n_intervals = spec0.n_intervals;
    ds.dt_s = spec0.dt;
    ds.records.resize(2 * n_per_class);

    parallel_for_index(ds.records.size(), n_threads, [&](std::size_t p) {
        RngStream rng = RngStream::substream(master_seed, p);
        const int label = static_cast<int>(p % 2);
        ds.records[p] = generate_record(label == 0 ? spec0 : spec1, label, rng);
    });
    return ds;
}

}  // namespace

Dataset generate_dataset(const SignalSpec& spec0, const SignalSpec& spec1,
                         std::size_t n_per_class, std::uint64_t master_seed, unsigned n_threads) {
    return generate_dataset_impl(spec0, spec1, n_per_class, master_seed, n_threads);
}

Dataset generate_dataset(const ResolutionSpec& spec0, const ResolutionSpec& spec1,
                         std::size_t n_per_class, std::uint64_t master_seed, unsigned n_threads) {
    return generate_dataset_impl(spec0, spec1, n_per_class, master_seed, n_threads);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    require(train_fraction > 0.0 && train_fraction < 1.0,
            "split: train_fraction must lie strictly between 0 and 1");

    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const int label = ds.records[i].label;
        require(label == 0 || label == 1, "split: labels must be 0 or 1");
        by_class[static_cast<std::size_t>(label)].push_back(i);
    }

    RngStream rng(seed);
    std::vector<char> in_train(ds.records.size(), 0);
    for (auto& indices : by_class) {
        require(!indices.empty(), "split: both classes must be present");
        // Fisher-Yates, then the first n_train shuffled entries go to train.
        for (std::size_t i = indices.size(); i > 1; --i) {
            std::swap(indices[i - 1], indices[rng.uniform_index(i)]);
        }
        const auto n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(indices.size())));
        require(n_train >= 1 && n_train < indices.size(),
                "split: the requested fraction leaves a class empty");
        for (std::size_t i = 0; i < n_train; ++i) in_train[indices[i]] = 1;
    }

    Dataset train = ds;
    Dataset test = ds;
    train.records.clear();
    test.records.clear();
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        (in_train[i] ? train : test).records.push_back(ds.records[i]);
    }
    return {std::move(train), std::move(test)};
}

void write_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_dataset: cannot open " + path);

    nlohmann::json header = {
        {"version", 1},
        {"n_intervals", ds.n_intervals},
        {"dt_s", ds.dt_s},
        {"scenario", ds.scenario},
        {"class_names", {ds.class_names[0], ds.class_names[1]}},
    };
    out << header.dump() << '\n';

    std::string line;
    for (const MeasurementRecord& rec : ds.records) {
        if (rec.bits.size() != ds.n_intervals) {
            throw std::runtime_error("write_dataset: record length differs from n_intervals");
        }
        line.clear();
        line.push_back(rec.label == 0 ? '0' : '1');
        line.push_back(',');
        for (std::uint8_t b : rec.bits) line.push_back(b ? '1' : '0');
        line.push_back('\n');
        out << line;
    }
    if (!out) throw std::runtime_error("write_dataset: write failed for " + path);
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_dataset: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_dataset: " + path + ": line 1: missing header");
    }

    Dataset ds;
    try {
        const nlohmann::json header = nlohmann::json::parse(line);
        if (header.at("version").get<int>() != 1) {
            throw std::runtime_error("unsupported version");
        }
        ds.n_intervals = header.at("n_intervals").get<std::size_t>();
        ds.dt_s = header.at("dt_s").get<double>();
        ds.scenario = header.at("scenario").get<std::string>();
        const auto& names = header.at("class_names");
        if (!names.is_array() || names.size() != 2) {
            throw std::runtime_error("class_names must have two entries");
        }
        ds.class_names = {names[0].get<std::string>(), names[1].get<std::string>()};
    } catch (const std::exception& e) {
        throw std::runtime_error("read_dataset: " + path + ": line 1: bad header: " + e.what());
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.eof()) break;
        const std::string where = "read_dataset: " + path + ": line " + std::to_string(line_no);
        if (line.size() != ds.n_intervals + 2) {
            throw std::runtime_error(where + ": expected " + std::to_string(ds.n_intervals + 2) +
                                     " characters, got " + std::to_string(line.size()));
        }
        if ((line[0] != '0' && line[0] != '1') || line[1] != ',') {
            throw std::runtime_error(where + ": expected '<label>,' prefix with label 0 or 1");
        }
        MeasurementRecord rec;
        rec.label = line[0] - '0';
        rec.bits.resize(ds.n_intervals);
        for (std::size_t j = 0; j < ds.n_intervals; ++j) {
            const char c = line[j + 2];
            if (c != '0' && c != '1') {
                throw std::runtime_error(where + ": bit character '" + std::string(1, c) +
                                         "' at position " + std::to_string(j) +
                                         " is outside {0,1}");
            }
            rec.bits[j] = static_cast<std::uint8_t>(c - '0');
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

IngestResult ingest_raw_counts(const std::string& path, std::size_t n_intervals,
                               const std::vector<int>& labels) {
    require(n_intervals >= 1, "ingest_raw_counts: n_intervals must be at least 1");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ingest_raw_counts: cannot open " + path);

    std::string stream;
    char c;
    while (in.get(c)) {
        if (c == '\n' || c == '\r') continue;
        if (c != '0' && c != '1') {
            throw std::runtime_error("ingest_raw_counts: " + path + ": character '" +
                                     std::string(1, c) + "' is outside {0,1}");
        }
        stream.push_back(c);
    }

    IngestResult result;
    result.dataset.n_intervals = n_intervals;
    result.dataset.scenario = "raw_ingest";
    const std::size_t n_chunks = stream.size() / n_intervals;
    result.discarded_bits = stream.size() - n_chunks * n_intervals;
    if (!labels.empty() && labels.size() < n_chunks) {
        throw std::runtime_error("ingest_raw_counts: label mapping has " +
                                 std::to_string(labels.size()) + " entries for " +
                                 std::to_string(n_chunks) + " records");
    }
    for (std::size_t r = 0; r < n_chunks; ++r) {
        MeasurementRecord rec;
        rec.label = labels.empty() ? 0 : labels[r];
        rec.bits.resize(n_intervals);
        for (std::size_t j = 0; j < n_intervals; ++j) {
            rec.bits[j] = static_cast<std::uint8_t>(stream[r * n_intervals + j] - '0');
        }
        result.dataset.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace nanonmr
