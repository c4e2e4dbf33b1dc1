#pragma once

#include <cstdint>
#include <vector>

#include "nanonmr/dataset.hpp"

namespace nanonmr {

// Per-class averaged autocorrelation vectors; entry [k-1] is the lag-k value.
struct CorrelationCentroids {
    std::vector<double> c0;
    std::vector<double> c1;
    std::size_t k_max = 0;
};

struct CorrDecision {
    int label = 0;
    double d0 = 0.0;  // L2 distance to the class-0 centroid
    double d1 = 0.0;
};

// Largest useful lag: N-1, capped at 4096 for very long records where the
// full analysis is impractical (callers should mark such runs as partial).
std::size_t default_k_max(std::size_t n_intervals);

// Bits mapped 0 -> -1, 1 -> +1; C_k = (1/(N-k)) * sum_i s_i s_{i+k} for
// k = 1..k_max. The zero-lag term (identically 1) is excluded.
std::vector<double> correlation_vector(const std::vector<std::uint8_t>& bits, std::size_t k_max);

// Per-class arithmetic mean of the records' correlation vectors.
CorrelationCentroids fit_centroids(const Dataset& train, std::size_t k_max);

// Nearest centroid in L2; ties go to class 1.
CorrDecision classify_corr(const std::vector<std::uint8_t>& bits,
                           const CorrelationCentroids& centroids);

}  // namespace nanonmr
