#include "nanonmr/classifier_corr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace nanonmr {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Bit i lives in word i/64 at position i%64 (LSB first).
std::vector<std::uint64_t> pack_bits(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) words[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    return words;
}

// Number of positions i in [0, len) where bit i and bit i+k differ.
std::size_t count_disagreements(const std::vector<std::uint64_t>& words, std::size_t k,
                                std::size_t len) {
    const std::size_t word_shift = k / 64;
    const unsigned bit_shift = static_cast<unsigned>(k % 64);
    std::size_t disagree = 0;
    const std::size_t n_words = (len + 63) / 64;
    for (std::size_t m = 0; m < n_words; ++m) {
        std::uint64_t shifted = words[m + word_shift] >> bit_shift;
        if (bit_shift != 0 && m + word_shift + 1 < words.size()) {
            shifted |= words[m + word_shift + 1] << (64 - bit_shift);
        }
        std::uint64_t diff = words[m] ^ shifted;
        const std::size_t lanes = std::min<std::size_t>(64, len - m * 64);
        if (lanes < 64) diff &= (std::uint64_t{1} << lanes) - 1;
        disagree += static_cast<std::size_t>(std::popcount(diff));
    }
    return disagree;
}

}  // namespace

std::size_t default_k_max(std::size_t n_intervals) {
    require(n_intervals >= 2, "default_k_max: need at least 2 intervals");
    return std::min<std::size_t>(n_intervals - 1, 4096);
}

std::vector<double> correlation_vector(const std::vector<std::uint8_t>& bits, std::size_t k_max) {
    const std::size_t n = bits.size();
    require(n >= 2, "correlation_vector: need at least 2 bits");
    require(k_max >= 1 && k_max <= n - 1, "correlation_vector: k_max must lie in [1, N-1]");

    const std::vector<std::uint64_t> words = pack_bits(bits);
    std::vector<double> corr(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        const std::size_t len = n - k;
        const std::size_t disagree = count_disagreements(words, k, len);
        // Each agreeing pair contributes +1 and each disagreeing pair -1.
        const auto sum = static_cast<double>(len) - 2.0 * static_cast<double>(disagree);
        corr[k - 1] = sum / static_cast<double>(len);
    }
    return corr;
}

CorrelationCentroids fit_centroids(const Dataset& train, std::size_t k_max) {
    CorrelationCentroids cent;
    cent.k_max = k_max;
    cent.c0.assign(k_max, 0.0);
    cent.c1.assign(k_max, 0.0);
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    for (const MeasurementRecord& rec : train.records) {
        const std::vector<double> corr = correlation_vector(rec.bits, k_max);
        std::vector<double>& acc = rec.label == 0 ? cent.c0 : cent.c1;
        for (std::size_t k = 0; k < k_max; ++k) acc[k] += corr[k];
        (rec.label == 0 ? n0 : n1) += 1;
    }
    require(n0 > 0 && n1 > 0, "fit_centroids: both classes must be present");
    for (std::size_t k = 0; k < k_max; ++k) {
        cent.c0[k] /= static_cast<double>(n0);
        cent.c1[k] /= static_cast<double>(n1);
    }
    return cent;
}

CorrDecision classify_corr(const std::vector<std::uint8_t>& bits,
                           const CorrelationCentroids& centroids) {
    require(centroids.c0.size() == centroids.k_max && centroids.c1.size() == centroids.k_max,
            "classify_corr: centroid lengths must match k_max");
    const std::vector<double> corr = correlation_vector(bits, centroids.k_max);
    double sq0 = 0.0;
    double sq1 = 0.0;
    for (std::size_t k = 0; k < centroids.k_max; ++k) {
        const double e0 = corr[k] - centroids.c0[k];
        const double e1 = corr[k] - centroids.c1[k];
        sq0 += e0 * e0;
        sq1 += e1 * e1;
    }
    CorrDecision decision;
    decision.d0 = std::sqrt(sq0);
    decision.d1 = std::sqrt(sq1);
    decision.label = decision.d0 < decision.d1 ? 0 : 1;
    return decision;
}

}  // namespace nanonmr
