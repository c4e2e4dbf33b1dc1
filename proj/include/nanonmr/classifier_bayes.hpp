#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nanonmr/dataset.hpp"
#include "nanonmr/signal_model.hpp"

namespace nanonmr {

struct LikelihoodConfig {
    std::size_t phase_grid_size = 128;
    double probability_floor = 1e-12;  // clamp into [floor, 1-floor] before logs
    std::size_t ou_sample_count = 1000;

    void validate() const;
};

// Bernoulli log-likelihood sum_j x_j log p_j + (1-x_j) log(1-p_j) with the
// probabilities clamped into [floor, 1-floor]; always finite.
double log_likelihood(const std::vector<std::uint8_t>& bits, std::span<const double> probs,
                      double probability_floor = 1e-12);

// Per-phase log-likelihood pieces for one signal hypothesis on a fixed
// timing grid: loglik_k(x) = base[k] + sum over set bits j of
// ones_weight[j*G + k]. Built once per hypothesis, shared by all records.
struct PhaseLogLikTable {
    std::vector<double> phases;       // grid over [0, 2*pi)
    std::vector<double> base;         // [G]: sum_j log(1 - q_jk)
    std::vector<double> ones_weight;  // [j*G + k]: log q_jk - log(1 - q_jk)
    std::size_t grid_size = 0;
    std::size_t n_intervals = 0;
};

PhaseLogLikTable build_phase_table(const SignalSpec& spec, const LikelihoodConfig& cfg);

struct PhaseLikelihood {
    double best_phase = 0.0;
    double best_loglik = 0.0;
};

// Maximized log-likelihood over a uniform phase grid of cfg.phase_grid_size
// points; ties broken toward the smaller phase.
PhaseLikelihood max_likelihood_over_phases(const std::vector<std::uint8_t>& bits,
                                           const SignalSpec& spec, const LikelihoodConfig& cfg);

struct BayesDecision {
    int label = 0;
    double margin = 0.0;  // L0 - L1; positive favors class 0
};

// Likelihood-ratio decision: label 0 iff L0 > L1, ties to label 1. spec0 and
// spec1 must share the timing grid; each contributes its own omega, g and
// detector to its hypothesis.
BayesDecision discriminate(const std::vector<std::uint8_t>& bits, const SignalSpec& spec0,
                           const SignalSpec& spec1, const LikelihoodConfig& cfg);

// Batch path building each hypothesis table once; record r of the output
// equals discriminate(records[r].bits, ...) bit for bit.
std::vector<BayesDecision> discriminate_batch(const std::vector<MeasurementRecord>& records,
                                              const SignalSpec& spec0, const SignalSpec& spec1,
                                              const LikelihoodConfig& cfg, unsigned n_threads = 1);

// K sampled OU quadrature path sets: sample k, interval j, component i at
// flat index (k*n_intervals + j)*n_components + i. Values are taken at each
// interval's end time. Draw order: per sample, per component, A path then B
// path.
struct QuadratureSets {
    std::vector<QuadraturePair> values;
    std::size_t k_samples = 0;
    std::size_t n_intervals = 0;
    std::size_t n_components = 0;
};

QuadratureSets draw_quadrature_sets(const OUParams& params, std::size_t n_components,
                                    std::size_t n_intervals, double dt, std::size_t k_samples,
                                    RngStream& rng);

// Max over the sampled path sets of the Bernoulli log-likelihood under the
// hypothesis res; probabilities from the resolution success formula.
double max_loglik_over_sets(const std::vector<std::uint8_t>& bits, const ResolutionSpec& res,
                            const QuadratureSets& sets, double probability_floor = 1e-12);

// Draws k_samples sets from rng (sequentially, so nested sample counts give
// non-decreasing maxima) and maximizes.
double max_likelihood_over_ou(const std::vector<std::uint8_t>& bits, const ResolutionSpec& res,
                              std::size_t k_samples, RngStream& rng,
                              double probability_floor = 1e-12);

struct ResolveDecision {
    int label = 0;        // 0: single frequency (gap 0), 1: split by delta_n
    double margin = 0.0;  // L_single - L_split
};

// Single-vs-split hypothesis test. One shared draw of K path sets is reused
// for both hypotheses so the comparison differs only in the frequency gap.
ResolveDecision resolve(const std::vector<std::uint8_t>& bits, double delta_n,
                        const ResolutionSpec& res_base, std::size_t k_samples, RngStream& rng,
                        double probability_floor = 1e-12);

// Batch resolve; record r uses RNG substream (seed, r), so results are
// independent of thread count.
std::vector<ResolveDecision> resolve_batch(const std::vector<MeasurementRecord>& records,
                                           double delta_n, const ResolutionSpec& res_base,
                                           const LikelihoodConfig& cfg, std::uint64_t seed,
                                           unsigned n_threads = 1);

}  // namespace nanonmr
