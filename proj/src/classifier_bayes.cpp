#include "nanonmr/classifier_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nanonmr/parallel.hpp"

namespace nanonmr {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double clamp_probability(double p, double floor) {
    return std::min(std::max(p, floor), 1.0 - floor);
}

struct PhaseEval {
    std::size_t best_index = 0;
    double best_loglik = 0.0;
};

// loglik per phase = base + sum over set bits of the per-interval weight;
// argmax scanned in ascending phase order with strict improvement, so ties
// go to the smaller phase.
PhaseEval evaluate_phase_table(const PhaseLogLikTable& table, const std::vector<std::uint8_t>& bits,
                               std::vector<double>& scratch) {
    const std::size_t g = table.grid_size;
    scratch.assign(table.base.begin(), table.base.end());
    for (std::size_t j = 0; j < table.n_intervals; ++j) {
        if (!bits[j]) continue;
        const double* w = table.ones_weight.data() + j * g;
        for (std::size_t k = 0; k < g; ++k) scratch[k] += w[k];
    }
    PhaseEval eval;
    eval.best_loglik = scratch[0];
    for (std::size_t k = 1; k < g; ++k) {
        if (scratch[k] > eval.best_loglik) {
            eval.best_loglik = scratch[k];
            eval.best_index = k;
        }
    }
    return eval;
}

}  // namespace

void LikelihoodConfig::validate() const {
    require(phase_grid_size >= 2, "LikelihoodConfig: phase_grid_size must be at least 2");
    require(probability_floor > 0.0 && probability_floor < 0.5,
            "LikelihoodConfig: probability_floor must lie in (0, 0.5)");
    require(ou_sample_count >= 1, "LikelihoodConfig: ou_sample_count must be at least 1");
}

double log_likelihood(const std::vector<std::uint8_t>& bits, std::span<const double> probs,
                      double probability_floor) {
    require(bits.size() == probs.size(), "log_likelihood: length mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < bits.size(); ++j) {
        const double p = clamp_probability(probs[j], probability_floor);
        sum += bits[j] ? std::log(p) : std::log(1.0 - p);
    }
    return sum;
}

PhaseLogLikTable build_phase_table(const SignalSpec& spec, const LikelihoodConfig& cfg) {
    cfg.validate();
    spec.validate();
    const std::size_t g = cfg.phase_grid_size;
    const std::size_t n = spec.n_intervals;

    PhaseLogLikTable table;
    table.grid_size = g;
    table.n_intervals = n;
    table.phases.resize(g);
    for (std::size_t k = 0; k < g; ++k) {
        table.phases[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(g);
    }
    table.base.assign(g, 0.0);
    table.ones_weight.resize(n * g);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = spec.dt * static_cast<double>(j + 1);
        double* w = table.ones_weight.data() + j * g;
        for (std::size_t k = 0; k < g; ++k) {
            const double p = ramsey_success_prob(spec.g, spec.omega, table.phases[k], t, spec.dt);
            const double q =
                clamp_probability(detector_success_prob(p, spec.detector), cfg.probability_floor);
            const double log_one = std::log(q);
            const double log_zero = std::log(1.0 - q);
            table.base[k] += log_zero;
            w[k] = log_one - log_zero;
        }
    }
    return table;
}

PhaseLikelihood max_likelihood_over_phases(const std::vector<std::uint8_t>& bits,
                                           const SignalSpec& spec, const LikelihoodConfig& cfg) {
    require(bits.size() == spec.n_intervals,
            "max_likelihood_over_phases: record length must equal n_intervals");
    const PhaseLogLikTable table = build_phase_table(spec, cfg);
    std::vector<double> scratch;
    const PhaseEval eval = evaluate_phase_table(table, bits, scratch);
    return {table.phases[eval.best_index], eval.best_loglik};
}

BayesDecision discriminate(const std::vector<std::uint8_t>& bits, const SignalSpec& spec0,
                           const SignalSpec& spec1, const LikelihoodConfig& cfg) {
    MeasurementRecord rec;
    rec.bits = bits;
    return discriminate_batch({rec}, spec0, spec1, cfg)[0];
}

std::vector<BayesDecision> discriminate_batch(const std::vector<MeasurementRecord>& records,
                                              const SignalSpec& spec0, const SignalSpec& spec1,
                                              const LikelihoodConfig& cfg, unsigned n_threads) {
    require(spec0.dt == spec1.dt && spec0.n_intervals == spec1.n_intervals,
            "discriminate: hypotheses must share dt and n_intervals");
    const PhaseLogLikTable table0 = build_phase_table(spec0, cfg);
    const PhaseLogLikTable table1 = build_phase_table(spec1, cfg);

    std::vector<BayesDecision> decisions(records.size());
    parallel_for_index(records.size(), n_threads, [&](std::size_t r) {
        const std::vector<std::uint8_t>& bits = records[r].bits;
        require(bits.size() == spec0.n_intervals,
                "discriminate: record length must equal n_intervals");
        std::vector<double> scratch;
        const double l0 = evaluate_phase_table(table0, bits, scratch).best_loglik;
        const double l1 = evaluate_phase_table(table1, bits, scratch).best_loglik;
        decisions[r].margin = l0 - l1;
        decisions[r].label = l0 > l1 ? 0 : 1;
    });
    return decisions;
}

QuadratureSets draw_quadrature_sets(const OUParams& params, std::size_t n_components,
                                    std::size_t n_intervals, double dt, std::size_t k_samples,
                                    RngStream& rng) {
    require(k_samples >= 1, "draw_quadrature_sets: need at least one sample");
    QuadratureSets sets;
    sets.k_samples = k_samples;
    sets.n_intervals = n_intervals;
    sets.n_components = n_components;
    sets.values.resize(k_samples * n_intervals * n_components);
    for (std::size_t k = 0; k < k_samples; ++k) {
        for (std::size_t i = 0; i < n_components; ++i) {
            // Paths carry n_intervals+1 points; index j+1 is the value at
            // interval j's end time, matching the generator convention.
            const std::vector<double> a = sample_ou_path(params, n_intervals + 1, dt, rng);
            const std::vector<double> b = sample_ou_path(params, n_intervals + 1, dt, rng);
            for (std::size_t j = 0; j < n_intervals; ++j) {
                sets.values[(k * n_intervals + j) * n_components + i] = {a[j + 1], b[j + 1]};
            }
        }
    }
    return sets;
}

namespace {

// (sin d t - sin d t_prev)/d and (cos d t - cos d t_prev)/d per component
// and interval, so each likelihood evaluation is a short dot product.
std::vector<double> quadrature_coefficients(const ResolutionSpec& res) {
    const std::vector<double> freqs = res.component_frequencies();
    const std::size_t c = freqs.size();
    std::vector<double> coef(res.n_intervals * 2 * c);
    for (std::size_t j = 0; j < res.n_intervals; ++j) {
        const double t = res.dt * static_cast<double>(j + 1);
        const double t_prev = t - res.dt;
        for (std::size_t i = 0; i < c; ++i) {
            const double d = freqs[i];
            coef[(j * c + i) * 2] = (std::sin(d * t) - std::sin(d * t_prev)) / d;
            coef[(j * c + i) * 2 + 1] = (std::cos(d * t) - std::cos(d * t_prev)) / d;
        }
    }
    return coef;
}

double max_loglik_with_coefficients(const std::vector<std::uint8_t>& bits,
                                    const std::vector<double>& coef, const QuadratureSets& sets,
                                    double floor) {
    const std::size_t c = sets.n_components;
    const std::size_t n = sets.n_intervals;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sets.k_samples; ++k) {
        const QuadraturePair* quads = sets.values.data() + k * n * c;
        double loglik = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double accumulated = 0.0;
            for (std::size_t i = 0; i < c; ++i) {
                const QuadraturePair& qp = quads[j * c + i];
                accumulated += qp.a * coef[(j * c + i) * 2] + qp.b * coef[(j * c + i) * 2 + 1];
            }
            const double s = std::sin(accumulated + kPi / 4.0);
            const double q = clamp_probability(s * s, floor);
            loglik += bits[j] ? std::log(q) : std::log(1.0 - q);
        }
        if (loglik > best) best = loglik;
    }
    return best;
}

}  // namespace

double max_loglik_over_sets(const std::vector<std::uint8_t>& bits, const ResolutionSpec& res,
                            const QuadratureSets& sets, double probability_floor) {
    res.validate();
    require(bits.size() == res.n_intervals,
            "max_loglik_over_sets: record length must equal n_intervals");
    require(sets.n_intervals == res.n_intervals && sets.n_components == res.n_components,
            "max_loglik_over_sets: path sets shaped for a different spec");
    return max_loglik_with_coefficients(bits, quadrature_coefficients(res), sets,
                                        probability_floor);
}

double max_likelihood_over_ou(const std::vector<std::uint8_t>& bits, const ResolutionSpec& res,
                              std::size_t k_samples, RngStream& rng, double probability_floor) {
    const QuadratureSets sets =
        draw_quadrature_sets(res.ou, res.n_components, res.n_intervals, res.dt, k_samples, rng);
    return max_loglik_over_sets(bits, res, sets, probability_floor);
}

ResolveDecision resolve(const std::vector<std::uint8_t>& bits, double delta_n,
                        const ResolutionSpec& res_base, std::size_t k_samples, RngStream& rng,
                        double probability_floor) {
    require(delta_n > 0.0, "resolve: delta_n must be positive");
    ResolutionSpec single = res_base;
    single.delta_gap = 0.0;
    ResolutionSpec split = res_base;
    split.delta_gap = delta_n;
    single.validate();
    split.validate();

    const QuadratureSets sets = draw_quadrature_sets(res_base.ou, res_base.n_components,
                                                     res_base.n_intervals, res_base.dt, k_samples,
                                                     rng);
    const double l_single = max_loglik_over_sets(bits, single, sets, probability_floor);
    const double l_split = max_loglik_over_sets(bits, split, sets, probability_floor);

    ResolveDecision decision;
    decision.margin = l_single - l_split;
    decision.label = l_single > l_split ? 0 : 1;
    return decision;
}

std::vector<ResolveDecision> resolve_batch(const std::vector<MeasurementRecord>& records,
                                           double delta_n, const ResolutionSpec& res_base,
                                           const LikelihoodConfig& cfg, std::uint64_t seed,
                                           unsigned n_threads) {
    cfg.validate();
    std::vector<ResolveDecision> decisions(records.size());
    parallel_for_index(records.size(), n_threads, [&](std::size_t r) {
        RngStream rng = RngStream::substream(seed, r);
        decisions[r] = resolve(records[r].bits, delta_n, res_base, cfg.ou_sample_count, rng,
                               cfg.probability_floor);
    });
    return decisions;
}

}  // namespace nanonmr
