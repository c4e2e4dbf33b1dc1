#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nanonmr/classifier_bayes.hpp"
#include "nanonmr/dataset.hpp"
#include "nanonmr/rng.hpp"

using namespace nanonmr;

namespace {

SignalSpec ideal_spec(double omega = 10.0, double g = 10.0) {
    SignalSpec s;
    s.omega = omega;
    s.g = g;
    s.phi_policy = PhiPolicy::uniform_random;
    s.dt = 0.5;
    s.n_intervals = 1000;
    return s;
}

ResolutionSpec paper_resolution(double gap) {
    ResolutionSpec res;
    res.delta_c = 0.5;
    res.delta_gap = gap;
    res.n_components = 2;
    res.ou.mean = 0.0;
    res.ou.reversion_speed = 1.0 / 256.0;
    res.ou.volatility = (kPi / 10.0) * std::sqrt(4.0 / (kPi * 256.0));
    res.ou.x0_policy = OuStartPolicy::stationary_draw;
    res.dt = 1.0;
    res.n_intervals = 512;
    return res;
}

std::vector<std::uint8_t> random_bits(std::size_t n, RngStream& rng, double p = 0.5) {
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = rng.uniform() < p ? 1 : 0;
    return bits;
}

}  // namespace

TEST_CASE("log_likelihood: four half-probability intervals") {
    const std::vector<std::uint8_t> bits{1, 0, 1, 1};
    const std::vector<double> probs(4, 0.5);
    CHECK(log_likelihood(bits, probs) == doctest::Approx(-2.7725887222397812).epsilon(1e-14));
}

TEST_CASE("log_likelihood: perfectly matched extreme probabilities are near zero") {
    const std::vector<std::uint8_t> bits{1, 0, 0, 1, 1, 0, 1, 0};
    std::vector<double> probs(8);
    for (std::size_t i = 0; i < 8; ++i) probs[i] = bits[i] ? 1.0 - 1e-12 : 1e-12;
    const double l = log_likelihood(bits, probs);
    CHECK(std::abs(l) < 8.0 * 1e-12 * 1.01);
}

TEST_CASE("log_likelihood: equals a high-precision product oracle") {
    RngStream rng(61);
    for (int rep = 0; rep < 100; ++rep) {
        const std::vector<std::uint8_t> bits = random_bits(8, rng);
        std::vector<double> probs(8);
        for (auto& p : probs) p = rng.uniform(0.02, 0.98);

        long double product = 1.0L;
        for (std::size_t j = 0; j < 8; ++j) {
            const long double p = probs[j];
            product *= bits[j] ? p : (1.0L - p);
        }
        const double oracle = static_cast<double>(std::log(product));
        const double fast = log_likelihood(bits, probs);
        CHECK(std::abs(fast - oracle) <= 1e-12 * std::abs(oracle));
    }
}

TEST_CASE("log_likelihood: clamping keeps exact 0/1 probabilities finite") {
    const std::vector<std::uint8_t> bits{1, 0, 1, 0};
    const std::vector<double> probs{0.0, 1.0, 1.0, 0.0};
    const double l = log_likelihood(bits, probs);
    CHECK(std::isfinite(l));
    CHECK(l < 0.0);
}

TEST_CASE("log_likelihood: permutation covariance and length checking") {
    RngStream rng(62);
    std::vector<std::uint8_t> bits = random_bits(12, rng);
    std::vector<double> probs(12);
    for (auto& p : probs) p = rng.uniform(0.1, 0.9);
    const double base = log_likelihood(bits, probs);

    // Rotate both sequences together.
    std::rotate(bits.begin(), bits.begin() + 5, bits.end());
    std::rotate(probs.begin(), probs.begin() + 5, probs.end());
    CHECK(log_likelihood(bits, probs) == doctest::Approx(base).epsilon(1e-13));

    probs.pop_back();
    CHECK_THROWS(log_likelihood(bits, probs));
}

TEST_CASE("phase maximization: lands within a grid step of the generating phase") {
    SignalSpec spec = ideal_spec();
    spec.phi_policy = PhiPolicy::fixed;
    spec.phi_value = kPi;  // grid point 64 of 128 is exactly pi
    RngStream rng(63);
    const MeasurementRecord rec = generate_record(spec, 0, rng);

    const LikelihoodConfig cfg;
    const PhaseLikelihood best = max_likelihood_over_phases(rec.bits, spec, cfg);
    // One record carries finite evidence: the argmax may sit on a neighboring
    // grid point, but not farther.
    const double step = kTwoPi / static_cast<double>(cfg.phase_grid_size);
    CHECK(std::abs(best.best_phase - kPi) <= 2.0 * step);

    // By definition of the maximum, the true phase (itself a grid point)
    // cannot score higher.
    std::vector<double> probs(spec.n_intervals);
    for (std::size_t j = 0; j < spec.n_intervals; ++j) {
        const double t = spec.dt * static_cast<double>(j + 1);
        probs[j] = detector_success_prob(
            ramsey_success_prob(spec.g, spec.omega, kPi, t, spec.dt), spec.detector);
    }
    CHECK(best.best_loglik >= log_likelihood(rec.bits, probs) - 1e-9);
}

TEST_CASE("phase maximization: two-point grid picks the larger evaluation") {
    SignalSpec spec = ideal_spec();
    spec.n_intervals = 64;
    spec.phi_policy = PhiPolicy::fixed;
    spec.phi_value = 0.0;
    RngStream rng(64);
    const MeasurementRecord rec = generate_record(spec, 0, rng);

    LikelihoodConfig cfg;
    cfg.phase_grid_size = 2;
    const PhaseLikelihood best = max_likelihood_over_phases(rec.bits, spec, cfg);

    double manual[2];
    for (int k = 0; k < 2; ++k) {
        const double phi = kTwoPi * k / 2.0;
        std::vector<double> probs(spec.n_intervals);
        for (std::size_t j = 0; j < spec.n_intervals; ++j) {
            const double t = spec.dt * static_cast<double>(j + 1);
            probs[j] = detector_success_prob(
                ramsey_success_prob(spec.g, spec.omega, phi, t, spec.dt), spec.detector);
        }
        manual[k] = log_likelihood(rec.bits, probs, cfg.probability_floor);
    }
    CHECK(best.best_loglik ==
          doctest::Approx(std::max(manual[0], manual[1])).epsilon(1e-10));
    CHECK(best.best_phase == (manual[0] >= manual[1] ? 0.0 : kPi));
}

TEST_CASE("phase maximization: agrees with a naive exhaustive loop") {
    SignalSpec spec = ideal_spec();
    spec.n_intervals = 16;
    RngStream rng(65);
    for (int rep = 0; rep < 20; ++rep) {
        const std::vector<std::uint8_t> bits = random_bits(16, rng);
        const LikelihoodConfig cfg;
        const PhaseLikelihood fast = max_likelihood_over_phases(bits, spec, cfg);

        double best_l = -1e300;
        double best_phi = 0.0;
        for (std::size_t k = 0; k < cfg.phase_grid_size; ++k) {
            const double phi = kTwoPi * static_cast<double>(k) /
                               static_cast<double>(cfg.phase_grid_size);
            std::vector<double> probs(spec.n_intervals);
            for (std::size_t j = 0; j < spec.n_intervals; ++j) {
                const double t = spec.dt * static_cast<double>(j + 1);
                probs[j] = detector_success_prob(
                    ramsey_success_prob(spec.g, spec.omega, phi, t, spec.dt), spec.detector);
            }
            const double l = log_likelihood(bits, probs, cfg.probability_floor);
            if (l > best_l) {
                best_l = l;
                best_phi = phi;
            }
        }
        CHECK(fast.best_phase == best_phi);
        CHECK(fast.best_loglik == doctest::Approx(best_l).epsilon(1e-10));
    }
}

TEST_CASE("phase maximization: doubling the grid never lowers the maximum") {
    const SignalSpec spec = ideal_spec();
    RngStream rng(66);
    for (int rep = 0; rep < 10; ++rep) {
        const MeasurementRecord rec = generate_record(spec, 0, rng);
        LikelihoodConfig small;
        small.phase_grid_size = 64;
        LikelihoodConfig mid;
        mid.phase_grid_size = 128;
        LikelihoodConfig big;
        big.phase_grid_size = 256;
        const double l_small = max_likelihood_over_phases(rec.bits, spec, small).best_loglik;
        const double l_mid = max_likelihood_over_phases(rec.bits, spec, mid).best_loglik;
        const double l_big = max_likelihood_over_phases(rec.bits, spec, big).best_loglik;
        CHECK(l_small <= l_mid);
        CHECK(l_mid <= l_big);
    }
}

TEST_CASE("discriminate: class swap flips labels and negates margins") {
    const SignalSpec s0 = ideal_spec(10.0, 10.0);
    const SignalSpec s1 = ideal_spec(10.128, 10.0);
    const LikelihoodConfig cfg;
    RngStream rng(67);
    for (int rep = 0; rep < 10; ++rep) {
        const MeasurementRecord rec = generate_record(rep % 2 ? s1 : s0, rep % 2, rng);
        const BayesDecision fwd = discriminate(rec.bits, s0, s1, cfg);
        const BayesDecision rev = discriminate(rec.bits, s1, s0, cfg);
        CHECK(rev.margin == -fwd.margin);
        if (fwd.margin != 0.0) CHECK(fwd.label + rev.label == 1);
    }
}

TEST_CASE("discriminate: single-record call equals the batch path bit for bit") {
    const SignalSpec s0 = ideal_spec(10.0, 10.0);
    const SignalSpec s1 = ideal_spec(10.064, 10.0);
    const LikelihoodConfig cfg;
    const Dataset ds = generate_dataset(s0, s1, 10, 31);
    const std::vector<BayesDecision> batch = discriminate_batch(ds.records, s0, s1, cfg, 3);
    REQUIRE(batch.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const BayesDecision single = discriminate(ds.records[i].bits, s0, s1, cfg);
        CHECK(single.label == batch[i].label);
        CHECK(single.margin == batch[i].margin);
    }
}

TEST_CASE("discriminate: a widely separated pair is classified perfectly") {
    const SignalSpec s0 = ideal_spec(10.0, 10.0);
    const SignalSpec s1 = ideal_spec(10.256, 10.0);
    const LikelihoodConfig cfg;
    const Dataset ds = generate_dataset(s0, s1, 250, 71);
    const std::vector<BayesDecision> decisions = discriminate_batch(ds.records, s0, s1, cfg);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        if (decisions[i].label != ds.records[i].label) ++wrong;
    }
    CHECK(wrong <= 1);  // 500 easy records
}

TEST_CASE("discriminate: rejects mismatched timing grids") {
    const SignalSpec s0 = ideal_spec();
    SignalSpec s1 = ideal_spec();
    s1.dt = 0.25;
    const LikelihoodConfig cfg;
    const std::vector<std::uint8_t> bits(1000, 0);
    CHECK_THROWS(discriminate(bits, s0, s1, cfg));
}

TEST_CASE("ou likelihood: zero-volatility single sample is the coin-flip likelihood") {
    ResolutionSpec res = paper_resolution(0.0);
    res.ou.volatility = 0.0;
    res.ou.x0_policy = OuStartPolicy::zero;
    res.n_intervals = 64;
    RngStream rng(72);
    const std::vector<std::uint8_t> bits = random_bits(64, rng);
    RngStream draw(73);
    const double l = max_likelihood_over_ou(bits, res, 1, draw);
    CHECK(l == doctest::Approx(64.0 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("ou likelihood: K-sample maximum decomposes into sequential singles") {
    const ResolutionSpec res = paper_resolution(0.1);
    RngStream rng(74);
    const std::vector<std::uint8_t> bits = random_bits(res.n_intervals, rng);

    RngStream joint(75);
    const double max_joint = max_likelihood_over_ou(bits, res, 10, joint);

    RngStream sequential(75);
    double max_single = -1e300;
    for (int k = 0; k < 10; ++k) {
        max_single = std::max(max_single, max_likelihood_over_ou(bits, res, 1, sequential));
    }
    CHECK(max_joint == max_single);
}

TEST_CASE("ou likelihood: non-decreasing in the sample count") {
    const ResolutionSpec res = paper_resolution(0.1);
    RngStream rng(76);
    const std::vector<std::uint8_t> bits = random_bits(res.n_intervals, rng);
    double prev = -1e300;
    for (std::size_t k : {1, 5, 20, 60}) {
        RngStream draw(77);
        const double l = max_likelihood_over_ou(bits, res, k, draw);
        CHECK(l >= prev);
        prev = l;
    }
}

TEST_CASE("resolve: margin equals the difference of shared-draw likelihoods") {
    const ResolutionSpec base = paper_resolution(0.0);
    const double gap = 0.2;
    RngStream rng(78);
    const std::vector<std::uint8_t> bits = random_bits(base.n_intervals, rng);

    RngStream draw_a(79);
    const ResolveDecision dec = resolve(bits, gap, base, 50, draw_a);

    RngStream draw_b(79);
    const QuadratureSets sets = draw_quadrature_sets(base.ou, base.n_components,
                                                     base.n_intervals, base.dt, 50, draw_b);
    ResolutionSpec single = base;
    single.delta_gap = 0.0;
    ResolutionSpec split_spec = base;
    split_spec.delta_gap = gap;
    const double l_single = max_loglik_over_sets(bits, single, sets);
    const double l_split = max_loglik_over_sets(bits, split_spec, sets);
    CHECK(dec.margin == l_single - l_split);
    CHECK(dec.label == (l_single > l_split ? 0 : 1));
}

TEST_CASE("resolve: an easy split is recognized on at least 95% of records") {
    const ResolutionSpec base = paper_resolution(0.0);
    ResolutionSpec split_spec = base;
    split_spec.delta_gap = 0.4;
    const Dataset ds = generate_dataset(base, split_spec, 100, 80);

    LikelihoodConfig cfg;
    cfg.ou_sample_count = 400;
    const std::vector<ResolveDecision> decisions =
        resolve_batch(ds.records, 0.4, base, cfg, 81);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        if (decisions[i].label == ds.records[i].label) ++correct;
    }
    CHECK(correct >= 190);  // 95% of 200
}

TEST_CASE("resolve: deterministic given the batch seed and thread count") {
    const ResolutionSpec base = paper_resolution(0.0);
    ResolutionSpec split_spec = base;
    split_spec.delta_gap = 0.2;
    const Dataset ds = generate_dataset(base, split_spec, 5, 82);
    LikelihoodConfig cfg;
    cfg.ou_sample_count = 30;
    const auto a = resolve_batch(ds.records, 0.2, base, cfg, 83, 1);
    const auto b = resolve_batch(ds.records, 0.2, base, cfg, 83, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].label == b[i].label);
        CHECK(a[i].margin == b[i].margin);
    }
}
