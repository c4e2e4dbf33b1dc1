#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nanonmr/rng.hpp"

namespace nanonmr {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// Detection efficiencies of the readout channel. The ideal detector is
// {eta_true = 1, eta_false = 0}.
struct DetectorSpec {
    double eta_true = 1.0;
    double eta_false = 0.0;
};

enum class PhiPolicy { fixed, uniform_random, jump_once };

struct MagneticNoise {
    double sigma_b = 0.0;    // rad/s
    bool jump_once = true;   // offset changes once at a random interval boundary
};

struct AmplitudeNoise {
    double mean = 0.0;   // rad/s
    double sigma = 0.0;  // rad/s, unclipped Normal (negative amplitudes allowed)
};

struct NoiseSpec {
    bool phase_jump = false;
    std::optional<MagneticNoise> magnetic;
    std::optional<AmplitudeNoise> amplitude;
};

// Generative description of one experiment class for the frequency
// discrimination problem. All frequencies and amplitudes are angular (rad/s).
struct SignalSpec {
    double omega = 0.0;  // rad/s
    double g = 0.0;      // rad/s
    PhiPolicy phi_policy = PhiPolicy::uniform_random;
    double phi_value = 0.0;  // used when phi_policy == fixed
    double dt = 0.0;         // s
    std::size_t n_intervals = 0;
    DetectorSpec detector;
    NoiseSpec noise;

    void validate() const;  // throws std::invalid_argument on violation
};

// Per-interval nuisance values drawn for a single experiment. All three
// sequences always have length n_intervals: disabled noise channels are
// materialized at their degenerate values (constant phase, amplitude = g,
// b_offset = 0).
struct NoiseRealization {
    std::vector<double> phase;      // rad
    std::vector<double> amplitude;  // rad/s
    std::vector<double> b_offset;   // rad/s
};

enum class OuStartPolicy { zero, stationary_draw };

// Mean-reverting Gaussian process parameters. Relative to a (tau, c)
// parameterization: reversion_speed = 1/tau, volatility = sqrt(c).
struct OUParams {
    double mean = 0.0;
    double reversion_speed = 0.0;  // theta, 1/s
    double volatility = 0.0;       // sigma, 1/sqrt(s)
    OuStartPolicy x0_policy = OuStartPolicy::stationary_draw;

    double stationary_variance() const { return volatility * volatility / (2.0 * reversion_speed); }
};

// Generative description for the frequency resolution problem: n_components
// oscillators spread over [delta_c - delta_gap/2, delta_c + delta_gap/2],
// each with two OU-modulated quadratures. delta_gap == 0 is the
// single-frequency hypothesis.
struct ResolutionSpec {
    double delta_c = 0.0;    // rad/s
    double delta_gap = 0.0;  // rad/s
    std::size_t n_components = 2;
    OUParams ou;
    double dt = 0.0;  // s
    std::size_t n_intervals = 0;

    std::vector<double> component_frequencies() const;
    void validate() const;
};

// Quadrature values (A, B) of one component at one interval end time.
struct QuadraturePair {
    double a = 0.0;
    double b = 0.0;
};

// Success probability of a single prepare-evolve-measure interval ending at
// time t, for a sinusoidal signal of amplitude g, frequency omega and phase
// phi: sin^2( (g/(2 omega)) (sin(omega t + phi) - sin(omega (t-dt) + phi))
// + pi/4 ). The first interval has t == dt. omega must be positive.
double ramsey_success_prob(double g, double omega, double phi, double t, double dt);

// Same interval probability with the per-interval nuisance values of a
// realization: phase[j], amplitude[j], plus a static field offset b_offset[j]
// contributing b*dt/2 of accumulated phase (same 1/2 convention as the
// amplitude term).
double noisy_success_prob(const SignalSpec& spec, const NoiseRealization& realization,
                          std::size_t interval_index);

// Readout channel: eta_true * p + eta_false * (1 - p).
double detector_success_prob(double p, const DetectorSpec& det);

// Draws the nuisance values for one experiment. Phase jumps (when enabled)
// happen at a single interval boundary drawn uniformly from {1..N-1}; the
// magnetic offset has its own independent jump boundary.
NoiseRealization sample_noise_realization(const SignalSpec& spec, RngStream& rng);

// Euler-Maruyama recursion
//   x_{j+1} = x_j - theta * (x_j - mean) * dt + sigma * sqrt(dt) * z_j
// returning a path of length n_steps whose first element is x0 itself.
std::vector<double> sample_ou_path_from(const OUParams& params, double x0, std::size_t n_steps,
                                        double dt, RngStream& rng);

// As above with x0 chosen by params.x0_policy: zero, or a draw from the
// stationary distribution Normal(mean, sigma^2 / (2 theta)).
std::vector<double> sample_ou_path(const OUParams& params, std::size_t n_steps, double dt,
                                   RngStream& rng);

// Success probability for the resolution model at interval end time t, given
// the quadrature values of each component at that time:
// sin^2( sum_i [ (A_i/d_i)(sin d_i t - sin d_i (t-dt))
//              + (B_i/d_i)(cos d_i t - cos d_i (t-dt)) ] + pi/4 ).
// Note there is no 1/2 factor on the quadrature terms.
double ou_success_prob(const ResolutionSpec& res, std::span<const QuadraturePair> quadratures,
                       double t);

}  // namespace nanonmr
