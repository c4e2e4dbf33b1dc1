#include "nanonmr/signal_model.hpp"

#include <cmath>
#include <stdexcept>

namespace nanonmr {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void SignalSpec::validate() const {
    require(std::isfinite(omega) && omega > 0.0, "SignalSpec: omega must be positive");
    require(std::isfinite(g) && g >= 0.0, "SignalSpec: g must be non-negative");
    require(dt > 0.0 && std::isfinite(dt), "SignalSpec: dt must be positive");
    require(n_intervals >= 1, "SignalSpec: n_intervals must be at least 1");
    require(detector.eta_false >= 0.0 && detector.eta_false <= detector.eta_true &&
                detector.eta_true <= 1.0,
            "SignalSpec: efficiencies must satisfy 0 <= eta_false <= eta_true <= 1");
    if (noise.magnetic) {
        require(noise.magnetic->sigma_b >= 0.0, "SignalSpec: sigma_b must be non-negative");
    }
    if (noise.amplitude) {
        require(noise.amplitude->sigma >= 0.0, "SignalSpec: amplitude sigma must be non-negative");
    }
    if (noise.phase_jump || phi_policy == PhiPolicy::jump_once) {
        require(n_intervals >= 2, "SignalSpec: a phase jump needs at least 2 intervals");
    }
}

std::vector<double> ResolutionSpec::component_frequencies() const {
    std::vector<double> freqs(n_components);
    if (n_components == 1) {
        freqs[0] = delta_c;
        return freqs;
    }
    const double lo = delta_c - delta_gap / 2.0;
    const double step = delta_gap / static_cast<double>(n_components - 1);
    for (std::size_t i = 0; i < n_components; ++i) {
        freqs[i] = lo + step * static_cast<double>(i);
    }
    return freqs;
}

void ResolutionSpec::validate() const {
    require(std::isfinite(delta_c), "ResolutionSpec: delta_c must be finite");
    require(delta_gap >= 0.0 && std::isfinite(delta_gap),
            "ResolutionSpec: delta_gap must be non-negative");
    require(n_components >= 1, "ResolutionSpec: n_components must be at least 1");
    require(delta_c - delta_gap / 2.0 > 0.0,
            "ResolutionSpec: component frequencies must stay positive");
    require(ou.reversion_speed > 0.0, "ResolutionSpec: reversion_speed must be positive");
    require(ou.volatility >= 0.0, "ResolutionSpec: volatility must be non-negative");
    require(dt > 0.0 && std::isfinite(dt), "ResolutionSpec: dt must be positive");
    require(n_intervals >= 1, "ResolutionSpec: n_intervals must be at least 1");
}

double ramsey_success_prob(double g, double omega, double phi, double t, double dt) {
    require(omega > 0.0, "ramsey_success_prob: omega must be positive");
    require(dt > 0.0, "ramsey_success_prob: dt must be positive");
    require(t >= dt, "ramsey_success_prob: t must be at least dt");
    const double accumulated =
        (g / (2.0 * omega)) * (std::sin(omega * t + phi) - std::sin(omega * (t - dt) + phi));
    const double s = std::sin(accumulated + kPi / 4.0);
    return s * s;
}

double noisy_success_prob(const SignalSpec& spec, const NoiseRealization& realization,
                          std::size_t interval_index) {
    const std::size_t n = spec.n_intervals;
    require(interval_index < n, "noisy_success_prob: interval_index out of range");
    require(realization.phase.size() == n && realization.amplitude.size() == n &&
                realization.b_offset.size() == n,
            "noisy_success_prob: realization length mismatch");

    const std::size_t j = interval_index;
    const double t = spec.dt * static_cast<double>(j + 1);
    const double phi = realization.phase[j];
    const double amp = realization.amplitude[j];
    const double b = realization.b_offset[j];

    const double accumulated =
        (amp / (2.0 * spec.omega)) *
        (std::sin(spec.omega * t + phi) - std::sin(spec.omega * (t - spec.dt) + phi));
    const double s = std::sin(accumulated + b * spec.dt / 2.0 + kPi / 4.0);
    return s * s;
}

double detector_success_prob(double p, const DetectorSpec& det) {
    require(p >= 0.0 && p <= 1.0, "detector_success_prob: p must lie in [0, 1]");
    return det.eta_true * p + det.eta_false * (1.0 - p);
}

NoiseRealization sample_noise_realization(const SignalSpec& spec, RngStream& rng) {
    const std::size_t n = spec.n_intervals;
    NoiseRealization real;

    double phi0 = spec.phi_value;
    if (spec.phi_policy != PhiPolicy::fixed) phi0 = rng.uniform(0.0, kTwoPi);
    real.phase.assign(n, phi0);
    if (spec.noise.phase_jump || spec.phi_policy == PhiPolicy::jump_once) {
        // One change point interior to the record: intervals {jump..n-1} see
        // a fresh independent uniform phase.
        const std::size_t jump = 1 + rng.uniform_index(n - 1);
        const double phi1 = rng.uniform(0.0, kTwoPi);
        for (std::size_t j = jump; j < n; ++j) real.phase[j] = phi1;
    }

    if (spec.noise.amplitude) {
        real.amplitude.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            real.amplitude[j] =
                spec.noise.amplitude->mean + spec.noise.amplitude->sigma * rng.normal();
        }
    } else {
        real.amplitude.assign(n, spec.g);
    }

    if (spec.noise.magnetic) {
        const double sigma_b = spec.noise.magnetic->sigma_b;
        const double b0 = sigma_b * rng.normal();
        real.b_offset.assign(n, b0);
        if (spec.noise.magnetic->jump_once && n >= 2) {
            const std::size_t jump = 1 + rng.uniform_index(n - 1);
            const double b1 = sigma_b * rng.normal();
            for (std::size_t j = jump; j < n; ++j) real.b_offset[j] = b1;
        }
    } else {
        real.b_offset.assign(n, 0.0);
    }

    return real;
}

std::vector<double> sample_ou_path_from(const OUParams& params, double x0, std::size_t n_steps,
                                        double dt, RngStream& rng) {
    require(dt > 0.0, "sample_ou_path: dt must be positive");
    require(params.reversion_speed > 0.0, "sample_ou_path: reversion_speed must be positive");
    require(params.reversion_speed * dt < 1.0,
            "sample_ou_path: theta * dt must be below 1 for a stable recursion");
    require(n_steps >= 1, "sample_ou_path: n_steps must be at least 1");

    std::vector<double> path(n_steps);
    path[0] = x0;
    const double theta = params.reversion_speed;
    const double sig_dt = params.volatility * std::sqrt(dt);
    for (std::size_t j = 0; j + 1 < n_steps; ++j) {
        const double x = path[j];
        path[j + 1] = x - theta * (x - params.mean) * dt + sig_dt * rng.normal();
    }
    return path;
}

std::vector<double> sample_ou_path(const OUParams& params, std::size_t n_steps, double dt,
                                   RngStream& rng) {
    double x0 = 0.0;
    if (params.x0_policy == OuStartPolicy::stationary_draw) {
        x0 = params.mean + std::sqrt(params.stationary_variance()) * rng.normal();
    }
    return sample_ou_path_from(params, x0, n_steps, dt, rng);
}

double ou_success_prob(const ResolutionSpec& res, std::span<const QuadraturePair> quadratures,
                       double t) {
    const std::vector<double> freqs = res.component_frequencies();
    require(quadratures.size() == freqs.size(),
            "ou_success_prob: quadrature count must match n_components");
    const double t_prev = t - res.dt;
    double accumulated = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double d = freqs[i];
        require(d > 0.0, "ou_success_prob: component frequencies must be positive");
        accumulated += (quadratures[i].a / d) * (std::sin(d * t) - std::sin(d * t_prev)) +
                       (quadratures[i].b / d) * (std::cos(d * t) - std::cos(d * t_prev));
    }
    const double s = std::sin(accumulated + kPi / 4.0);
    return s * s;
}

}  // namespace nanonmr
