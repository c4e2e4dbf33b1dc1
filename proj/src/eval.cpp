#include "nanonmr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "nanonmr/rng.hpp"

namespace nanonmr {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ErrorBreakdown error_probability(const std::vector<int>& predictions,
                                 const std::vector<int>& labels) {
    require(!labels.empty() && predictions.size() == labels.size(),
            "error_probability: need equal nonempty lengths");
    ErrorBreakdown out;
    std::size_t wrong0 = 0;
    std::size_t wrong1 = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] == 0 || labels[i] == 1, "error_probability: labels must be 0 or 1");
        if (labels[i] == 0) {
            ++out.n_class0;
            if (predictions[i] != 0) ++wrong0;
        } else {
            ++out.n_class1;
            if (predictions[i] != 1) ++wrong1;
        }
    }
    require(out.n_class0 > 0 && out.n_class1 > 0,
            "error_probability: both classes must be present");
    out.error_class0 = static_cast<double>(wrong0) / static_cast<double>(out.n_class0);
    out.error_class1 = static_cast<double>(wrong1) / static_cast<double>(out.n_class1);
    out.error_probability = (out.error_class0 + out.error_class1) / 2.0;
    out.accuracy = 1.0 - static_cast<double>(wrong0 + wrong1) / static_cast<double>(labels.size());
    return out;
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    require(!labels.empty() && scores.size() == labels.size(),
            "roc_auc: need equal nonempty lengths");
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::vector<std::pair<double, int>> ranked(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] == 0 || labels[i] == 1, "roc_auc: labels must be 0 or 1");
        ranked[i] = {scores[i], labels[i]};
        (labels[i] == 1 ? n_pos : n_neg) += 1;
    }
    require(n_pos > 0 && n_neg > 0, "roc_auc: both classes must be present");

    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocResult roc;
    roc.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    double auc = 0.0;
    while (i < ranked.size()) {
        // One step per distinct score value: ties move diagonally together.
        const double value = ranked[i].first;
        while (i < ranked.size() && ranked[i].first == value) {
            (ranked[i].second == 1 ? tp : fp) += 1;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        const auto& prev = roc.points.back();
        auc += (fpr - prev.first) * (tpr + prev.second) / 2.0;
        roc.points.emplace_back(fpr, tpr);
    }
    roc.auc = auc;
    return roc;
}

namespace {

// One mean-subtracted DFT bin with the exact angle reduction (j*k mod N);
// shared by the full spectrum and the single-bin path so both sum in the
// same order.
double spectrum_bin_power_core(std::span<const double> values, double mean, std::size_t k) {
    const std::size_t n = values.size();
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = values[j] - mean;
        const double angle =
            kTwoPi * static_cast<double>((j * k) % n) / static_cast<double>(n);
        re += d * std::cos(angle);
        im -= d * std::sin(angle);
    }
    const bool nyquist = (n % 2 == 0) && (k == n / 2);
    const double scale = (nyquist ? 1.0 : 2.0) / static_cast<double>(n);
    return scale * (re * re + im * im);
}

double sequence_mean(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::vector<double> bits_as_doubles(const std::vector<std::uint8_t>& bits) {
    return std::vector<double>(bits.begin(), bits.end());
}

double spectrum_bin_power(const std::vector<std::uint8_t>& bits, std::size_t k) {
    const std::vector<double> values = bits_as_doubles(bits);
    return spectrum_bin_power_core(values, sequence_mean(values), k);
}

}  // namespace

std::vector<SpectrumPoint> power_spectrum(std::span<const double> values, double dt) {
    require(values.size() >= 2, "power_spectrum: need at least 2 samples");
    require(dt > 0.0, "power_spectrum: dt must be positive");
    const std::size_t n = values.size();
    const double mean = sequence_mean(values);
    std::vector<SpectrumPoint> spectrum(n / 2);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        spectrum[k - 1].frequency =
            static_cast<double>(k) / (static_cast<double>(n) * dt);
        spectrum[k - 1].power = spectrum_bin_power_core(values, mean, k);
    }
    return spectrum;
}

std::vector<SpectrumPoint> power_spectrum(const std::vector<std::uint8_t>& bits, double dt) {
    require(bits.size() >= 2, "power_spectrum: need at least 2 bits");
    const std::vector<double> values = bits_as_doubles(bits);
    return power_spectrum(std::span<const double>(values), dt);
}

double spectrum_power_at_bin(const std::vector<std::uint8_t>& bits, std::size_t k) {
    require(bits.size() >= 2, "spectrum_power_at_bin: need at least 2 bits");
    require(k >= 1 && k <= bits.size() / 2, "spectrum_power_at_bin: k must lie in [1, N/2]");
    return spectrum_bin_power(bits, k);
}

std::size_t nearest_spectrum_bin(double omega, double dt, std::size_t n_intervals) {
    require(omega > 0.0 && dt > 0.0 && n_intervals >= 2, "nearest_spectrum_bin: bad arguments");
    const double k = omega * static_cast<double>(n_intervals) * dt / kTwoPi;
    const auto rounded = static_cast<long long>(std::llround(k));
    const long long hi = static_cast<long long>(n_intervals / 2);
    return static_cast<std::size_t>(std::clamp(rounded, 1LL, hi));
}

namespace {

// Frozen per-record randomness for calibration: the signal-phase structure
// and the per-interval uniforms, so changing the candidate g changes
// nothing else (common random numbers keep the power curve monotone).
struct CalibrationDraws {
    std::vector<double> phase_diff;  // sin(w t + phi) - sin(w t_prev + phi)
    std::vector<double> b_phase;     // b * dt / 2
    std::vector<double> uniforms;
};

double mc_mean_power(const std::vector<CalibrationDraws>& draws, const SignalSpec& base,
                     const DetectorSpec& det, double g, std::size_t bin,
                     std::vector<std::uint8_t>& bits_scratch) {
    const std::size_t n = base.n_intervals;
    double sum = 0.0;
    for (const CalibrationDraws& d : draws) {
        for (std::size_t j = 0; j < n; ++j) {
            const double s =
                std::sin((g / (2.0 * base.omega)) * d.phase_diff[j] + d.b_phase[j] + kPi / 4.0);
            const double q = det.eta_true * (s * s) + det.eta_false * (1.0 - s * s);
            bits_scratch[j] = d.uniforms[j] < q ? std::uint8_t{1} : std::uint8_t{0};
        }
        sum += spectrum_bin_power(bits_scratch, bin);
    }
    return sum / static_cast<double>(draws.size());
}

}  // namespace

CalibrationResult calibrate(const SignalSpec& base, double data_mean, double target_power,
                            double ratio, std::size_t n_mc_records, std::uint64_t seed) {
    require(data_mean > 0.0 && data_mean < 1.0, "calibrate: data_mean must lie in (0, 1)");
    require(ratio > 0.0 && ratio <= 1.0, "calibrate: ratio must lie in (0, 1]");
    require(n_mc_records >= 1, "calibrate: need at least one Monte-Carlo record");
    require(!base.noise.amplitude, "calibrate: amplitude noise is not supported");

    CalibrationResult result;
    result.eta_true = 2.0 * data_mean / (1.0 + ratio);
    result.eta_false = ratio * result.eta_true;
    require(result.eta_true <= 1.0, "calibrate: data_mean implies eta_true above 1");
    if (ratio == 1.0) {
        // eta_true == eta_false: the record mean is matched but every bit is
        // an identical Bernoulli regardless of g; nothing left to fit.
        result.zero_contrast = true;
        return result;
    }

    SignalSpec spec = base;
    spec.g = 0.0;
    spec.detector = {result.eta_true, result.eta_false};
    spec.validate();
    const std::size_t n = spec.n_intervals;
    require(n >= 2, "calibrate: need at least 2 intervals");

    std::vector<CalibrationDraws> draws(n_mc_records);
    for (std::size_t r = 0; r < n_mc_records; ++r) {
        RngStream rng = RngStream::substream(seed, r);
        const NoiseRealization real = sample_noise_realization(spec, rng);
        CalibrationDraws& d = draws[r];
        d.phase_diff.resize(n);
        d.b_phase.resize(n);
        d.uniforms.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double t = spec.dt * static_cast<double>(j + 1);
            d.phase_diff[j] = std::sin(spec.omega * t + real.phase[j]) -
                              std::sin(spec.omega * (t - spec.dt) + real.phase[j]);
            d.b_phase[j] = real.b_offset[j] * spec.dt / 2.0;
            d.uniforms[j] = rng.uniform();
        }
    }

    const std::size_t bin = nearest_spectrum_bin(spec.omega, spec.dt, n);
    std::vector<std::uint8_t> scratch(n);
    const DetectorSpec det = spec.detector;
    const auto power_of = [&](double g) {
        return mc_mean_power(draws, spec, det, g, bin, scratch);
    };

    // The fitted response stays monotone in g while the per-interval
    // modulation depth is below the first Bessel-J1 peak; cap the search
    // there.
    const double half_angle = std::sin(spec.omega * spec.dt / 2.0);
    require(half_angle > 0.0, "calibrate: omega*dt leaves no per-interval phase contrast");
    const double g_max = 0.9 * spec.omega / half_angle;

    if (power_of(0.0) >= target_power) {
        throw std::runtime_error(
            "calibrate: target power is at or below the zero-signal floor; searched g in [0, " +
            format_double(g_max) + "]");
    }
    double lo = 0.0;
    double hi = 0.0;
    bool bracketed = false;
    constexpr int kGridPoints = 16;
    for (int i = 1; i <= kGridPoints; ++i) {
        const double g = g_max * static_cast<double>(i) / kGridPoints;
        if (power_of(g) >= target_power) {
            hi = g;
            bracketed = true;
            break;
        }
        lo = g;
    }
    if (!bracketed) {
        throw std::runtime_error("calibrate: could not bracket the target power; searched g in [0, " +
                                 format_double(g_max) + "], peak power " +
                                 format_double(power_of(g_max)) + " vs target " +
                                 format_double(target_power));
    }
    for (int iter = 0; iter < 60 && hi - lo > 1e-12 * g_max; ++iter) {
        const double mid = (lo + hi) / 2.0;
        if (power_of(mid) >= target_power) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    result.g = (lo + hi) / 2.0;
    result.achieved_power = power_of(result.g);
    return result;
}

BiasVariance estimate_bias_variance(
    const std::function<std::vector<double>(std::size_t)>& score_resample,
    const std::vector<double>& targets, std::size_t n_resamples) {
    require(n_resamples >= 2, "estimate_bias_variance: need at least 2 resamples");
    require(!targets.empty(), "estimate_bias_variance: need a nonempty test set");

    const std::size_t n = targets.size();
    std::vector<std::vector<double>> scores(n_resamples);
    for (std::size_t r = 0; r < n_resamples; ++r) {
        scores[r] = score_resample(r);
        require(scores[r].size() == n, "estimate_bias_variance: score length mismatch");
    }

    BiasVariance out;
    const double inv_r = 1.0 / static_cast<double>(n_resamples);
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n_resamples; ++r) mean += scores[r][i];
        mean *= inv_r;
        double var = 0.0;
        double mse = 0.0;
        for (std::size_t r = 0; r < n_resamples; ++r) {
            const double dm = scores[r][i] - mean;
            const double dy = scores[r][i] - targets[i];
            var += dm * dm;
            mse += dy * dy;
        }
        var *= inv_r;
        mse *= inv_r;
        const double bias_sq = (mean - targets[i]) * (mean - targets[i]);
        out.bias_sq += bias_sq;
        out.variance += var;
        out.mse += mse;
        out.noise += mse - bias_sq - var;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.bias_sq *= inv_n;
    out.variance *= inv_n;
    out.mse *= inv_n;
    out.noise *= inv_n;
    return out;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json roc_points = nlohmann::json::array();
    for (const auto& [fpr, tpr] : report.roc.points) {
        roc_points.push_back({fpr, tpr});
    }
    const nlohmann::json doc = {
        {"error_probability", report.errors.error_probability},
        {"error_class0", report.errors.error_class0},
        {"error_class1", report.errors.error_class1},
        {"n_class0", report.errors.n_class0},
        {"n_class1", report.errors.n_class1},
        {"accuracy", report.errors.accuracy},
        {"auc", report.roc.auc},
        {"roc_points", roc_points},
        {"n_test", report.n_test},
        {"fit_s", report.fit_seconds},
        {"predict_s", report.predict_seconds},
    };
    return doc.dump(2);
}

std::string csv_header() {
    return "scenario,delta_omega_rad_s,method,error_prob,auc,fit_s,predict_s,n_test,seed";
}

std::string csv_row(const std::string& scenario, double delta_omega_rad_s,
                    const std::string& method, const EvalReport& report, std::uint64_t seed) {
    std::string row = scenario;
    row += ',';
    row += format_double(delta_omega_rad_s);
    row += ',';
    row += method;
    row += ',';
    row += format_double(report.errors.error_probability);
    row += ',';
    row += format_double(report.roc.auc);
    row += ',';
    row += format_double(report.fit_seconds);
    row += ',';
    row += format_double(report.predict_seconds);
    row += ',';
    row += std::to_string(report.n_test);
    row += ',';
    row += std::to_string(seed);
    return row;
}

}  // namespace nanonmr
