#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nanonmr/signal_model.hpp"

namespace nanonmr {

// Balanced error: mean of the two per-class conditional error rates, which
// matches the raw error rate only on balanced test sets.
struct ErrorBreakdown {
    double error_probability = 0.0;
    double error_class0 = 0.0;  // P(predict 1 | label 0)
    double error_class1 = 0.0;  // P(predict 0 | label 1)
    std::size_t n_class0 = 0;
    std::size_t n_class1 = 0;
    double accuracy = 0.0;  // auxiliary raw accuracy
};

ErrorBreakdown error_probability(const std::vector<int>& predictions,
                                 const std::vector<int>& labels);

// ROC with class 1 as positive; thresholds sweep the distinct score values
// (ties grouped into single steps), AUC by the trapezoid rule.
struct RocResult {
    std::vector<std::pair<double, double>> points;  // (false-positive, true-positive) rates
    double auc = 0.0;
};

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Mean-subtracted discrete Fourier power at frequencies k/(N*dt) (cycles/s)
// for k = 1..N/2. Bins are scaled by 2/N (1/N at an even-N Nyquist bin) so
// the powers sum to N times the bit variance.
struct SpectrumPoint {
    double frequency = 0.0;  // cycles/s
    double power = 0.0;
};

std::vector<SpectrumPoint> power_spectrum(std::span<const double> values, double dt);
std::vector<SpectrumPoint> power_spectrum(const std::vector<std::uint8_t>& bits, double dt);

// Single bin of the same transform (identical summation order), k in
// [1, N/2]; used for calibration peak matching.
double spectrum_power_at_bin(const std::vector<std::uint8_t>& bits, std::size_t k);

// Bin index nearest to an angular signal frequency, clamped into [1, N/2].
std::size_t nearest_spectrum_bin(double omega, double dt, std::size_t n_intervals);

struct CalibrationResult {
    double eta_true = 0.0;
    double eta_false = 0.0;
    double g = 0.0;              // rad/s; 0 when zero_contrast
    double achieved_power = 0.0;
    bool zero_contrast = false;  // ratio == 1 leaves no signal to fit
};

// Detector efficiencies from the record mean under eta_false = ratio *
// eta_true, then a bisection on g so that the Monte-Carlo average (over
// n_mc_records synthetic records, common random numbers across g values) of
// the spectrum power at the signal bin matches target_power. base supplies
// omega, the timing grid and the noise configuration (amplitude noise is
// not supported); its g and detector fields are ignored.
CalibrationResult calibrate(const SignalSpec& base, double data_mean, double target_power,
                            double ratio = 0.7, std::size_t n_mc_records = 200,
                            std::uint64_t seed = 12345);

// Per-record decomposition of the squared score error over retrainings:
// score_resample(r) must return scores for the fixed test targets, trained
// on the r-th independently generated training set. noise is the residual
// mse - bias_sq - variance (zero up to rounding for deterministic targets).
struct BiasVariance {
    double bias_sq = 0.0;
    double variance = 0.0;
    double noise = 0.0;
    double mse = 0.0;
};

BiasVariance estimate_bias_variance(
    const std::function<std::vector<double>(std::size_t)>& score_resample,
    const std::vector<double>& targets, std::size_t n_resamples);

struct EvalReport {
    ErrorBreakdown errors;
    RocResult roc;
    std::size_t n_test = 0;
    double fit_seconds = 0.0;
    double predict_seconds = 0.0;
};

std::string report_to_json(const EvalReport& report);

// CSV schema shared by the sweep outputs; all doubles printed with %.17g.
std::string csv_header();
std::string csv_row(const std::string& scenario, double delta_omega_rad_s,
                    const std::string& method, const EvalReport& report, std::uint64_t seed);

}  // namespace nanonmr
