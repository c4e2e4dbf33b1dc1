#include "nanonmr/classifier_mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nanonmr/rng.hpp"

namespace nanonmr {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double relu(double z) { return z > 0.0 ? z : 0.0; }

// Iterates (index, value) over the nonzero entries of one input vector,
// which may be a raw bit record (0/1 or recoded -1/+1) or a dense vector.
struct InputView {
    const std::vector<std::uint32_t>* ones = nullptr;  // zero_one bit records
    const std::vector<std::uint8_t>* bits = nullptr;   // plus_minus bit records
    const std::vector<double>* dense = nullptr;

    template <typename F>
    void for_each_nonzero(F&& f) const {
        if (ones) {
            for (std::uint32_t j : *ones) f(j, 1.0);
        } else if (bits) {
            for (std::size_t j = 0; j < bits->size(); ++j) f(j, (*bits)[j] ? 1.0 : -1.0);
        } else {
            for (std::size_t j = 0; j < dense->size(); ++j) {
                if ((*dense)[j] != 0.0) f(j, (*dense)[j]);
            }
        }
    }
};

struct Workspace {
    std::vector<std::vector<double>> z;      // pre-activations per layer
    std::vector<std::vector<double>> a;      // post-activations per layer
    std::vector<std::vector<double>> delta;  // backpropagated errors

    void resize(const MLPModel& m) {
        const std::size_t n_layers = m.weights.size();
        z.resize(n_layers);
        a.resize(n_layers);
        delta.resize(n_layers);
        for (std::size_t l = 0; l < n_layers; ++l) {
            z[l].resize(m.layer_sizes[l + 1]);
            a[l].resize(m.layer_sizes[l + 1]);
            delta[l].resize(m.layer_sizes[l + 1]);
        }
    }
};

double forward_store(const MLPModel& m, const InputView& input, Workspace& ws) {
    const std::size_t n_layers = m.weights.size();
    {
        const std::size_t n_out = m.layer_sizes[1];
        std::vector<double>& z0 = ws.z[0];
        z0.assign(m.biases[0].begin(), m.biases[0].end());
        input.for_each_nonzero([&](std::size_t j, double v) {
            const double* w = m.weights[0].data() + j * n_out;
            for (std::size_t o = 0; o < n_out; ++o) z0[o] += v * w[o];
        });
        for (std::size_t o = 0; o < n_out; ++o) {
            ws.a[0][o] = n_layers == 1 ? sigmoid(z0[o]) : relu(z0[o]);
        }
    }
    for (std::size_t l = 1; l < n_layers; ++l) {
        const std::size_t n_in = m.layer_sizes[l];
        const std::size_t n_out = m.layer_sizes[l + 1];
        const std::vector<double>& a_prev = ws.a[l - 1];
        std::vector<double>& z = ws.z[l];
        z.assign(m.biases[l].begin(), m.biases[l].end());
        for (std::size_t in = 0; in < n_in; ++in) {
            const double v = a_prev[in];
            if (v == 0.0) continue;
            const double* w = m.weights[l].data() + in * n_out;
            for (std::size_t o = 0; o < n_out; ++o) z[o] += v * w[o];
        }
        const bool last = l + 1 == n_layers;
        for (std::size_t o = 0; o < n_out; ++o) ws.a[l][o] = last ? sigmoid(z[o]) : relu(z[o]);
    }
    return ws.a[n_layers - 1][0];
}

// Adds this sample's contribution to the batch gradients; inv_batch is the
// 1/B factor of the mean MSE.
void backward_accumulate(const MLPModel& m, const InputView& input, double score, double target,
                         double inv_batch, Workspace& ws, MLPGradients& grads) {
    const std::size_t n_layers = m.weights.size();
    ws.delta[n_layers - 1][0] =
        2.0 * (score - target) * inv_batch * score * (1.0 - score);

    for (std::size_t l = n_layers; l-- > 1;) {
        const std::size_t n_in = m.layer_sizes[l];
        const std::size_t n_out = m.layer_sizes[l + 1];
        const std::vector<double>& d = ws.delta[l];
        const std::vector<double>& a_prev = ws.a[l - 1];
        for (std::size_t o = 0; o < n_out; ++o) grads.biases[l][o] += d[o];
        for (std::size_t in = 0; in < n_in; ++in) {
            const double v = a_prev[in];
            if (v == 0.0) continue;
            double* gw = grads.weights[l].data() + in * n_out;
            for (std::size_t o = 0; o < n_out; ++o) gw[o] += v * d[o];
        }
        std::vector<double>& d_prev = ws.delta[l - 1];
        const std::vector<double>& z_prev = ws.z[l - 1];
        const double* w = m.weights[l].data();
        for (std::size_t in = 0; in < n_in; ++in) {
            double s = 0.0;
            for (std::size_t o = 0; o < n_out; ++o) s += w[in * n_out + o] * d[o];
            d_prev[in] = z_prev[in] > 0.0 ? s : 0.0;
        }
    }

    const std::size_t n_out0 = m.layer_sizes[1];
    const std::vector<double>& d0 = ws.delta[0];
    for (std::size_t o = 0; o < n_out0; ++o) grads.biases[0][o] += d0[o];
    input.for_each_nonzero([&](std::size_t j, double v) {
        double* gw = grads.weights[0].data() + j * n_out0;
        for (std::size_t o = 0; o < n_out0; ++o) gw[o] += v * d0[o];
    });
}

MLPGradients zero_gradients(const MLPModel& m) {
    MLPGradients g;
    g.weights.resize(m.weights.size());
    g.biases.resize(m.biases.size());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        g.weights[l].assign(m.weights[l].size(), 0.0);
        g.biases[l].assign(m.biases[l].size(), 0.0);
    }
    return g;
}

void zero_like(MLPGradients& g, const MLPModel& m) {
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        std::fill(g.weights[l].begin(), g.weights[l].end(), 0.0);
        std::fill(g.biases[l].begin(), g.biases[l].end(), 0.0);
    }
}

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
};

// One Adam step over a flat parameter array.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               double lr, std::size_t t) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        const double mhat = state.m[i] / corr1;
        const double vhat = state.v[i] / corr2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void momentum_step(std::vector<double>& params, const std::vector<double>& grads,
                   std::vector<double>& velocity, double lr, double mu) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = mu * velocity[i] - lr * grads[i];
        params[i] += velocity[i];
    }
}

std::vector<std::uint32_t> ones_indices(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint32_t> ones;
    for (std::size_t j = 0; j < bits.size(); ++j) {
        if (bits[j]) ones.push_back(static_cast<std::uint32_t>(j));
    }
    return ones;
}

InputView view_of_record(const std::vector<std::uint32_t>& ones,
                         const std::vector<std::uint8_t>& bits, InputEncoding enc) {
    InputView view;
    if (enc == InputEncoding::zero_one) {
        view.ones = &ones;
    } else {
        view.bits = &bits;
    }
    return view;
}

}  // namespace

void MLPModel::validate() const {
    require(layer_sizes.size() >= 2, "MLPModel: need at least input and output layers");
    require(layer_sizes.back() == 1, "MLPModel: output layer must have a single node");
    require(weights.size() == layer_sizes.size() - 1 && biases.size() == weights.size(),
            "MLPModel: weight/bias layer counts must chain with layer_sizes");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        require(weights[l].size() == layer_sizes[l] * layer_sizes[l + 1],
                "MLPModel: weight matrix shape mismatch");
        require(biases[l].size() == layer_sizes[l + 1], "MLPModel: bias length mismatch");
    }
}

std::size_t param_count(const MLPModel& model) {
    std::size_t count = 0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        count += model.weights[l].size() + model.biases[l].size();
    }
    return count;
}

MLPModel init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    MLPModel m;
    m.layer_sizes = layer_sizes;
    m.weights.resize(layer_sizes.size() - 1);
    m.biases.resize(layer_sizes.size() - 1);
    RngStream rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::size_t n_in = layer_sizes[l];
        const std::size_t n_out = layer_sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_in));
        m.weights[l].resize(n_in * n_out);
        for (double& w : m.weights[l]) w = scale * rng.normal();
        m.biases[l].assign(n_out, 0.0);
    }
    m.validate();
    return m;
}

MLPModel init_default_mlp(std::size_t n_input, std::uint64_t seed) {
    return init_mlp({n_input, 20, 35, 1}, seed);
}

double forward_mlp(const MLPModel& model, std::span<const double> x) {
    model.validate();
    require(x.size() == model.layer_sizes.front(), "forward_mlp: input length mismatch");
    const std::vector<double> dense(x.begin(), x.end());
    InputView view;
    view.dense = &dense;
    Workspace ws;
    ws.resize(model);
    return forward_store(model, view, ws);
}

double forward_mlp(const MLPModel& model, const std::vector<std::uint8_t>& bits) {
    model.validate();
    require(bits.size() == model.layer_sizes.front(), "forward_mlp: input length mismatch");
    const std::vector<std::uint32_t> ones = ones_indices(bits);
    const InputView view = view_of_record(ones, bits, model.input_encoding);
    Workspace ws;
    ws.resize(model);
    return forward_store(model, view, ws);
}

double mse_loss(std::span<const double> scores, std::span<const double> targets) {
    require(!scores.empty() && scores.size() == targets.size(),
            "mse_loss: need equal nonempty lengths");
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double e = scores[i] - targets[i];
        sum += e * e;
    }
    return sum / static_cast<double>(scores.size());
}

MLPGradients mlp_gradients(const MLPModel& model, std::span<const std::vector<double>> inputs,
                           std::span<const double> targets) {
    model.validate();
    require(!inputs.empty() && inputs.size() == targets.size(),
            "mlp_gradients: need equal nonempty batch sizes");
    Workspace ws;
    ws.resize(model);
    MLPGradients grads = zero_gradients(model);
    const double inv_batch = 1.0 / static_cast<double>(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        require(inputs[i].size() == model.layer_sizes.front(),
                "mlp_gradients: input length mismatch");
        InputView view;
        view.dense = &inputs[i];
        const double score = forward_store(model, view, ws);
        backward_accumulate(model, view, score, targets[i], inv_batch, ws, grads);
    }
    return grads;
}

void TrainConfig::validate() const {
    require(learning_rate > 0.0, "TrainConfig: learning_rate must be positive");
    require(batch_size >= 1, "TrainConfig: batch_size must be positive");
    require(max_epochs >= 1, "TrainConfig: max_epochs must be positive");
    require(early_stop_patience >= 1, "TrainConfig: early_stop_patience must be positive");
    require(validation_fraction > 0.0 && validation_fraction <= 0.5,
            "TrainConfig: validation_fraction must lie in (0, 0.5]");
    require(momentum >= 0.0 && momentum < 1.0, "TrainConfig: momentum must lie in [0, 1)");
    require(!hidden_sizes.empty(), "TrainConfig: need at least one hidden layer");
}

TrainResult train_mlp(const Dataset& train_ds, const TrainConfig& cfg) {
    cfg.validate();
    require(train_ds.n_intervals >= 1, "train_mlp: dataset has no intervals");

    const auto [fit_part, val_part] =
        split(train_ds, 1.0 - cfg.validation_fraction, derive_seed(cfg.shuffle_seed, 0));

    std::vector<std::size_t> sizes;
    sizes.push_back(train_ds.n_intervals);
    sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    sizes.push_back(1);
    MLPModel model = init_mlp(sizes, cfg.init_seed);
    model.input_encoding = cfg.input_encoding;

    const auto prepare = [&](const Dataset& part, std::vector<std::vector<std::uint32_t>>& ones,
                             std::vector<double>& targets) {
        ones.resize(part.records.size());
        targets.resize(part.records.size());
        for (std::size_t i = 0; i < part.records.size(); ++i) {
            if (cfg.input_encoding == InputEncoding::zero_one) {
                ones[i] = ones_indices(part.records[i].bits);
            }
            targets[i] = static_cast<double>(part.records[i].label);
        }
    };
    std::vector<std::vector<std::uint32_t>> fit_ones;
    std::vector<double> fit_targets;
    prepare(fit_part, fit_ones, fit_targets);
    std::vector<std::vector<std::uint32_t>> val_ones;
    std::vector<double> val_targets;
    prepare(val_part, val_ones, val_targets);

    Workspace ws;
    ws.resize(model);
    MLPGradients grads = zero_gradients(model);

    std::vector<AdamState> adam_w(model.weights.size());
    std::vector<AdamState> adam_b(model.weights.size());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        adam_w[l].m.assign(model.weights[l].size(), 0.0);
        adam_w[l].v.assign(model.weights[l].size(), 0.0);
        adam_b[l].m.assign(model.biases[l].size(), 0.0);
        adam_b[l].v.assign(model.biases[l].size(), 0.0);
    }

    RngStream order_rng = RngStream::substream(cfg.shuffle_seed, 1);
    std::vector<std::size_t> order(fit_part.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    result.model = model;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t epochs_without_improvement = 0;
    std::size_t step = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[order_rng.uniform_index(i)]);
        }

        double epoch_loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            zero_like(grads, model);
            double batch_sq = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t idx = order[i];
                const InputView view = view_of_record(fit_ones[idx], fit_part.records[idx].bits,
                                                      cfg.input_encoding);
                const double score = forward_store(model, view, ws);
                const double e = score - fit_targets[idx];
                batch_sq += e * e;
                backward_accumulate(model, view, score, fit_targets[idx], inv_batch, ws, grads);
            }
            const double batch_loss = batch_sq * inv_batch;
            if (!std::isfinite(batch_loss)) {
                throw std::runtime_error("train_mlp: loss diverged (not finite) at epoch " +
                                         std::to_string(epoch));
            }
            ++step;
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                if (cfg.optimizer == Optimizer::adam) {
                    adam_step(model.weights[l], grads.weights[l], adam_w[l], cfg.learning_rate,
                              step);
                    adam_step(model.biases[l], grads.biases[l], adam_b[l], cfg.learning_rate,
                              step);
                } else {
                    momentum_step(model.weights[l], grads.weights[l], adam_w[l].m,
                                  cfg.learning_rate, cfg.momentum);
                    momentum_step(model.biases[l], grads.biases[l], adam_b[l].m,
                                  cfg.learning_rate, cfg.momentum);
                }
            }
            epoch_loss_sum += batch_loss;
            ++n_batches;
        }

        double val_sq = 0.0;
        for (std::size_t i = 0; i < val_part.records.size(); ++i) {
            const InputView view =
                view_of_record(val_ones[i], val_part.records[i].bits, cfg.input_encoding);
            const double e = forward_store(model, view, ws) - val_targets[i];
            val_sq += e * e;
        }
        const double val_loss = val_sq / static_cast<double>(val_part.records.size());

        result.history.train_loss.push_back(epoch_loss_sum / static_cast<double>(n_batches));
        result.history.val_loss.push_back(val_loss);

        if (val_loss < best_val) {
            best_val = val_loss;
            result.model = model;
            result.history.best_epoch = epoch;
            epochs_without_improvement = 0;
        } else if (++epochs_without_improvement >= cfg.early_stop_patience) {
            break;
        }
    }
    return result;
}

ScoreDecision classify_mlp(const MLPModel& model, const std::vector<std::uint8_t>& bits) {
    ScoreDecision decision;
    decision.score = forward_mlp(model, bits);
    decision.label = decision.score >= 0.5 ? 1 : 0;
    return decision;
}

namespace {

const char* encoding_name(InputEncoding enc) {
    return enc == InputEncoding::zero_one ? "zero_one" : "plus_minus";
}

InputEncoding encoding_from_name(const std::string& name) {
    if (name == "zero_one") return InputEncoding::zero_one;
    if (name == "plus_minus") return InputEncoding::plus_minus;
    throw std::runtime_error("unknown input encoding: " + name);
}

}  // namespace

void save_checkpoint(const MLPModel& model, const TrainConfig& cfg, const std::string& path) {
    model.validate();
    nlohmann::json doc;
    doc["layer_sizes"] = model.layer_sizes;
    doc["weights"] = model.weights;  // per layer, flat [n_in, n_out] row-major
    doc["biases"] = model.biases;
    doc["input_encoding"] = encoding_name(model.input_encoding);
    doc["config"] = {
        {"learning_rate", cfg.learning_rate},
        {"batch_size", cfg.batch_size},
        {"max_epochs", cfg.max_epochs},
        {"early_stop_patience", cfg.early_stop_patience},
        {"init_seed", cfg.init_seed},
        {"shuffle_seed", cfg.shuffle_seed},
        {"validation_fraction", cfg.validation_fraction},
        {"optimizer", cfg.optimizer == Optimizer::adam ? "adam" : "momentum"},
        {"momentum", cfg.momentum},
        {"input_encoding", encoding_name(cfg.input_encoding)},
        {"hidden_sizes", cfg.hidden_sizes},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    nlohmann::json doc;
    in >> doc;

    Checkpoint ck;
    ck.model.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    ck.model.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
    ck.model.biases = doc.at("biases").get<std::vector<std::vector<double>>>();
    ck.model.input_encoding = encoding_from_name(doc.at("input_encoding").get<std::string>());
    ck.model.validate();

    const nlohmann::json& c = doc.at("config");
    ck.config.learning_rate = c.at("learning_rate").get<double>();
    ck.config.batch_size = c.at("batch_size").get<std::size_t>();
    ck.config.max_epochs = c.at("max_epochs").get<std::size_t>();
    ck.config.early_stop_patience = c.at("early_stop_patience").get<std::size_t>();
    ck.config.init_seed = c.at("init_seed").get<std::uint64_t>();
    ck.config.shuffle_seed = c.at("shuffle_seed").get<std::uint64_t>();
    ck.config.validation_fraction = c.at("validation_fraction").get<double>();
    ck.config.optimizer =
        c.at("optimizer").get<std::string>() == "adam" ? Optimizer::adam : Optimizer::momentum;
    ck.config.momentum = c.at("momentum").get<double>();
    ck.config.input_encoding = encoding_from_name(c.at("input_encoding").get<std::string>());
    ck.config.hidden_sizes = c.at("hidden_sizes").get<std::vector<std::size_t>>();
    return ck;
}

LinearModel train_linear_baseline(const Dataset& train_ds, const LinearTrainConfig& cfg) {
    require(cfg.learning_rate > 0.0 && cfg.max_iters >= 1,
            "train_linear_baseline: invalid config");
    const std::size_t n = train_ds.records.size();
    require(n >= 2, "train_linear_baseline: need at least 2 records");
    bool seen0 = false;
    bool seen1 = false;
    std::vector<std::vector<std::uint32_t>> ones(n);
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        ones[i] = ones_indices(train_ds.records[i].bits);
        targets[i] = static_cast<double>(train_ds.records[i].label);
        (train_ds.records[i].label == 0 ? seen0 : seen1) = true;
    }
    require(seen0 && seen1, "train_linear_baseline: both classes must be present");

    const std::size_t d = train_ds.n_intervals;
    LinearModel model;
    model.weights.assign(d, 0.0);

    std::vector<double> grad_w(d);
    AdamState state_w;
    state_w.m.assign(d, 0.0);
    state_w.v.assign(d, 0.0);
    std::vector<double> bias_param(1, 0.0);
    std::vector<double> grad_b(1);
    AdamState state_b;
    state_b.m.assign(1, 0.0);
    state_b.v.assign(1, 0.0);

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        grad_b[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = bias_param[0];
            for (std::uint32_t j : ones[i]) z += model.weights[j];
            const double err = sigmoid(z) - targets[i];
            for (std::uint32_t j : ones[i]) grad_w[j] += err;
            grad_b[0] += err;
        }
        for (double& g : grad_w) g *= inv_n;
        grad_b[0] *= inv_n;
        adam_step(model.weights, grad_w, state_w, cfg.learning_rate, iter);
        adam_step(bias_param, grad_b, state_b, cfg.learning_rate, iter);
    }
    model.bias = bias_param[0];
    return model;
}

ScoreDecision classify_linear(const LinearModel& model, const std::vector<std::uint8_t>& bits) {
    require(bits.size() == model.weights.size(), "classify_linear: input length mismatch");
    double z = model.bias;
    for (std::size_t j = 0; j < bits.size(); ++j) {
        if (bits[j]) z += model.weights[j];
    }
    ScoreDecision decision;
    decision.score = sigmoid(z);
    decision.label = decision.score >= 0.5 ? 1 : 0;
    return decision;
}

}  // namespace nanonmr
