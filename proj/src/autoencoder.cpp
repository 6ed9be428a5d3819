#include "perfdiag/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "perfdiag/errors.hpp"

namespace perfdiag {

namespace {

double activate(Activation act, double z) {
    switch (act) {
    case Activation::Tanh: return std::tanh(z);
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Linear: return z;
    }
    return z;
}

double activate_derivative(Activation act, double z) {
    switch (act) {
    case Activation::Tanh: {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-z));
        return s * (1.0 - s);
    }
    case Activation::Linear: return 1.0;
    }
    return 1.0;
}

// activations[0..L] and preactivations[0..L-1] of one forward pass
struct ForwardTrace {
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> preacts;
};

void run_forward(const AutoencoderModel& model, std::span<const double> xs, ForwardTrace& trace) {
    const auto& sizes = model.topology.layer_sizes;
    const std::size_t n_layers = sizes.size() - 1;
    trace.activations.assign(sizes.size(), {});
    trace.preacts.assign(n_layers, {});
    trace.activations[0].assign(xs.begin(), xs.end());

    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const auto& w = model.weights[l];
        const auto& b = model.biases[l];
        const auto& a = trace.activations[l];
        auto& z = trace.preacts[l];
        z.assign(out, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            double acc = b[r];
            const double* row = w.data() + r * in;
            for (std::size_t c = 0; c < in; ++c) {
                acc += row[c] * a[c];
            }
            z[r] = acc;
        }
        auto& next = trace.activations[l + 1];
        next.assign(out, 0.0);
        const bool hidden = l + 1 < n_layers;
        for (std::size_t r = 0; r < out; ++r) {
            next[r] = hidden ? activate(model.topology.activation, z[r]) : z[r];
        }
    }
}

void check_input(const AutoencoderModel& model, std::span<const double> x) {
    if (x.size() != model.dimension()) {
        throw DataError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(model.dimension()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw DataError("input contains a non-finite component");
        }
    }
}

void init_weights(AutoencoderModel& model, std::mt19937_64& rng) {
    const auto& sizes = model.topology.layer_sizes;
    model.weights.assign(sizes.size() - 1, {});
    model.biases.assign(sizes.size() - 1, {});
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        model.weights[l].resize(out * in);
        for (double& w : model.weights[l]) {
            w = dist(rng);
        }
        model.biases[l].assign(out, 0.0);
    }
}

struct AdamState {
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
    std::uint64_t step = 0;
};

void apply_update(AutoencoderModel& model, const Gradients& grads, const TrainConfig& cfg,
                  AdamState& adam) {
    if (cfg.optimizer == OptimizerKind::Sgd) {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            for (std::size_t i = 0; i < model.weights[l].size(); ++i) {
                model.weights[l][i] -= cfg.learning_rate * grads.weights[l][i];
            }
            for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
                model.biases[l][i] -= cfg.learning_rate * grads.biases[l][i];
            }
        }
        return;
    }

    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++adam.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.step));
    auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            params[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        update(model.weights[l], grads.weights[l], adam.m_w[l], adam.v_w[l]);
        update(model.biases[l], grads.biases[l], adam.m_b[l], adam.v_b[l]);
    }
}

} // namespace

std::string to_string(Activation activation) {
    switch (activation) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
    }
    return "tanh";
}

Activation parse_activation(std::string_view text) {
    if (text == "tanh") return Activation::Tanh;
    if (text == "relu") return Activation::Relu;
    if (text == "sigmoid") return Activation::Sigmoid;
    if (text == "linear") return Activation::Linear;
    throw ConfigError("unknown activation: '" + std::string(text) + "'");
}

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::Sgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view text) {
    if (text == "sgd") return OptimizerKind::Sgd;
    if (text == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer: '" + std::string(text) + "'");
}

void Topology::validate() const {
    if (layer_sizes.size() < 3) {
        throw ConfigError("topology needs at least 3 layers");
    }
    for (std::size_t s : layer_sizes) {
        if (s == 0) {
            throw ConfigError("topology layer sizes must be positive");
        }
    }
    std::vector<std::size_t> reversed(layer_sizes.rbegin(), layer_sizes.rend());
    if (reversed != layer_sizes) {
        throw ConfigError("topology must be symmetric");
    }
    const std::size_t bottleneck = *std::min_element(layer_sizes.begin(), layer_sizes.end());
    if (bottleneck >= layer_sizes.front()) {
        throw ConfigError("bottleneck must be smaller than the input dimension");
    }
}

Topology Topology::default_for(std::size_t dim, Activation activation) {
    if (dim < 2) {
        throw ConfigError("default topology needs input dimension >= 2");
    }
    const std::size_t half = (dim + 1) / 2;
    const std::size_t quarter = (dim + 3) / 4;
    Topology topo;
    topo.layer_sizes = {dim, half, quarter, half, dim};
    topo.activation = activation;
    topo.validate();
    return topo;
}

std::vector<double> Scaler::standardize(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = (x[i] - mean[i]) / stddev[i];
    }
    return out;
}

std::vector<double> Scaler::destandardize(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] * stddev[i] + mean[i];
    }
    return out;
}

Scaler Scaler::identity(std::size_t dim) {
    Scaler s;
    s.mean.assign(dim, 0.0);
    s.stddev.assign(dim, 1.0);
    s.constant.assign(dim, false);
    return s;
}

Scaler fit_scaler(const std::vector<std::vector<double>>& samples) {
    if (samples.size() < 2) {
        throw DataError("fit_scaler needs at least 2 samples, got " +
                        std::to_string(samples.size()));
    }
    const std::size_t dim = samples.front().size();
    for (const auto& s : samples) {
        if (s.size() != dim) {
            throw DataError("fit_scaler: samples have inconsistent dimensions");
        }
    }
    Scaler scaler;
    scaler.mean.assign(dim, 0.0);
    scaler.stddev.assign(dim, 0.0);
    scaler.constant.assign(dim, false);

    const double n = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        for (std::size_t j = 0; j < dim; ++j) {
            scaler.mean[j] += s[j];
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        scaler.mean[j] /= n;
    }
    for (const auto& s : samples) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = s[j] - scaler.mean[j];
            scaler.stddev[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        scaler.stddev[j] = std::sqrt(scaler.stddev[j] / n); // population std
        if (scaler.stddev[j] == 0.0) {
            scaler.stddev[j] = 1.0;
            scaler.constant[j] = true;
        }
    }
    return scaler;
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning_rate must be positive");
    }
    if (early_stop_patience < 0) throw ConfigError("early_stop_patience must be >= 0");
    if (validation_fraction < 0.0 || validation_fraction >= 0.5) {
        throw ConfigError("validation_fraction must be in [0, 0.5)");
    }
}

AutoencoderModel init_model(const Topology& topology, std::uint64_t seed) {
    topology.validate();
    AutoencoderModel model;
    model.topology = topology;
    model.scaler = Scaler::identity(topology.input_dim());
    model.meta.seed = seed;
    std::mt19937_64 rng(seed);
    init_weights(model, rng);
    return model;
}

std::vector<double> forward_scaled(const AutoencoderModel& model, std::span<const double> xs) {
    check_input(model, xs);
    ForwardTrace trace;
    run_forward(model, xs, trace);
    return trace.activations.back();
}

std::vector<double> forward(const AutoencoderModel& model, std::span<const double> x) {
    check_input(model, x);
    const auto xs = model.scaler.standardize(x);
    ForwardTrace trace;
    run_forward(model, xs, trace);
    return model.scaler.destandardize(trace.activations.back());
}

double reconstruction_error(const AutoencoderModel& model, std::span<const double> x) {
    check_input(model, x);
    const auto xs = model.scaler.standardize(x);
    ForwardTrace trace;
    run_forward(model, xs, trace);
    const auto& ys = trace.activations.back();
    double sum = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double d = xs[j] - ys[j];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double batch_loss(const AutoencoderModel& model, const std::vector<std::vector<double>>& batch,
                  Gradients* gradients) {
    if (batch.empty()) {
        throw DataError("batch_loss: empty batch");
    }
    const auto& sizes = model.topology.layer_sizes;
    const std::size_t n_layers = sizes.size() - 1;

    if (gradients != nullptr) {
        gradients->weights.assign(n_layers, {});
        gradients->biases.assign(n_layers, {});
        for (std::size_t l = 0; l < n_layers; ++l) {
            gradients->weights[l].assign(model.weights[l].size(), 0.0);
            gradients->biases[l].assign(model.biases[l].size(), 0.0);
        }
    }

    double total = 0.0;
    ForwardTrace trace;
    std::vector<std::vector<double>> deltas(n_layers);
    for (const auto& xs : batch) {
        check_input(model, xs);
        run_forward(model, xs, trace);
        const auto& out = trace.activations.back();
        double sample_loss = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const double d = out[j] - xs[j];
            sample_loss += d * d;
        }
        total += sample_loss;

        if (gradients == nullptr) {
            continue;
        }

        // output layer is linear: delta = dL/dz directly
        auto& last = deltas[n_layers - 1];
        last.assign(sizes.back(), 0.0);
        for (std::size_t j = 0; j < sizes.back(); ++j) {
            last[j] = 2.0 * (out[j] - xs[j]);
        }
        for (std::size_t l = n_layers - 1; l-- > 0;) {
            const std::size_t rows = sizes[l + 2]; // out-dim of layer l+1
            const std::size_t cols = sizes[l + 1]; // out-dim of layer l
            const auto& w_next = model.weights[l + 1];
            const auto& delta_next = deltas[l + 1];
            auto& delta = deltas[l];
            delta.assign(cols, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const double d = delta_next[r];
                const double* row = w_next.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) {
                    delta[c] += row[c] * d;
                }
            }
            for (std::size_t c = 0; c < cols; ++c) {
                delta[c] *= activate_derivative(model.topology.activation, trace.preacts[l][c]);
            }
        }
        for (std::size_t l = 0; l < n_layers; ++l) {
            const std::size_t in = sizes[l];
            const std::size_t out_dim = sizes[l + 1];
            const auto& a = trace.activations[l];
            auto& gw = gradients->weights[l];
            auto& gb = gradients->biases[l];
            for (std::size_t r = 0; r < out_dim; ++r) {
                const double d = deltas[l][r];
                double* row = gw.data() + r * in;
                for (std::size_t c = 0; c < in; ++c) {
                    row[c] += d * a[c];
                }
                gb[r] += d;
            }
        }
    }

    const double scale = 1.0 / static_cast<double>(batch.size());
    if (gradients != nullptr) {
        for (std::size_t l = 0; l < n_layers; ++l) {
            for (double& g : gradients->weights[l]) g *= scale;
            for (double& g : gradients->biases[l]) g *= scale;
        }
    }
    return total * scale;
}

AutoencoderModel train(const std::vector<std::vector<double>>& samples, const Topology& topology,
                       const TrainConfig& config) {
    topology.validate();
    config.validate();
    const std::size_t minimum = std::max<std::size_t>(2, static_cast<std::size_t>(config.batch_size));
    if (samples.size() < minimum) {
        throw DataError("too few samples: got " + std::to_string(samples.size()) + ", need >= " +
                        std::to_string(minimum));
    }
    for (const auto& s : samples) {
        if (s.size() != topology.input_dim()) {
            throw DataError("sample dimension " + std::to_string(s.size()) +
                            " does not match topology input " +
                            std::to_string(topology.input_dim()));
        }
    }

    AutoencoderModel model;
    model.topology = topology;
    model.scaler = fit_scaler(samples);
    model.meta.seed = config.seed;

    std::vector<std::vector<double>> scaled(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        scaled[i] = model.scaler.standardize(samples[i]);
    }

    std::mt19937_64 rng(config.seed);
    init_weights(model, rng);

    // validation split
    std::vector<std::size_t> order(scaled.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_val =
        static_cast<std::size_t>(std::floor(static_cast<double>(scaled.size()) *
                                            config.validation_fraction));
    std::vector<std::vector<double>> val_set, train_set;
    val_set.reserve(n_val);
    train_set.reserve(scaled.size() - n_val);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_val ? val_set : train_set).push_back(scaled[order[i]]);
    }

    model.meta.initial_loss = batch_loss(model, train_set);
    model.meta.final_loss = model.meta.initial_loss;

    AdamState adam;
    if (config.optimizer == OptimizerKind::Adam) {
        adam.m_w.resize(model.weights.size());
        adam.v_w.resize(model.weights.size());
        adam.m_b.resize(model.biases.size());
        adam.v_b.resize(model.biases.size());
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            adam.m_w[l].assign(model.weights[l].size(), 0.0);
            adam.v_w[l].assign(model.weights[l].size(), 0.0);
            adam.m_b[l].assign(model.biases[l].size(), 0.0);
            adam.v_b[l].assign(model.biases[l].size(), 0.0);
        }
    }

    const bool early_stop = n_val > 0;
    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;
    std::vector<std::vector<double>> best_weights = model.weights;
    std::vector<std::vector<double>> best_biases = model.biases;

    std::vector<std::size_t> batch_order(train_set.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);
    Gradients grads;
    std::vector<std::vector<double>> batch;

    int epoch = 0;
    for (; epoch < config.epochs; ++epoch) {
        std::shuffle(batch_order.begin(), batch_order.end(), rng);
        for (std::size_t start = 0; start < batch_order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(batch_order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(train_set[batch_order[i]]);
            }
            const double loss = batch_loss(model, batch, &grads);
            if (!std::isfinite(loss)) {
                throw DataError("non-finite loss at epoch " + std::to_string(epoch + 1));
            }
            apply_update(model, grads, config, adam);
        }

        const double train_loss = batch_loss(model, train_set);
        if (!std::isfinite(train_loss)) {
            throw DataError("non-finite loss at epoch " + std::to_string(epoch + 1));
        }
        model.meta.loss_history.push_back(train_loss);

        if (early_stop) {
            const double val_loss = batch_loss(model, val_set);
            if (val_loss < best_val) {
                best_val = val_loss;
                best_weights = model.weights;
                best_biases = model.biases;
                epochs_since_best = 0;
            } else if (++epochs_since_best > config.early_stop_patience) {
                ++epoch;
                break;
            }
        }
    }

    if (early_stop && best_val < std::numeric_limits<double>::infinity()) {
        model.weights = std::move(best_weights);
        model.biases = std::move(best_biases);
    }
    model.meta.epochs_run = epoch;
    model.meta.final_loss = batch_loss(model, train_set);
    return model;
}

double gradient_check(const Topology& topology, std::uint64_t seed) {
    topology.validate();
    constexpr double h = 1e-5;
    constexpr std::size_t batch_size = 3;

    std::mt19937_64 rng(seed);
    AutoencoderModel model;
    model.topology = topology;
    model.scaler = Scaler::identity(topology.input_dim());

    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> batch;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        init_weights(model, rng);
        if (topology.activation == Activation::Relu) {
            // positive biases keep whole layers from going dead, which
            // would park downstream preactivations exactly on the kink
            for (auto& layer : model.biases) {
                std::fill(layer.begin(), layer.end(), 0.1);
            }
        }
        batch.assign(batch_size, std::vector<double>(topology.input_dim()));
        for (auto& x : batch) {
            for (double& v : x) {
                v = unit(rng);
            }
        }
        if (topology.activation != Activation::Relu) {
            break;
        }
        // keep every hidden preactivation away from the relu kink so the
        // finite difference stays on one side of it
        bool clear = true;
        ForwardTrace trace;
        for (const auto& x : batch) {
            run_forward(model, x, trace);
            for (std::size_t l = 0; l + 1 < trace.preacts.size(); ++l) {
                for (double v : trace.preacts[l]) {
                    clear = clear && std::abs(v) > 1e-3;
                }
            }
        }
        if (clear) {
            break;
        }
    }

    Gradients analytic;
    batch_loss(model, batch, &analytic);

    double max_rel = 0.0;
    auto probe = [&](std::vector<double>& params, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + h;
            const double plus = batch_loss(model, batch);
            params[i] = saved - h;
            const double minus = batch_loss(model, batch);
            params[i] = saved;
            const double numeric = (plus - minus) / (2.0 * h);
            const double denom = std::max(1e-2, std::abs(numeric) + std::abs(grad[i]));
            max_rel = std::max(max_rel, std::abs(numeric - grad[i]) / denom);
        }
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        probe(model.weights[l], analytic.weights[l]);
        probe(model.biases[l], analytic.biases[l]);
    }
    return max_rel;
}

} // namespace perfdiag
