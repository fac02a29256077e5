#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gpdr/errors.hpp"
#include "gpdr/numerics.hpp"
#include "gpdr/random.hpp"

namespace gpdr {

enum class Activation { Linear, Tanh };

struct Layer {
    Matrix weights;  // out x in
    std::vector<double> bias;
    Activation activation = Activation::Linear;

    std::size_t inputs() const noexcept { return weights.cols(); }
    std::size_t outputs() const noexcept { return weights.rows(); }

    friend bool operator==(const Layer&, const Layer&) = default;
};

/// Fully connected network. `latent_layer` names the layer whose output latent() returns.
struct Mlp {
    std::vector<Layer> layers;
    std::size_t latent_layer = 0;

    std::size_t input_dims() const noexcept { return layers.front().inputs(); }
    std::size_t output_dims() const noexcept { return layers.back().outputs(); }
    std::size_t latent_dims() const noexcept { return layers[latent_layer].outputs(); }

    friend bool operator==(const Mlp&, const Mlp&) = default;
};

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs == 0 || batch_size == 0 || !(learning_rate > 0.0) || momentum < 0.0 || momentum >= 1.0)
            throw InvalidInput("TrainConfig: epochs, batch size and learning rate must be positive, momentum in [0,1)");
    }
};

struct TrainResult {
    Mlp model;
    std::vector<double> loss_history;  // mean minibatch loss per epoch
    double learning_rate = 0.0;        // rate actually used
};

/// Glorot-uniform weights, zero biases.
inline Mlp make_mlp(const std::vector<std::size_t>& sizes, const std::vector<Activation>& activations,
                    std::size_t latent_layer, Rng& rng) {
    if (sizes.size() < 2 || activations.size() != sizes.size() - 1 || latent_layer >= activations.size())
        throw InvalidInput("make_mlp: inconsistent layer description");
    Mlp m;
    m.latent_layer = latent_layer;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l], out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        Layer layer{Matrix(out, in), std::vector<double>(out, 0.0), activations[l]};
        for (std::size_t i = 0; i < out; ++i)
            for (std::size_t j = 0; j < in; ++j) layer.weights(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
        m.layers.push_back(std::move(layer));
    }
    return m;
}

inline std::size_t hidden_width(std::size_t k, std::size_t p) { return std::max(2 * k, (p + 1) / 2); }

namespace detail {

inline void layer_forward(const Layer& layer, std::span<const double> in, std::vector<double>& out) {
    out.assign(layer.outputs(), 0.0);
    for (std::size_t i = 0; i < layer.outputs(); ++i) {
        const auto w = layer.weights.row(i);
        double s = layer.bias[i];
        for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * in[j];
        out[i] = layer.activation == Activation::Tanh ? std::tanh(s) : s;
    }
}

/// Activations of every layer for one row; acts[0] is the input.
inline void forward_row(const Mlp& m, std::span<const double> x, std::vector<std::vector<double>>& acts) {
    acts.resize(m.layers.size() + 1);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < m.layers.size(); ++l) layer_forward(m.layers[l], acts[l], acts[l + 1]);
}

inline Matrix forward_to(const Mlp& m, const Matrix& x, std::size_t last_layer) {
    if (x.cols() != m.input_dims())
        throw InvalidInput("Mlp: input has " + std::to_string(x.cols()) + " columns, network expects " +
                           std::to_string(m.input_dims()));
    Matrix out(x.rows(), m.layers[last_layer].outputs());
    std::vector<double> a, b;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        a.assign(row.begin(), row.end());
        for (std::size_t l = 0; l <= last_layer; ++l) {
            layer_forward(m.layers[l], a, b);
            std::swap(a, b);
        }
        std::copy(a.begin(), a.end(), out.row(i).begin());
    }
    return out;
}

/// Same shapes as the network, holding gradients or momentum.
inline std::vector<Layer> zeros_like(const Mlp& m) {
    std::vector<Layer> g;
    for (const auto& l : m.layers)
        g.push_back({Matrix(l.outputs(), l.inputs()), std::vector<double>(l.outputs(), 0.0), l.activation});
    return g;
}

/// Adds the gradient of sum((f(x) - y)^2) * scale for one row into `grad`; returns the row's squared error.
inline double accumulate_row(const Mlp& m, std::span<const double> x, std::span<const double> y, double scale,
                             std::vector<Layer>& grad, std::vector<std::vector<double>>& acts,
                             std::vector<double>& delta, std::vector<double>& prev) {
    forward_row(m, x, acts);
    const auto& out = acts.back();
    double sq = 0.0;
    delta.resize(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double e = out[i] - y[i];
        sq += e * e;
        delta[i] = 2.0 * e * scale;
    }
    for (std::size_t l = m.layers.size(); l-- > 0;) {
        const Layer& layer = m.layers[l];
        const auto& a_out = acts[l + 1];
        const auto& a_in = acts[l];
        if (layer.activation == Activation::Tanh)
            for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= 1.0 - a_out[i] * a_out[i];
        Layer& g = grad[l];
        for (std::size_t i = 0; i < layer.outputs(); ++i) {
            g.bias[i] += delta[i];
            auto gw = g.weights.row(i);
            for (std::size_t j = 0; j < layer.inputs(); ++j) gw[j] += delta[i] * a_in[j];
        }
        if (l == 0) break;
        prev.assign(layer.inputs(), 0.0);
        for (std::size_t i = 0; i < layer.outputs(); ++i) {
            const auto w = layer.weights.row(i);
            for (std::size_t j = 0; j < layer.inputs(); ++j) prev[j] += w[j] * delta[i];
        }
        std::swap(delta, prev);
    }
    return sq;
}

inline void check_xy(const Mlp& m, const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows()) throw InvalidInput("Mlp: input and target row counts differ");
    if (x.cols() != m.input_dims() || y.cols() != m.output_dims())
        throw InvalidInput("Mlp: input or target width does not match the network");
    if (x.rows() == 0) throw InvalidInput("Mlp: no rows");
}

}  // namespace detail

inline Matrix forward(const Mlp& m, const Matrix& x) { return detail::forward_to(m, x, m.layers.size() - 1); }

/// Bottleneck activations.
inline Matrix latent(const Mlp& m, const Matrix& x) { return detail::forward_to(m, x, m.latent_layer); }

/// Mean over all entries of the squared output error.
inline double mse_loss(const Mlp& m, const Matrix& x, const Matrix& y) {
    detail::check_xy(m, x, y);
    const Matrix out = forward(m, x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
            const double e = out(i, j) - y(i, j);
            s += e * e;
        }
    return s / static_cast<double>(y.rows() * y.cols());
}

struct Gradient {
    double loss = 0.0;
    std::vector<Layer> layers;
};

/// Loss and its gradient with respect to every weight and bias.
inline Gradient backprop(const Mlp& m, const Matrix& x, const Matrix& y) {
    detail::check_xy(m, x, y);
    Gradient g{0.0, detail::zeros_like(m)};
    const double scale = 1.0 / static_cast<double>(y.rows() * y.cols());
    std::vector<std::vector<double>> acts;
    std::vector<double> delta, prev;
    for (std::size_t i = 0; i < x.rows(); ++i)
        g.loss += detail::accumulate_row(m, x.row(i), y.row(i), scale, g.layers, acts, delta, prev);
    g.loss *= scale;
    return g;
}

/// Largest relative disagreement between backprop and central differences (step 1e-5).
inline double grad_check(const Mlp& m, const Matrix& x, const Matrix& y, double step = 1e-5) {
    const Gradient g = backprop(m, x, y);
    Mlp probe = m;
    double worst = 0.0;
    auto check = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + step;
        const double up = mse_loss(probe, x, y);
        param = saved - step;
        const double down = mse_loss(probe, x, y);
        param = saved;
        const double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-6));
    };
    for (std::size_t l = 0; l < probe.layers.size(); ++l) {
        Layer& layer = probe.layers[l];
        for (std::size_t i = 0; i < layer.outputs(); ++i) {
            for (std::size_t j = 0; j < layer.inputs(); ++j) check(layer.weights(i, j), g.layers[l].weights(i, j));
            check(layer.bias[i], g.layers[l].bias[i]);
        }
    }
    return worst;
}

namespace detail {

inline bool all_finite(const Mlp& m) {
    for (const auto& l : m.layers) {
        if (!l.weights.all_finite()) return false;
        for (double b : l.bias)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

/// Minibatch SGD with momentum; returns false if the loss or weights stop being finite.
inline bool sgd(Mlp& m, const Matrix& x, const Matrix& y, const TrainConfig& cfg, double lr, Rng& rng,
                std::vector<double>& history) {
    const std::size_t n = x.rows();
    std::vector<Layer> velocity = zeros_like(m);
    std::vector<Layer> grad = zeros_like(m);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::vector<double>> acts;
    std::vector<double> delta, prev;
    history.clear();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            const double scale = 1.0 / static_cast<double>((end - start) * y.cols());
            for (auto& g : grad) {
                std::fill(g.bias.begin(), g.bias.end(), 0.0);
                g.weights = Matrix(g.weights.rows(), g.weights.cols());
            }
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k)
                batch_loss += accumulate_row(m, x.row(order[k]), y.row(order[k]), scale, grad, acts, delta, prev);
            batch_loss *= scale;
            if (!std::isfinite(batch_loss)) return false;
            epoch_loss += batch_loss;
            ++batches;
            for (std::size_t l = 0; l < m.layers.size(); ++l) {
                Layer& layer = m.layers[l];
                Layer& v = velocity[l];
                for (std::size_t i = 0; i < layer.outputs(); ++i) {
                    v.bias[i] = cfg.momentum * v.bias[i] - lr * grad[l].bias[i];
                    layer.bias[i] += v.bias[i];
                    for (std::size_t j = 0; j < layer.inputs(); ++j) {
                        v.weights(i, j) = cfg.momentum * v.weights(i, j) - lr * grad[l].weights(i, j);
                        layer.weights(i, j) += v.weights(i, j);
                    }
                }
            }
        }
        history.push_back(epoch_loss / static_cast<double>(batches));
    }
    return all_finite(m);
}

/// Trains from a fresh seeded initialisation; on divergence retries once at half the rate.
inline TrainResult train_network(const std::vector<std::size_t>& sizes, const std::vector<Activation>& acts,
                                 std::size_t latent_layer, const Matrix& x, const Matrix& y,
                                 const TrainConfig& cfg) {
    cfg.validate();
    double lr = cfg.learning_rate;
    for (int attempt = 0; attempt < 2; ++attempt, lr *= 0.5) {
        Rng rng(cfg.seed);
        TrainResult r{make_mlp(sizes, acts, latent_layer, rng), {}, lr};
        detail::check_xy(r.model, x, y);
        if (sgd(r.model, x, y, cfg, lr, rng, r.loss_history)) return r;
    }
    throw TrainingError("training diverged twice (learning rates " + std::to_string(cfg.learning_rate) + " and " +
                        std::to_string(cfg.learning_rate / 2) + ")");
}

}  // namespace detail

/// p -> h -> k -> h -> p network trained to reproduce its input; tanh hidden layers,
/// linear bottleneck and output, h = max(2k, ceil(p/2)).
inline TrainResult train_autoencoder(const Matrix& x, std::size_t k, const TrainConfig& cfg = {}) {
    const std::size_t p = x.cols();
    if (k == 0 || k >= p) throw InvalidInput("train_autoencoder: need 0 < k < input width");
    if (x.rows() < 2) throw InvalidInput("train_autoencoder: need at least 2 rows");
    const std::size_t h = hidden_width(k, p);
    return detail::train_network({p, h, k, h, p},
                                 {Activation::Tanh, Activation::Linear, Activation::Tanh, Activation::Linear}, 1, x,
                                 x, cfg);
}

/// k -> h -> p regression network.
inline TrainResult train_decoder(const Matrix& latent_rows, const Matrix& target, const TrainConfig& cfg = {}) {
    if (latent_rows.rows() != target.rows()) throw InvalidInput("train_decoder: row counts differ");
    const std::size_t k = latent_rows.cols(), p = target.cols();
    const std::size_t h = hidden_width(k, p);
    return detail::train_network({k, h, p}, {Activation::Tanh, Activation::Linear}, 1, latent_rows, target, cfg);
}

}  // namespace gpdr
