#include "textdet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace textdet::nn {

void ParamMap::add(std::string name, std::vector<std::size_t> shape, const Vec& data) {
    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;
    if (count != data.size()) {
        throw std::invalid_argument("ParamMap::add: shape does not match data size for " + name);
    }
    items.emplace_back(std::move(name), Tensor{std::move(shape), data});
}

const Tensor& ParamMap::get(const std::string& name) const {
    for (const auto& [n, t] : items) {
        if (n == name) return t;
    }
    throw std::out_of_range("ParamMap::get: no tensor named " + name);
}

void init_uniform(Vec& weights, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : weights) w = rng.uniform(-a, a);
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : in_dim(in),
      out_dim(out),
      weights(in * out, 0.0),
      bias(out, 0.0),
      grad_weights(in * out, 0.0),
      grad_bias(out, 0.0) {}

void DenseLayer::init(Rng& rng) {
    init_uniform(weights, in_dim, out_dim, rng);
    std::fill(bias.begin(), bias.end(), 0.0);
}

void DenseLayer::zero_grad() {
    std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

Vec DenseLayer::apply(const Vec& x) const {
    if (x.size() != in_dim) {
        throw std::invalid_argument("DenseLayer: input size mismatch");
    }
    Vec y(out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) {
        double acc = bias[o];
        const double* row = weights.data() + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
    return y;
}

Vec DenseLayer::forward(const Vec& x) {
    cached_input = x;
    return apply(x);
}

Vec DenseLayer::backward(const Vec& upstream) {
    if (upstream.size() != out_dim || cached_input.size() != in_dim) {
        throw std::invalid_argument("DenseLayer::backward: size mismatch");
    }
    Vec dx(in_dim, 0.0);
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double u = upstream[o];
        grad_bias[o] += u;
        double* grow = grad_weights.data() + o * in_dim;
        const double* row = weights.data() + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) {
            grow[i] += u * cached_input[i];
            dx[i] += u * row[i];
        }
    }
    return dx;
}

Vec ReluLayer::forward(const Vec& x) {
    cached_pre = x;
    return relu(x);
}

Vec ReluLayer::backward(const Vec& upstream) const {
    return relu_backward(upstream, cached_pre);
}

Vec relu(const Vec& x) {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

Vec relu_backward(const Vec& upstream, const Vec& pre_activation) {
    if (upstream.size() != pre_activation.size()) {
        throw std::invalid_argument("relu_backward: size mismatch");
    }
    Vec dx(upstream.size());
    for (std::size_t i = 0; i < upstream.size(); ++i) {
        dx[i] = pre_activation[i] > 0.0 ? upstream[i] : 0.0;
    }
    return dx;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Vec sigmoid(const Vec& x) {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
    return y;
}

std::array<double, 2> softmax2(double logit0, double logit1) {
    const double m = std::max(logit0, logit1);
    const double e0 = std::exp(logit0 - m);
    const double e1 = std::exp(logit1 - m);
    const double s = e0 + e1;
    return {e0 / s, e1 / s};
}

std::array<double, 2> softmax2_backward(const std::array<double, 2>& probs,
                                        const std::array<double, 2>& upstream) {
    const double weighted = upstream[0] * probs[0] + upstream[1] * probs[1];
    return {probs[0] * (upstream[0] - weighted), probs[1] * (upstream[1] - weighted)};
}

PFAMBlock::PFAMBlock(std::size_t dim, std::size_t hidden)
    : fc1(dim, hidden), fc2(hidden, dim) {}

void PFAMBlock::init(Rng& rng) {
    fc1.init(rng);
    fc2.init(rng);
}

void PFAMBlock::zero_grad() {
    fc1.zero_grad();
    fc2.zero_grad();
}

Vec PFAMBlock::apply(const Vec& f_in) const {
    const Vec gate = sigmoid(fc2.apply(relu(fc1.apply(f_in))));
    Vec out(f_in.size());
    for (std::size_t i = 0; i < f_in.size(); ++i) out[i] = f_in[i] * gate[i];
    return out;
}

Vec PFAMBlock::forward(const Vec& f_in) {
    cached_in = f_in;
    cached_pre_hidden = fc1.forward(f_in);
    cached_hidden = relu(cached_pre_hidden);
    cached_gate = sigmoid(fc2.forward(cached_hidden));
    Vec out(f_in.size());
    for (std::size_t i = 0; i < f_in.size(); ++i) out[i] = f_in[i] * cached_gate[i];
    return out;
}

Vec PFAMBlock::backward(const Vec& upstream) {
    const std::size_t dim = cached_in.size();
    if (upstream.size() != dim) {
        throw std::invalid_argument("PFAMBlock::backward: size mismatch");
    }
    // Product rule: the gradient flows through the identity path and through
    // the gate path.
    Vec d_gate(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        d_gate[i] = upstream[i] * cached_in[i] * cached_gate[i] * (1.0 - cached_gate[i]);
    }
    const Vec d_hidden = fc2.backward(d_gate);
    const Vec d_pre = relu_backward(d_hidden, cached_pre_hidden);
    const Vec d_in_mlp = fc1.backward(d_pre);

    Vec dx(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        dx[i] = upstream[i] * cached_gate[i] + d_in_mlp[i];
    }
    return dx;
}

double effective_lr(const SgdConfig& config, std::size_t iter) {
    if (config.warmup_iters == 0) return config.lr;
    const double ramp = static_cast<double>(iter + 1) / static_cast<double>(config.warmup_iters);
    return config.lr * std::min(1.0, ramp);
}

void sgd_step(Vec& param, const Vec& grad, Vec& velocity, const SgdConfig& config,
              std::size_t iter) {
    if (param.size() != grad.size()) {
        throw std::invalid_argument("sgd_step: param/grad size mismatch");
    }
    if (velocity.size() != param.size()) velocity.assign(param.size(), 0.0);
    const double lr = effective_lr(config, iter);
    for (std::size_t i = 0; i < param.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] + grad[i] + config.weight_decay * param[i];
        param[i] -= lr * velocity[i];
    }
}

}  // namespace textdet::nn
