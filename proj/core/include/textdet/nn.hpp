#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "textdet/rng.hpp"

namespace textdet::nn {

using Vec = std::vector<double>;

struct Tensor {
    std::vector<std::size_t> shape;
    Vec data;
};

// Named parameter tensors in a fixed order; the checkpoint container.
struct ParamMap {
    std::vector<std::pair<std::string, Tensor>> items;

    void add(std::string name, std::vector<std::size_t> shape, const Vec& data);
    const Tensor& get(const std::string& name) const;
};

/// Glorot-uniform fill: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void init_uniform(Vec& weights, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Fully connected layer, row-major (out x in) weights. forward() caches the
// input for backward(); apply() is the cache-free const path for inference.
struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Vec weights;
    Vec bias;
    Vec grad_weights;
    Vec grad_bias;
    Vec cached_input;

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out);

    void init(Rng& rng);
    void zero_grad();

    Vec forward(const Vec& x);
    Vec apply(const Vec& x) const;
    /// Accumulates parameter gradients and returns dL/dx.
    Vec backward(const Vec& upstream);

    std::uint64_t forward_macs() const {
        return static_cast<std::uint64_t>(out_dim) * in_dim + out_dim;
    }
};

struct ReluLayer {
    Vec cached_pre;
    Vec forward(const Vec& x);
    Vec backward(const Vec& upstream) const;
};

Vec relu(const Vec& x);
Vec relu_backward(const Vec& upstream, const Vec& pre_activation);

double sigmoid(double x);
Vec sigmoid(const Vec& x);

/// Numerically stable two-way softmax; returns {p0, p1}.
std::array<double, 2> softmax2(double logit0, double logit1);

/// d(loss)/d(logits) given the softmax outputs and d(loss)/d(probs).
std::array<double, 2> softmax2_backward(const std::array<double, 2>& probs,
                                        const std::array<double, 2>& upstream);

// Gating block: out = in (*) sigmoid(fc2(relu(fc1(in)))). fc1 maps the
// feature to a hidden width (64 by default at call sites), fc2 maps back.
struct PFAMBlock {
    DenseLayer fc1;
    DenseLayer fc2;
    Vec cached_in;
    Vec cached_pre_hidden;
    Vec cached_hidden;
    Vec cached_gate;

    PFAMBlock() = default;
    PFAMBlock(std::size_t dim, std::size_t hidden);

    void init(Rng& rng);
    void zero_grad();

    Vec forward(const Vec& f_in);
    Vec apply(const Vec& f_in) const;
    Vec backward(const Vec& upstream);

    std::uint64_t forward_macs() const {
        return fc1.forward_macs() + fc2.forward_macs() +
               3 * static_cast<std::uint64_t>(fc1.in_dim);  // gate + product
    }
};

struct SgdConfig {
    double lr = 0.0025;
    double momentum = 0.9;
    double weight_decay = 0.0001;
    std::size_t warmup_iters = 500;
};

/// Linear warmup: lr * min(1, (iter + 1) / warmup_iters).
double effective_lr(const SgdConfig& config, std::size_t iter);

/// v <- momentum * v + grad + weight_decay * param; param <- param - lr_eff * v.
void sgd_step(Vec& param, const Vec& grad, Vec& velocity, const SgdConfig& config,
              std::size_t iter);

}  // namespace textdet::nn
