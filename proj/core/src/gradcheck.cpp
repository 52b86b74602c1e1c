#include "textdet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "textdet/head.hpp"
#include "textdet/nn.hpp"
#include "textdet/omts.hpp"
#include "textdet/rng.hpp"

namespace textdet::gradcheck {

using nn::Vec;

namespace {

double violation(double analytic, double fd, const Options& opt) {
    const double scale = std::max(std::abs(analytic), std::abs(fd));
    return std::abs(analytic - fd) / (opt.abs_tol + opt.rel_tol * scale);
}

// Central finite differences of `loss` over every entry of `param`,
// compared against `analytic`.
double check_buffer(Vec& param, const Vec& analytic, const std::function<double()>& loss,
                    const Options& opt) {
    double worst = 0.0;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double saved = param[i];
        param[i] = saved + opt.fd_step;
        const double up = loss();
        param[i] = saved - opt.fd_step;
        const double down = loss();
        param[i] = saved;
        const double fd = (up - down) / (2.0 * opt.fd_step);
        worst = std::max(worst, violation(analytic[i], fd, opt));
    }
    return worst;
}

Vec random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Inputs kept away from the relu kink so central differences stay valid.
Vec random_vec_off_zero(std::size_t n, Rng& rng) {
    Vec v(n);
    for (double& x : v) {
        const double mag = rng.uniform(0.05, 1.5);
        x = rng.bernoulli(0.5) ? mag : -mag;
    }
    return v;
}

double weighted_sum(const Vec& v, const Vec& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * c[i];
    return s;
}

CheckResult check_dense(const Options& opt) {
    CheckResult result{"dense", 0.0, false};
    for (int seed = 0; seed < opt.seeds; ++seed) {
        Rng rng(mix_seed(opt.base_seed, 1000 + static_cast<std::uint64_t>(seed)));
        const std::size_t in = 2 + rng.uniform_index(opt.max_dim - 1);
        const std::size_t out = 2 + rng.uniform_index(opt.max_dim - 1);
        nn::DenseLayer layer(in, out);
        layer.init(rng);
        Vec x = random_vec(in, rng);
        const Vec c = random_vec(out, rng);

        auto loss = [&]() { return weighted_sum(layer.apply(x), c); };

        layer.zero_grad();
        layer.forward(x);
        const Vec dx = layer.backward(c);

        result.worst = std::max(result.worst, check_buffer(x, dx, loss, opt));
        result.worst = std::max(result.worst, check_buffer(layer.weights, layer.grad_weights, loss, opt));
        result.worst = std::max(result.worst, check_buffer(layer.bias, layer.grad_bias, loss, opt));
    }
    result.passed = result.worst <= 1.0;
    return result;
}

CheckResult check_relu(const Options& opt) {
    CheckResult result{"relu", 0.0, false};
    for (int seed = 0; seed < opt.seeds; ++seed) {
        Rng rng(mix_seed(opt.base_seed, 2000 + static_cast<std::uint64_t>(seed)));
        const std::size_t n = 2 + rng.uniform_index(opt.max_dim - 1);
        Vec x = random_vec_off_zero(n, rng);
        const Vec c = random_vec(n, rng);

        auto loss = [&]() { return weighted_sum(nn::relu(x), c); };
        const Vec dx = nn::relu_backward(c, x);
        result.worst = std::max(result.worst, check_buffer(x, dx, loss, opt));
    }
    result.passed = result.worst <= 1.0;
    return result;
}

CheckResult check_sigmoid(const Options& opt) {
    CheckResult result{"sigmoid", 0.0, false};
    for (int seed = 0; seed < opt.seeds; ++seed) {
        Rng rng(mix_seed(opt.base_seed, 3000 + static_cast<std::uint64_t>(seed)));
        const std::size_t n = 2 + rng.uniform_index(opt.max_dim - 1);
        Vec x = random_vec(n, rng, -3.0, 3.0);
        const Vec c = random_vec(n, rng);

        auto loss = [&]() { return weighted_sum(nn::sigmoid(x), c); };
        Vec dx(n);
        const Vec s = nn::sigmoid(x);
        for (std::size_t i = 0; i < n; ++i) dx[i] = c[i] * s[i] * (1.0 - s[i]);
        result.worst = std::max(result.worst, check_buffer(x, dx, loss, opt));
    }
    result.passed = result.worst <= 1.0;
    return result;
}

CheckResult check_softmax2(const Options& opt) {
    CheckResult result{"softmax2", 0.0, false};
    for (int seed = 0; seed < opt.seeds; ++seed) {
        Rng rng(mix_seed(opt.base_seed, 4000 + static_cast<std::uint64_t>(seed)));
        Vec logits = random_vec(2, rng, -3.0, 3.0);
        const Vec c = random_vec(2, rng);

        auto loss = [&]() {
            const auto p = nn::softmax2(logits[0], logits[1]);
            return c[0] * p[0] + c[1] * p[1];
        };
        const auto p = nn::softmax2(logits[0], logits[1]);
        const auto d = nn::softmax2_backward({p[0], p[1]}, {c[0], c[1]});
        const Vec dx{d[0], d[1]};
        result.worst = std::max(result.worst, check_buffer(logits, dx, loss, opt));
    }
    result.passed = result.worst <= 1.0;
    return result;
}

CheckResult check_pfam(const Options& opt) {
    CheckResult result{"pfam", 0.0, false};
    for (int seed = 0; seed < opt.seeds; ++seed) {
        Rng rng(mix_seed(opt.base_seed, 5000 + static_cast<std::uint64_t>(seed)));
        const std::size_t dim = 2 + rng.uniform_index(opt.max_dim - 1);
        const std::size_t hidden = 2 + rng.uniform_index(14);
        nn::PFAMBlock block(dim, hidden);
        block.init(rng);
        Vec x = random_vec(dim, rng);
        const Vec c = random_vec(dim, rng);

        auto loss = [&]() { return weighted_sum(block.apply(x), c); };

        block.zero_grad();
        block.forward(x);
        const Vec dx = block.backward(c);

        result.worst = std::max(result.worst, check_buffer(x, dx, loss, opt));
        result.worst = std::max(result.worst, check_buffer(block.fc1.weights, block.fc1.grad_weights, loss, opt));
        result.worst = std::max(result.worst, check_buffer(block.fc1.bias, block.fc1.grad_bias, loss, opt));
        result.worst = std::max(result.worst, check_buffer(block.fc2.weights, block.fc2.grad_weights, loss, opt));
        result.worst = std::max(result.worst, check_buffer(block.fc2.bias, block.fc2.grad_bias, loss, opt));
    }
    result.passed = result.worst <= 1.0;
    return result;
}

// Full-head OMTS loss against finite differences over every parameter.
CheckResult check_head(const Options& opt) {
    CheckResult result{"head", 0.0, false};
    const int cases = std::max(4, opt.seeds / 4);
    for (int seed = 0; seed < cases; ++seed) {
        Rng rng(mix_seed(opt.base_seed, 6000 + static_cast<std::uint64_t>(seed)));
        head::HeadConfig cfg;
        cfg.roi_dim = 4 + rng.uniform_index(std::min<std::size_t>(opt.max_dim, 12));
        cfg.fc_dim = 4 + rng.uniform_index(std::min<std::size_t>(opt.max_dim, 12));
        cfg.pfam_hidden = 2 + rng.uniform_index(6);
        cfg.K = 2;
        cfg.pfam_mode = seed % 3 == 0 ? head::PfamMode::none
                        : seed % 3 == 1 ? head::PfamMode::last_fc
                                        : head::PfamMode::both_fc;
        cfg.pfam_before_relu = seed % 2 == 1;

        head::DetectionHead net(cfg, rng.next_u64());
        // Zero-init biases can park every relu input exactly at the kink
        // (dead trunk); jitter all parameters to a generic point.
        for (Vec* p : net.parameter_buffers()) {
            for (double& v : *p) v += rng.uniform(-0.05, 0.05);
        }
        const Vec feature = random_vec(cfg.roi_dim, rng, 0.0, 1.0);

        // One text slot plus one background slot exercises the forced
        // ordering rule; both-text cases are covered through omts_loss's own
        // oracle tests.
        std::vector<omts::BranchTarget> targets(2);
        targets[0].cls = omts::TargetClass::text;
        encoding::BoxTarget bt;
        bt.dx = rng.uniform(-0.4, 0.4);
        bt.dy = rng.uniform(-0.4, 0.4);
        bt.dlog_w = rng.uniform(-0.3, 0.3);
        bt.dlog_h = rng.uniform(-0.3, 0.3);
        targets[0].box = bt;
        encoding::CurveTarget ct;
        for (double& v : ct.offsets) v = rng.uniform(-0.6, 0.6);
        targets[0].curve = ct;

        auto loss = [&]() {
            const head::HeadOutput out = net.forward(feature);
            std::vector<omts::BranchPrediction> preds(out.branches.size());
            for (std::size_t k = 0; k < out.branches.size(); ++k) {
                preds[k] = {out.branches[k].confidence, out.branches[k].box, out.branches[k].curve};
            }
            return omts::omts_loss(preds, targets).total;
        };

        net.zero_grad();
        const head::HeadOutput out = net.forward(feature);
        std::vector<omts::BranchPrediction> preds(out.branches.size());
        for (std::size_t k = 0; k < out.branches.size(); ++k) {
            preds[k] = {out.branches[k].confidence, out.branches[k].box, out.branches[k].curve};
        }
        const omts::LossBreakdown breakdown = omts::omts_loss(preds, targets);

        std::vector<head::BranchGrad> grads(out.branches.size());
        for (std::size_t k = 0; k < out.branches.size(); ++k) {
            const auto& br = out.branches[k];
            const auto& target = targets[static_cast<std::size_t>(breakdown.chosen_permutation[k])];
            const auto p = nn::softmax2(br.logits[0], br.logits[1]);
            const bool is_text = target.cls == omts::TargetClass::text;
            grads[k].d_logits = {p[0] - (is_text ? 0.0 : 1.0), p[1] - (is_text ? 1.0 : 0.0)};
            if (is_text) {
                auto sl1 = [](double d) { return d > 1.0 ? 1.0 : (d < -1.0 ? -1.0 : d); };
                grads[k].d_box = {sl1(br.box.dx - target.box->dx), sl1(br.box.dy - target.box->dy),
                                  sl1(br.box.dlog_w - target.box->dlog_w),
                                  sl1(br.box.dlog_h - target.box->dlog_h)};
                for (std::size_t i = 0; i < 16; ++i) {
                    grads[k].d_curve[i] = sl1(br.curve.offsets[i] - target.curve->offsets[i]);
                }
            }
        }
        net.backward(grads);

        auto params = net.parameter_buffers();
        auto grad_bufs = net.gradient_buffers();
        for (std::size_t i = 0; i < params.size(); ++i) {
            result.worst = std::max(result.worst, check_buffer(*params[i], *grad_bufs[i], loss, opt));
        }
    }
    result.passed = result.worst <= 1.0;
    return result;
}

}  // namespace

std::vector<CheckResult> run_all(const Options& options) {
    std::vector<CheckResult> results;
    results.push_back(check_dense(options));
    results.push_back(check_relu(options));
    results.push_back(check_sigmoid(options));
    results.push_back(check_softmax2(options));
    results.push_back(check_pfam(options));
    results.push_back(check_head(options));
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return r.passed; });
}

std::string format_results(const std::vector<CheckResult>& results) {
    std::string out;
    char buf[128];
    for (const CheckResult& r : results) {
        std::snprintf(buf, sizeof(buf), "%-10s %-6s (worst tolerance ratio %.3g)\n", r.name.c_str(),
                      r.passed ? "ok" : "FAIL", r.worst);
        out += buf;
    }
    return out;
}

}  // namespace textdet::gradcheck
