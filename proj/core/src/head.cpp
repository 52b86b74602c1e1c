#include "textdet/head.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "textdet/rng.hpp"

namespace textdet::head {

using nn::Vec;

namespace {

constexpr std::size_t kClsOut = 2;
constexpr std::size_t kBoxOut = 4;
constexpr std::size_t kCurveOut = 16;

double smooth_l1_grad(double diff) {
    if (diff > 1.0) return 1.0;
    if (diff < -1.0) return -1.0;
    return diff;
}

}  // namespace

DetectionHead::DetectionHead(const HeadConfig& config, std::uint64_t seed) : cfg_(config) {
    if (cfg_.K < 1) throw std::invalid_argument("DetectionHead: K must be >= 1");
    if (cfg_.roi_dim == 0 || cfg_.fc_dim == 0) {
        throw std::invalid_argument("DetectionHead: dimensions must be positive");
    }

    fc1_ = nn::DenseLayer(cfg_.roi_dim, cfg_.fc_dim);
    fc2_ = nn::DenseLayer(cfg_.fc_dim, cfg_.fc_dim);
    if (cfg_.pfam_mode == PfamMode::both_fc) {
        pfam1_.emplace(cfg_.fc_dim, cfg_.pfam_hidden);
    }
    if (cfg_.pfam_mode != PfamMode::none) {
        pfam2_.emplace(cfg_.fc_dim, cfg_.pfam_hidden);
    }
    branches_.resize(static_cast<std::size_t>(cfg_.K));
    for (auto& b : branches_) {
        b.cls = nn::DenseLayer(cfg_.fc_dim, kClsOut);
        b.box = nn::DenseLayer(cfg_.fc_dim, kBoxOut);
        b.curve = nn::DenseLayer(cfg_.fc_dim, kCurveOut);
    }

    Rng rng(seed);
    fc1_.init(rng);
    if (pfam1_) pfam1_->init(rng);
    fc2_.init(rng);
    if (pfam2_) pfam2_->init(rng);
    for (auto& b : branches_) {
        b.cls.init(rng);
        b.box.init(rng);
        b.curve.init(rng);
    }
}

Vec DetectionHead::trunk_forward(const Vec& x) {
    Vec h = fc1_.forward(x);
    if (cfg_.pfam_before_relu) {
        if (pfam1_) h = pfam1_->forward(h);
        h = relu1_.forward(h);
        h = fc2_.forward(h);
        if (pfam2_) h = pfam2_->forward(h);
        h = relu2_.forward(h);
    } else {
        h = relu1_.forward(h);
        if (pfam1_) h = pfam1_->forward(h);
        h = fc2_.forward(h);
        h = relu2_.forward(h);
        if (pfam2_) h = pfam2_->forward(h);
    }
    return h;
}

Vec DetectionHead::trunk_apply(const Vec& x, OpCount* ops) const {
    Vec h = fc1_.apply(x);
    if (ops) ops->macs += fc1_.forward_macs();
    auto run_relu = [&](Vec v) {
        if (ops) ops->activations += v.size();
        return nn::relu(v);
    };
    auto run_pfam = [&](const std::optional<nn::PFAMBlock>& block, Vec v) {
        if (!block) return v;
        if (ops) {
            ops->macs += block->forward_macs();
            ops->activations += block->fc1.out_dim + block->fc2.out_dim;
        }
        return block->apply(v);
    };
    if (cfg_.pfam_before_relu) {
        h = run_pfam(pfam1_, std::move(h));
        h = run_relu(std::move(h));
        h = fc2_.apply(h);
        if (ops) ops->macs += fc2_.forward_macs();
        h = run_pfam(pfam2_, std::move(h));
        h = run_relu(std::move(h));
    } else {
        h = run_relu(std::move(h));
        h = run_pfam(pfam1_, std::move(h));
        h = fc2_.apply(h);
        if (ops) ops->macs += fc2_.forward_macs();
        h = run_relu(std::move(h));
        h = run_pfam(pfam2_, std::move(h));
    }
    return h;
}

Vec DetectionHead::trunk_backward(const Vec& upstream) {
    Vec g = upstream;
    if (cfg_.pfam_before_relu) {
        g = relu2_.backward(g);
        if (pfam2_) g = pfam2_->backward(g);
        g = fc2_.backward(g);
        g = relu1_.backward(g);
        if (pfam1_) g = pfam1_->backward(g);
        g = fc1_.backward(g);
    } else {
        if (pfam2_) g = pfam2_->backward(g);
        g = relu2_.backward(g);
        g = fc2_.backward(g);
        if (pfam1_) g = pfam1_->backward(g);
        g = relu1_.backward(g);
        g = fc1_.backward(g);
    }
    return g;
}

HeadOutput DetectionHead::forward(const Vec& roi_feature) {
    const Vec feats = trunk_forward(roi_feature);
    HeadOutput out;
    out.branches.reserve(branches_.size());
    for (auto& b : branches_) {
        HeadOutput::Branch br;
        const Vec logits = b.cls.forward(feats);
        br.logits = {logits[0], logits[1]};
        br.confidence = nn::softmax2(logits[0], logits[1])[1];
        const Vec box = b.box.forward(feats);
        br.box = {box[0], box[1], box[2], box[3]};
        const Vec curve = b.curve.forward(feats);
        std::copy(curve.begin(), curve.end(), br.curve.offsets.begin());
        out.branches.push_back(br);
    }
    return out;
}

HeadOutput::Branch DetectionHead::infer_branch1(const Vec& roi_feature, OpCount* ops) const {
    const Vec feats = trunk_apply(roi_feature, ops);
    const auto& b = branches_.front();
    HeadOutput::Branch br;
    const Vec logits = b.cls.apply(feats);
    br.logits = {logits[0], logits[1]};
    br.confidence = nn::softmax2(logits[0], logits[1])[1];
    const Vec box = b.box.apply(feats);
    br.box = {box[0], box[1], box[2], box[3]};
    const Vec curve = b.curve.apply(feats);
    std::copy(curve.begin(), curve.end(), br.curve.offsets.begin());
    if (ops) {
        ops->macs += b.cls.forward_macs() + b.box.forward_macs() + b.curve.forward_macs();
        ops->activations += kClsOut;  // softmax2
    }
    return br;
}

void DetectionHead::backward(std::span<const BranchGrad> branch_grads) {
    if (branch_grads.size() != branches_.size()) {
        throw std::invalid_argument("DetectionHead::backward: branch count mismatch");
    }
    Vec feat_grad(cfg_.fc_dim, 0.0);
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        auto& b = branches_[k];
        const BranchGrad& g = branch_grads[k];
        const Vec dc = b.cls.backward(Vec(g.d_logits.begin(), g.d_logits.end()));
        const Vec db = b.box.backward(Vec(g.d_box.begin(), g.d_box.end()));
        const Vec dv = b.curve.backward(Vec(g.d_curve.begin(), g.d_curve.end()));
        for (std::size_t i = 0; i < feat_grad.size(); ++i) {
            feat_grad[i] += dc[i] + db[i] + dv[i];
        }
    }
    trunk_backward(feat_grad);
}

void DetectionHead::zero_grad() {
    fc1_.zero_grad();
    fc2_.zero_grad();
    if (pfam1_) pfam1_->zero_grad();
    if (pfam2_) pfam2_->zero_grad();
    for (auto& b : branches_) {
        b.cls.zero_grad();
        b.box.zero_grad();
        b.curve.zero_grad();
    }
}

void DetectionHead::scale_grads(double factor) {
    for (Vec* g : gradient_buffers()) {
        for (double& v : *g) v *= factor;
    }
}

std::vector<Vec*> DetectionHead::parameter_buffers() {
    std::vector<Vec*> out;
    auto add_dense = [&out](nn::DenseLayer& d) {
        out.push_back(&d.weights);
        out.push_back(&d.bias);
    };
    add_dense(fc1_);
    if (pfam1_) {
        add_dense(pfam1_->fc1);
        add_dense(pfam1_->fc2);
    }
    add_dense(fc2_);
    if (pfam2_) {
        add_dense(pfam2_->fc1);
        add_dense(pfam2_->fc2);
    }
    for (auto& b : branches_) {
        add_dense(b.cls);
        add_dense(b.box);
        add_dense(b.curve);
    }
    return out;
}

std::vector<Vec*> DetectionHead::gradient_buffers() {
    std::vector<Vec*> out;
    auto add_dense = [&out](nn::DenseLayer& d) {
        out.push_back(&d.grad_weights);
        out.push_back(&d.grad_bias);
    };
    add_dense(fc1_);
    if (pfam1_) {
        add_dense(pfam1_->fc1);
        add_dense(pfam1_->fc2);
    }
    add_dense(fc2_);
    if (pfam2_) {
        add_dense(pfam2_->fc1);
        add_dense(pfam2_->fc2);
    }
    for (auto& b : branches_) {
        add_dense(b.cls);
        add_dense(b.box);
        add_dense(b.curve);
    }
    return out;
}

namespace {

void add_dense_params(nn::ParamMap& map, const std::string& prefix, const nn::DenseLayer& d) {
    map.add(prefix + ".weight", {d.out_dim, d.in_dim}, d.weights);
    map.add(prefix + ".bias", {d.out_dim}, d.bias);
}

void load_dense_params(const nn::ParamMap& map, const std::string& prefix, nn::DenseLayer& d) {
    const nn::Tensor& w = map.get(prefix + ".weight");
    if (w.shape != std::vector<std::size_t>{d.out_dim, d.in_dim}) {
        throw std::invalid_argument("checkpoint tensor shape mismatch for " + prefix + ".weight");
    }
    d.weights = w.data;
    const nn::Tensor& b = map.get(prefix + ".bias");
    if (b.shape != std::vector<std::size_t>{d.out_dim}) {
        throw std::invalid_argument("checkpoint tensor shape mismatch for " + prefix + ".bias");
    }
    d.bias = b.data;
}

}  // namespace

nn::ParamMap DetectionHead::to_params() const {
    nn::ParamMap map;
    add_dense_params(map, "fc1", fc1_);
    if (pfam1_) {
        add_dense_params(map, "pfam1.fc1", pfam1_->fc1);
        add_dense_params(map, "pfam1.fc2", pfam1_->fc2);
    }
    add_dense_params(map, "fc2", fc2_);
    if (pfam2_) {
        add_dense_params(map, "pfam2.fc1", pfam2_->fc1);
        add_dense_params(map, "pfam2.fc2", pfam2_->fc2);
    }
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        const std::string prefix = "branch" + std::to_string(k);
        add_dense_params(map, prefix + ".cls", branches_[k].cls);
        add_dense_params(map, prefix + ".box", branches_[k].box);
        add_dense_params(map, prefix + ".curve", branches_[k].curve);
    }
    return map;
}

void DetectionHead::from_params(const nn::ParamMap& params) {
    load_dense_params(params, "fc1", fc1_);
    if (pfam1_) {
        load_dense_params(params, "pfam1.fc1", pfam1_->fc1);
        load_dense_params(params, "pfam1.fc2", pfam1_->fc2);
    }
    load_dense_params(params, "fc2", fc2_);
    if (pfam2_) {
        load_dense_params(params, "pfam2.fc1", pfam2_->fc1);
        load_dense_params(params, "pfam2.fc2", pfam2_->fc2);
    }
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        const std::string prefix = "branch" + std::to_string(k);
        load_dense_params(params, prefix + ".cls", branches_[k].cls);
        load_dense_params(params, prefix + ".box", branches_[k].box);
        load_dense_params(params, prefix + ".curve", branches_[k].curve);
    }
}

namespace {

// Adapts a stored match set to the head's K: one_to_one keeps only the
// top-IoU groundtruth, omts keeps up to K.
omts::MatchSet adapt_match(const omts::MatchSet& m, int K, bool top1_only) {
    omts::MatchSet out;
    out.proposal_index = m.proposal_index;
    const int keep = std::min(top1_only ? 1 : K, static_cast<int>(m.matched_gt.size()));
    out.matched_gt.assign(m.matched_gt.begin(), m.matched_gt.begin() + keep);
    out.padded_background = K - keep;
    return out;
}

omts::LossBreakdown identity_loss(std::span<const omts::BranchPrediction> preds,
                                  std::span<const omts::BranchTarget> targets) {
    omts::LossBreakdown out;
    out.chosen_permutation.resize(preds.size());
    for (std::size_t k = 0; k < preds.size(); ++k) {
        const omts::BranchLoss l = omts::branch_loss_parts(preds[k], targets[k]);
        out.cls += l.cls;
        out.reg_box += l.reg_box;
        out.reg_curve += l.reg_curve;
        out.chosen_permutation[k] = static_cast<int>(k);
    }
    out.total = out.cls + out.reg_box + out.reg_curve;
    return out;
}

}  // namespace

TrainResult train_head(const HeadConfig& config, const TrainDataset& dataset,
                       const nn::SgdConfig& sgd, const TrainOptions& options) {
    if (dataset.samples.empty()) {
        throw std::invalid_argument("train_head: empty dataset");
    }

    std::vector<omts::MatchSet> all_matches;
    all_matches.reserve(dataset.samples.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        omts::MatchSet m = dataset.samples[i].match;
        m.proposal_index = static_cast<int>(i);
        all_matches.push_back(std::move(m));
    }

    TrainResult result{DetectionHead(config, mix_seed(options.seed, 0x1417)), {}};
    DetectionHead& net = result.net;
    result.curve.reserve(options.iters);

    std::vector<Vec> velocity;
    {
        auto params = net.parameter_buffers();
        velocity.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) velocity[i].assign(params[i]->size(), 0.0);
    }

    const int K = config.K;
    for (std::size_t iter = 0; iter < options.iters; ++iter) {
        const auto batch = omts::sample_minibatch(all_matches, options.fg_fraction, options.batch,
                                                  mix_seed(options.seed, iter));
        if (batch.empty()) {
            throw std::runtime_error("train_head: empty minibatch at iteration " +
                                     std::to_string(iter));
        }

        net.zero_grad();
        double sum_cls = 0.0, sum_box = 0.0, sum_curve = 0.0;
        for (const omts::MatchSet& m : batch) {
            const TrainSample& sample = dataset.samples[static_cast<std::size_t>(m.proposal_index)];
            const auto& gts = dataset.scene_instances[static_cast<std::size_t>(sample.scene_index)];

            const omts::MatchSet effective =
                adapt_match(m, K, options.scheme == Scheme::one_to_one);
            const auto targets = omts::build_branch_targets(effective, gts, sample.proposal);

            const HeadOutput out = net.forward(sample.feature);
            std::vector<omts::BranchPrediction> preds(out.branches.size());
            for (std::size_t k = 0; k < out.branches.size(); ++k) {
                preds[k] = {out.branches[k].confidence, out.branches[k].box,
                            out.branches[k].curve};
            }

            const omts::LossBreakdown breakdown = options.scheme == Scheme::one_to_one
                                                      ? identity_loss(preds, targets)
                                                      : omts::omts_loss(preds, targets);
            if (!std::isfinite(breakdown.total)) {
                throw std::runtime_error("train_head: non-finite loss at iteration " +
                                         std::to_string(iter) + ", proposal " +
                                         std::to_string(m.proposal_index));
            }
            sum_cls += breakdown.cls;
            sum_box += breakdown.reg_box;
            sum_curve += breakdown.reg_curve;

            std::vector<BranchGrad> grads(out.branches.size());
            for (std::size_t k = 0; k < out.branches.size(); ++k) {
                const auto& br = out.branches[k];
                const auto& target =
                    targets[static_cast<std::size_t>(breakdown.chosen_permutation[k])];
                const auto p = nn::softmax2(br.logits[0], br.logits[1]);
                const bool is_text = target.cls == omts::TargetClass::text;
                grads[k].d_logits = {p[0] - (is_text ? 0.0 : 1.0), p[1] - (is_text ? 1.0 : 0.0)};
                if (is_text) {
                    grads[k].d_box = {smooth_l1_grad(br.box.dx - target.box->dx),
                                      smooth_l1_grad(br.box.dy - target.box->dy),
                                      smooth_l1_grad(br.box.dlog_w - target.box->dlog_w),
                                      smooth_l1_grad(br.box.dlog_h - target.box->dlog_h)};
                    for (std::size_t i = 0; i < 16; ++i) {
                        grads[k].d_curve[i] =
                            smooth_l1_grad(br.curve.offsets[i] - target.curve->offsets[i]);
                    }
                }
            }
            net.backward(grads);
        }

        const double inv_n = 1.0 / static_cast<double>(batch.size());
        net.scale_grads(inv_n);
        auto params = net.parameter_buffers();
        auto grads = net.gradient_buffers();
        for (std::size_t i = 0; i < params.size(); ++i) {
            nn::sgd_step(*params[i], *grads[i], velocity[i], sgd, iter);
        }

        result.curve.push_back({iter, sum_cls * inv_n, sum_box * inv_n, sum_curve * inv_n,
                                (sum_cls + sum_box + sum_curve) * inv_n,
                                nn::effective_lr(sgd, iter)});
    }
    return result;
}

std::vector<Detection> infer(const DetectionHead& net, std::span<const geometry::AxisBox> proposals,
                             std::span<const nn::Vec> roi_features, double score_threshold,
                             double nms_iou, OpCount* ops) {
    if (proposals.size() != roi_features.size()) {
        throw std::invalid_argument("infer: proposal/feature count mismatch");
    }
    std::vector<Detection> candidates;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const HeadOutput::Branch br = net.infer_branch1(roi_features[i], ops);
        if (br.confidence < score_threshold) continue;
        Detection d;
        d.score = br.confidence;
        d.box = encoding::decode_box(br.box, proposals[i]);
        d.shape = encoding::decode_curve(br.curve, proposals[i]);
        candidates.push_back(std::move(d));
    }

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (candidates[a].score != candidates[b].score) {
            return candidates[a].score > candidates[b].score;
        }
        return a < b;
    });

    std::vector<Detection> kept;
    for (std::size_t idx : order) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (geometry::box_iou(k.box, candidates[idx].box) > nms_iou) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(candidates[idx]);
    }
    return kept;
}

}  // namespace textdet::head
