#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "textdet/encoding.hpp"
#include "textdet/geometry.hpp"
#include "textdet/nn.hpp"
#include "textdet/omts.hpp"

namespace textdet::head {

// 1fc puts a gating block after the last fc layer, 2fc after each of the two.
enum class PfamMode { none, last_fc, both_fc };

enum class Scheme { one_to_one, omts };

struct HeadConfig {
    std::size_t roi_dim = 196;  // flattened 14x14 ROI grid
    std::size_t fc_dim = 256;
    int K = 2;
    PfamMode pfam_mode = PfamMode::both_fc;
    std::size_t pfam_hidden = 64;
    bool pfam_before_relu = false;  // default gates the post-ReLU fc output
};

struct HeadOutput {
    struct Branch {
        std::array<double, 2> logits{};  // {background, text}
        double confidence = 0.5;         // text probability from softmax2
        encoding::BoxTarget box;
        encoding::CurveTarget curve;
    };
    std::vector<Branch> branches;
};

struct OpCount {
    std::uint64_t macs = 0;
    std::uint64_t activations = 0;
    bool operator==(const OpCount&) const = default;
};

struct Detection {
    double score = 0.0;
    geometry::AxisBox box;
    geometry::BezierText shape;
};

// Per-branch upstream gradients for one sample.
struct BranchGrad {
    std::array<double, 2> d_logits{};
    std::array<double, 4> d_box{};
    std::array<double, 16> d_curve{};
};

// roi feature -> fc(+PFAM) -> fc(+PFAM) -> K independent branches of
// (class logits, box deltas, curve offsets).
class DetectionHead {
public:
    DetectionHead(const HeadConfig& config, std::uint64_t seed);

    const HeadConfig& config() const { return cfg_; }

    /// Training forward over all K branches; caches activations.
    HeadOutput forward(const nn::Vec& roi_feature);

    /// Cache-free branch-1 forward; safe to call concurrently on a frozen
    /// net. `ops` accumulates the exact multiply-accumulate and activation
    /// counts executed.
    HeadOutput::Branch infer_branch1(const nn::Vec& roi_feature, OpCount* ops = nullptr) const;

    /// Backward for the sample most recently passed through forward().
    void backward(std::span<const BranchGrad> branch_grads);

    void zero_grad();
    void scale_grads(double factor);

    /// Parameter and gradient buffers in a fixed, documented order.
    std::vector<nn::Vec*> parameter_buffers();
    std::vector<nn::Vec*> gradient_buffers();

    nn::ParamMap to_params() const;
    void from_params(const nn::ParamMap& params);

private:
    struct BranchHeads {
        nn::DenseLayer cls;
        nn::DenseLayer box;
        nn::DenseLayer curve;
    };

    nn::Vec trunk_forward(const nn::Vec& x);
    nn::Vec trunk_apply(const nn::Vec& x, OpCount* ops) const;
    nn::Vec trunk_backward(const nn::Vec& upstream);

    HeadConfig cfg_;
    nn::DenseLayer fc1_;
    nn::DenseLayer fc2_;
    std::optional<nn::PFAMBlock> pfam1_;
    std::optional<nn::PFAMBlock> pfam2_;
    nn::ReluLayer relu1_;
    nn::ReluLayer relu2_;
    std::vector<BranchHeads> branches_;
};

struct TrainSample {
    nn::Vec feature;
    geometry::AxisBox proposal;
    omts::MatchSet match;
    int scene_index = 0;
};

struct TrainDataset {
    std::vector<std::vector<geometry::BezierText>> scene_instances;
    std::vector<TrainSample> samples;
};

struct TrainOptions {
    Scheme scheme = Scheme::omts;
    std::size_t iters = 2000;
    int batch = 16;
    double fg_fraction = 0.5;
    std::uint64_t seed = 0;
};

struct LossRecord {
    std::size_t iter = 0;
    double cls = 0.0;
    double reg_box = 0.0;
    double reg_curve = 0.0;
    double total = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    DetectionHead net;
    std::vector<LossRecord> curve;
};

/// one_to_one trains branch 0 against the single highest-IoU groundtruth with
/// all other branches forced to background; omts searches branch-to-target
/// permutations per proposal. Deterministic given (config, dataset, seed).
TrainResult train_head(const HeadConfig& config, const TrainDataset& dataset,
                       const nn::SgdConfig& sgd, const TrainOptions& options);

/// Branch-1-only inference: decode, drop below-threshold scores, greedy NMS
/// on decoded boxes, sort by descending score.
std::vector<Detection> infer(const DetectionHead& net, std::span<const geometry::AxisBox> proposals,
                             std::span<const nn::Vec> roi_features, double score_threshold = 0.5,
                             double nms_iou = 0.5, OpCount* ops = nullptr);

}  // namespace textdet::head
