#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "textdet/encoding.hpp"
#include "textdet/geometry.hpp"

namespace textdet::omts {

// Groundtruth indices matched to one proposal, IoU descending, padded with
// background slots up to K.
struct MatchSet {
    int proposal_index = -1;
    std::vector<int> matched_gt;
    int padded_background = 0;

    int k() const { return static_cast<int>(matched_gt.size()) + padded_background; }
    bool is_background() const { return matched_gt.empty(); }
};

enum class TargetClass { background, text };

struct BranchTarget {
    TargetClass cls = TargetClass::background;
    std::optional<encoding::BoxTarget> box;
    std::optional<encoding::CurveTarget> curve;
};

struct BranchPrediction {
    double confidence = 0.5;  // text-class probability
    encoding::BoxTarget box;
    encoding::CurveTarget curve;
};

struct BranchLoss {
    double cls = 0.0;
    double reg_box = 0.0;
    double reg_curve = 0.0;
    double total() const { return cls + reg_box + reg_curve; }
};

// chosen_permutation[k] is the target slot assigned to branch k (0-based).
struct LossBreakdown {
    double cls = 0.0;
    double reg_box = 0.0;
    double reg_curve = 0.0;
    double total = 0.0;
    std::vector<int> chosen_permutation;
};

inline constexpr double kConfidenceClamp = 1e-7;
inline constexpr double kDefaultTheta = 0.5;

/// For each proposal, the set of groundtruths with box IoU strictly above
/// theta, truncated to the K highest-IoU entries and padded with background.
std::vector<MatchSet> match_proposals(std::span<const geometry::AxisBox> proposals,
                                      std::span<const geometry::BezierText> gts,
                                      double theta, int K);

/// Same, against precomputed groundtruth boxes.
std::vector<MatchSet> match_proposal_boxes(std::span<const geometry::AxisBox> proposals,
                                           std::span<const geometry::AxisBox> gt_boxes,
                                           double theta, int K);

/// Two-class cross-entropy (confidence clamped to [1e-7, 1-1e-7]) plus
/// smooth-L1 (beta = 1) regression terms for text targets.
BranchLoss branch_loss_parts(const BranchPrediction& pred, const BranchTarget& target);
double branch_loss(const BranchPrediction& pred, const BranchTarget& target);

double smooth_l1(double diff);

/// K target slots for one proposal: matched groundtruths (IoU descending)
/// encoded against the proposal, then background padding.
std::vector<BranchTarget> build_branch_targets(const MatchSet& match,
                                               std::span<const geometry::BezierText> gts,
                                               const geometry::AxisBox& proposal);

// Minimum over branch-to-slot permutations of the summed branch losses.
// Ordering rule: when exactly one slot is text, the permutation is not
// searched; branch 0 takes the text slot and the rest take the background
// slots in index order. Ties between permutations resolve to the first in
// lexicographic order (identity first).
LossBreakdown omts_loss(std::span<const BranchPrediction> preds,
                        std::span<const BranchTarget> targets);
LossBreakdown omts_loss(std::span<const BranchPrediction> preds, const MatchSet& match,
                        std::span<const geometry::BezierText> gts,
                        const geometry::AxisBox& proposal);

/// Reference evaluator: recursively enumerates all K! permutations and
/// recomputes every branch loss in place. Shares no assignment logic with
/// omts_loss; results must agree bit for bit.
LossBreakdown brute_force_omts(std::span<const BranchPrediction> preds,
                               std::span<const BranchTarget> targets);
LossBreakdown brute_force_omts(std::span<const BranchPrediction> preds, const MatchSet& match,
                               std::span<const geometry::BezierText> gts,
                               const geometry::AxisBox& proposal);

/// Foreground/background-balanced subsample: at most fg_fraction*batch
/// foreground match sets, remainder background. Deterministic given seed.
std::vector<MatchSet> sample_minibatch(std::span<const MatchSet> matches, double fg_fraction,
                                       int batch, std::uint64_t rng_seed);

}  // namespace textdet::omts
