#include "textdet/omts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "textdet/rng.hpp"

namespace textdet::omts {

using geometry::AxisBox;
using geometry::BezierText;

std::vector<MatchSet> match_proposal_boxes(std::span<const AxisBox> proposals,
                                           std::span<const AxisBox> gt_boxes,
                                           double theta, int K) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("match_proposals: theta must lie in (0,1)");
    }
    if (K < 1) {
        throw std::invalid_argument("match_proposals: K must be >= 1");
    }

    std::vector<MatchSet> out;
    out.reserve(proposals.size());
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        std::vector<std::pair<double, int>> candidates;  // (IoU, gt index)
        for (std::size_t j = 0; j < gt_boxes.size(); ++j) {
            const double iou = geometry::box_iou(proposals[i], gt_boxes[j]);
            if (iou > theta) candidates.emplace_back(iou, static_cast<int>(j));
        }
        // IoU descending, gt index ascending on ties.
        std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        if (candidates.size() > static_cast<std::size_t>(K)) {
            candidates.resize(static_cast<std::size_t>(K));
        }

        MatchSet m;
        m.proposal_index = static_cast<int>(i);
        for (const auto& [iou, j] : candidates) m.matched_gt.push_back(j);
        m.padded_background = K - static_cast<int>(m.matched_gt.size());
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<MatchSet> match_proposals(std::span<const AxisBox> proposals,
                                      std::span<const BezierText> gts,
                                      double theta, int K) {
    std::vector<AxisBox> boxes;
    boxes.reserve(gts.size());
    for (const BezierText& g : gts) boxes.push_back(geometry::bbox_of(g));
    return match_proposal_boxes(proposals, boxes, theta, K);
}

double smooth_l1(double diff) {
    const double a = std::abs(diff);
    if (a < 1.0) return 0.5 * diff * diff;
    return a - 0.5;
}

BranchLoss branch_loss_parts(const BranchPrediction& pred, const BranchTarget& target) {
    const double conf = std::clamp(pred.confidence, kConfidenceClamp, 1.0 - kConfidenceClamp);
    BranchLoss loss;
    if (target.cls == TargetClass::text) {
        loss.cls = -std::log(conf);
        if (!target.box || !target.curve) {
            throw std::invalid_argument("branch_loss: text target lacks regression targets");
        }
        loss.reg_box += smooth_l1(pred.box.dx - target.box->dx);
        loss.reg_box += smooth_l1(pred.box.dy - target.box->dy);
        loss.reg_box += smooth_l1(pred.box.dlog_w - target.box->dlog_w);
        loss.reg_box += smooth_l1(pred.box.dlog_h - target.box->dlog_h);
        for (std::size_t i = 0; i < 16; ++i) {
            loss.reg_curve += smooth_l1(pred.curve.offsets[i] - target.curve->offsets[i]);
        }
    } else {
        loss.cls = -std::log(1.0 - conf);
    }
    return loss;
}

double branch_loss(const BranchPrediction& pred, const BranchTarget& target) {
    return branch_loss_parts(pred, target).total();
}

std::vector<BranchTarget> build_branch_targets(const MatchSet& match,
                                               std::span<const BezierText> gts,
                                               const AxisBox& proposal) {
    std::vector<BranchTarget> targets;
    targets.reserve(static_cast<std::size_t>(match.k()));
    for (int j : match.matched_gt) {
        if (j < 0 || static_cast<std::size_t>(j) >= gts.size()) {
            throw std::out_of_range("build_branch_targets: matched gt index out of range");
        }
        BranchTarget t;
        t.cls = TargetClass::text;
        t.box = encoding::encode_box(geometry::bbox_of(gts[static_cast<std::size_t>(j)]), proposal);
        t.curve = encoding::encode_curve(gts[static_cast<std::size_t>(j)], proposal);
        targets.push_back(std::move(t));
    }
    for (int p = 0; p < match.padded_background; ++p) targets.emplace_back();
    return targets;
}

namespace {

int count_text_slots(std::span<const BranchTarget> targets) {
    int n = 0;
    for (const BranchTarget& t : targets) n += (t.cls == TargetClass::text);
    return n;
}

// Branch 0 takes the single text slot, remaining branches take the
// background slots in index order.
std::vector<int> forced_permutation(std::span<const BranchTarget> targets) {
    const int k = static_cast<int>(targets.size());
    std::vector<int> perm;
    perm.reserve(static_cast<std::size_t>(k));
    int text_slot = 0;
    for (int s = 0; s < k; ++s) {
        if (targets[static_cast<std::size_t>(s)].cls == TargetClass::text) text_slot = s;
    }
    perm.push_back(text_slot);
    for (int s = 0; s < k; ++s) {
        if (s != text_slot) perm.push_back(s);
    }
    return perm;
}

LossBreakdown breakdown_for(std::span<const BranchPrediction> preds,
                            std::span<const BranchTarget> targets,
                            const std::vector<int>& perm) {
    LossBreakdown out;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        const BranchLoss l = branch_loss_parts(preds[k], targets[static_cast<std::size_t>(perm[k])]);
        out.cls += l.cls;
        out.reg_box += l.reg_box;
        out.reg_curve += l.reg_curve;
    }
    out.total = out.cls + out.reg_box + out.reg_curve;
    out.chosen_permutation = perm;
    return out;
}

}  // namespace

LossBreakdown omts_loss(std::span<const BranchPrediction> preds,
                        std::span<const BranchTarget> targets) {
    const std::size_t k = preds.size();
    if (k == 0 || targets.size() != k) {
        throw std::invalid_argument("omts_loss: need |preds| == |targets| >= 1");
    }

    if (count_text_slots(targets) == 1 && k >= 2) {
        return breakdown_for(preds, targets, forced_permutation(targets));
    }

    // Per-(branch, slot) loss matrix, then a lexicographic permutation scan
    // keeping strict improvements only.
    std::vector<std::vector<BranchLoss>> matrix(k, std::vector<BranchLoss>(k));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t s = 0; s < k; ++s) {
            matrix[r][s] = branch_loss_parts(preds[r], targets[s]);
        }
    }

    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best_perm = perm;
    double best_cost = 0.0;
    bool first = true;
    do {
        double cost = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            cost += matrix[r][static_cast<std::size_t>(perm[r])].total();
        }
        if (first || cost < best_cost) {
            best_cost = cost;
            best_perm = perm;
            first = false;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    LossBreakdown out;
    for (std::size_t r = 0; r < k; ++r) {
        const BranchLoss& l = matrix[r][static_cast<std::size_t>(best_perm[r])];
        out.cls += l.cls;
        out.reg_box += l.reg_box;
        out.reg_curve += l.reg_curve;
    }
    out.total = out.cls + out.reg_box + out.reg_curve;
    out.chosen_permutation = best_perm;
    return out;
}

LossBreakdown omts_loss(std::span<const BranchPrediction> preds, const MatchSet& match,
                        std::span<const BezierText> gts, const AxisBox& proposal) {
    if (static_cast<int>(preds.size()) != match.k()) {
        throw std::invalid_argument("omts_loss: |preds| must equal the match set's K");
    }
    const auto targets = build_branch_targets(match, gts, proposal);
    return omts_loss(preds, targets);
}

namespace {

void enumerate_permutations(std::span<const BranchPrediction> preds,
                            std::span<const BranchTarget> targets,
                            std::vector<int>& perm, std::vector<bool>& used,
                            std::vector<int>& best_perm, double& best_cost, bool& first) {
    const std::size_t k = preds.size();
    if (perm.size() == k) {
        double cost = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            cost += branch_loss_parts(preds[r], targets[static_cast<std::size_t>(perm[r])]).total();
        }
        if (first || cost < best_cost) {
            best_cost = cost;
            best_perm = perm;
            first = false;
        }
        return;
    }
    for (std::size_t s = 0; s < k; ++s) {
        if (used[s]) continue;
        used[s] = true;
        perm.push_back(static_cast<int>(s));
        enumerate_permutations(preds, targets, perm, used, best_perm, best_cost, first);
        perm.pop_back();
        used[s] = false;
    }
}

}  // namespace

LossBreakdown brute_force_omts(std::span<const BranchPrediction> preds,
                               std::span<const BranchTarget> targets) {
    const std::size_t k = preds.size();
    if (k == 0 || targets.size() != k) {
        throw std::invalid_argument("brute_force_omts: need |preds| == |targets| >= 1");
    }

    if (count_text_slots(targets) == 1 && k >= 2) {
        return breakdown_for(preds, targets, forced_permutation(targets));
    }

    std::vector<int> perm;
    std::vector<bool> used(k, false);
    std::vector<int> best_perm;
    double best_cost = 0.0;
    bool first = true;
    enumerate_permutations(preds, targets, perm, used, best_perm, best_cost, first);
    return breakdown_for(preds, targets, best_perm);
}

LossBreakdown brute_force_omts(std::span<const BranchPrediction> preds, const MatchSet& match,
                               std::span<const BezierText> gts, const AxisBox& proposal) {
    if (static_cast<int>(preds.size()) != match.k()) {
        throw std::invalid_argument("brute_force_omts: |preds| must equal the match set's K");
    }
    const auto targets = build_branch_targets(match, gts, proposal);
    return brute_force_omts(preds, targets);
}

std::vector<MatchSet> sample_minibatch(std::span<const MatchSet> matches, double fg_fraction,
                                       int batch, std::uint64_t rng_seed) {
    if (!(fg_fraction >= 0.0 && fg_fraction <= 1.0)) {
        throw std::invalid_argument("sample_minibatch: fg_fraction must lie in [0,1]");
    }
    if (batch < 1) {
        throw std::invalid_argument("sample_minibatch: batch must be >= 1");
    }

    std::vector<MatchSet> fg, bg;
    for (const MatchSet& m : matches) {
        (m.is_background() ? bg : fg).push_back(m);
    }
    Rng rng(rng_seed);
    deterministic_shuffle(fg, rng);
    deterministic_shuffle(bg, rng);

    const std::size_t fg_cap = static_cast<std::size_t>(std::floor(fg_fraction * batch));
    const std::size_t n_fg = std::min(fg.size(), fg_cap);
    const std::size_t n_bg = std::min(bg.size(), static_cast<std::size_t>(batch) - n_fg);

    std::vector<MatchSet> out;
    out.reserve(n_fg + n_bg);
    out.insert(out.end(), fg.begin(), fg.begin() + static_cast<std::ptrdiff_t>(n_fg));
    out.insert(out.end(), bg.begin(), bg.begin() + static_cast<std::ptrdiff_t>(n_bg));
    return out;
}

}  // namespace textdet::omts
