#include <benchmark/benchmark.h>

#include "textdet/omts.hpp"
#include "textdet/rng.hpp"

using namespace textdet;

namespace {

omts::BranchPrediction make_prediction(Rng& rng) {
    omts::BranchPrediction p;
    p.confidence = rng.uniform(0.05, 0.95);
    p.box = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.5, 0.5),
             rng.uniform(-0.5, 0.5)};
    for (double& v : p.curve.offsets) v = rng.uniform(-1, 1);
    return p;
}

omts::BranchTarget make_text_target(Rng& rng) {
    omts::BranchTarget t;
    t.cls = omts::TargetClass::text;
    t.box = encoding::BoxTarget{rng.uniform(-1, 1), rng.uniform(-1, 1), 0.1, -0.1};
    encoding::CurveTarget c;
    for (double& v : c.offsets) v = rng.uniform(-1, 1);
    t.curve = c;
    return t;
}

}  // namespace

static void BM_OmtsLoss(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    Rng rng(5);
    std::vector<omts::BranchPrediction> preds;
    std::vector<omts::BranchTarget> targets;
    for (std::size_t i = 0; i < k; ++i) {
        preds.push_back(make_prediction(rng));
        targets.push_back(make_text_target(rng));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(omts::omts_loss(preds, targets));
    }
}
BENCHMARK(BM_OmtsLoss)->Arg(2)->Arg(3);

static void BM_BruteForceOmts(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    std::vector<omts::BranchPrediction> preds;
    std::vector<omts::BranchTarget> targets;
    for (std::size_t i = 0; i < k; ++i) {
        preds.push_back(make_prediction(rng));
        targets.push_back(make_text_target(rng));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(omts::brute_force_omts(preds, targets));
    }
}
BENCHMARK(BM_BruteForceOmts)->Arg(2)->Arg(3);

static void BM_MatchProposals(benchmark::State& state) {
    Rng rng(7);
    std::vector<geometry::AxisBox> proposals, gt_boxes;
    for (int i = 0; i < 100; ++i) {
        proposals.push_back({rng.uniform(20, 80), rng.uniform(20, 80), rng.uniform(5, 30),
                             rng.uniform(5, 30)});
    }
    for (int i = 0; i < 8; ++i) {
        gt_boxes.push_back({rng.uniform(20, 80), rng.uniform(20, 80), rng.uniform(5, 30),
                            rng.uniform(5, 30)});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(omts::match_proposal_boxes(proposals, gt_boxes, 0.5, 2));
    }
}
BENCHMARK(BM_MatchProposals);

BENCHMARK_MAIN();
