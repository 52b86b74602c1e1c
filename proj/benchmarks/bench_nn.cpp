#include <benchmark/benchmark.h>

#include "textdet/head.hpp"
#include "textdet/nn.hpp"
#include "textdet/rng.hpp"

using namespace textdet;
using nn::Vec;

namespace {

Vec random_feature(std::size_t n) {
    Rng rng(1);
    Vec v(n);
    for (double& x : v) x = rng.uniform(0.0, 1.0);
    return v;
}

}  // namespace

static void BM_DenseForward(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    nn::DenseLayer layer(dim, dim);
    Rng rng(2);
    layer.init(rng);
    const Vec x = random_feature(dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(layer.apply(x));
    }
}
BENCHMARK(BM_DenseForward)->Arg(196)->Arg(256);

static void BM_PfamForwardBackward(benchmark::State& state) {
    nn::PFAMBlock block(256, 64);
    Rng rng(3);
    block.init(rng);
    const Vec x = random_feature(256);
    const Vec upstream = random_feature(256);
    for (auto _ : state) {
        block.forward(x);
        benchmark::DoNotOptimize(block.backward(upstream));
    }
}
BENCHMARK(BM_PfamForwardBackward);

static void BM_HeadInferBranch1(benchmark::State& state) {
    head::HeadConfig cfg;
    cfg.pfam_mode = head::PfamMode::both_fc;
    head::DetectionHead net(cfg, 4);
    const Vec feature = random_feature(cfg.roi_dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.infer_branch1(feature));
    }
}
BENCHMARK(BM_HeadInferBranch1);
