#include <benchmark/benchmark.h>

#include "textdet/geometry.hpp"
#include "textdet/rng.hpp"

using namespace textdet::geometry;

namespace {

CubicBezier sample_curve() {
    return CubicBezier{{Point2{0, 0}, Point2{3, -4}, Point2{7, -4}, Point2{10, 0}}};
}

BezierText sample_text() {
    BezierText bt;
    bt.top = sample_curve();
    bt.bottom = CubicBezier{{Point2{0, 3}, Point2{3, -1}, Point2{7, -1}, Point2{10, 3}}};
    return bt;
}

}  // namespace

static void BM_BezierPoint(benchmark::State& state) {
    const CubicBezier c = sample_curve();
    double t = 0.0;
    for (auto _ : state) {
        t += 0.001;
        if (t > 1.0) t = 0.0;
        benchmark::DoNotOptimize(bezier_point(c, t));
    }
}
BENCHMARK(BM_BezierPoint);

static void BM_BezierToPolygon(benchmark::State& state) {
    const BezierText bt = sample_text();
    for (auto _ : state) {
        benchmark::DoNotOptimize(bezier_to_polygon(bt, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_BezierToPolygon)->Arg(10)->Arg(25);

static void BM_PolygonIou(benchmark::State& state) {
    const PolygonText a = bezier_to_polygon(sample_text(), 25);
    BezierText shifted = sample_text();
    for (auto& p : shifted.top.control) p.x += 2.0;
    for (auto& p : shifted.bottom.control) p.x += 2.0;
    const PolygonText b = bezier_to_polygon(shifted, 25);
    for (auto _ : state) {
        benchmark::DoNotOptimize(polygon_iou(a, b, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_PolygonIou)->Arg(128)->Arg(512);

static void BM_FitBezierSide(benchmark::State& state) {
    const CubicBezier c = sample_curve();
    std::vector<Point2> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(bezier_point(c, i / 19.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_bezier_side(pts));
    }
}
BENCHMARK(BM_FitBezierSide);
