#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "textdet/io_formats.hpp"
#include "textdet/omts.hpp"
#include "textdet/synthdata.hpp"

using namespace textdet;
using namespace textdet::geometry;
using namespace textdet::synthdata;

namespace {

SynthConfig base_config(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_scenes = 30;
    cfg.rng_seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("gen_scenes is byte-identical for a fixed seed") {
    const SynthConfig cfg = base_config(101);
    const auto a = gen_scenes(cfg);
    const auto b = gen_scenes(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(io::scene_to_json_line(a[i]) == io::scene_to_json_line(b[i]));
    }
}

TEST_CASE("zero pair probability produces isolated instances") {
    SynthConfig cfg = base_config(102);
    cfg.nearby_pair_probability = 0.0;
    cfg.max_instances = 3;
    for (const Scene& scene : gen_scenes(cfg)) {
        std::vector<AxisBox> boxes;
        for (const auto& inst : scene.instances) boxes.push_back(bbox_of(inst));
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            for (std::size_t j = i + 1; j < boxes.size(); ++j) {
                CHECK(box_iou(boxes[i], boxes[j]) < 0.1);
            }
        }
    }
}

TEST_CASE("nearby pairs overlap strongly at the default thickness") {
    SynthConfig cfg = base_config(103);
    cfg.nearby_pair_probability = 1.0;
    cfg.min_instances = 2;
    cfg.max_instances = 2;
    cfg.pair_gap = 2.0;
    int pairs = 0;
    for (const Scene& scene : gen_scenes(cfg)) {
        if (scene.instances.size() != 2) continue;
        const double iou = box_iou(bbox_of(scene.instances[0]), bbox_of(scene.instances[1]));
        CHECK(iou > 0.3);
        ++pairs;
    }
    CHECK(pairs >= 25);
}

TEST_CASE("generated instances satisfy the groundtruth invariants") {
    SynthConfig cfg = base_config(104);
    cfg.nearby_pair_probability = 0.5;
    for (const Scene& scene : gen_scenes(cfg)) {
        CHECK(scene.ignore_flags.size() == scene.instances.size());
        for (const auto& inst : scene.instances) {
            for (const Point2& p : control_points(inst)) {
                CHECK(std::isfinite(p.x));
                CHECK(std::isfinite(p.y));
            }
            const AxisBox box = bbox_of(inst);
            CHECK(box.x_min() >= -1e-9);
            CHECK(box.x_max() <= scene.width + 1e-9);
            CHECK(polygon_area(bezier_to_polygon(inst, 24)) >= 1.0);
        }
    }
}

TEST_CASE("zero jitter reproduces the groundtruth boxes") {
    SynthConfig cfg = base_config(105);
    const auto scenes = gen_scenes(cfg);
    const auto proposals = gen_proposals(scenes[0], 0.0, 0, 7);
    REQUIRE(proposals.size() == scenes[0].instances.size());
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const AxisBox gt = bbox_of(scenes[0].instances[i]);
        CHECK(proposals[i].cx == gt.cx);
        CHECK(proposals[i].cy == gt.cy);
        CHECK(proposals[i].w == gt.w);
        CHECK(proposals[i].h == gt.h);
    }
}

TEST_CASE("negatives stay below the matching threshold") {
    SynthConfig cfg = base_config(106);
    const auto scenes = gen_scenes(cfg);
    const double theta = 0.5;
    for (const Scene& scene : scenes) {
        const auto proposals = gen_proposals(scene, 0.2, 4, 11, 1, theta);
        // The negatives are the tail of the list.
        const std::size_t first_negative = scene.instances.size();
        std::vector<AxisBox> negatives(proposals.begin() + static_cast<std::ptrdiff_t>(first_negative),
                                       proposals.end());
        const auto matches = omts::match_proposals(negatives, scene.instances, theta, 2);
        for (const auto& m : matches) CHECK(m.is_background());
    }
}

TEST_CASE("small gaps plus jitter produce two-match proposals") {
    SynthConfig cfg = base_config(107);
    cfg.n_scenes = 60;
    cfg.nearby_pair_probability = 1.0;
    cfg.min_instances = 2;
    cfg.max_instances = 2;
    cfg.pair_gap = 2.0;
    const auto scenes = gen_scenes(cfg);
    std::vector<std::vector<AxisBox>> proposals;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        proposals.push_back(gen_proposals(scenes[i], 0.2, 0, mix_seed(9, i)));
    }
    CHECK(two_match_fraction(scenes, proposals, 0.5) > 0.0);
}

TEST_CASE("rasterize_roi coverage basics") {
    // One thick straight ribbon across the scene.
    Scene scene;
    scene.width = 100.0;
    scene.height = 100.0;
    scene.instances.push_back(testutil::rect_bezier(10.0, 40.0, 90.0, 70.0));
    scene.ignore_flags.push_back(false);

    const RoiFeature empty = rasterize_roi(scene, AxisBox{5.0, 10.0, 8.0, 8.0}, 14);
    for (double v : empty.values) CHECK(v == 0.0);

    const RoiFeature full = rasterize_roi(scene, AxisBox{50.0, 55.0, 20.0, 10.0}, 14);
    for (double v : full.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

    const RoiFeature half = rasterize_roi(scene, AxisBox{50.0, 40.0, 20.0, 20.0}, 14);
    double mean = 0.0;
    for (double v : half.values) mean += v;
    mean /= static_cast<double>(half.values.size());
    CHECK(mean > 0.3);
    CHECK(mean < 0.7);
}

TEST_CASE("rasterize_roi is consistent across resolutions") {
    SynthConfig cfg = base_config(108);
    const auto scenes = gen_scenes(cfg);
    const Scene& scene = scenes[0];
    const AxisBox proposal = bbox_of(scene.instances[0]);

    const int grid = 7;
    const RoiFeature coarse = rasterize_roi(scene, proposal, grid);
    const RoiFeature fine = rasterize_roi(scene, proposal, 2 * grid);
    for (int gy = 0; gy < grid; ++gy) {
        for (int gx = 0; gx < grid; ++gx) {
            const double pooled =
                0.25 * (fine.values[static_cast<std::size_t>(2 * gy) * (2 * grid) + 2 * gx] +
                        fine.values[static_cast<std::size_t>(2 * gy) * (2 * grid) + 2 * gx + 1] +
                        fine.values[static_cast<std::size_t>(2 * gy + 1) * (2 * grid) + 2 * gx] +
                        fine.values[static_cast<std::size_t>(2 * gy + 1) * (2 * grid) + 2 * gx + 1]);
            const double c = coarse.values[static_cast<std::size_t>(gy) * grid + gx];
            CHECK(std::abs(pooled - c) < 0.05);
        }
    }
}

TEST_CASE("rotate_dataset identity and rigid invariants") {
    SynthConfig cfg = base_config(109);
    const auto scenes = gen_scenes(cfg);

    const auto same = rotate_dataset(scenes, 0.0);
    REQUIRE(same.size() == scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        REQUIRE(same[i].instances.size() == scenes[i].instances.size());
        const auto a = control_points(scenes[i].instances[0]);
        const auto b = control_points(same[i].instances[0]);
        for (std::size_t k = 0; k < 8; ++k) {
            CHECK(std::abs(a[k].x - b[k].x) < 1e-9);
            CHECK(std::abs(a[k].y - b[k].y) < 1e-9);
        }
    }

    for (double angle : {30.0, 45.0, 60.0}) {
        const auto rotated = rotate_dataset(scenes, angle);
        for (std::size_t i = 0; i < scenes.size(); ++i) {
            REQUIRE(rotated[i].instances.size() == scenes[i].instances.size());
            for (std::size_t j = 0; j < scenes[i].instances.size(); ++j) {
                const double before = polygon_area(bezier_to_polygon(scenes[i].instances[j], 24));
                const double after = polygon_area(bezier_to_polygon(rotated[i].instances[j], 24));
                CHECK(after == doctest::Approx(before).epsilon(1e-6));
                // Nothing clipped: the enlarged extent covers the instance.
                const AxisBox box = bbox_of(rotated[i].instances[j]);
                CHECK(box.x_min() >= -1e-6);
                CHECK(box.x_max() <= rotated[i].width + 1e-6);
                CHECK(box.y_min() >= -1e-6);
                CHECK(box.y_max() <= rotated[i].height + 1e-6);
            }
        }
    }
}
