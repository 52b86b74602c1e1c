#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "textdet/eval.hpp"

using namespace textdet;
using namespace textdet::geometry;
using eval::EvalConfig;
using eval::EvalReport;
using eval::SceneDetections;
using synthdata::Scene;
using testutil::rect_bezier;

namespace {

Scene two_instance_scene() {
    Scene scene;
    scene.width = 100.0;
    scene.height = 100.0;
    scene.instances.push_back(rect_bezier(10, 10, 40, 25));
    scene.instances.push_back(rect_bezier(50, 50, 90, 70));
    scene.ignore_flags = {false, false};
    return scene;
}

head::Detection detection_of(const BezierText& shape, double score) {
    head::Detection d;
    d.score = score;
    d.shape = shape;
    d.box = bbox_of(shape);
    return d;
}

}  // namespace

TEST_CASE("perfect detections score 1.0 everywhere") {
    const Scene scene = two_instance_scene();
    SceneDetections sd;
    sd.scene_index = 0;
    sd.detections.push_back(detection_of(scene.instances[0], 0.9));
    sd.detections.push_back(detection_of(scene.instances[1], 0.8));

    const std::vector<Scene> scenes{scene};
    const std::vector<SceneDetections> dets{sd};
    const EvalReport r = eval::evaluate(dets, scenes, EvalConfig{});
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f_measure == 1.0);
    CHECK(r.matched_pairs.size() == 2);
}

TEST_CASE("no detections gives zero precision by convention") {
    const Scene scene = two_instance_scene();
    SceneDetections sd;
    sd.scene_index = 0;
    const std::vector<Scene> scenes{scene};
    const std::vector<SceneDetections> dets{sd};
    const EvalReport r = eval::evaluate(dets, scenes, EvalConfig{});
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f_measure == 0.0);
}

TEST_CASE("two correct out of three detections") {
    const Scene scene = two_instance_scene();
    SceneDetections sd;
    sd.scene_index = 0;
    sd.detections.push_back(detection_of(scene.instances[0], 0.9));
    sd.detections.push_back(detection_of(scene.instances[1], 0.8));
    sd.detections.push_back(detection_of(rect_bezier(0, 80, 20, 95), 0.7));  // false positive

    const std::vector<Scene> scenes{scene};
    const std::vector<SceneDetections> dets{sd};
    const EvalReport r = eval::evaluate(dets, scenes, EvalConfig{});
    CHECK(r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.recall == doctest::Approx(1.0));
    CHECK(r.f_measure == doctest::Approx(0.8));
}

TEST_CASE("detections referencing unknown scenes are rejected") {
    const Scene scene = two_instance_scene();
    SceneDetections sd;
    sd.scene_index = 3;
    const std::vector<Scene> scenes{scene};
    const std::vector<SceneDetections> dets{sd};
    CHECK_THROWS_AS(eval::evaluate(dets, scenes, EvalConfig{}), std::out_of_range);
}

TEST_CASE("ignore-flagged groundtruth absorbs detections from both counts") {
    Scene scene = two_instance_scene();
    scene.ignore_flags = {false, true};

    SceneDetections sd;
    sd.scene_index = 0;
    sd.detections.push_back(detection_of(scene.instances[0], 0.9));
    sd.detections.push_back(detection_of(scene.instances[1], 0.8));  // hits the ignored gt

    const std::vector<Scene> scenes{scene};
    const std::vector<SceneDetections> dets{sd};
    const EvalReport r = eval::evaluate(dets, scenes, EvalConfig{});
    // One counted gt, one counted detection, one TP.
    CHECK(r.counted_gts == 1);
    CHECK(r.counted_detections == 1);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);

    EvalConfig no_ignore;
    no_ignore.respect_ignore = false;
    const EvalReport r2 = eval::evaluate(dets, scenes, no_ignore);
    CHECK(r2.counted_gts == 2);
    CHECK(r2.true_positives == 2);
}

TEST_CASE("adding a true positive never decreases recall") {
    const Scene scene = two_instance_scene();
    SceneDetections sd;
    sd.scene_index = 0;
    sd.detections.push_back(detection_of(scene.instances[0], 0.9));

    const std::vector<Scene> scenes{scene};
    std::vector<SceneDetections> dets{sd};
    const double recall_before = eval::evaluate(dets, scenes, EvalConfig{}).recall;

    dets[0].detections.push_back(detection_of(scene.instances[1], 0.8));
    const double recall_after = eval::evaluate(dets, scenes, EvalConfig{}).recall;
    CHECK(recall_after >= recall_before);
}

TEST_CASE("adding a false positive never increases precision") {
    const Scene scene = two_instance_scene();
    SceneDetections sd;
    sd.scene_index = 0;
    sd.detections.push_back(detection_of(scene.instances[0], 0.9));

    const std::vector<Scene> scenes{scene};
    std::vector<SceneDetections> dets{sd};
    const double precision_before = eval::evaluate(dets, scenes, EvalConfig{}).precision;

    dets[0].detections.push_back(detection_of(rect_bezier(0, 80, 20, 95), 0.95));
    const double precision_after = eval::evaluate(dets, scenes, EvalConfig{}).precision;
    CHECK(precision_after <= precision_before);
}

TEST_CASE("matching is one-to-one") {
    const Scene scene = two_instance_scene();
    SceneDetections sd;
    sd.scene_index = 0;
    // Two detections on the same instance: only one can claim it.
    sd.detections.push_back(detection_of(scene.instances[0], 0.9));
    sd.detections.push_back(detection_of(scene.instances[0], 0.8));

    const std::vector<Scene> scenes{scene};
    const std::vector<SceneDetections> dets{sd};
    const EvalReport r = eval::evaluate(dets, scenes, EvalConfig{});
    CHECK(r.true_positives == 1);
    REQUIRE(r.matched_pairs.size() == 1);
    CHECK(r.matched_pairs[0].detection_index == 0);  // higher score claims first
    CHECK(r.precision == doctest::Approx(0.5));
}

TEST_CASE("subset aggregation rebuilds consistent metrics") {
    const Scene scene_a = two_instance_scene();
    Scene scene_b = two_instance_scene();

    SceneDetections da;
    da.scene_index = 0;
    da.detections.push_back(detection_of(scene_a.instances[0], 0.9));
    SceneDetections db;
    db.scene_index = 1;
    db.detections.push_back(detection_of(scene_b.instances[0], 0.9));
    db.detections.push_back(detection_of(scene_b.instances[1], 0.9));

    const std::vector<Scene> scenes{scene_a, scene_b};
    const std::vector<SceneDetections> dets{da, db};
    const EvalReport full = eval::evaluate(dets, scenes, EvalConfig{});

    const std::vector<int> only_b{1};
    const EvalReport sub = eval::aggregate_subset(full, only_b);
    CHECK(sub.counted_gts == 2);
    CHECK(sub.true_positives == 2);
    CHECK(sub.recall == 1.0);
    CHECK(full.recall == doctest::Approx(0.75));
}

TEST_CASE("report serialization round-trips the headline numbers") {
    const Scene scene = two_instance_scene();
    SceneDetections sd;
    sd.scene_index = 0;
    sd.detections.push_back(detection_of(scene.instances[0], 0.9));
    const std::vector<Scene> scenes{scene};
    const std::vector<SceneDetections> dets{sd};
    const EvalReport r = eval::evaluate(dets, scenes, EvalConfig{});

    const std::string json = eval::report_to_json(r);
    CHECK(json.find("\"precision\": 1.0") != std::string::npos);
    const std::string table = eval::format_table(r);
    CHECK(table.find("P") != std::string::npos);
    CHECK(table.find("1.0000") != std::string::npos);
}
