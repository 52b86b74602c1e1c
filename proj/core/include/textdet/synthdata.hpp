#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "textdet/geometry.hpp"
#include "textdet/nn.hpp"

namespace textdet::synthdata {

struct Scene {
    double width = 0.0;
    double height = 0.0;
    std::vector<geometry::BezierText> instances;
    std::vector<bool> ignore_flags;  // aligned 1:1 with instances
};

struct SynthConfig {
    int n_scenes = 100;
    double image_size = 128.0;
    int min_instances = 1;
    int max_instances = 3;
    double nearby_pair_probability = 0.5;
    double pair_gap = 2.0;  // edge-to-edge, pixels
    double curvature_min = 0.25;  // perpendicular bulge as a fraction of chord length
    double curvature_max = 0.5;
    double thickness_min = 10.0;
    double thickness_max = 16.0;
    // Reading-direction range. Mostly-horizontal base text keeps rotated
    // test sets out of distribution, matching real benchmarks.
    double orient_min_deg = -35.0;
    double orient_max_deg = 35.0;
    std::uint64_t rng_seed = 0;
};

struct RoiFeature {
    nn::Vec values;  // grid*grid coverage samples in [0,1]
    geometry::AxisBox source_proposal;
};

/// Curved text-like ribbons with exact BezierText groundtruth. With
/// probability nearby_pair_probability an instance is duplicated as a
/// parallel ribbon at pair_gap edge-to-edge distance. Deterministic: scene i
/// draws from mix_seed(rng_seed, i).
std::vector<Scene> gen_scenes(const SynthConfig& config);

/// Jittered groundtruth boxes (`per_instance` each) plus rejection-sampled
/// negatives with IoU strictly below theta against every groundtruth.
std::vector<geometry::AxisBox> gen_proposals(const Scene& scene, double jitter,
                                             int negatives_per_scene, std::uint64_t seed,
                                             int per_instance = 1, double theta = 0.5);

/// Anti-aliased occupancy of the instance union over a grid x grid lattice
/// inside the proposal rectangle (8x8 subsamples per cell).
RoiFeature rasterize_roi(const Scene& scene, const geometry::AxisBox& proposal, int grid = 14);
RoiFeature rasterize_roi(std::span<const geometry::PolygonText> instance_polys,
                         const geometry::AxisBox& proposal, int grid = 14);

/// Every instance rotated about the image center; the extent grows to the
/// rotated bounding rectangle so nothing is clipped.
std::vector<Scene> rotate_dataset(std::span<const Scene> scenes, double angle_deg);

/// Fraction of proposals whose box IoU exceeds theta with two or more
/// groundtruths (the confusion regime).
double two_match_fraction(std::span<const Scene> scenes,
                          std::span<const std::vector<geometry::AxisBox>> proposals, double theta);

/// Outline polygons for all instances, 24 samples per side; shared by the
/// rasterizer and evaluation code.
std::vector<geometry::PolygonText> instance_polygons(const Scene& scene);

}  // namespace textdet::synthdata
