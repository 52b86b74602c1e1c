#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "textdet/eval.hpp"
#include "textdet/head.hpp"
#include "textdet/synthdata.hpp"

namespace textdet::pipeline {

struct DataConfig {
    synthdata::SynthConfig synth;
    double jitter = 0.2;
    int negatives_per_scene = 2;
    int proposals_per_instance = 1;
    double match_threshold = 0.5;
    int roi_grid = 14;
    std::uint64_t proposal_seed = 1;  // per-scene seeds derive from this
};

struct DatasetBundle {
    std::vector<synthdata::Scene> scenes;
    std::vector<std::vector<geometry::AxisBox>> proposals;
};

DatasetBundle make_dataset(const DataConfig& config);

/// Proposals for given scenes with the config's jitter/negatives settings;
/// scene i draws from mix_seed(proposal_seed, i).
std::vector<std::vector<geometry::AxisBox>> make_proposals(
    std::span<const synthdata::Scene> scenes, const DataConfig& config);

/// ROI features + match sets for every proposal. Matches are built with the
/// config's threshold at the given K.
head::TrainDataset build_train_dataset(std::span<const synthdata::Scene> scenes,
                                       std::span<const std::vector<geometry::AxisBox>> proposals,
                                       const DataConfig& config, int K);

/// Rotation-augmented variant: every scene is rotated by an angle drawn
/// uniformly from [0, max_angle_deg] before proposals and features are made.
head::TrainDataset build_train_dataset_rotated(std::span<const synthdata::Scene> scenes,
                                               const DataConfig& config, int K,
                                               double max_angle_deg, std::uint64_t aug_seed);

std::vector<eval::SceneDetections> run_inference(
    const head::DetectionHead& net, std::span<const synthdata::Scene> scenes,
    std::span<const std::vector<geometry::AxisBox>> proposals, int roi_grid,
    double score_threshold = 0.5, double nms_iou = 0.5, head::OpCount* ops = nullptr);

/// Scenes containing at least two instances whose boxes overlap above
/// `overlap_iou` -- the nearby-pair subset.
std::vector<int> nearby_scene_indices(std::span<const synthdata::Scene> scenes,
                                      double overlap_iou = 0.1);

// Ablation grid runner. Each cell trains one head configuration and
// evaluates it on a mixed test set plus an all-pairs test set; medians are
// taken over seeds. All cells at one seed share the same data.
struct BenchOptions {
    int seeds = 5;
    std::size_t iters = 16000;
    int batch = 16;
    int train_scenes = 300;
    int test_scenes = 200;
    double pair_gap = 1.0;
    double jitter = 0.2;
    std::size_t fc_dim = 256;
    int threads = 1;
    bool include_k1_baseline = true;
    double rotate_aug_max_deg = 0.0;  // 0 disables augmentation
    double score_threshold = 0.5;
    // Pairs are generated above 0.4 box IoU; a 0.5 NMS cut would merge
    // correct neighboring detections, so the benchmark scores at 0.7.
    double nms_iou = 0.7;
    std::uint64_t base_seed = 7;
};

struct BenchCellSpec {
    std::string name;
    head::Scheme scheme = head::Scheme::one_to_one;
    head::PfamMode pfam = head::PfamMode::none;
    int K = 2;
};

struct BenchCellResult {
    BenchCellSpec spec;
    // per-seed metrics, then medians
    std::vector<double> p_all, r_all, f_all;
    std::vector<double> p_nearby, r_nearby, f_nearby;
    double median_p_all = 0.0, median_r_all = 0.0, median_f_all = 0.0;
    double median_p_nearby = 0.0, median_r_nearby = 0.0, median_f_nearby = 0.0;
};

struct BenchResult {
    BenchOptions options;
    std::vector<BenchCellResult> cells;
};

std::vector<BenchCellSpec> default_grid(bool include_k1_baseline);
BenchResult run_bench(const BenchOptions& options);
BenchResult run_bench(const BenchOptions& options, std::span<const BenchCellSpec> grid);

std::string bench_table(const BenchResult& result);
std::string bench_to_json(const BenchResult& result);

double median(std::vector<double> values);

}  // namespace textdet::pipeline
