#include "textdet/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <stdexcept>

#include "json.hpp"
#include "textdet/omts.hpp"
#include "textdet/rng.hpp"

namespace textdet::pipeline {

using geometry::AxisBox;
using synthdata::Scene;

std::vector<std::vector<AxisBox>> make_proposals(std::span<const Scene> scenes,
                                                 const DataConfig& config) {
    std::vector<std::vector<AxisBox>> out;
    out.reserve(scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        out.push_back(synthdata::gen_proposals(scenes[i], config.jitter,
                                               config.negatives_per_scene,
                                               mix_seed(config.proposal_seed, i),
                                               config.proposals_per_instance,
                                               config.match_threshold));
    }
    return out;
}

DatasetBundle make_dataset(const DataConfig& config) {
    DatasetBundle bundle;
    bundle.scenes = synthdata::gen_scenes(config.synth);
    bundle.proposals = make_proposals(bundle.scenes, config);
    return bundle;
}

head::TrainDataset build_train_dataset(std::span<const Scene> scenes,
                                       std::span<const std::vector<AxisBox>> proposals,
                                       const DataConfig& config, int K) {
    if (scenes.size() != proposals.size()) {
        throw std::invalid_argument("build_train_dataset: scene/proposal count mismatch");
    }
    head::TrainDataset dataset;
    dataset.scene_instances.reserve(scenes.size());
    for (std::size_t si = 0; si < scenes.size(); ++si) {
        dataset.scene_instances.push_back(scenes[si].instances);
        const auto polys = synthdata::instance_polygons(scenes[si]);
        const auto matches =
            omts::match_proposals(proposals[si], scenes[si].instances, config.match_threshold, K);
        for (std::size_t pi = 0; pi < proposals[si].size(); ++pi) {
            head::TrainSample sample;
            sample.proposal = proposals[si][pi];
            sample.feature =
                synthdata::rasterize_roi(polys, sample.proposal, config.roi_grid).values;
            sample.match = matches[pi];
            sample.scene_index = static_cast<int>(si);
            dataset.samples.push_back(std::move(sample));
        }
    }
    return dataset;
}

head::TrainDataset build_train_dataset_rotated(std::span<const Scene> scenes,
                                               const DataConfig& config, int K,
                                               double max_angle_deg, std::uint64_t aug_seed) {
    std::vector<Scene> rotated;
    rotated.reserve(scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        Rng rng(mix_seed(aug_seed, i));
        const double angle = rng.uniform(0.0, max_angle_deg);
        const Scene single[] = {scenes[i]};
        rotated.push_back(synthdata::rotate_dataset(single, angle).front());
    }
    const auto proposals = make_proposals(rotated, config);
    return build_train_dataset(rotated, proposals, config, K);
}

std::vector<eval::SceneDetections> run_inference(
    const head::DetectionHead& net, std::span<const Scene> scenes,
    std::span<const std::vector<AxisBox>> proposals, int roi_grid, double score_threshold,
    double nms_iou, head::OpCount* ops) {
    if (scenes.size() != proposals.size()) {
        throw std::invalid_argument("run_inference: scene/proposal count mismatch");
    }
    std::vector<eval::SceneDetections> out;
    out.reserve(scenes.size());
    for (std::size_t si = 0; si < scenes.size(); ++si) {
        const auto polys = synthdata::instance_polygons(scenes[si]);
        std::vector<nn::Vec> features;
        features.reserve(proposals[si].size());
        for (const AxisBox& p : proposals[si]) {
            features.push_back(synthdata::rasterize_roi(polys, p, roi_grid).values);
        }
        eval::SceneDetections sd;
        sd.scene_index = static_cast<int>(si);
        sd.detections =
            head::infer(net, proposals[si], features, score_threshold, nms_iou, ops);
        out.push_back(std::move(sd));
    }
    return out;
}

std::vector<int> nearby_scene_indices(std::span<const Scene> scenes, double overlap_iou) {
    std::vector<int> out;
    for (std::size_t si = 0; si < scenes.size(); ++si) {
        std::vector<AxisBox> boxes;
        boxes.reserve(scenes[si].instances.size());
        for (const auto& inst : scenes[si].instances) boxes.push_back(geometry::bbox_of(inst));
        bool nearby = false;
        for (std::size_t a = 0; a < boxes.size() && !nearby; ++a) {
            for (std::size_t b = a + 1; b < boxes.size() && !nearby; ++b) {
                nearby = geometry::box_iou(boxes[a], boxes[b]) > overlap_iou;
            }
        }
        if (nearby) out.push_back(static_cast<int>(si));
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<BenchCellSpec> default_grid(bool include_k1_baseline) {
    std::vector<BenchCellSpec> grid;
    if (include_k1_baseline) {
        grid.push_back({"baseline_k1", head::Scheme::one_to_one, head::PfamMode::none, 1});
    }
    grid.push_back({"baseline", head::Scheme::one_to_one, head::PfamMode::none, 2});
    grid.push_back({"pfam1fc", head::Scheme::one_to_one, head::PfamMode::last_fc, 2});
    grid.push_back({"pfam2fc", head::Scheme::one_to_one, head::PfamMode::both_fc, 2});
    grid.push_back({"omts", head::Scheme::omts, head::PfamMode::none, 2});
    grid.push_back({"pfam1fc_omts", head::Scheme::omts, head::PfamMode::last_fc, 2});
    grid.push_back({"pfam2fc_omts", head::Scheme::omts, head::PfamMode::both_fc, 2});
    return grid;
}

namespace {

struct SeedData {
    head::TrainDataset train;
    DatasetBundle test_all;
    DatasetBundle test_nearby;
    std::vector<int> nearby_in_all;
};

SeedData make_seed_data(const BenchOptions& opt, int seed) {
    DataConfig train_cfg;
    train_cfg.synth.n_scenes = opt.train_scenes;
    train_cfg.synth.nearby_pair_probability = 0.5;
    train_cfg.synth.pair_gap = opt.pair_gap;
    train_cfg.synth.min_instances = 1;
    train_cfg.synth.max_instances = 3;
    train_cfg.synth.rng_seed = mix_seed(opt.base_seed, 100 + static_cast<std::uint64_t>(seed));
    train_cfg.jitter = opt.jitter;
    train_cfg.proposals_per_instance = 2;
    train_cfg.negatives_per_scene = 2;
    train_cfg.proposal_seed = mix_seed(opt.base_seed, 110 + static_cast<std::uint64_t>(seed));

    DataConfig test_cfg = train_cfg;
    test_cfg.synth.n_scenes = opt.test_scenes;
    test_cfg.synth.rng_seed = mix_seed(opt.base_seed, 200 + static_cast<std::uint64_t>(seed));
    test_cfg.proposals_per_instance = 1;
    test_cfg.proposal_seed = mix_seed(opt.base_seed, 210 + static_cast<std::uint64_t>(seed));

    DataConfig nearby_cfg = test_cfg;
    nearby_cfg.synth.nearby_pair_probability = 1.0;
    nearby_cfg.synth.min_instances = 2;
    nearby_cfg.synth.rng_seed = mix_seed(opt.base_seed, 300 + static_cast<std::uint64_t>(seed));
    nearby_cfg.proposal_seed = mix_seed(opt.base_seed, 310 + static_cast<std::uint64_t>(seed));

    SeedData data;
    if (opt.rotate_aug_max_deg > 0.0) {
        const auto scenes = synthdata::gen_scenes(train_cfg.synth);
        data.train = build_train_dataset_rotated(
            scenes, train_cfg, 2, opt.rotate_aug_max_deg,
            mix_seed(opt.base_seed, 120 + static_cast<std::uint64_t>(seed)));
    } else {
        const auto bundle = make_dataset(train_cfg);
        data.train = build_train_dataset(bundle.scenes, bundle.proposals, train_cfg, 2);
    }
    data.test_all = make_dataset(test_cfg);
    data.test_nearby = make_dataset(nearby_cfg);
    data.nearby_in_all = nearby_scene_indices(data.test_all.scenes);
    return data;
}

struct CellSeedMetrics {
    double p_all = 0.0, r_all = 0.0, f_all = 0.0;
    double p_nearby = 0.0, r_nearby = 0.0, f_nearby = 0.0;
};

CellSeedMetrics run_cell_seed(const BenchOptions& opt, const BenchCellSpec& spec,
                              const SeedData& data, int seed) {
    head::HeadConfig cfg;
    cfg.roi_dim = 196;
    cfg.fc_dim = opt.fc_dim;
    cfg.K = spec.K;
    cfg.pfam_mode = spec.pfam;

    head::TrainOptions train_opt;
    train_opt.scheme = spec.scheme;
    train_opt.iters = opt.iters;
    train_opt.batch = opt.batch;
    train_opt.seed = mix_seed(opt.base_seed, 900 + static_cast<std::uint64_t>(seed));

    nn::SgdConfig sgd;
    sgd.warmup_iters = std::min<std::size_t>(500, std::max<std::size_t>(1, opt.iters / 10));

    const head::TrainResult trained = head::train_head(cfg, data.train, sgd, train_opt);

    eval::EvalConfig eval_cfg;
    CellSeedMetrics m;
    {
        const auto dets = run_inference(trained.net, data.test_all.scenes,
                                        data.test_all.proposals, 14,
                                        opt.score_threshold, opt.nms_iou);
        const auto report = eval::evaluate(dets, data.test_all.scenes, eval_cfg);
        m.p_all = report.precision;
        m.r_all = report.recall;
        m.f_all = report.f_measure;
    }
    {
        const auto dets = run_inference(trained.net, data.test_nearby.scenes,
                                        data.test_nearby.proposals, 14,
                                        opt.score_threshold, opt.nms_iou);
        const auto report = eval::evaluate(dets, data.test_nearby.scenes, eval_cfg);
        m.p_nearby = report.precision;
        m.r_nearby = report.recall;
        m.f_nearby = report.f_measure;
    }
    return m;
}

}  // namespace

BenchResult run_bench(const BenchOptions& options) {
    const auto grid = default_grid(options.include_k1_baseline);
    return run_bench(options, grid);
}

BenchResult run_bench(const BenchOptions& options, std::span<const BenchCellSpec> grid) {
    BenchResult result;
    result.options = options;
    result.cells.resize(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        result.cells[c].spec = grid[c];
        result.cells[c].p_all.resize(static_cast<std::size_t>(options.seeds));
        result.cells[c].r_all.resize(static_cast<std::size_t>(options.seeds));
        result.cells[c].f_all.resize(static_cast<std::size_t>(options.seeds));
        result.cells[c].p_nearby.resize(static_cast<std::size_t>(options.seeds));
        result.cells[c].r_nearby.resize(static_cast<std::size_t>(options.seeds));
        result.cells[c].f_nearby.resize(static_cast<std::size_t>(options.seeds));
    }

    // One dataset per seed, shared by every cell so comparisons are paired.
    for (int seed = 0; seed < options.seeds; ++seed) {
        const SeedData data = make_seed_data(options, seed);

        std::vector<std::future<CellSeedMetrics>> futures;
        const int threads = std::max(1, options.threads);
        for (std::size_t c = 0; c < grid.size(); ++c) {
            auto task = [&options, &grid, &data, seed, c]() {
                return run_cell_seed(options, grid[c], data, seed);
            };
            futures.push_back(threads > 1
                                  ? std::async(std::launch::async, task)
                                  : std::async(std::launch::deferred, task));
            if (threads > 1 && futures.size() % static_cast<std::size_t>(threads) == 0) {
                for (auto& f : futures) f.wait();
            }
        }
        for (std::size_t c = 0; c < grid.size(); ++c) {
            const CellSeedMetrics m = futures[c].get();
            auto& cell = result.cells[c];
            const auto s = static_cast<std::size_t>(seed);
            cell.p_all[s] = m.p_all;
            cell.r_all[s] = m.r_all;
            cell.f_all[s] = m.f_all;
            cell.p_nearby[s] = m.p_nearby;
            cell.r_nearby[s] = m.r_nearby;
            cell.f_nearby[s] = m.f_nearby;
        }
    }

    for (auto& cell : result.cells) {
        cell.median_p_all = median(cell.p_all);
        cell.median_r_all = median(cell.r_all);
        cell.median_f_all = median(cell.f_all);
        cell.median_p_nearby = median(cell.p_nearby);
        cell.median_r_nearby = median(cell.r_nearby);
        cell.median_f_nearby = median(cell.f_nearby);
    }
    return result;
}

std::string bench_table(const BenchResult& result) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-16s | %-22s | %-22s\n", "method", "all scenes (P/R/F)",
                  "nearby pairs (P/R/F)");
    out += buf;
    out += std::string(66, '-') + "\n";
    for (const auto& cell : result.cells) {
        std::snprintf(buf, sizeof(buf), "%-16s | %6.4f %6.4f %6.4f | %6.4f %6.4f %6.4f\n",
                      cell.spec.name.c_str(), cell.median_p_all, cell.median_r_all,
                      cell.median_f_all, cell.median_p_nearby, cell.median_r_nearby,
                      cell.median_f_nearby);
        out += buf;
    }
    return out;
}

std::string bench_to_json(const BenchResult& result) {
    nlohmann::ordered_json j;
    j["seeds"] = result.options.seeds;
    j["iters"] = result.options.iters;
    j["train_scenes"] = result.options.train_scenes;
    j["test_scenes"] = result.options.test_scenes;
    j["pair_gap"] = result.options.pair_gap;
    j["jitter"] = result.options.jitter;
    j["cells"] = nlohmann::ordered_json::array();
    for (const auto& cell : result.cells) {
        nlohmann::ordered_json cj;
        cj["name"] = cell.spec.name;
        cj["k"] = cell.spec.K;
        cj["median"] = {{"p_all", cell.median_p_all},     {"r_all", cell.median_r_all},
                        {"f_all", cell.median_f_all},     {"p_nearby", cell.median_p_nearby},
                        {"r_nearby", cell.median_r_nearby}, {"f_nearby", cell.median_f_nearby}};
        cj["per_seed"] = {{"f_all", cell.f_all}, {"f_nearby", cell.f_nearby}};
        j["cells"].push_back(cj);
    }
    return j.dump(2) + "\n";
}

}  // namespace textdet::pipeline
