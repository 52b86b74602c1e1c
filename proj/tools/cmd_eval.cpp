#include <cstdio>
#include <fstream>
#include <memory>

#include "commands.hpp"
#include "textdet/rng.hpp"

namespace textdet::cli {

namespace {

struct EvalOptions {
    std::string data;
    std::string checkpoint;
    std::string detections;
    std::string out_json;
    std::string save_detections;
    double iou = 0.5;
    double rotate = 0.0;
    double score_threshold = 0.5;
    double nms = 0.5;
    int roi_grid = 14;
    double jitter = 0.2;
    int negatives = 2;
    std::uint64_t proposal_seed = 99;
};

void run_eval(const EvalOptions& opt) {
    if (opt.checkpoint.empty() == opt.detections.empty()) {
        throw CLI::ValidationError("eval", "exactly one of --checkpoint or --detections required");
    }

    SceneData data = load_scene_data(opt.data, /*need_proposals=*/false);
    if (opt.rotate != 0.0) {
        data.scenes = synthdata::rotate_dataset(data.scenes, opt.rotate);
        data.proposals.clear();
    }

    std::vector<eval::SceneDetections> detections;
    if (!opt.checkpoint.empty()) {
        // Proposals for rotated scenes cannot come from the data directory;
        // regenerate them the same way `gen` would.
        if (data.proposals.empty() || opt.rotate != 0.0) {
            pipeline::DataConfig dcfg;
            dcfg.jitter = opt.jitter;
            dcfg.negatives_per_scene = opt.negatives;
            dcfg.proposal_seed = opt.proposal_seed;
            data.proposals = pipeline::make_proposals(data.scenes, dcfg);
        }
        const head::DetectionHead net = io::load_checkpoint(opt.checkpoint);
        detections = pipeline::run_inference(net, data.scenes, data.proposals, opt.roi_grid,
                                             opt.score_threshold, opt.nms);
        if (!opt.save_detections.empty()) {
            io::write_jsonl_detections(opt.save_detections, detections);
        }
    } else {
        detections = io::read_jsonl_detections(opt.detections);
    }

    eval::EvalConfig cfg;
    cfg.iou_threshold = opt.iou;
    const eval::EvalReport report = eval::evaluate(detections, data.scenes, cfg);

    std::printf("%s", eval::format_table(report).c_str());
    if (!opt.out_json.empty()) {
        std::ofstream out(opt.out_json);
        if (!out) throw io::FormatError(opt.out_json + ": cannot open for writing");
        out << eval::report_to_json(report);
    }
}

}  // namespace

void register_eval(CLI::App& app) {
    auto opt = std::make_shared<EvalOptions>();
    CLI::App* cmd = app.add_subcommand("eval", "Evaluate detections against groundtruth (P/R/F)");
    cmd->add_option("--data", opt->data, "Data directory or scenes file")
        ->required()
        ->check(CLI::ExistingPath);
    cmd->add_option("--checkpoint", opt->checkpoint, "Run inference with this checkpoint");
    cmd->add_option("--detections", opt->detections, "Evaluate precomputed detections (JSONL)");
    cmd->add_option("--iou", opt->iou, "Matching IoU threshold")->check(CLI::Range(0.01, 0.99));
    cmd->add_option("--rotate", opt->rotate, "Rotate the test set by this angle")
        ->check(CLI::IsMember({0.0, 30.0, 45.0, 60.0}));
    cmd->add_option("--score-threshold", opt->score_threshold, "Detection score cutoff");
    cmd->add_option("--nms", opt->nms, "NMS IoU threshold");
    cmd->add_option("--roi-grid", opt->roi_grid, "ROI raster grid size");
    cmd->add_option("--jitter", opt->jitter, "Proposal jitter when regenerating proposals");
    cmd->add_option("--negatives", opt->negatives, "Negatives per scene when regenerating");
    cmd->add_option("--proposal-seed", opt->proposal_seed, "Seed when regenerating proposals");
    cmd->add_option("--out", opt->out_json, "Write the full report as JSON");
    cmd->add_option("--save-detections", opt->save_detections, "Write inference output (JSONL)");
    cmd->callback([opt]() { run_eval(*opt); });
}

}  // namespace textdet::cli
