#include <cstdio>
#include <fstream>
#include <memory>

#include "commands.hpp"

namespace textdet::cli {

namespace {

struct BenchCliOptions {
    pipeline::BenchOptions opts;
    std::string out_json;
    std::string out_table;
    bool no_k1 = false;
};

void run_bench_cmd(const BenchCliOptions& opt) {
    pipeline::BenchOptions options = opt.opts;
    options.include_k1_baseline = !opt.no_k1;
    const pipeline::BenchResult result = pipeline::run_bench(options);

    const std::string table = pipeline::bench_table(result);
    std::printf("%s", table.c_str());
    if (!opt.out_table.empty()) {
        std::ofstream out(opt.out_table);
        if (!out) throw io::FormatError(opt.out_table + ": cannot open for writing");
        out << table;
    }
    if (!opt.out_json.empty()) {
        std::ofstream out(opt.out_json);
        if (!out) throw io::FormatError(opt.out_json + ": cannot open for writing");
        out << pipeline::bench_to_json(result);
    }
}

}  // namespace

void register_bench(CLI::App& app) {
    auto opt = std::make_shared<BenchCliOptions>();
    CLI::App* cmd = app.add_subcommand(
        "bench", "Run the scheme x attention ablation grid and report P/R/F medians");
    cmd->add_option("--seeds", opt->opts.seeds, "Seeds per cell")->check(CLI::PositiveNumber);
    cmd->add_option("--iters", opt->opts.iters, "Training iterations per run");
    cmd->add_option("--batch", opt->opts.batch, "Minibatch size")->check(CLI::PositiveNumber);
    cmd->add_option("--train-scenes", opt->opts.train_scenes, "Training scenes per seed");
    cmd->add_option("--test-scenes", opt->opts.test_scenes, "Test scenes per set per seed");
    cmd->add_option("--pair-gap", opt->opts.pair_gap, "Edge-to-edge pair gap in pixels");
    cmd->add_option("--jitter", opt->opts.jitter, "Relative proposal jitter");
    cmd->add_option("--score-threshold", opt->opts.score_threshold, "Detection score cutoff");
    cmd->add_option("--nms", opt->opts.nms_iou, "NMS IoU threshold at evaluation");
    cmd->add_option("--fc-dim", opt->opts.fc_dim, "Fully connected width");
    cmd->add_option("--threads", opt->opts.threads, "Parallel cells per seed")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--rotate-aug", opt->opts.rotate_aug_max_deg,
                    "Max random training rotation in degrees");
    cmd->add_option("--seed", opt->opts.base_seed, "Base seed");
    cmd->add_flag("--no-k1", opt->no_k1, "Skip the K=1 baseline row");
    cmd->add_option("--out-json", opt->out_json, "Write results as JSON");
    cmd->add_option("--out-table", opt->out_table, "Write the table to a file");
    cmd->callback([opt]() { run_bench_cmd(*opt); });
}

}  // namespace textdet::cli
