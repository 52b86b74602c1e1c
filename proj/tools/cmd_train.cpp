#include <cstdio>
#include <memory>

#include "commands.hpp"
#include "textdet/rng.hpp"

namespace textdet::cli {

namespace {

struct TrainOptions {
    std::string data;
    std::string out;
    std::string loss_csv;
    std::string scheme = "omts";
    std::string pfam = "2fc";
    pipeline::DataConfig data_cfg;
    head::HeadConfig head_cfg;
    head::TrainOptions train;
    nn::SgdConfig sgd;
    double rotate_aug = 0.0;
};

void run_train(const TrainOptions& opt) {
    const SceneData data = load_scene_data(opt.data, /*need_proposals=*/opt.rotate_aug <= 0.0);

    head::HeadConfig cfg = opt.head_cfg;
    cfg.pfam_mode = io::pfam_mode_from_name(opt.pfam);
    cfg.roi_dim = static_cast<std::size_t>(opt.data_cfg.roi_grid) *
                  static_cast<std::size_t>(opt.data_cfg.roi_grid);

    head::TrainOptions train_opt = opt.train;
    train_opt.scheme = opt.scheme == "omts" ? head::Scheme::omts : head::Scheme::one_to_one;

    pipeline::DataConfig dcfg = opt.data_cfg;
    dcfg.proposal_seed = mix_seed(train_opt.seed, 0xDA7A);

    const head::TrainDataset dataset =
        opt.rotate_aug > 0.0
            ? pipeline::build_train_dataset_rotated(data.scenes, dcfg, cfg.K, opt.rotate_aug,
                                                    mix_seed(train_opt.seed, 0xA06))
            : pipeline::build_train_dataset(data.scenes, data.proposals, dcfg, cfg.K);

    const head::TrainResult result = head::train_head(cfg, dataset, opt.sgd, train_opt);

    io::save_checkpoint(opt.out, result.net);
    const std::string csv = opt.loss_csv.empty() ? opt.out + ".loss.csv" : opt.loss_csv;
    io::write_loss_csv(csv, result.curve);

    const double final_loss = result.curve.empty() ? 0.0 : result.curve.back().total;
    std::printf("trained %s/%s for %zu iterations on %zu samples, final loss %.6f\n",
                opt.scheme.c_str(), opt.pfam.c_str(), opt.train.iters, dataset.samples.size(),
                final_loss);
    std::printf("checkpoint: %s\nloss log: %s\n", opt.out.c_str(), csv.c_str());
}

}  // namespace

void register_train(CLI::App& app) {
    auto opt = std::make_shared<TrainOptions>();
    CLI::App* cmd = app.add_subcommand("train", "Train a detection head on generated data");
    cmd->add_option("--data", opt->data, "Data directory from `gen`")
        ->required()
        ->check(CLI::ExistingPath);
    cmd->add_option("--out", opt->out, "Checkpoint output path")->required();
    cmd->add_option("--loss-csv", opt->loss_csv, "Loss log path (default: <out>.loss.csv)");
    cmd->add_option("--scheme", opt->scheme, "Training scheme")
        ->check(CLI::IsMember({"one_to_one", "omts"}));
    cmd->add_option("--pfam", opt->pfam, "Attention placement")
        ->check(CLI::IsMember({"none", "1fc", "2fc"}));
    cmd->add_option("--iters", opt->train.iters, "Training iterations");
    cmd->add_option("--seed", opt->train.seed, "Training seed");
    cmd->add_option("--batch", opt->train.batch, "Minibatch size")->check(CLI::PositiveNumber);
    cmd->add_option("--fg-fraction", opt->train.fg_fraction, "Foreground fraction per batch")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--k", opt->head_cfg.K, "Prediction branches per proposal")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--fc-dim", opt->head_cfg.fc_dim, "Fully connected width");
    cmd->add_option("--pfam-hidden", opt->head_cfg.pfam_hidden, "Attention hidden width");
    cmd->add_flag("--pfam-before-relu", opt->head_cfg.pfam_before_relu,
                  "Apply attention to the pre-activation fc output");
    cmd->add_option("--roi-grid", opt->data_cfg.roi_grid, "ROI raster grid size");
    cmd->add_option("--theta", opt->data_cfg.match_threshold, "Matching IoU threshold")
        ->check(CLI::Range(0.01, 0.99));
    cmd->add_option("--jitter", opt->data_cfg.jitter,
                    "Proposal jitter (only used with --rotate-aug)");
    cmd->add_option("--negatives", opt->data_cfg.negatives_per_scene,
                    "Negatives per scene (only used with --rotate-aug)");
    cmd->add_option("--per-instance", opt->data_cfg.proposals_per_instance,
                    "Proposals per instance (only used with --rotate-aug)");
    cmd->add_option("--rotate-aug", opt->rotate_aug,
                    "Max random scene rotation in degrees; regenerates proposals");
    cmd->add_option("--lr", opt->sgd.lr, "Learning rate");
    cmd->add_option("--momentum", opt->sgd.momentum, "SGD momentum");
    cmd->add_option("--weight-decay", opt->sgd.weight_decay, "Weight decay");
    cmd->add_option("--warmup", opt->sgd.warmup_iters, "Warmup iterations");
    cmd->callback([opt]() { run_train(*opt); });
}

}  // namespace textdet::cli
