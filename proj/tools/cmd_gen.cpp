#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include "commands.hpp"

namespace textdet::cli {

namespace {

struct GenOptions {
    std::string out;
    pipeline::DataConfig data;
};

void run_gen(const GenOptions& opt) {
    namespace fs = std::filesystem;
    fs::create_directories(opt.out);

    const pipeline::DatasetBundle bundle = pipeline::make_dataset(opt.data);
    io::write_jsonl_scenes(fs::path(opt.out) / "scenes.jsonl", bundle.scenes);
    io::write_jsonl_proposals(fs::path(opt.out) / "proposals.jsonl", bundle.proposals);

    std::size_t n_instances = 0, n_proposals = 0;
    for (const auto& s : bundle.scenes) n_instances += s.instances.size();
    for (const auto& p : bundle.proposals) n_proposals += p.size();
    const double two_match = synthdata::two_match_fraction(bundle.scenes, bundle.proposals,
                                                           opt.data.match_threshold);
    std::printf("scenes: %zu  instances: %zu  proposals: %zu\n", bundle.scenes.size(),
                n_instances, n_proposals);
    std::printf("two-match proposal fraction at theta=%.2f: %.4f\n", opt.data.match_threshold,
                two_match);
}

}  // namespace

void register_gen(CLI::App& app) {
    auto opt = std::make_shared<GenOptions>();
    CLI::App* cmd = app.add_subcommand("gen", "Generate synthetic scenes and proposals (JSONL)");
    cmd->add_option("--out", opt->out, "Output directory")->required();
    cmd->add_option("--seed", opt->data.synth.rng_seed, "Scene RNG seed");
    cmd->add_option("--proposal-seed", opt->data.proposal_seed, "Proposal RNG seed");
    cmd->add_option("--scenes", opt->data.synth.n_scenes, "Number of scenes")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--image-size", opt->data.synth.image_size, "Square image extent in pixels");
    cmd->add_option("--min-instances", opt->data.synth.min_instances, "Min instances per scene");
    cmd->add_option("--max-instances", opt->data.synth.max_instances, "Max instances per scene");
    cmd->add_option("--pair-prob", opt->data.synth.nearby_pair_probability,
                    "Probability of duplicating an instance as a nearby pair")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--pair-gap", opt->data.synth.pair_gap, "Edge-to-edge pair gap in pixels");
    cmd->add_option("--curv-min", opt->data.synth.curvature_min, "Min bulge/chord ratio");
    cmd->add_option("--curv-max", opt->data.synth.curvature_max, "Max bulge/chord ratio");
    cmd->add_option("--thick-min", opt->data.synth.thickness_min, "Min ribbon thickness");
    cmd->add_option("--thick-max", opt->data.synth.thickness_max, "Max ribbon thickness");
    cmd->add_option("--orient-min", opt->data.synth.orient_min_deg,
                    "Min reading-direction angle (degrees)");
    cmd->add_option("--orient-max", opt->data.synth.orient_max_deg,
                    "Max reading-direction angle (degrees)");
    cmd->add_option("--jitter", opt->data.jitter, "Relative proposal jitter magnitude");
    cmd->add_option("--negatives", opt->data.negatives_per_scene, "Negative proposals per scene");
    cmd->add_option("--per-instance", opt->data.proposals_per_instance,
                    "Jittered proposals per instance");
    cmd->add_option("--theta", opt->data.match_threshold, "Matching IoU threshold")
        ->check(CLI::Range(0.01, 0.99));
    cmd->callback([opt]() { run_gen(*opt); });
}

}  // namespace textdet::cli
