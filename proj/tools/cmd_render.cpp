#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>

#include "commands.hpp"

namespace textdet::cli {

namespace {

struct RenderOptions {
    std::string data;
    std::string detections;
    std::string out;
};

void run_render(const RenderOptions& opt) {
    namespace fs = std::filesystem;
    const SceneData data = load_scene_data(opt.data, /*need_proposals=*/false);

    std::map<int, std::vector<head::Detection>> det_by_scene;
    if (!opt.detections.empty()) {
        for (auto& sd : io::read_jsonl_detections(opt.detections)) {
            det_by_scene[sd.scene_index] = std::move(sd.detections);
        }
    }

    fs::create_directories(opt.out);
    for (std::size_t i = 0; i < data.scenes.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%05zu.svg", i);
        const auto it = det_by_scene.find(static_cast<int>(i));
        if (it != det_by_scene.end()) {
            io::write_svg(fs::path(opt.out) / name, data.scenes[i], it->second);
        } else {
            io::write_svg(fs::path(opt.out) / name, data.scenes[i]);
        }
    }
    std::printf("wrote %zu SVG files to %s\n", data.scenes.size(), opt.out.c_str());
}

}  // namespace

void register_render(CLI::App& app) {
    auto opt = std::make_shared<RenderOptions>();
    CLI::App* cmd = app.add_subcommand("render", "Render scenes (and detections) as SVG");
    cmd->add_option("--data", opt->data, "Data directory or scenes file")
        ->required()
        ->check(CLI::ExistingPath);
    cmd->add_option("--detections", opt->detections, "Detections file (JSONL)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opt->out, "Output directory")->required();
    cmd->callback([opt]() { run_render(*opt); });
}

}  // namespace textdet::cli
