#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "CLI11.hpp"
#include "textdet/io_formats.hpp"
#include "textdet/pipeline.hpp"

namespace textdet::cli {

// Exit code 3.
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SceneData {
    std::vector<synthdata::Scene> scenes;
    std::vector<std::vector<geometry::AxisBox>> proposals;  // may be empty
};

/// Loads scenes.jsonl (and proposals.jsonl when present) from a data
/// directory, or a bare scenes file.
SceneData load_scene_data(const std::filesystem::path& data, bool need_proposals);

void register_gen(CLI::App& app);
void register_fit(CLI::App& app);
void register_train(CLI::App& app);
void register_eval(CLI::App& app);
void register_gradcheck(CLI::App& app);
void register_render(CLI::App& app);
void register_bench(CLI::App& app);

}  // namespace textdet::cli
