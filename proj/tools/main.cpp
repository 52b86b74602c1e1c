#include <exception>
#include <iostream>

#include "commands.hpp"

namespace textdet::cli {

SceneData load_scene_data(const std::filesystem::path& data, bool need_proposals) {
    namespace fs = std::filesystem;
    SceneData out;
    fs::path scenes_path = data;
    fs::path proposals_path;
    if (fs::is_directory(data)) {
        scenes_path = data / "scenes.jsonl";
        proposals_path = data / "proposals.jsonl";
    } else {
        proposals_path = data.parent_path() / "proposals.jsonl";
    }
    out.scenes = io::read_jsonl_scenes(scenes_path);
    if (fs::exists(proposals_path)) {
        out.proposals = io::read_jsonl_proposals(proposals_path);
        out.proposals.resize(out.scenes.size());
    } else if (need_proposals) {
        throw io::FormatError(proposals_path.string() + ": proposals file missing");
    }
    return out;
}

}  // namespace textdet::cli

int main(int argc, char** argv) {
    CLI::App app{"Arbitrary-shaped text detection toolkit: Bezier geometry, one-to-many "
                 "training, proposal feature attention, synthetic benchmarks"};
    app.require_subcommand(1);
    // INI-style config with one [subcommand] section per command; command
    // line flags override file values.
    app.set_config("--config", "", "Key-value config file with [subcommand] sections");

    textdet::cli::register_gen(app);
    textdet::cli::register_fit(app);
    textdet::cli::register_train(app);
    textdet::cli::register_eval(app);
    textdet::cli::register_gradcheck(app);
    textdet::cli::register_render(app);
    textdet::cli::register_bench(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const textdet::cli::CheckFailure& e) {
        std::cerr << "check failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
