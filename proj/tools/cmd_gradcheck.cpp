#include <cstdio>
#include <memory>

#include "commands.hpp"
#include "textdet/gradcheck.hpp"

namespace textdet::cli {

namespace {

struct GradcheckOptions {
    gradcheck::Options opts;
};

void run_gradcheck(const GradcheckOptions& opt) {
    const auto results = gradcheck::run_all(opt.opts);
    std::printf("%s", gradcheck::format_results(results).c_str());
    if (!gradcheck::all_passed(results)) {
        throw CheckFailure("finite-difference gradient check failed");
    }
}

}  // namespace

void register_gradcheck(CLI::App& app) {
    auto opt = std::make_shared<GradcheckOptions>();
    CLI::App* cmd = app.add_subcommand(
        "gradcheck", "Verify all analytic gradients against central finite differences");
    cmd->add_option("--seed", opt->opts.base_seed, "Base RNG seed");
    cmd->add_option("--dims", opt->opts.max_dim, "Max layer dimension")->check(CLI::Range(2, 64));
    cmd->add_option("--seeds", opt->opts.seeds, "Random cases per check")
        ->check(CLI::PositiveNumber);
    cmd->callback([opt]() { run_gradcheck(*opt); });
}

}  // namespace textdet::cli
