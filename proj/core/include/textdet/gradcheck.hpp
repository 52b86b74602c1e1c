#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace textdet::gradcheck {

struct Options {
    int seeds = 20;
    std::size_t max_dim = 32;
    double fd_step = 1e-5;
    double rel_tol = 1e-4;
    double abs_tol = 1e-6;
    std::uint64_t base_seed = 20240501;
};

struct CheckResult {
    std::string name;
    // max over coordinates of |analytic - fd| / (abs_tol + rel_tol * scale);
    // <= 1 passes
    double worst = 0.0;
    bool passed = false;
};

/// Central-difference verification of every analytic backward pass: dense,
/// relu, sigmoid, softmax2, PFAM, and the full detection head loss.
std::vector<CheckResult> run_all(const Options& options);

bool all_passed(const std::vector<CheckResult>& results);
std::string format_results(const std::vector<CheckResult>& results);

}  // namespace textdet::gradcheck
