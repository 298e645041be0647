#pragma once

#include <string>
#include <vector>

namespace kfp {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string details;
    double seconds = 0.0;
};

struct ReproduceOptions {
    bool fast = false;   // scale Monte Carlo workloads down for smoke runs
    int threads = 0;     // 0 -> hardware concurrency
    std::string out_dir; // optional; CSV side outputs when nonempty
};

// Run acceptance criterion `id` (1..12).
CriterionResult run_criterion(int id, const ReproduceOptions& opts);

// Run the full suite in order.
std::vector<CriterionResult> run_all_criteria(const ReproduceOptions& opts);

}  // namespace kfp
