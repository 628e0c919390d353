#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbpf/systems.hpp"

namespace cbpf {

struct FoldPlan {
    int k = 5;
    uint64_t seed = 0;
    std::vector<int32_t> assignment; // observation index -> fold

    std::vector<int32_t> train_indices(int fold) const;
    std::vector<int32_t> test_indices(int fold) const;
};

// Seeded uniform partition, fold sizes differing by at most 1. No user or
// item is filtered out.
FoldPlan make_folds(size_t observations, int k, uint64_t seed);
FoldPlan make_folds(const Dataset& d, int k, uint64_t seed);

double mae(std::span<const double> errors);
double rmse(std::span<const double> errors);

struct SystemResult {
    std::string system;
    std::vector<double> fold_mae;
    std::vector<double> fold_rmse;
    double mean_mae = 0.0;
    double mean_rmse = 0.0;
    // |actual - predicted| per observation; with repetitions, one block of
    // dataset-size entries per repetition. Fixed order keeps significance
    // tests pairable across systems.
    std::vector<double> abs_errors;
    double runtime_seconds = 0.0;
};

struct ExperimentOptions {
    const ClusterAssignment* item_clusters = nullptr;
    const ClusterAssignment* user_clusters = nullptr;
    int workers = 0;
};

// Every system sees the same folds; per-fold model seeds derive from the
// plan seed, so a rerun reproduces metrics bit-exactly. Failures carry the
// system name and fold.
std::vector<SystemResult> run_experiment(const Dataset& d,
                                         const std::vector<SystemSpec>& systems,
                                         const FoldPlan& plan,
                                         const ExperimentOptions& opts = {});

// repetitions full cross-validation rounds with distinct fold seeds mixed
// from base_seed; fold metrics concatenated, means over all k x repetitions
// folds.
std::vector<SystemResult> run_repeated(const Dataset& d,
                                       const std::vector<SystemSpec>& systems, int k,
                                       int repetitions, uint64_t base_seed,
                                       const ExperimentOptions& opts = {});

struct WilcoxonResult {
    double statistic = 0.0; // rank sum of positive differences a - b
    double p_value = 1.0;
    int n_used = 0;         // pairs left after dropping zero differences
    bool conclusive = false; // n_used >= 10
    bool significant = false;
    bool a_better = false; // positive-rank sum below negative-rank sum
};

// Two-sided paired signed-rank test. Exact distribution up to 25 nonzero
// differences, normal approximation with tie correction above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    double alpha = 0.05);

// rows = systems; MAE, RMSE, improvement over the system named "mf", and
// significance of the pairwise test against the lowest-MAE system
std::string report_table(const std::vector<SystemResult>& results, double alpha = 0.05);
std::string report_csv(const std::vector<SystemResult>& results, double alpha = 0.05);
std::string error_dump_csv(const Dataset& d, const SystemResult& result);

} // namespace cbpf
