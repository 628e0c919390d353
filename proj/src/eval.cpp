#include "cbpf/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "cbpf/error.hpp"
#include "cbpf/rng.hpp"

namespace cbpf {

std::vector<int32_t> FoldPlan::train_indices(int fold) const {
    std::vector<int32_t> out;
    out.reserve(assignment.size());
    for (size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] != fold) out.push_back(static_cast<int32_t>(i));
    return out;
}

std::vector<int32_t> FoldPlan::test_indices(int fold) const {
    std::vector<int32_t> out;
    for (size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == fold) out.push_back(static_cast<int32_t>(i));
    return out;
}

FoldPlan make_folds(size_t observations, int k, uint64_t seed) {
    if (k < 2) throw ValidationError("folds: k must be at least 2");
    if (static_cast<size_t>(k) > observations)
        throw ValidationError("folds: k exceeds observation count");

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignment.resize(observations);

    std::vector<int32_t> perm(observations);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);
    for (size_t i = 0; i < observations; ++i)
        plan.assignment[perm[i]] = static_cast<int32_t>(i % k);
    return plan;
}

FoldPlan make_folds(const Dataset& d, int k, uint64_t seed) {
    return make_folds(d.size(), k, seed);
}

double mae(std::span<const double> errors) {
    if (errors.empty()) throw ValidationError("mae: empty error list");
    double sum = 0.0;
    for (double e : errors) sum += std::fabs(e);
    return sum / errors.size();
}

double rmse(std::span<const double> errors) {
    if (errors.empty()) throw ValidationError("rmse: empty error list");
    double sum = 0.0;
    for (double e : errors) sum += e * e;
    return std::sqrt(sum / errors.size());
}

std::vector<SystemResult> run_experiment(const Dataset& d,
                                         const std::vector<SystemSpec>& systems,
                                         const FoldPlan& plan,
                                         const ExperimentOptions& opts) {
    if (systems.empty()) throw ValidationError("experiment: no systems given");
    if (plan.assignment.size() != d.size())
        throw ValidationError("experiment: fold plan does not match dataset");

    std::vector<SystemResult> results;
    results.reserve(systems.size());
    for (const auto& spec : systems) {
        SystemResult res;
        res.system = spec.name;
        res.abs_errors.assign(d.size(), 0.0);
        auto started = std::chrono::steady_clock::now();

        for (int fold = 0; fold < plan.k; ++fold) {
            try {
                auto train = plan.train_indices(fold);
                auto test = plan.test_indices(fold);
                FoldPredictor predictor(d, std::move(train), spec, opts.item_clusters,
                                        opts.user_clusters, seed_mix(plan.seed, fold));
                predictor.prepare(test, opts.workers);

                std::vector<double> errors;
                errors.reserve(test.size());
                for (int32_t idx : test) {
                    double err = d.observations[idx].rating - predictor.predict(idx);
                    errors.push_back(err);
                    res.abs_errors[idx] = std::fabs(err);
                }
                res.fold_mae.push_back(mae(errors));
                res.fold_rmse.push_back(rmse(errors));
            } catch (const std::exception& e) {
                throw ValidationError("system " + spec.name + " fold " +
                                      std::to_string(fold) + ": " + e.what());
            }
        }

        res.mean_mae = mae(res.fold_mae);
        res.mean_rmse =
            std::accumulate(res.fold_rmse.begin(), res.fold_rmse.end(), 0.0) / plan.k;
        res.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                .count();
        results.push_back(std::move(res));
    }
    return results;
}

std::vector<SystemResult> run_repeated(const Dataset& d,
                                       const std::vector<SystemSpec>& systems, int k,
                                       int repetitions, uint64_t base_seed,
                                       const ExperimentOptions& opts) {
    if (repetitions < 1) throw ValidationError("experiment: repetitions must be positive");

    std::vector<SystemResult> merged;
    for (int rep = 0; rep < repetitions; ++rep) {
        auto plan = make_folds(d.size(), k, seed_mix(base_seed, rep));
        auto round = run_experiment(d, systems, plan, opts);
        if (rep == 0) {
            merged = std::move(round);
            continue;
        }
        for (size_t s = 0; s < merged.size(); ++s) {
            auto& acc = merged[s];
            auto& cur = round[s];
            acc.fold_mae.insert(acc.fold_mae.end(), cur.fold_mae.begin(), cur.fold_mae.end());
            acc.fold_rmse.insert(acc.fold_rmse.end(), cur.fold_rmse.begin(),
                                 cur.fold_rmse.end());
            acc.abs_errors.insert(acc.abs_errors.end(), cur.abs_errors.begin(),
                                  cur.abs_errors.end());
            acc.runtime_seconds += cur.runtime_seconds;
        }
    }
    for (auto& res : merged) {
        res.mean_mae = mae(res.fold_mae);
        res.mean_rmse = std::accumulate(res.fold_rmse.begin(), res.fold_rmse.end(), 0.0) /
                        res.fold_rmse.size();
    }
    return merged;
}

namespace {

int find_system(const std::vector<SystemResult>& results, const std::string& name) {
    for (size_t i = 0; i < results.size(); ++i)
        if (results[i].system == name) return static_cast<int>(i);
    return -1;
}

int best_by_mae(const std::vector<SystemResult>& results) {
    int best = 0;
    for (size_t i = 1; i < results.size(); ++i)
        if (results[i].mean_mae < results[best].mean_mae) best = static_cast<int>(i);
    return best;
}

} // namespace

std::string report_table(const std::vector<SystemResult>& results, double alpha) {
    if (results.empty()) return "(no results)\n";
    const int mf_pos = find_system(results, "mf");
    const int best = best_by_mae(results);

    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s %8s %8s %10s  %s\n", "system", "MAE", "RMSE",
                  "vs mf", "vs best");
    out << line;
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::string vs_mf = "-";
        if (mf_pos >= 0 && static_cast<int>(i) != mf_pos) {
            double base = results[mf_pos].mean_mae;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%+.1f%%",
                          base > 0 ? (base - r.mean_mae) / base * 100.0 : 0.0);
            vs_mf = buf;
        }
        std::string vs_best = "best";
        if (static_cast<int>(i) != best) {
            auto w = wilcoxon_signed_rank(r.abs_errors, results[best].abs_errors, alpha);
            char buf[48];
            if (!w.conclusive)
                std::snprintf(buf, sizeof(buf), "p=n/a (n=%d)", w.n_used);
            else
                std::snprintf(buf, sizeof(buf), "p=%.4g%s", w.p_value,
                              w.significant ? " *" : "");
            vs_best = buf;
        }
        std::snprintf(line, sizeof(line), "%-14s %8.4f %8.4f %10s  %s\n", r.system.c_str(),
                      r.mean_mae, r.mean_rmse, vs_mf.c_str(), vs_best.c_str());
        out << line;
    }
    out << "* statistically different from best at alpha=" << alpha << "\n";
    return out.str();
}

std::string report_csv(const std::vector<SystemResult>& results, double alpha) {
    const int mf_pos = find_system(results, "mf");
    const int best = best_by_mae(results);
    std::ostringstream out;
    out << "system,mean_mae,mean_rmse,improvement_vs_mf_pct,p_vs_best,significant_vs_best,"
           "runtime_seconds\n";
    char buf[64];
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        out << r.system;
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", r.mean_mae, r.mean_rmse);
        out << buf;
        if (mf_pos >= 0 && static_cast<int>(i) != mf_pos && results[mf_pos].mean_mae > 0) {
            std::snprintf(buf, sizeof(buf), ",%.3f",
                          (results[mf_pos].mean_mae - r.mean_mae) / results[mf_pos].mean_mae *
                              100.0);
            out << buf;
        } else {
            out << ',';
        }
        if (static_cast<int>(i) != best) {
            auto w = wilcoxon_signed_rank(r.abs_errors, results[best].abs_errors, alpha);
            std::snprintf(buf, sizeof(buf), ",%.6g,%d", w.p_value,
                          w.significant ? 1 : 0);
            out << buf;
        } else {
            out << ",,";
        }
        std::snprintf(buf, sizeof(buf), ",%.3f\n", r.runtime_seconds);
        out << buf;
    }

    out << "\nsystem,fold,mae,rmse\n";
    for (const auto& r : results)
        for (size_t f = 0; f < r.fold_mae.size(); ++f) {
            std::snprintf(buf, sizeof(buf), ",%zu,%.6f,%.6f\n", f, r.fold_mae[f],
                          r.fold_rmse[f]);
            out << r.system << buf;
        }
    return out.str();
}

std::string error_dump_csv(const Dataset& d, const SystemResult& result) {
    std::ostringstream out;
    out << "repetition,observation,user,item,rating,abs_error\n";
    char buf[96];
    const size_t n = d.size();
    for (size_t i = 0; i < result.abs_errors.size(); ++i) {
        const auto& obs = d.observations[i % n];
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%s,%s,%.4f,%.6f\n", i / n, i % n,
                      d.users.names[obs.user].c_str(), d.items.names[obs.item].c_str(),
                      obs.rating, result.abs_errors[i]);
        out << buf;
    }
    return out.str();
}

} // namespace cbpf
