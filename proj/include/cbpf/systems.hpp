#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cbpf/baselines.hpp"
#include "cbpf/prefilter.hpp"

namespace cbpf {

// How a system turns the target situation into a training selection.
// filter_none trains one model on the whole fold; filter_exact keeps
// identical situations only; the rest build a vector per situation and keep
// situations passing the cosine threshold: raw bits (filter_binary), rating
// deviations (filter_dspf), or rating correlations (filter_pcc).
enum class SystemKind { filter_none, filter_exact, filter_binary, filter_dspf, filter_pcc };

struct SystemSpec {
    std::string name;
    SystemKind kind = SystemKind::filter_none;
    InfluenceBasis basis = InfluenceBasis::item;
    RepresentationStrategy strategy = RepresentationStrategy::aggregation;
    double threshold = 0.5;
    double dspf_beta = 5.0;
    MfHyperparams mf;
    int min_local_size = 10; // smaller local selections fall back to the fold model
    bool unknown_as_zero = false;
    int influence_min_support = 2; // forwarded to InfluenceOptions::min_support
};

// Built-in system names. Unknown name throws ValidationError.
SystemSpec make_system(const std::string& name);
std::vector<std::string> known_system_names();

// Everything one system needs to answer test predictions for one training
// fold: the fold-wide model, and a local model per distinct test situation
// where the pre-filtered selection is large enough.
class FoldPredictor {
public:
    FoldPredictor(const Dataset& d, std::vector<int32_t> train_pool, SystemSpec spec,
                  const ClusterAssignment* item_clusters,
                  const ClusterAssignment* user_clusters, uint64_t seed);

    // Builds local models for the situations appearing in test_indices.
    // Deterministic for a fixed seed whatever the worker count.
    void prepare(std::span<const int32_t> test_indices, int workers = 0);

    double predict(int32_t obs_index) const;

    const MfModel& global_model() const { return global_; }
    size_t local_model_count() const { return locals_.size(); }
    size_t fallback_count() const { return fallbacks_; }

private:
    std::vector<int32_t> local_selection(const SituationKey& key) const;

    const Dataset& d_;
    std::vector<int32_t> train_pool_;
    SystemSpec spec_;
    const ClusterAssignment* item_clusters_;
    const ClusterAssignment* user_clusters_;
    uint64_t seed_;

    MfModel global_;
    InfluenceMatrix matrix_;
    mutable std::unique_ptr<LocalDatasetCache> cache_;
    std::map<SituationKey, MfModel> locals_;
    size_t fallbacks_ = 0;
};

} // namespace cbpf
