#include "cbpf/prefilter.hpp"

#include <algorithm>
#include <mutex>

namespace cbpf {

std::vector<int32_t> select_similar(const SituationTable& table,
                                    const std::vector<SituationRepresentation>& reps,
                                    const SituationRepresentation& target,
                                    double threshold) {
    const int target_pos = table.find(target.key);
    std::vector<int32_t> selected;
    for (size_t i = 0; i < table.size(); ++i) {
        double sim = static_cast<int>(i) == target_pos
                         ? 1.0
                         : situation_similarity(reps[i], target);
        if (sim >= threshold)
            selected.insert(selected.end(), table.members[i].begin(), table.members[i].end());
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<int32_t> build_local_dataset(const Dataset& d, std::span<const int32_t> pool,
                                         const SituationKey& target,
                                         const PrefilterConfig& cfg,
                                         const InfluenceMatrix& matrix) {
    auto table = enumerate_situations(d, pool);
    auto reps = represent_all(table, matrix, d.schema, cfg.strategy);
    auto target_rep = represent_situation(target, matrix, d.schema, cfg.strategy);
    return select_similar(table, reps, target_rep, cfg.similarity_threshold);
}

std::vector<int32_t> build_local_dataset(const Dataset& d, const SituationKey& target,
                                         const PrefilterConfig& cfg,
                                         const InfluenceMatrix& matrix) {
    auto pool = all_indices(d);
    return build_local_dataset(d, pool, target, cfg, matrix);
}

LocalDatasetCache::LocalDatasetCache(SituationTable table,
                                     std::vector<SituationRepresentation> reps,
                                     double threshold)
    : table_(std::move(table)), reps_(std::move(reps)), threshold_(threshold) {}

std::shared_ptr<const std::vector<int32_t>> LocalDatasetCache::local_for(
    const SituationRepresentation& target) {
    {
        std::shared_lock lock(mutex_);
        auto it = cache_.find(target.key);
        if (it != cache_.end()) return it->second;
    }
    auto computed = std::make_shared<const std::vector<int32_t>>(
        select_similar(table_, reps_, target, threshold_));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.emplace(target.key, std::move(computed));
    return it->second;
}

} // namespace cbpf
