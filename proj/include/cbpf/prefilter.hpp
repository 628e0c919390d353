#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <vector>

#include "cbpf/context.hpp"

namespace cbpf {

struct PrefilterConfig {
    double similarity_threshold = 0.5; // [-1, 1]
    RepresentationStrategy strategy = RepresentationStrategy::aggregation;
    InfluenceMode mode;
};

// Observation indices of every situation whose similarity to the target is
// >= threshold. The target's own situation counts as similarity 1 whether or
// not its representation has nonzero norm, so its observations survive any
// threshold <= 1. Result is sorted ascending. May be empty.
std::vector<int32_t> select_similar(const SituationTable& table,
                                    const std::vector<SituationRepresentation>& reps,
                                    const SituationRepresentation& target,
                                    double threshold);

std::vector<int32_t> build_local_dataset(const Dataset& d, std::span<const int32_t> pool,
                                         const SituationKey& target,
                                         const PrefilterConfig& cfg,
                                         const InfluenceMatrix& matrix);
std::vector<int32_t> build_local_dataset(const Dataset& d, const SituationKey& target,
                                         const PrefilterConfig& cfg,
                                         const InfluenceMatrix& matrix);

// Memoizes local datasets per target situation key over one fixed pool.
// Many test observations share a situation; the selection is a pure function
// of the key, so distinct threads may race to compute the same entry and the
// first insert wins.
class LocalDatasetCache {
public:
    LocalDatasetCache(SituationTable table, std::vector<SituationRepresentation> reps,
                      double threshold);

    std::shared_ptr<const std::vector<int32_t>> local_for(const SituationRepresentation& target);

    const SituationTable& table() const { return table_; }

private:
    SituationTable table_;
    std::vector<SituationRepresentation> reps_;
    double threshold_;
    std::map<SituationKey, std::shared_ptr<const std::vector<int32_t>>> cache_;
    std::shared_mutex mutex_;
};

} // namespace cbpf
