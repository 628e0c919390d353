#pragma once

#include <span>
#include <vector>

#include "cbpf/context.hpp"
#include "cbpf/mf.hpp"

namespace cbpf {

// Observations whose situation key equals the target exactly. May be empty.
std::vector<int32_t> exact_prefilter(const Dataset& d, std::span<const int32_t> pool,
                                     const SituationKey& target);
std::vector<int32_t> exact_prefilter(const Dataset& d, const SituationKey& target);

// Raw condition bits as the situation vector (dimension = total condition
// count, factor-ordered one-hot blocks, unknown factor = zero block). Slots
// into the same cosine pre-filter as the learned representations.
SituationRepresentation binary_representation(const SituationKey& key,
                                              const DatasetSchema& schema);
std::vector<SituationRepresentation> binary_represent_all(const SituationTable& table,
                                                          const DatasetSchema& schema);

struct DspfConfig {
    InfluenceBasis basis = InfluenceBasis::item; // item or user
    double beta = 5.0;

    void validate() const;
};

// Deviation-based influence: w = sum of (r - baseline prediction) over the
// condition's ratings for the entity, damped by 1 / (count + beta). Entities
// without matching ratings get 0.
ConditionInfluenceVector dspf_condition_influence(const Dataset& d,
                                                  std::span<const int32_t> pool,
                                                  int condition, const DspfConfig& cfg,
                                                  const BiasBaseline& baseline);
InfluenceMatrix dspf_influence_matrix(const Dataset& d, std::span<const int32_t> pool,
                                      const DspfConfig& cfg, int workers = 0);
InfluenceMatrix dspf_influence_matrix_serial(const Dataset& d, std::span<const int32_t> pool,
                                             const DspfConfig& cfg);

// Plain matrix factorization over the whole pool, no context filtering.
MfModel context_free_mf(const Dataset& d, std::span<const int32_t> pool,
                        const MfHyperparams& hp);

} // namespace cbpf
