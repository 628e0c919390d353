#pragma once

#include <span>
#include <string>
#include <vector>

#include "cbpf/cluster.hpp"
#include "cbpf/dataset.hpp"

namespace cbpf {

enum class InfluenceBasis { item, user, item_cluster, user_cluster };

struct InfluenceMode {
    InfluenceBasis basis = InfluenceBasis::item;
    const ClusterAssignment* cluster_assignment = nullptr; // required for cluster bases
};

struct InfluenceOptions {
    // When true, observations whose factor value is unknown enter the
    // correlation with a 0 bit instead of being left out.
    bool unknown_as_zero = false;
    // Cells with fewer samples than this are zeroed; a correlation estimated
    // from a handful of pairs is noise. 2 is the arithmetic minimum.
    int min_support = 2;
};

// Per-condition influence profile: one correlation entry per basis entity.
// Entries with fewer samples than min_support or zero variance in either
// variable are exactly 0; support always records the actual sample count.
struct ConditionInfluenceVector {
    int condition = 0;
    std::vector<double> values;
    std::vector<int32_t> support;
};

using InfluenceMatrix = std::vector<ConditionInfluenceVector>;

int basis_entity_count(const Dataset& d, const InfluenceMode& mode);

// Basis entity an observation belongs to; -1 when a cluster mode has no
// assignment for the observation's entity.
int32_t basis_entity_of(const Dataset& d, const InfluenceMode& mode,
                        const ContextualObservation& obs);

ConditionInfluenceVector condition_influence_vector(const Dataset& d,
                                                    std::span<const int32_t> pool,
                                                    int condition, const InfluenceMode& mode,
                                                    const InfluenceOptions& opts = {});
ConditionInfluenceVector condition_influence_vector(const Dataset& d, int condition,
                                                    const InfluenceMode& mode,
                                                    const InfluenceOptions& opts = {});

// One vector per condition, schema declaration order.
InfluenceMatrix influence_matrix(const Dataset& d, std::span<const int32_t> pool,
                                 const InfluenceMode& mode, const InfluenceOptions& opts = {},
                                 int workers = 0);
InfluenceMatrix influence_matrix(const Dataset& d, const InfluenceMode& mode,
                                 const InfluenceOptions& opts = {}, int workers = 0);
InfluenceMatrix influence_matrix_serial(const Dataset& d, std::span<const int32_t> pool,
                                        const InfluenceMode& mode,
                                        const InfluenceOptions& opts = {});

// rows = conditions, columns = basis entities
std::string influence_matrix_to_csv(const InfluenceMatrix& m, const DatasetSchema& schema);

} // namespace cbpf
