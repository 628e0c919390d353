#pragma once

#include <span>
#include <string>
#include <vector>

#include "cbpf/dataset.hpp"
#include "cbpf/influence.hpp"

namespace cbpf {

enum class RepresentationStrategy { aggregation, concatenation };

std::string strategy_name(RepresentationStrategy s);

// Vector stand-in for a context situation, derived from the influence
// matrix. Aggregation averages the influence vectors of the situation's
// known conditions (dimension = basis entity count); concatenation lays the
// per-factor vectors out in schema factor order with zero blocks for unknown
// factors (dimension = factor count x basis entity count).
struct SituationRepresentation {
    SituationKey key;
    std::vector<double> vector;
    RepresentationStrategy strategy = RepresentationStrategy::aggregation;
    bool all_unknown = false;
};

// Throws ValidationError when the situation has no known factor and the
// strategy is aggregation (nothing to average). Concatenation yields an
// all-zero vector in that case, with all_unknown set.
SituationRepresentation represent_situation(const SituationKey& key,
                                            const InfluenceMatrix& matrix,
                                            const DatasetSchema& schema,
                                            RepresentationStrategy strategy);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Cosine of the two representation vectors; 0 whenever either norm is 0.
// Dimension or strategy mismatch throws ValidationError.
double situation_similarity(const SituationRepresentation& a,
                            const SituationRepresentation& b);

// Distinct situations of a pool of observations, keys in lexicographic key
// order, each with the observation indices that carry it.
struct SituationTable {
    std::vector<SituationKey> keys;
    std::vector<std::vector<int32_t>> members;

    int find(const SituationKey& key) const;
    size_t size() const { return keys.size(); }
};

SituationTable enumerate_situations(const Dataset& d, std::span<const int32_t> pool);
SituationTable enumerate_situations(const Dataset& d);

// One representation per table key. All-unknown keys get a zero vector under
// either strategy here; callers that must reject them use represent_situation.
std::vector<SituationRepresentation> represent_all(const SituationTable& table,
                                                   const InfluenceMatrix& matrix,
                                                   const DatasetSchema& schema,
                                                   RepresentationStrategy strategy);

// Square similarity matrix over the table's situations, keys as row and
// column labels.
std::string situation_similarity_csv(const SituationTable& table,
                                     const std::vector<SituationRepresentation>& reps,
                                     const DatasetSchema& schema);

} // namespace cbpf
