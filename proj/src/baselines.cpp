#include "cbpf/baselines.hpp"

#include "cbpf/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cbpf {

std::vector<int32_t> exact_prefilter(const Dataset& d, std::span<const int32_t> pool,
                                     const SituationKey& target) {
    std::vector<int32_t> selected;
    for (int32_t idx : pool)
        if (d.situation_keys[idx] == target) selected.push_back(idx);
    return selected;
}

std::vector<int32_t> exact_prefilter(const Dataset& d, const SituationKey& target) {
    auto pool = all_indices(d);
    return exact_prefilter(d, pool, target);
}

SituationRepresentation binary_representation(const SituationKey& key,
                                              const DatasetSchema& schema) {
    SituationRepresentation rep;
    rep.key = key;
    rep.strategy = RepresentationStrategy::concatenation;
    rep.vector.assign(schema.condition_count(), 0.0);
    rep.all_unknown = true;
    for (int f = 0; f < schema.factor_count(); ++f) {
        if (key[f] < 0) continue;
        rep.all_unknown = false;
        rep.vector[schema.condition_offset(f) + key[f]] = 1.0;
    }
    return rep;
}

std::vector<SituationRepresentation> binary_represent_all(const SituationTable& table,
                                                          const DatasetSchema& schema) {
    std::vector<SituationRepresentation> reps;
    reps.reserve(table.size());
    for (const auto& key : table.keys) reps.push_back(binary_representation(key, schema));
    return reps;
}

void DspfConfig::validate() const {
    if (basis != InfluenceBasis::item && basis != InfluenceBasis::user)
        throw ValidationError("dspf: basis must be item or user");
    if (beta < 0.0) throw ValidationError("dspf: beta must be non-negative");
}

namespace {

ConditionInfluenceVector dspf_for_condition(const Dataset& d, std::span<const int32_t> pool,
                                            int condition, const DspfConfig& cfg,
                                            const BiasBaseline& baseline, int entities) {
    ConditionInfluenceVector out;
    out.condition = condition;
    out.values.assign(entities, 0.0);
    out.support.assign(entities, 0);
    for (int32_t idx : pool) {
        const auto& obs = d.observations[idx];
        if (!obs.conditions[condition]) continue;
        int32_t entity = cfg.basis == InfluenceBasis::item ? obs.item : obs.user;
        out.values[entity] += obs.rating - baseline.predict(obs.user, obs.item);
        ++out.support[entity];
    }
    for (int e = 0; e < entities; ++e) {
        if (out.support[e] == 0)
            out.values[e] = 0.0;
        else
            out.values[e] /= out.support[e] + cfg.beta;
    }
    return out;
}

} // namespace

ConditionInfluenceVector dspf_condition_influence(const Dataset& d,
                                                  std::span<const int32_t> pool,
                                                  int condition, const DspfConfig& cfg,
                                                  const BiasBaseline& baseline) {
    cfg.validate();
    if (condition < 0 || condition >= d.schema.condition_count())
        throw ValidationError("dspf: condition index out of range");
    int entities = cfg.basis == InfluenceBasis::item ? d.items.size() : d.users.size();
    return dspf_for_condition(d, pool, condition, cfg, baseline, entities);
}

InfluenceMatrix dspf_influence_matrix(const Dataset& d, std::span<const int32_t> pool,
                                      const DspfConfig& cfg, int workers) {
    cfg.validate();
    auto baseline = fit_bias_baseline(d, pool, 0.0);
    int entities = cfg.basis == InfluenceBasis::item ? d.items.size() : d.users.size();
    const int n = d.schema.condition_count();
    InfluenceMatrix matrix(n);
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#endif
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < n; ++c)
        matrix[c] = dspf_for_condition(d, pool, c, cfg, baseline, entities);
    return matrix;
}

InfluenceMatrix dspf_influence_matrix_serial(const Dataset& d, std::span<const int32_t> pool,
                                             const DspfConfig& cfg) {
    cfg.validate();
    auto baseline = fit_bias_baseline(d, pool, 0.0);
    int entities = cfg.basis == InfluenceBasis::item ? d.items.size() : d.users.size();
    const int n = d.schema.condition_count();
    InfluenceMatrix matrix(n);
    for (int c = 0; c < n; ++c)
        matrix[c] = dspf_for_condition(d, pool, c, cfg, baseline, entities);
    return matrix;
}

MfModel context_free_mf(const Dataset& d, std::span<const int32_t> pool,
                        const MfHyperparams& hp) {
    return train_mf(d, pool, hp);
}

} // namespace cbpf
