#include "cbpf/influence.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cbpf {

int basis_entity_count(const Dataset& d, const InfluenceMode& mode) {
    switch (mode.basis) {
    case InfluenceBasis::item: return d.items.size();
    case InfluenceBasis::user: return d.users.size();
    case InfluenceBasis::item_cluster:
    case InfluenceBasis::user_cluster:
        if (!mode.cluster_assignment)
            throw ValidationError("influence: cluster basis needs a cluster assignment");
        return mode.cluster_assignment->k;
    }
    return 0;
}

int32_t basis_entity_of(const Dataset&, const InfluenceMode& mode,
                        const ContextualObservation& obs) {
    switch (mode.basis) {
    case InfluenceBasis::item: return obs.item;
    case InfluenceBasis::user: return obs.user;
    case InfluenceBasis::item_cluster: return mode.cluster_assignment->cluster_of(obs.item);
    case InfluenceBasis::user_cluster: return mode.cluster_assignment->cluster_of(obs.user);
    }
    return -1;
}

namespace {

struct CellAccumulator {
    int32_t n = 0;
    double sum_r = 0.0;
    double sum_c = 0.0; // condition bits, so sum_c also equals sum of squares
    double sum_rc = 0.0;
    double sum_r2 = 0.0;
    double first_r = 0.0;
    bool r_constant = true;

    void add(double r, double c) {
        if (n == 0)
            first_r = r;
        else if (r != first_r)
            r_constant = false;
        ++n;
        sum_r += r;
        sum_c += c;
        sum_rc += r * c;
        sum_r2 += r * r;
    }

    double correlation() const {
        // Degenerate cells carry no evidence of influence: fewer than two
        // samples, constant ratings, or a constant condition bit.
        if (n < 2 || r_constant || sum_c == 0.0 || sum_c == static_cast<double>(n))
            return 0.0;
        double num = sum_rc - sum_r * sum_c / n;
        double var_r = sum_r2 - sum_r * sum_r / n;
        double var_c = sum_c - sum_c * sum_c / n;
        double den2 = var_r * var_c;
        if (den2 <= 0.0) return 0.0;
        double pcc = num / std::sqrt(den2);
        return pcc < -1.0 ? -1.0 : (pcc > 1.0 ? 1.0 : pcc);
    }
};

ConditionInfluenceVector influence_for_condition(const Dataset& d,
                                                 std::span<const int32_t> pool, int condition,
                                                 const InfluenceMode& mode,
                                                 const InfluenceOptions& opts, int entities) {
    const int factor = d.schema.factor_of(condition).first;
    std::vector<CellAccumulator> cells(entities);
    for (int32_t idx : pool) {
        const auto& obs = d.observations[idx];
        int32_t entity = basis_entity_of(d, mode, obs);
        if (entity < 0) continue;
        bool known = d.situation_keys[idx][factor] >= 0;
        if (!known && !opts.unknown_as_zero) continue;
        cells[entity].add(obs.rating, obs.conditions[condition]);
    }

    ConditionInfluenceVector out;
    out.condition = condition;
    out.values.resize(entities);
    out.support.resize(entities);
    for (int e = 0; e < entities; ++e) {
        out.values[e] = cells[e].n < opts.min_support ? 0.0 : cells[e].correlation();
        out.support[e] = cells[e].n;
    }
    return out;
}

} // namespace

ConditionInfluenceVector condition_influence_vector(const Dataset& d,
                                                    std::span<const int32_t> pool,
                                                    int condition, const InfluenceMode& mode,
                                                    const InfluenceOptions& opts) {
    if (condition < 0 || condition >= d.schema.condition_count())
        throw ValidationError("influence: condition index out of range");
    int entities = basis_entity_count(d, mode);
    if (entities == 0) throw ValidationError("influence: basis has zero entities");
    return influence_for_condition(d, pool, condition, mode, opts, entities);
}

ConditionInfluenceVector condition_influence_vector(const Dataset& d, int condition,
                                                    const InfluenceMode& mode,
                                                    const InfluenceOptions& opts) {
    auto pool = all_indices(d);
    return condition_influence_vector(d, pool, condition, mode, opts);
}

InfluenceMatrix influence_matrix_serial(const Dataset& d, std::span<const int32_t> pool,
                                        const InfluenceMode& mode,
                                        const InfluenceOptions& opts) {
    int entities = basis_entity_count(d, mode);
    if (entities == 0) throw ValidationError("influence: basis has zero entities");
    const int n = d.schema.condition_count();
    InfluenceMatrix matrix(n);
    for (int c = 0; c < n; ++c)
        matrix[c] = influence_for_condition(d, pool, c, mode, opts, entities);
    return matrix;
}

InfluenceMatrix influence_matrix(const Dataset& d, std::span<const int32_t> pool,
                                 const InfluenceMode& mode, const InfluenceOptions& opts,
                                 int workers) {
    int entities = basis_entity_count(d, mode);
    if (entities == 0) throw ValidationError("influence: basis has zero entities");
    const int n = d.schema.condition_count();
    InfluenceMatrix matrix(n);
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#endif
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < n; ++c)
        matrix[c] = influence_for_condition(d, pool, c, mode, opts, entities);
    return matrix;
}

InfluenceMatrix influence_matrix(const Dataset& d, const InfluenceMode& mode,
                                 const InfluenceOptions& opts, int workers) {
    auto pool = all_indices(d);
    return influence_matrix(d, pool, mode, opts, workers);
}

std::string influence_matrix_to_csv(const InfluenceMatrix& m, const DatasetSchema& schema) {
    std::ostringstream out;
    out << "condition";
    size_t entities = m.empty() ? 0 : m[0].values.size();
    for (size_t e = 0; e < entities; ++e) out << ",e" << e;
    out << '\n';
    char buf[40];
    for (const auto& row : m) {
        out << schema.condition_name(row.condition);
        for (double v : row.values) {
            std::snprintf(buf, sizeof(buf), "%.10g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace cbpf
