#include "cbpf/context.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "cbpf/error.hpp"

namespace cbpf {

std::string strategy_name(RepresentationStrategy s) {
    return s == RepresentationStrategy::aggregation ? "aggregation" : "concatenation";
}

SituationRepresentation represent_situation(const SituationKey& key,
                                            const InfluenceMatrix& matrix,
                                            const DatasetSchema& schema,
                                            RepresentationStrategy strategy) {
    if (matrix.empty()) throw ValidationError("context: empty influence matrix");
    if (static_cast<int>(key.size()) != schema.factor_count())
        throw ValidationError("context: situation key has wrong factor count");
    const size_t entities = matrix[0].values.size();

    SituationRepresentation rep;
    rep.key = key;
    rep.strategy = strategy;

    int known = 0;
    for (int16_t v : key)
        if (v >= 0) ++known;
    rep.all_unknown = known == 0;

    if (strategy == RepresentationStrategy::aggregation) {
        if (known == 0)
            throw ValidationError("context: situation has no known factor, cannot aggregate");
        rep.vector.assign(entities, 0.0);
        for (int f = 0; f < schema.factor_count(); ++f) {
            if (key[f] < 0) continue;
            const auto& w = matrix[schema.condition_offset(f) + key[f]].values;
            for (size_t e = 0; e < entities; ++e) rep.vector[e] += w[e];
        }
        for (double& v : rep.vector) v /= known;
    } else {
        rep.vector.assign(entities * schema.factor_count(), 0.0);
        for (int f = 0; f < schema.factor_count(); ++f) {
            if (key[f] < 0) continue;
            const auto& w = matrix[schema.condition_offset(f) + key[f]].values;
            std::copy(w.begin(), w.end(), rep.vector.begin() + f * entities);
        }
    }
    return rep;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ValidationError("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    // Rounding can push the quotient an ulp past +-1; selections keyed on
    // threshold -1 or 1 must still see the analytic range.
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double situation_similarity(const SituationRepresentation& a,
                            const SituationRepresentation& b) {
    if (a.strategy != b.strategy)
        throw ValidationError("situation_similarity: mixed representation strategies");
    if (a.vector.size() != b.vector.size())
        throw ValidationError("situation_similarity: dimension mismatch");
    return cosine_similarity(a.vector, b.vector);
}

int SituationTable::find(const SituationKey& key) const {
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return -1;
    return static_cast<int>(it - keys.begin());
}

SituationTable enumerate_situations(const Dataset& d, std::span<const int32_t> pool) {
    std::map<SituationKey, std::vector<int32_t>> groups;
    for (int32_t idx : pool) groups[d.situation_keys[idx]].push_back(idx);

    SituationTable table;
    table.keys.reserve(groups.size());
    table.members.reserve(groups.size());
    for (auto& [key, members] : groups) {
        table.keys.push_back(key);
        table.members.push_back(std::move(members));
    }
    return table;
}

SituationTable enumerate_situations(const Dataset& d) {
    auto pool = all_indices(d);
    return enumerate_situations(d, pool);
}

std::vector<SituationRepresentation> represent_all(const SituationTable& table,
                                                   const InfluenceMatrix& matrix,
                                                   const DatasetSchema& schema,
                                                   RepresentationStrategy strategy) {
    const size_t entities = matrix.empty() ? 0 : matrix[0].values.size();
    const size_t dim = strategy == RepresentationStrategy::aggregation
                           ? entities
                           : entities * schema.factor_count();
    std::vector<SituationRepresentation> reps;
    reps.reserve(table.size());
    for (const auto& key : table.keys) {
        bool any_known = std::any_of(key.begin(), key.end(), [](int16_t v) { return v >= 0; });
        if (!any_known) {
            SituationRepresentation rep;
            rep.key = key;
            rep.strategy = strategy;
            rep.all_unknown = true;
            rep.vector.assign(dim, 0.0);
            reps.push_back(std::move(rep));
        } else {
            reps.push_back(represent_situation(key, matrix, schema, strategy));
        }
    }
    return reps;
}

std::string situation_similarity_csv(const SituationTable& table,
                                     const std::vector<SituationRepresentation>& reps,
                                     const DatasetSchema& schema) {
    if (reps.size() != table.size())
        throw ValidationError("similarity csv: table and representations disagree");
    std::ostringstream out;
    out << "situation";
    for (const auto& key : table.keys) out << ',' << key_to_string(key, schema);
    out << '\n';
    char buf[40];
    for (size_t i = 0; i < reps.size(); ++i) {
        out << key_to_string(table.keys[i], schema);
        for (size_t j = 0; j < reps.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.10g", situation_similarity(reps[i], reps[j]));
            out << ',' << buf;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace cbpf
