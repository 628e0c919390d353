#include "cbpf/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cbpf {

double gower_distance(const AttributeRow& a, const AttributeRow& b,
                      const std::vector<std::string>& attributes) {
    int comparable = 0;
    int mismatches = 0;
    for (const auto& attr : attributes) {
        auto ia = a.find(attr);
        if (ia == a.end()) continue;
        auto ib = b.find(attr);
        if (ib == b.end()) continue;
        ++comparable;
        if (ia->second != ib->second) ++mismatches;
    }
    if (comparable == 0) return 1.0;
    return static_cast<double>(mismatches) / comparable;
}

std::vector<double> gower_matrix_serial(const std::vector<const AttributeRow*>& rows,
                                        const std::vector<std::string>& attributes) {
    const int n = static_cast<int>(rows.size());
    std::vector<double> dist(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            dist[static_cast<size_t>(i) * n + j] = gower_distance(*rows[i], *rows[j], attributes);
    return dist;
}

std::vector<double> gower_matrix(const std::vector<const AttributeRow*>& rows,
                                 const std::vector<std::string>& attributes, int workers) {
    const int n = static_cast<int>(rows.size());
    std::vector<double> dist(static_cast<size_t>(n) * n);
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#endif
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            dist[static_cast<size_t>(i) * n + j] = gower_distance(*rows[i], *rows[j], attributes);
    return dist;
}

namespace {

// Merge history of the bottom-up pass: pairs of slot indices, lower slot
// absorbs the higher one.
struct MergeStep {
    int a;
    int b;
};

std::vector<MergeStep> agglomerate(std::vector<double> dist, int n) {
    std::vector<MergeStep> merges;
    if (n < 2) return merges;
    std::vector<int> size(n, 1);
    std::vector<char> active(n, 1);
    auto d = [&](int i, int j) -> double& { return dist[static_cast<size_t>(i) * n + j]; };

    for (int step = 0; step < n - 1; ++step) {
        int best_i = -1, best_j = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (d(i, j) < best) { // ties keep the lexicographically first pair
                    best = d(i, j);
                    best_i = i;
                    best_j = j;
                }
            }
        }
        // average linkage: weight by cluster sizes
        for (int x = 0; x < n; ++x) {
            if (!active[x] || x == best_i || x == best_j) continue;
            double merged = (size[best_i] * d(best_i, x) + size[best_j] * d(best_j, x)) /
                            (size[best_i] + size[best_j]);
            d(best_i, x) = merged;
            d(x, best_i) = merged;
        }
        size[best_i] += size[best_j];
        active[best_j] = 0;
        merges.push_back({best_i, best_j});
    }
    return merges;
}

// Labels after applying the first (n - k) merges, renumbered by first
// appearance so the result is deterministic.
std::vector<int32_t> cut_dendrogram(const std::vector<MergeStep>& merges, int n, int k) {
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int m = 0; m < n - k; ++m) parent[find(merges[m].b)] = find(merges[m].a);

    std::vector<int32_t> labels(n);
    std::unordered_map<int, int32_t> renumber;
    for (int i = 0; i < n; ++i) {
        int root = find(i);
        auto it = renumber.find(root);
        if (it == renumber.end())
            it = renumber.emplace(root, static_cast<int32_t>(renumber.size())).first;
        labels[i] = it->second;
    }
    return labels;
}

} // namespace

double mean_silhouette(const std::vector<double>& dist, const std::vector<int32_t>& labels,
                       int32_t k) {
    const int n = static_cast<int>(labels.size());
    if (k < 2 || n < 2) return 0.0;
    std::vector<int> cluster_size(k, 0);
    for (int32_t c : labels) ++cluster_size[c];

    double total = 0.0;
    std::vector<double> sum_to(k);
    for (int i = 0; i < n; ++i) {
        std::fill(sum_to.begin(), sum_to.end(), 0.0);
        for (int j = 0; j < n; ++j)
            if (j != i) sum_to[labels[j]] += dist[static_cast<size_t>(i) * n + j];

        int own = labels[i];
        if (cluster_size[own] <= 1) continue; // silhouette of a singleton is 0
        double a = sum_to[own] / (cluster_size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c)
            if (c != own && cluster_size[c] > 0) b = std::min(b, sum_to[c] / cluster_size[c]);
        if (!std::isfinite(b)) continue;
        double s = (b - a) / std::max(a, b);
        total += s;
    }
    return total / n;
}

ClusterAssignment hierarchical_cluster(const AttributeTable& table, EntityKind kind,
                                       const std::vector<std::string>& attributes,
                                       std::optional<int> k, int workers) {
    if (table.empty()) throw ValidationError("hierarchical_cluster: empty attribute table");

    std::vector<int32_t> clustered; // ids with at least one usable attribute value
    std::vector<int32_t> missing;
    for (int32_t id = 0; id < static_cast<int32_t>(table.size()); ++id) {
        bool usable = std::any_of(attributes.begin(), attributes.end(),
                                  [&](const auto& a) { return table[id].count(a) > 0; });
        (usable ? clustered : missing).push_back(id);
    }

    const int n = static_cast<int>(clustered.size());
    if (k && (*k < 1 || *k > static_cast<int>(table.size())))
        throw ValidationError("hierarchical_cluster: k=" + std::to_string(*k) +
                              " out of range for " + std::to_string(table.size()) + " entities");

    ClusterAssignment out;
    out.entity_kind = kind;

    int cut_k = 0;
    if (n > 0) {
        std::vector<const AttributeRow*> rows;
        rows.reserve(n);
        for (int32_t id : clustered) rows.push_back(&table[id]);
        auto dist = gower_matrix(rows, attributes, workers);
        auto merges = agglomerate(dist, n);

        if (k) {
            cut_k = std::min(*k, n);
        } else if (n <= 2) {
            cut_k = n;
        } else {
            double best = -std::numeric_limits<double>::infinity();
            for (int cand = 2; cand <= std::min(10, n); ++cand) {
                auto labels = cut_dendrogram(merges, n, cand);
                double s = mean_silhouette(dist, labels, cand);
                if (s > best + 1e-12) {
                    best = s;
                    cut_k = cand;
                }
            }
        }
        auto labels = cut_dendrogram(merges, n, cut_k);
        for (int i = 0; i < n; ++i) out.clusters.emplace(clustered[i], labels[i]);
    }

    out.k = cut_k;
    if (!missing.empty()) {
        out.fallback_cluster = out.k;
        for (int32_t id : missing) out.clusters.emplace(id, *out.fallback_cluster);
        ++out.k;
    }
    if (out.k == 0) out.k = 1;
    return out;
}

ClusterAssignment single_attribute_clusters(const AttributeTable& table, EntityKind kind,
                                            const std::string& attribute) {
    ClusterAssignment out;
    out.entity_kind = kind;

    std::map<std::string, std::vector<int32_t>> by_value; // sorted values -> stable indices
    std::vector<int32_t> missing;
    for (int32_t id = 0; id < static_cast<int32_t>(table.size()); ++id) {
        auto it = table[id].find(attribute);
        if (it == table[id].end())
            missing.push_back(id);
        else
            by_value[it->second].push_back(id);
    }

    int32_t next = 0;
    for (const auto& [value, ids] : by_value) {
        for (int32_t id : ids) out.clusters.emplace(id, next);
        ++next;
    }
    out.k = next;
    if (!missing.empty()) {
        out.fallback_cluster = out.k;
        for (int32_t id : missing) out.clusters.emplace(id, *out.fallback_cluster);
        ++out.k;
    }
    if (out.k == 0) out.k = 1;
    return out;
}

ClusterAssignment complete_assignment(ClusterAssignment assignment, int32_t entity_count) {
    bool needs_fallback = false;
    for (int32_t id = 0; id < entity_count; ++id)
        if (!assignment.clusters.count(id)) {
            needs_fallback = true;
            break;
        }
    if (!needs_fallback) return assignment;

    if (!assignment.fallback_cluster) {
        assignment.fallback_cluster = assignment.k;
        ++assignment.k;
    }
    for (int32_t id = 0; id < entity_count; ++id)
        if (!assignment.clusters.count(id))
            assignment.clusters.emplace(id, *assignment.fallback_cluster);
    return assignment;
}

std::string ClusterAssignment::to_csv(const IdIndex& ids) const {
    std::ostringstream out;
    out << "entity,cluster\n";
    for (int32_t id = 0; id < ids.size(); ++id) {
        auto it = clusters.find(id);
        if (it == clusters.end()) continue;
        out << ids.names[id] << ',' << it->second << '\n';
    }
    return out.str();
}

} // namespace cbpf
