#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cbpf/dataset.hpp"

namespace cbpf {

enum class EntityKind { item, user };

struct ClusterAssignment {
    EntityKind entity_kind = EntityKind::item;
    std::unordered_map<int32_t, int32_t> clusters; // dense entity id -> cluster
    int32_t k = 0;
    std::optional<int32_t> fallback_cluster; // holds entities without usable attributes

    int32_t cluster_of(int32_t id) const {
        auto it = clusters.find(id);
        return it == clusters.end() ? -1 : it->second;
    }

    std::string to_csv(const IdIndex& ids) const;
};

// Fraction of attributes, comparable in both rows, whose values differ;
// 1 when no attribute is comparable. Symmetric, in [0, 1].
double gower_distance(const AttributeRow& a, const AttributeRow& b,
                      const std::vector<std::string>& attributes);

// Full symmetric pairwise matrix, row-major n x n.
std::vector<double> gower_matrix(const std::vector<const AttributeRow*>& rows,
                                 const std::vector<std::string>& attributes,
                                 int workers = 0);
std::vector<double> gower_matrix_serial(const std::vector<const AttributeRow*>& rows,
                                        const std::vector<std::string>& attributes);

// Bottom-up agglomerative clustering, average linkage over gower_distance.
// The dendrogram is cut at k when given, otherwise at the k in [2, 10] with
// the best mean silhouette. Entities with no usable attribute values land in
// a separate fallback cluster appended after the cut clusters.
ClusterAssignment hierarchical_cluster(const AttributeTable& table, EntityKind kind,
                                       const std::vector<std::string>& attributes,
                                       std::optional<int> k = {}, int workers = 0);

// One cluster per distinct value of a single attribute (values in sorted
// order); missing values form a fallback cluster.
ClusterAssignment single_attribute_clusters(const AttributeTable& table, EntityKind kind,
                                            const std::string& attribute);

// Extends an assignment so every entity id in [0, entity_count) has a
// cluster, adding uncovered ids to the fallback cluster (created if needed).
ClusterAssignment complete_assignment(ClusterAssignment assignment, int32_t entity_count);

// Mean silhouette of a labeled partition over a distance matrix.
double mean_silhouette(const std::vector<double>& dist, const std::vector<int32_t>& labels,
                       int32_t k);

} // namespace cbpf
