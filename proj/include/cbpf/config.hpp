#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbpf/cluster.hpp"
#include "cbpf/discretize.hpp"
#include "cbpf/synth.hpp"
#include "cbpf/systems.hpp"

namespace cbpf {

struct ClusteringConfig {
    enum class Method { none, hierarchical, single_attribute };
    Method method = Method::none;
    std::optional<int> k; // hierarchical only; absent = silhouette auto
    std::string attribute; // single_attribute only
};

// Sidecar describing one dataset file: columns, factors, attribute handling.
struct SchemaConfig {
    DatasetSchema schema;
    std::vector<DiscretizationRule> item_rules;
    std::vector<DiscretizationRule> user_rules;
    ClusteringConfig item_clustering;
    ClusteringConfig user_clustering;
};

SchemaConfig load_schema_config(const std::string& path);

// Minimal {dataset, schema} pair; any config carrying both keys works, so
// stats runs against an experiment config too.
struct DatasetRef {
    std::string dataset_path;
    std::string schema_path;
};

DatasetRef load_dataset_ref(const std::string& path);

struct ExperimentConfig {
    std::string dataset_path; // resolved against the config file's directory
    std::string schema_path;
    std::vector<SystemSpec> systems;
    int folds = 5;
    int repetitions = 5;
    uint64_t seed = 42;
    int workers = 0;
    double alpha = 0.05;
    bool dump_errors = false;
    std::string output_dir = "cbpf_out";
};

// Shared defaults (mf block, threshold, min_local_size, dspf_beta,
// unknown_as_zero) apply to every listed system; a system given as an object
// instead of a bare name may override any of them.
ExperimentConfig load_experiment_config(const std::string& path);

struct SynthJob {
    SynthParams params;
    std::string output_dir = "synth_out";
};

SynthJob load_synth_config(const std::string& path);

// Discretizes attributes, then builds the configured assignment. Returns
// nothing when method is none.
std::optional<ClusterAssignment> build_clusters(Dataset& d, EntityKind kind,
                                                const SchemaConfig& cfg, int workers);

} // namespace cbpf
