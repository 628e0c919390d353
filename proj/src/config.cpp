#include "cbpf/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "cbpf/error.hpp"

namespace cbpf {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open config file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path, 0, e.what());
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where, const std::string& path) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ValidationError(path + ": unknown key \"" + key + "\" in " + where);
}

std::string resolve(const std::string& config_path, const std::string& ref) {
    std::filesystem::path p(ref);
    if (p.is_absolute()) return ref;
    return (std::filesystem::path(config_path).parent_path() / p).string();
}

RuleKind parse_rule_kind(const std::string& s, const std::string& path) {
    if (s == "threshold_bins") return RuleKind::threshold_bins;
    if (s == "interval_bins") return RuleKind::interval_bins;
    if (s == "frequency_group") return RuleKind::frequency_group;
    if (s == "passthrough") return RuleKind::passthrough;
    if (s == "drop") return RuleKind::drop;
    throw ValidationError(path + ": unknown discretization kind \"" + s + "\"");
}

std::vector<DiscretizationRule> parse_rules(const json& arr, const std::string& path) {
    std::vector<DiscretizationRule> rules;
    for (const auto& j : arr) {
        check_keys(j, {"attribute", "kind", "edges", "labels", "interval_width",
                       "min_frequency"},
                   "discretization rule", path);
        DiscretizationRule r;
        r.attribute = j.at("attribute").get<std::string>();
        r.kind = parse_rule_kind(j.at("kind").get<std::string>(), path);
        if (j.contains("edges")) r.edges = j["edges"].get<std::vector<double>>();
        if (j.contains("labels")) r.labels = j["labels"].get<std::vector<std::string>>();
        if (j.contains("interval_width")) r.interval_width = j["interval_width"].get<double>();
        if (j.contains("min_frequency")) r.min_frequency = j["min_frequency"].get<double>();
        r.validate();
        rules.push_back(std::move(r));
    }
    return rules;
}

ClusteringConfig parse_clustering(const json& j, const std::string& path) {
    check_keys(j, {"method", "k", "attribute"}, "clustering", path);
    ClusteringConfig cfg;
    std::string method = j.value("method", "none");
    if (method == "none")
        cfg.method = ClusteringConfig::Method::none;
    else if (method == "hierarchical")
        cfg.method = ClusteringConfig::Method::hierarchical;
    else if (method == "single_attribute")
        cfg.method = ClusteringConfig::Method::single_attribute;
    else
        throw ValidationError(path + ": unknown clustering method \"" + method + "\"");
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("attribute")) cfg.attribute = j["attribute"].get<std::string>();
    if (cfg.method == ClusteringConfig::Method::single_attribute && cfg.attribute.empty())
        throw ValidationError(path + ": single_attribute clustering needs an attribute");
    return cfg;
}

MfHyperparams parse_mf(const json& j, MfHyperparams base, const std::string& path) {
    check_keys(j, {"factors", "learning_rate", "regularization", "epochs", "init_scale"},
               "mf block", path);
    if (j.contains("factors")) base.factors = j["factors"].get<int>();
    if (j.contains("learning_rate")) base.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("regularization")) base.regularization = j["regularization"].get<double>();
    if (j.contains("epochs")) base.epochs = j["epochs"].get<int>();
    if (j.contains("init_scale")) base.init_scale = j["init_scale"].get<double>();
    base.validate();
    return base;
}

RatingScale parse_scale(const json& j, const std::string& path) {
    auto arr = j.get<std::vector<double>>();
    if (arr.size() != 2 || !(arr[0] < arr[1]))
        throw ValidationError(path + ": rating_scale must be [min, max] with min < max");
    return RatingScale{arr[0], arr[1]};
}

void check_threshold(double t, const std::string& path) {
    if (t < -1.0 || t > 1.0)
        throw ValidationError(path + ": threshold must lie in [-1, 1]");
}

} // namespace

SchemaConfig load_schema_config(const std::string& path) {
    json j = load_json(path);
    try {
        check_keys(j,
                   {"delimiter", "missing_token", "columns", "rating_scale", "factors",
                    "item_attributes", "user_attributes", "discretization", "clustering"},
                   "schema config", path);
        SchemaConfig cfg;
        DatasetSchema& s = cfg.schema;
        if (j.contains("delimiter")) {
            std::string delim = j["delimiter"].get<std::string>();
            if (delim.size() != 1)
                throw ValidationError(path + ": delimiter must be one character");
            s.delimiter = delim[0];
        }
        if (j.contains("missing_token")) s.missing_token = j["missing_token"].get<std::string>();
        if (j.contains("columns")) {
            const json& c = j["columns"];
            check_keys(c, {"user", "item", "rating"}, "columns", path);
            if (c.contains("user")) s.user_column = c["user"].get<std::string>();
            if (c.contains("item")) s.item_column = c["item"].get<std::string>();
            if (c.contains("rating")) s.rating_column = c["rating"].get<std::string>();
        }
        if (j.contains("rating_scale")) s.rating_scale = parse_scale(j["rating_scale"], path);
        for (const auto& f : j.value("factors", json::array())) {
            check_keys(f, {"name", "conditions"}, "factor", path);
            ContextFactorSpec spec;
            spec.name = f.at("name").get<std::string>();
            spec.conditions = f.at("conditions").get<std::vector<std::string>>();
            s.factors.push_back(std::move(spec));
        }
        if (j.contains("item_attributes"))
            s.item_attributes = j["item_attributes"].get<std::vector<std::string>>();
        if (j.contains("user_attributes"))
            s.user_attributes = j["user_attributes"].get<std::vector<std::string>>();
        if (j.contains("discretization")) {
            const json& d = j["discretization"];
            check_keys(d, {"item", "user"}, "discretization", path);
            if (d.contains("item")) cfg.item_rules = parse_rules(d["item"], path);
            if (d.contains("user")) cfg.user_rules = parse_rules(d["user"], path);
        }
        if (j.contains("clustering")) {
            const json& c = j["clustering"];
            check_keys(c, {"item", "user"}, "clustering", path);
            if (c.contains("item")) cfg.item_clustering = parse_clustering(c["item"], path);
            if (c.contains("user")) cfg.user_clustering = parse_clustering(c["user"], path);
        }
        s.finalize();
        return cfg;
    } catch (const json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
}

DatasetRef load_dataset_ref(const std::string& path) {
    json j = load_json(path);
    try {
        DatasetRef ref;
        ref.dataset_path = resolve(path, j.at("dataset").get<std::string>());
        ref.schema_path = resolve(path, j.at("schema").get<std::string>());
        return ref;
    } catch (const json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    json j = load_json(path);
    try {
        check_keys(j,
                   {"dataset", "schema", "systems", "folds", "repetitions", "seed", "workers",
                    "alpha", "dump_errors", "output_dir", "mf", "threshold", "min_local_size",
                    "dspf_beta", "unknown_as_zero", "influence_min_support"},
                   "experiment config", path);
        ExperimentConfig cfg;
        cfg.dataset_path = resolve(path, j.at("dataset").get<std::string>());
        cfg.schema_path = resolve(path, j.at("schema").get<std::string>());
        cfg.folds = j.value("folds", cfg.folds);
        cfg.repetitions = j.value("repetitions", cfg.repetitions);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.workers = j.value("workers", cfg.workers);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.dump_errors = j.value("dump_errors", cfg.dump_errors);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        if (cfg.folds < 2) throw ValidationError(path + ": folds must be at least 2");
        if (cfg.repetitions < 1)
            throw ValidationError(path + ": repetitions must be positive");

        MfHyperparams mf_defaults;
        if (j.contains("mf")) mf_defaults = parse_mf(j["mf"], mf_defaults, path);
        double threshold = j.value("threshold", 0.5);
        check_threshold(threshold, path);
        int min_local_size = j.value("min_local_size", 10);
        double dspf_beta = j.value("dspf_beta", 5.0);
        bool unknown_as_zero = j.value("unknown_as_zero", false);
        int influence_min_support = j.value("influence_min_support", 2);
        if (influence_min_support < 2)
            throw ValidationError(path + ": influence_min_support must be at least 2");

        if (!j.contains("systems") || !j["systems"].is_array() || j["systems"].empty())
            throw ValidationError(path + ": systems must be a non-empty array");
        for (const auto& entry : j["systems"]) {
            SystemSpec spec;
            if (entry.is_string()) {
                spec = make_system(entry.get<std::string>());
            } else {
                check_keys(entry,
                           {"name", "threshold", "strategy", "min_local_size", "dspf_beta",
                            "unknown_as_zero", "influence_min_support", "mf"},
                           "system entry", path);
                spec = make_system(entry.at("name").get<std::string>());
            }
            spec.mf = mf_defaults;
            spec.threshold = threshold;
            spec.min_local_size = min_local_size;
            spec.dspf_beta = dspf_beta;
            spec.unknown_as_zero = unknown_as_zero;
            spec.influence_min_support = influence_min_support;
            if (entry.is_object()) {
                if (entry.contains("threshold")) {
                    spec.threshold = entry["threshold"].get<double>();
                    check_threshold(spec.threshold, path);
                }
                if (entry.contains("strategy")) {
                    std::string strat = entry["strategy"].get<std::string>();
                    if (strat == "aggregation")
                        spec.strategy = RepresentationStrategy::aggregation;
                    else if (strat == "concatenation")
                        spec.strategy = RepresentationStrategy::concatenation;
                    else
                        throw ValidationError(path + ": unknown strategy \"" + strat + "\"");
                }
                if (entry.contains("min_local_size"))
                    spec.min_local_size = entry["min_local_size"].get<int>();
                if (entry.contains("dspf_beta"))
                    spec.dspf_beta = entry["dspf_beta"].get<double>();
                if (entry.contains("unknown_as_zero"))
                    spec.unknown_as_zero = entry["unknown_as_zero"].get<bool>();
                if (entry.contains("influence_min_support")) {
                    spec.influence_min_support = entry["influence_min_support"].get<int>();
                    if (spec.influence_min_support < 2)
                        throw ValidationError(path +
                                              ": influence_min_support must be at least 2");
                }
                if (entry.contains("mf")) spec.mf = parse_mf(entry["mf"], spec.mf, path);
            }
            if (spec.min_local_size < 0)
                throw ValidationError(path + ": min_local_size must be non-negative");
            if (spec.dspf_beta < 0)
                throw ValidationError(path + ": dspf_beta must be non-negative");
            cfg.systems.push_back(std::move(spec));
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
}

SynthJob load_synth_config(const std::string& path) {
    json j = load_json(path);
    try {
        check_keys(j,
                   {"users", "items", "factors", "conditions_per_factor", "item_clusters",
                    "ratings", "effect_magnitude", "noise_sigma", "base_mean",
                    "user_bias_sigma", "item_bias_sigma", "unknown_factor_prob",
                    "rating_scale", "seed", "output"},
                   "synth config", path);
        SynthJob job;
        SynthParams& p = job.params;
        p.users = j.value("users", p.users);
        p.items = j.value("items", p.items);
        p.factors = j.value("factors", p.factors);
        p.conditions_per_factor = j.value("conditions_per_factor", p.conditions_per_factor);
        p.item_clusters = j.value("item_clusters", p.item_clusters);
        p.ratings = j.value("ratings", p.ratings);
        p.effect_magnitude = j.value("effect_magnitude", p.effect_magnitude);
        p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
        p.base_mean = j.value("base_mean", p.base_mean);
        p.user_bias_sigma = j.value("user_bias_sigma", p.user_bias_sigma);
        p.item_bias_sigma = j.value("item_bias_sigma", p.item_bias_sigma);
        p.unknown_factor_prob = j.value("unknown_factor_prob", p.unknown_factor_prob);
        if (j.contains("rating_scale")) p.scale = parse_scale(j["rating_scale"], path);
        p.seed = j.value("seed", p.seed);
        if (j.contains("output")) job.output_dir = j["output"].get<std::string>();
        p.validate();
        return job;
    } catch (const json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
}

std::optional<ClusterAssignment> build_clusters(Dataset& d, EntityKind kind,
                                                const SchemaConfig& cfg, int workers) {
    const ClusteringConfig& cc =
        kind == EntityKind::item ? cfg.item_clustering : cfg.user_clustering;
    if (cc.method == ClusteringConfig::Method::none) return std::nullopt;

    AttributeTable& table = kind == EntityKind::item ? d.item_attributes : d.user_attributes;
    const auto& rules = kind == EntityKind::item ? cfg.item_rules : cfg.user_rules;
    const auto& declared =
        kind == EntityKind::item ? cfg.schema.item_attributes : cfg.schema.user_attributes;

    table = apply_discretization(table, rules);
    const int32_t entities = kind == EntityKind::item ? d.items.size() : d.users.size();

    ClusterAssignment assignment;
    if (cc.method == ClusteringConfig::Method::single_attribute) {
        assignment = single_attribute_clusters(table, kind, cc.attribute);
    } else {
        auto attrs = kept_attributes(declared, rules);
        if (attrs.empty())
            throw ValidationError("clustering: no attributes left after discretization");
        assignment = hierarchical_cluster(table, kind, attrs, cc.k, workers);
    }
    return complete_assignment(std::move(assignment), entities);
}

} // namespace cbpf
