#include <doctest.h>

#include "cbpf/config.hpp"
#include "cbpf/synth.hpp"
#include "helpers.hpp"

using namespace cbpf;

TEST_SUITE("config") {

TEST_CASE("system registry covers every built-in name") {
    auto names = known_system_names();
    CHECK(names.size() == 11);
    for (const auto& name : names) {
        SystemSpec s = make_system(name);
        CHECK(s.name == name);
    }
    CHECK(make_system("mf").kind == SystemKind::filter_none);
    CHECK(make_system("exact_pf").kind == SystemKind::filter_exact);
    CHECK(make_system("binary_pf").kind == SystemKind::filter_binary);
    CHECK(make_system("dspf_ub").basis == InfluenceBasis::user);
    CHECK(make_system("cbpf_ib").kind == SystemKind::filter_pcc);
    CHECK(make_system("cbpf_ib").strategy == RepresentationStrategy::aggregation);
    CHECK(make_system("cbpf_cib_ag").basis == InfluenceBasis::item_cluster);
    CHECK(make_system("cbpf_cib_ag").strategy == RepresentationStrategy::aggregation);
    CHECK(make_system("cbpf_cib_cn").strategy == RepresentationStrategy::concatenation);
    CHECK(make_system("cbpf_cub_cn").basis == InfluenceBasis::user_cluster);
    CHECK_THROWS_WITH_AS(make_system("cbpf"), doctest::Contains("unknown system"),
                         ValidationError);
}

TEST_CASE("schema config parses every section") {
    auto dir = testutil::scratch_dir("config_schema");
    auto path = testutil::write_file(dir / "schema.json", R"({
        "delimiter": ";",
        "missing_token": "?",
        "columns": {"user": "uid", "item": "movie", "rating": "stars"},
        "rating_scale": [0.5, 10],
        "factors": [
            {"name": "time", "conditions": ["day", "night"]},
            {"name": "mood", "conditions": ["good", "bad"]}
        ],
        "item_attributes": ["genre", "year"],
        "user_attributes": ["age"],
        "discretization": {
            "item": [{"attribute": "year", "kind": "threshold_bins",
                      "edges": [2000], "labels": ["old", "new"]}],
            "user": [{"attribute": "age", "kind": "interval_bins", "interval_width": 10}]
        },
        "clustering": {
            "item": {"method": "hierarchical", "k": 3},
            "user": {"method": "single_attribute", "attribute": "age"}
        }
    })");

    SchemaConfig cfg = load_schema_config(path);
    CHECK(cfg.schema.delimiter == ';');
    CHECK(cfg.schema.missing_token == "?");
    CHECK(cfg.schema.user_column == "uid");
    CHECK(cfg.schema.rating_column == "stars");
    CHECK(cfg.schema.rating_scale.min == 0.5);
    CHECK(cfg.schema.rating_scale.max == 10.0);
    CHECK(cfg.schema.factor_count() == 2);
    CHECK(cfg.schema.condition_index(1, "bad") == 3);
    CHECK(cfg.schema.item_attributes == std::vector<std::string>{"genre", "year"});
    REQUIRE(cfg.item_rules.size() == 1);
    CHECK(cfg.item_rules[0].kind == RuleKind::threshold_bins);
    CHECK(cfg.item_rules[0].labels == std::vector<std::string>{"old", "new"});
    REQUIRE(cfg.user_rules.size() == 1);
    CHECK(cfg.user_rules[0].interval_width == 10.0);
    CHECK(cfg.item_clustering.method == ClusteringConfig::Method::hierarchical);
    CHECK(cfg.item_clustering.k == 3);
    CHECK(cfg.user_clustering.method == ClusteringConfig::Method::single_attribute);
    CHECK(cfg.user_clustering.attribute == "age");
}

TEST_CASE("schema config defaults stay minimal") {
    auto dir = testutil::scratch_dir("config_schema_min");
    auto path = testutil::write_file(dir / "schema.json", "{}");
    SchemaConfig cfg = load_schema_config(path);
    CHECK(cfg.schema.delimiter == ',');
    CHECK(cfg.schema.missing_token == "NA");
    CHECK(cfg.schema.user_column == "user");
    CHECK(cfg.schema.factor_count() == 0);
    CHECK(cfg.item_clustering.method == ClusteringConfig::Method::none);
}

TEST_CASE("schema config rejects malformed input") {
    auto dir = testutil::scratch_dir("config_schema_bad");

    CHECK_THROWS_AS(load_schema_config((dir / "absent.json").string()), ParseError);
    CHECK_THROWS_AS(
        load_schema_config(testutil::write_file(dir / "syntax.json", "{not json")),
        ParseError);
    CHECK_THROWS_WITH_AS(
        load_schema_config(testutil::write_file(dir / "key.json", R"({"folds": 5})")),
        doctest::Contains("unknown key \"folds\""), ValidationError);
    CHECK_THROWS_WITH_AS(
        load_schema_config(testutil::write_file(dir / "delim.json", R"({"delimiter": "ab"})")),
        doctest::Contains("one character"), ValidationError);
    CHECK_THROWS_WITH_AS(
        load_schema_config(
            testutil::write_file(dir / "scale.json", R"({"rating_scale": [5, 1]})")),
        doctest::Contains("min < max"), ValidationError);
    CHECK_THROWS_WITH_AS(
        load_schema_config(testutil::write_file(
            dir / "rule.json",
            R"({"discretization": {"item": [{"attribute": "x", "kind": "median"}]}})")),
        doctest::Contains("unknown discretization kind"), ValidationError);
    CHECK_THROWS_WITH_AS(
        load_schema_config(testutil::write_file(
            dir / "method.json", R"({"clustering": {"item": {"method": "kmeans"}}})")),
        doctest::Contains("unknown clustering method"), ValidationError);
    CHECK_THROWS_WITH_AS(
        load_schema_config(testutil::write_file(
            dir / "attr.json",
            R"({"clustering": {"user": {"method": "single_attribute"}}})")),
        doctest::Contains("needs an attribute"), ValidationError);
    // schema-level validation still applies
    CHECK_THROWS_AS(load_schema_config(testutil::write_file(
                        dir / "dup.json",
                        R"({"factors": [{"name": "a", "conditions": ["x"]},
                                        {"name": "a", "conditions": ["y"]}]})")),
                    ValidationError);
}

TEST_CASE("dataset references resolve relative to the config file") {
    auto dir = testutil::scratch_dir("config_ref");
    auto path = testutil::write_file(dir / "cfg.json",
                                     R"({"dataset": "data/r.csv", "schema": "s.json"})");
    DatasetRef ref = load_dataset_ref(path);
    CHECK(ref.dataset_path == (dir / "data/r.csv").string());
    CHECK(ref.schema_path == (dir / "s.json").string());

    auto abs = testutil::write_file(dir / "abs.json",
                                    R"({"dataset": "/tmp/x.csv", "schema": "/tmp/s.json"})");
    CHECK(load_dataset_ref(abs).dataset_path == "/tmp/x.csv");

    auto missing = testutil::write_file(dir / "missing.json", R"({"dataset": "x"})");
    CHECK_THROWS_AS(load_dataset_ref(missing), ParseError);
}

TEST_CASE("experiment config applies shared defaults and overrides") {
    auto dir = testutil::scratch_dir("config_exp");
    auto path = testutil::write_file(dir / "exp.json", R"({
        "dataset": "r.csv",
        "schema": "s.json",
        "folds": 4,
        "repetitions": 2,
        "seed": 9,
        "workers": 3,
        "alpha": 0.01,
        "dump_errors": true,
        "output_dir": "out",
        "mf": {"factors": 6, "epochs": 30},
        "threshold": 0.25,
        "min_local_size": 5,
        "influence_min_support": 8,
        "systems": [
            "mf",
            "cbpf_ib",
            {"name": "cbpf_ib", "threshold": 0.75, "strategy": "concatenation",
             "min_local_size": 20, "influence_min_support": 3, "mf": {"epochs": 10}},
            {"name": "dspf_ib", "dspf_beta": 2.5}
        ]
    })");

    ExperimentConfig cfg = load_experiment_config(path);
    CHECK(cfg.dataset_path == (dir / "r.csv").string());
    CHECK(cfg.folds == 4);
    CHECK(cfg.repetitions == 2);
    CHECK(cfg.seed == 9);
    CHECK(cfg.workers == 3);
    CHECK(cfg.alpha == 0.01);
    CHECK(cfg.dump_errors);
    CHECK(cfg.output_dir == "out");

    REQUIRE(cfg.systems.size() == 4);
    // shared defaults land on bare names
    CHECK(cfg.systems[0].mf.factors == 6);
    CHECK(cfg.systems[0].mf.epochs == 30);
    CHECK(cfg.systems[1].threshold == 0.25);
    CHECK(cfg.systems[1].min_local_size == 5);
    CHECK(cfg.systems[1].influence_min_support == 8);
    CHECK(cfg.systems[1].strategy == RepresentationStrategy::aggregation);
    // object entries override selectively
    CHECK(cfg.systems[2].threshold == 0.75);
    CHECK(cfg.systems[2].strategy == RepresentationStrategy::concatenation);
    CHECK(cfg.systems[2].min_local_size == 20);
    CHECK(cfg.systems[2].influence_min_support == 3);
    CHECK(cfg.systems[2].mf.epochs == 10);
    CHECK(cfg.systems[2].mf.factors == 6); // inherited from the shared mf block
    CHECK(cfg.systems[3].dspf_beta == 2.5);
    CHECK(cfg.systems[3].mf.factors == 6);
}

TEST_CASE("experiment config rejects contradictions") {
    auto dir = testutil::scratch_dir("config_exp_bad");
    auto base = [&](const std::string& name, const std::string& body) {
        return testutil::write_file(dir / name,
                                    R"({"dataset": "r.csv", "schema": "s.json",)" + body);
    };

    CHECK_THROWS_WITH_AS(load_experiment_config(base("f.json", R"("folds": 1,
                             "systems": ["mf"]})")),
                         doctest::Contains("folds"), ValidationError);
    CHECK_THROWS_WITH_AS(load_experiment_config(base("r.json", R"("repetitions": 0,
                             "systems": ["mf"]})")),
                         doctest::Contains("repetitions"), ValidationError);
    CHECK_THROWS_WITH_AS(load_experiment_config(base("s.json", R"("systems": []})")),
                         doctest::Contains("systems"), ValidationError);
    CHECK_THROWS_WITH_AS(load_experiment_config(base("n.json", R"("systems": ["bogus"]})")),
                         doctest::Contains("unknown system"), ValidationError);
    CHECK_THROWS_WITH_AS(load_experiment_config(base("t.json", R"("threshold": 1.5,
                             "systems": ["mf"]})")),
                         doctest::Contains("threshold"), ValidationError);
    CHECK_THROWS_WITH_AS(
        load_experiment_config(base("t2.json", R"("systems":
                             [{"name": "cbpf_ib", "threshold": -2}]})")),
        doctest::Contains("threshold"), ValidationError);
    CHECK_THROWS_WITH_AS(
        load_experiment_config(base("k.json", R"("systems":
                             [{"name": "mf", "foo": 1}]})")),
        doctest::Contains("unknown key \"foo\""), ValidationError);
    CHECK_THROWS_WITH_AS(load_experiment_config(base("is.json", R"("influence_min_support": 1,
                             "systems": ["mf"]})")),
                         doctest::Contains("influence_min_support"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config(base("m.json", R"("mf": {"factors": 0},
                             "systems": ["mf"]})")),
                    ValidationError);
}

TEST_CASE("synth config fills parameters and validates them") {
    auto dir = testutil::scratch_dir("config_synth");
    auto path = testutil::write_file(dir / "synth.json", R"({
        "users": 30, "items": 10, "factors": 2, "conditions_per_factor": 4,
        "item_clusters": 5, "ratings": 500, "effect_magnitude": 0.8,
        "noise_sigma": 0.1, "rating_scale": [1, 10], "seed": 3,
        "unknown_factor_prob": 0.2, "output": "synth_files"
    })");
    SynthJob job = load_synth_config(path);
    CHECK(job.params.users == 30);
    CHECK(job.params.conditions_per_factor == 4);
    CHECK(job.params.item_clusters == 5);
    CHECK(job.params.effect_magnitude == 0.8);
    CHECK(job.params.scale.max == 10.0);
    CHECK(job.params.unknown_factor_prob == 0.2);
    CHECK(job.output_dir == "synth_files");

    CHECK_THROWS_AS(load_synth_config(testutil::write_file(dir / "bad.json",
                                                           R"({"ratings": 0})")),
                    ValidationError);
}

TEST_CASE("build_clusters follows the configured method") {
    SynthParams p;
    p.users = 10;
    p.items = 12;
    p.factors = 1;
    p.conditions_per_factor = 2;
    p.item_clusters = 3;
    p.ratings = 100;
    p.seed = 5;
    Dataset d = generate_synthetic(p).dataset;

    SchemaConfig cfg;
    cfg.schema = d.schema;

    SUBCASE("none yields no assignment") {
        CHECK(!build_clusters(d, EntityKind::item, cfg, 0).has_value());
    }

    SUBCASE("single attribute groups by the planted cluster id") {
        cfg.item_clustering.method = ClusteringConfig::Method::single_attribute;
        cfg.item_clustering.attribute = "group";
        auto asg = build_clusters(d, EntityKind::item, cfg, 0);
        REQUIRE(asg.has_value());
        CHECK(asg->k >= 1);
        CHECK(asg->k <= 4); // up to 3 planted groups, maybe a fallback
        for (int32_t i = 0; i < d.items.size(); ++i) CHECK(asg->cluster_of(i) >= 0);
        // identical attribute values share a cluster
        for (int32_t i = 0; i < d.items.size(); ++i)
            for (int32_t j = 0; j < d.items.size(); ++j)
                if (d.item_attributes[i].at("group") == d.item_attributes[j].at("group"))
                    CHECK(asg->cluster_of(i) == asg->cluster_of(j));
    }

    SUBCASE("hierarchical clustering consumes discretized attributes") {
        cfg.item_clustering.method = ClusteringConfig::Method::hierarchical;
        cfg.item_clustering.k = 3;
        auto asg = build_clusters(d, EntityKind::item, cfg, 0);
        REQUIRE(asg.has_value());
        CHECK(asg->k == 3);
        for (int32_t i = 0; i < d.items.size(); ++i) CHECK(asg->cluster_of(i) >= 0);
    }

    SUBCASE("dropping every attribute is an error for hierarchical") {
        cfg.item_clustering.method = ClusteringConfig::Method::hierarchical;
        DiscretizationRule drop;
        drop.attribute = "group";
        drop.kind = RuleKind::drop;
        cfg.item_rules = {drop};
        CHECK_THROWS_WITH_AS(build_clusters(d, EntityKind::item, cfg, 0),
                             doctest::Contains("no attributes left"), ValidationError);
    }
}

TEST_CASE("synthetic schema json loads through the config layer") {
    SynthParams p;
    p.users = 8;
    p.items = 6;
    p.factors = 2;
    p.conditions_per_factor = 2;
    p.item_clusters = 2;
    p.ratings = 60;
    p.unknown_factor_prob = 0.25;
    p.seed = 12;
    auto out = generate_synthetic(p);
    auto dir = testutil::scratch_dir("config_synth_roundtrip");
    write_synthetic(out, p, dir.string());

    SchemaConfig cfg = load_schema_config((dir / "schema.json").string());
    CHECK(cfg.schema.factor_count() == 2);
    CHECK(cfg.schema.condition_count() == 4);
    CHECK(cfg.item_clustering.method == ClusteringConfig::Method::single_attribute);
    CHECK(cfg.item_clustering.attribute == "group");

    Dataset loaded = load_dataset((dir / "ratings.csv").string(), cfg.schema);
    CHECK(loaded.size() == out.dataset.size());

    auto clusters = build_clusters(loaded, EntityKind::item, cfg, 0);
    REQUIRE(clusters.has_value());
    CHECK(clusters->k >= 2);
}

} // TEST_SUITE
