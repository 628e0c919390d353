#include "cbpf/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cbpf/error.hpp"
#include "cbpf/rng.hpp"

namespace cbpf {

void SynthParams::validate() const {
    if (users <= 0 || items <= 0) throw ValidationError("synth: users and items must be positive");
    if (factors <= 0) throw ValidationError("synth: factors must be positive");
    if (conditions_per_factor <= 0)
        throw ValidationError("synth: conditions_per_factor must be positive");
    if (item_clusters <= 0 || item_clusters > items)
        throw ValidationError("synth: item_clusters must be in [1, items]");
    if (ratings <= 0) throw ValidationError("synth: ratings must be positive");
    if (effect_magnitude < 0.0) throw ValidationError("synth: effect_magnitude must be non-negative");
    if (noise_sigma < 0.0 || user_bias_sigma < 0.0 || item_bias_sigma < 0.0)
        throw ValidationError("synth: sigmas must be non-negative");
    if (unknown_factor_prob < 0.0 || unknown_factor_prob >= 1.0)
        throw ValidationError("synth: unknown_factor_prob must be in [0, 1)");
    if (!(scale.min < scale.max)) throw ValidationError("synth: bad rating scale");
}

SynthOutput generate_synthetic(const SynthParams& p) {
    p.validate();

    SynthOutput out;
    Dataset& d = out.dataset;
    d.schema.rating_scale = p.scale;
    for (int f = 0; f < p.factors; ++f) {
        ContextFactorSpec spec;
        spec.name = "f" + std::to_string(f);
        for (int c = 0; c < p.conditions_per_factor; ++c)
            spec.conditions.push_back(spec.name + "v" + std::to_string(c));
        d.schema.factors.push_back(std::move(spec));
    }
    d.schema.item_attributes = {"group"};
    d.schema.finalize();

    for (int u = 0; u < p.users; ++u) d.users.intern("u" + std::to_string(u));
    for (int i = 0; i < p.items; ++i) d.items.intern("i" + std::to_string(i));

    Rng rng(p.seed);
    out.truth.item_cluster.resize(p.items);
    for (int i = 0; i < p.items; ++i)
        out.truth.item_cluster[i] = static_cast<int>(rng.below(p.item_clusters));

    std::vector<double> user_bias(p.users), item_bias(p.items);
    for (double& b : user_bias) b = rng.gaussian(p.user_bias_sigma);
    for (double& b : item_bias) b = rng.gaussian(p.item_bias_sigma);

    const int total_conditions = d.schema.condition_count();
    out.truth.effect.assign(total_conditions, std::vector<double>(p.item_clusters));
    for (int c = 0; c < total_conditions; ++c)
        for (int g = 0; g < p.item_clusters; ++g)
            out.truth.effect[c][g] =
                rng.below(2) == 0 ? p.effect_magnitude : -p.effect_magnitude;

    d.observations.reserve(p.ratings);
    for (int t = 0; t < p.ratings; ++t) {
        ContextualObservation obs;
        obs.user = static_cast<int32_t>(rng.below(p.users));
        obs.item = static_cast<int32_t>(rng.below(p.items));
        obs.conditions.assign(total_conditions, 0);
        double effect_sum = 0.0;
        const int cluster = out.truth.item_cluster[obs.item];
        for (int f = 0; f < p.factors; ++f) {
            if (p.unknown_factor_prob > 0.0 && rng.uniform01() < p.unknown_factor_prob)
                continue;
            int c = d.schema.condition_offset(f) +
                    static_cast<int>(rng.below(p.conditions_per_factor));
            obs.conditions[c] = 1;
            obs.known_factors.push_back(f);
            effect_sum += out.truth.effect[c][cluster];
        }
        double r = p.base_mean + user_bias[obs.user] + item_bias[obs.item] + effect_sum +
                   rng.gaussian(p.noise_sigma);
        obs.rating = p.scale.clamp(r);
        d.observations.push_back(std::move(obs));
    }

    d.item_attributes.resize(p.items);
    for (int i = 0; i < p.items; ++i)
        d.item_attributes[i]["group"] = std::to_string(out.truth.item_cluster[i]);

    d.rebuild_situation_keys();
    return out;
}

void write_synthetic(const SynthOutput& out, const SynthParams& p, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const Dataset& d = out.dataset;
    const auto& schema = d.schema;

    {
        std::ofstream csv(fs::path(dir) / "ratings.csv");
        if (!csv) throw ValidationError("synth: cannot write ratings.csv under " + dir);
        csv << "user,item,rating";
        for (const auto& f : schema.factors) csv << ',' << f.name;
        csv << ",group\n";
        char buf[32];
        for (size_t n = 0; n < d.size(); ++n) {
            const auto& obs = d.observations[n];
            const auto& key = d.situation_keys[n];
            std::snprintf(buf, sizeof(buf), "%.4f", obs.rating);
            csv << d.users.names[obs.user] << ',' << d.items.names[obs.item] << ',' << buf;
            for (int f = 0; f < schema.factor_count(); ++f) {
                if (key[f] < 0)
                    csv << ',' << schema.missing_token;
                else
                    csv << ',' << schema.factors[f].conditions[key[f]];
            }
            csv << ',' << out.truth.item_cluster[obs.item] << '\n';
        }
    }

    {
        nlohmann::json j;
        j["columns"] = {{"user", "user"}, {"item", "item"}, {"rating", "rating"}};
        j["rating_scale"] = {schema.rating_scale.min, schema.rating_scale.max};
        j["missing_token"] = schema.missing_token;
        j["factors"] = nlohmann::json::array();
        for (const auto& f : schema.factors)
            j["factors"].push_back({{"name", f.name}, {"conditions", f.conditions}});
        j["item_attributes"] = {"group"};
        j["clustering"] = {
            {"item", {{"method", "single_attribute"}, {"attribute", "group"}}}};
        std::ofstream js(fs::path(dir) / "schema.json");
        if (!js) throw ValidationError("synth: cannot write schema.json under " + dir);
        js << j.dump(2) << '\n';
    }

    {
        std::ofstream truth(fs::path(dir) / "truth.csv");
        if (!truth) throw ValidationError("synth: cannot write truth.csv under " + dir);
        truth << "item,cluster\n";
        for (int i = 0; i < p.items; ++i)
            truth << d.items.names[i] << ',' << out.truth.item_cluster[i] << '\n';
        truth << "\ncondition,cluster,effect\n";
        char buf[32];
        for (int c = 0; c < schema.condition_count(); ++c)
            for (int g = 0; g < p.item_clusters; ++g) {
                std::snprintf(buf, sizeof(buf), "%.10g", out.truth.effect[c][g]);
                truth << schema.condition_name(c) << ',' << g << ',' << buf << '\n';
            }
    }
}

} // namespace cbpf
