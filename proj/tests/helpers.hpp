#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cbpf/dataset.hpp"
#include "cbpf/rng.hpp"

namespace testutil {

// Scratch directory wiped per construction site; files live under a unique
// subtree so suites cannot collide.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "cbpf_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
    return path.string();
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Random contextual dataset with integer ratings on the schema scale.
// unknown_prob controls per-factor missingness.
inline cbpf::Dataset random_dataset(cbpf::Rng& rng, int users, int items, int factors,
                                    int conditions_per_factor, int observations,
                                    double unknown_prob = 0.2) {
    cbpf::Dataset d;
    for (int f = 0; f < factors; ++f) {
        cbpf::ContextFactorSpec spec;
        spec.name = "f" + std::to_string(f);
        for (int c = 0; c < conditions_per_factor; ++c)
            spec.conditions.push_back("f" + std::to_string(f) + "v" + std::to_string(c));
        d.schema.factors.push_back(std::move(spec));
    }
    d.schema.finalize();

    for (int u = 0; u < users; ++u) d.users.intern("u" + std::to_string(u));
    for (int i = 0; i < items; ++i) d.items.intern("i" + std::to_string(i));

    const int total = d.schema.condition_count();
    for (int n = 0; n < observations; ++n) {
        cbpf::ContextualObservation obs;
        obs.user = static_cast<int32_t>(rng.below(users));
        obs.item = static_cast<int32_t>(rng.below(items));
        obs.rating = 1.0 + static_cast<double>(rng.below(5));
        obs.conditions.assign(total, 0);
        for (int f = 0; f < factors; ++f) {
            if (rng.uniform01() < unknown_prob) continue;
            obs.conditions[d.schema.condition_offset(f) +
                           static_cast<int>(rng.below(conditions_per_factor))] = 1;
            obs.known_factors.push_back(f);
        }
        d.observations.push_back(std::move(obs));
    }
    d.rebuild_situation_keys();
    return d;
}

// Fixed 2-user 2-item table interpolated exactly by the damped-bias model
// at damping 0: mu 3.5, user devs -0.5/+0.5, item devs +1/-1.
inline cbpf::Dataset two_by_two_dataset() {
    cbpf::Dataset d;
    d.schema.factors.push_back({"time", {"day", "night"}});
    d.schema.finalize();
    d.users.intern("u1");
    d.users.intern("u2");
    d.items.intern("i1");
    d.items.intern("i2");
    auto add = [&](int32_t u, int32_t i, double r, int cond) {
        cbpf::ContextualObservation obs;
        obs.user = u;
        obs.item = i;
        obs.rating = r;
        obs.conditions = {0, 0};
        obs.conditions[cond] = 1;
        obs.known_factors = {0};
        d.observations.push_back(std::move(obs));
    };
    add(0, 0, 4.0, 0);
    add(0, 1, 2.0, 1);
    add(1, 0, 5.0, 0);
    add(1, 1, 3.0, 1);
    d.rebuild_situation_keys();
    return d;
}

} // namespace testutil
