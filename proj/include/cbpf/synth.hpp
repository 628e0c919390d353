#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbpf/dataset.hpp"

namespace cbpf {

struct SynthParams {
    int users = 200;
    int items = 100;
    int factors = 3;
    int conditions_per_factor = 3;
    int item_clusters = 4;
    int ratings = 8000;
    double effect_magnitude = 1.0;
    double noise_sigma = 0.5;
    double base_mean = 3.0;
    double user_bias_sigma = 0.3;
    double item_bias_sigma = 0.3;
    double unknown_factor_prob = 0.0;
    RatingScale scale;
    uint64_t seed = 42;

    void validate() const;
};

// What the generator planted, for recovery checks.
struct SynthTruth {
    std::vector<int> item_cluster;            // per item
    std::vector<std::vector<double>> effect;  // condition x cluster, +-magnitude
};

struct SynthOutput {
    Dataset dataset;
    SynthTruth truth;
};

// Ratings are base_mean + user bias + item bias + the planted effect of each
// known condition on the item's cluster + gaussian noise, clamped into
// scale. Items carry their cluster id as attribute "group". Byte-identical
// across runs for a fixed seed.
SynthOutput generate_synthetic(const SynthParams& p);

// Writes ratings.csv, schema.json (loadable by the config layer, clustering
// wired to the "group" attribute), and truth.csv under dir.
void write_synthetic(const SynthOutput& out, const SynthParams& p, const std::string& dir);

} // namespace cbpf
