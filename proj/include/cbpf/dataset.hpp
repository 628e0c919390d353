#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cbpf/error.hpp"

namespace cbpf {

struct RatingScale {
    double min = 1.0;
    double max = 5.0;

    double span() const { return max - min; }
    double clamp(double r) const { return r < min ? min : (r > max ? max : r); }
    bool contains(double r) const { return r >= min && r <= max; }
};

// One context factor (e.g. "time") and its possible conditions
// (e.g. "morning", "evening").
struct ContextFactorSpec {
    std::string name;
    std::vector<std::string> conditions;
};

// Column layout and context vocabulary of a delimited rating file. Call
// finalize() after filling the fields; it validates and builds the
// condition index maps.
class DatasetSchema {
public:
    std::string user_column = "user";
    std::string item_column = "item";
    std::string rating_column = "rating";
    RatingScale rating_scale;
    std::vector<ContextFactorSpec> factors;
    std::vector<std::string> item_attributes;
    std::vector<std::string> user_attributes;
    std::string missing_token = "NA";
    char delimiter = ',';

    void finalize();

    int factor_count() const { return static_cast<int>(factors.size()); }
    int condition_count() const { return total_conditions_; }

    // Global index of the first condition of a factor.
    int condition_offset(int factor) const { return offsets_[factor]; }

    // Global condition index for (factor, value); -1 if the value is not a
    // declared condition of that factor.
    int condition_index(int factor, const std::string& value) const;

    // (factor index, index within factor) owning a global condition index.
    std::pair<int, int> factor_of(int condition) const { return owner_[condition]; }

    const std::string& condition_name(int condition) const;
    int factor_index(const std::string& name) const; // -1 if unknown

private:
    int total_conditions_ = 0;
    std::vector<int> offsets_;
    std::vector<std::pair<int, int>> owner_;
    std::vector<std::unordered_map<std::string, int>> value_index_;
    std::unordered_map<std::string, int> factor_index_;
};

// One factor entry per position: condition index within the factor,
// -1 when the factor value is unknown.
using SituationKey = std::vector<int16_t>;

// One rating event with its binarized context.
struct ContextualObservation {
    int32_t user = -1;
    int32_t item = -1;
    double rating = 0.0;
    std::vector<uint8_t> conditions;    // length n, one-hot per known factor
    std::vector<int32_t> known_factors; // ascending factor indices
};

// Dense id interning; names keep first-seen order.
struct IdIndex {
    std::vector<std::string> names;
    std::unordered_map<std::string, int32_t> index;

    int32_t intern(const std::string& name);
    int32_t find(const std::string& name) const;
    int32_t size() const { return static_cast<int32_t>(names.size()); }
};

// entity dense id -> attribute name -> value; missing values are absent keys
using AttributeRow = std::unordered_map<std::string, std::string>;
using AttributeTable = std::vector<AttributeRow>;

struct Dataset {
    DatasetSchema schema;
    std::vector<ContextualObservation> observations;
    IdIndex users;
    IdIndex items;
    AttributeTable item_attributes;
    AttributeTable user_attributes;
    std::vector<SituationKey> situation_keys; // parallel to observations

    size_t size() const { return observations.size(); }
    const SituationKey& situation_key(size_t obs) const { return situation_keys[obs]; }

    // Rebuilds situation_keys from the observations; load_dataset and the
    // synthetic generator call this.
    void rebuild_situation_keys();
};

Dataset load_dataset(const std::string& path, const DatasetSchema& schema);

// 0..size-1, the full-dataset observation pool.
std::vector<int32_t> all_indices(const Dataset& d);

// factor name -> condition name; a factor absent from the map, mapped to an
// empty string, or mapped to the schema's missing token counts as unknown.
std::pair<std::vector<uint8_t>, std::vector<int32_t>>
binarize_situation(const std::unordered_map<std::string, std::string>& factor_values,
                   const DatasetSchema& schema);

// Inverse of binarize_situation for valid inputs: known factors only.
std::unordered_map<std::string, std::string>
decode_situation(const std::vector<uint8_t>& bits, const std::vector<int32_t>& known_factors,
                 const DatasetSchema& schema);

SituationKey key_of(const ContextualObservation& obs, const DatasetSchema& schema);
std::string key_to_string(const SituationKey& key, const DatasetSchema& schema);

// Condition bits and known-factor list equivalent to a key.
std::pair<std::vector<uint8_t>, std::vector<int32_t>>
key_to_bits(const SituationKey& key, const DatasetSchema& schema);

struct StatsReport {
    long ratings = 0;
    int users = 0;
    int items = 0;
    std::optional<double> rating_mean;
    std::optional<double> rating_median;
    std::optional<double> rating_stddev;
    double sparsity = 0.0; // 1 - ratings / (users * items)
    int context_factors = 0;
    int context_conditions = 0;
    int item_attribute_count = 0;
    int user_attribute_count = 0;

    std::string to_text() const;
    std::string to_csv() const;
};

StatsReport dataset_stats(const Dataset& d);

} // namespace cbpf
