#include "cbpf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace cbpf {

void DatasetSchema::finalize() {
    if (rating_scale.min >= rating_scale.max)
        throw ValidationError("schema: rating_scale.min must be < rating_scale.max");
    if (user_column.empty() || item_column.empty() || rating_column.empty())
        throw ValidationError("schema: user, item and rating columns are required");

    std::set<std::string> columns{user_column, item_column, rating_column};
    if (columns.size() != 3)
        throw ValidationError("schema: user/item/rating column names must be distinct");
    auto claim = [&columns](const std::string& name, const char* role) {
        if (!columns.insert(name).second)
            throw ValidationError(std::string("schema: duplicate column name '") + name +
                                  "' (" + role + ")");
    };

    offsets_.clear();
    owner_.clear();
    value_index_.clear();
    factor_index_.clear();
    total_conditions_ = 0;

    for (size_t f = 0; f < factors.size(); ++f) {
        const auto& spec = factors[f];
        claim(spec.name, "context factor");
        if (spec.conditions.empty())
            throw ValidationError("schema: factor '" + spec.name + "' has no conditions");
        if (!factor_index_.emplace(spec.name, static_cast<int>(f)).second)
            throw ValidationError("schema: duplicate factor name '" + spec.name + "'");

        offsets_.push_back(total_conditions_);
        std::unordered_map<std::string, int> values;
        for (size_t c = 0; c < spec.conditions.size(); ++c) {
            if (!values.emplace(spec.conditions[c], total_conditions_).second)
                throw ValidationError("schema: factor '" + spec.name +
                                      "' repeats condition '" + spec.conditions[c] + "'");
            owner_.emplace_back(static_cast<int>(f), static_cast<int>(c));
            ++total_conditions_;
        }
        value_index_.push_back(std::move(values));
    }
    for (const auto& a : item_attributes) claim(a, "item attribute");
    for (const auto& a : user_attributes) claim(a, "user attribute");
}

int DatasetSchema::condition_index(int factor, const std::string& value) const {
    const auto& values = value_index_[factor];
    auto it = values.find(value);
    return it == values.end() ? -1 : it->second;
}

const std::string& DatasetSchema::condition_name(int condition) const {
    auto [f, c] = owner_[condition];
    return factors[f].conditions[c];
}

int DatasetSchema::factor_index(const std::string& name) const {
    auto it = factor_index_.find(name);
    return it == factor_index_.end() ? -1 : it->second;
}

int32_t IdIndex::intern(const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    int32_t id = static_cast<int32_t>(names.size());
    names.push_back(name);
    index.emplace(name, id);
    return id;
}

int32_t IdIndex::find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
}

void Dataset::rebuild_situation_keys() {
    situation_keys.clear();
    situation_keys.reserve(observations.size());
    for (const auto& obs : observations) situation_keys.push_back(key_of(obs, schema));
}

std::vector<int32_t> all_indices(const Dataset& d) {
    std::vector<int32_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line, char delim) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

} // namespace

Dataset load_dataset(const std::string& path, const DatasetSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "missing header row");
    auto header = split_row(line, schema.delimiter);

    std::unordered_map<std::string, int> col;
    for (size_t i = 0; i < header.size(); ++i) col.emplace(header[i], static_cast<int>(i));

    auto require = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end())
            throw ParseError(path, 1, "header is missing column '" + name + "'");
        return it->second;
    };

    const int user_col = require(schema.user_column);
    const int item_col = require(schema.item_column);
    const int rating_col = require(schema.rating_column);
    std::vector<int> factor_cols;
    for (const auto& f : schema.factors) factor_cols.push_back(require(f.name));
    std::vector<int> item_attr_cols, user_attr_cols;
    for (const auto& a : schema.item_attributes) item_attr_cols.push_back(require(a));
    for (const auto& a : schema.user_attributes) user_attr_cols.push_back(require(a));

    Dataset d;
    d.schema = schema;
    const int n = schema.condition_count();
    const size_t width = header.size();

    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_row(line, schema.delimiter);
        if (fields.size() != width)
            throw ParseError(path, line_no,
                             "expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(fields.size()));

        ContextualObservation obs;
        obs.user = d.users.intern(fields[user_col]);
        obs.item = d.items.intern(fields[item_col]);

        if (!parse_double(fields[rating_col], obs.rating))
            throw ParseError(path, line_no, "unparseable rating '" + fields[rating_col] + "'");
        if (!schema.rating_scale.contains(obs.rating))
            throw ValidationError(path + ":" + std::to_string(line_no) + ": rating " +
                                  fields[rating_col] + " outside scale [" +
                                  std::to_string(schema.rating_scale.min) + ", " +
                                  std::to_string(schema.rating_scale.max) + "]");

        obs.conditions.assign(n, 0);
        for (int f = 0; f < schema.factor_count(); ++f) {
            const std::string& value = fields[factor_cols[f]];
            if (value.empty() || value == schema.missing_token) continue; // unknown factor
            int c = schema.condition_index(f, value);
            if (c < 0)
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": factor '" + schema.factors[f].name +
                                      "' has no condition '" + value + "'");
            obs.conditions[c] = 1;
            obs.known_factors.push_back(f);
        }

        auto record_attrs = [&](AttributeTable& table, int32_t id,
                                const std::vector<std::string>& names,
                                const std::vector<int>& cols) {
            if (static_cast<size_t>(id) >= table.size()) table.resize(id + 1);
            for (size_t a = 0; a < names.size(); ++a) {
                const std::string& value = fields[cols[a]];
                if (value.empty() || value == schema.missing_token) continue;
                table[id].emplace(names[a], value); // first non-missing value wins
            }
        };
        record_attrs(d.item_attributes, obs.item, schema.item_attributes, item_attr_cols);
        record_attrs(d.user_attributes, obs.user, schema.user_attributes, user_attr_cols);

        d.observations.push_back(std::move(obs));
    }

    d.item_attributes.resize(d.items.size());
    d.user_attributes.resize(d.users.size());
    d.rebuild_situation_keys();
    return d;
}

std::pair<std::vector<uint8_t>, std::vector<int32_t>>
binarize_situation(const std::unordered_map<std::string, std::string>& factor_values,
                   const DatasetSchema& schema) {
    for (const auto& [name, value] : factor_values) {
        if (schema.factor_index(name) < 0)
            throw ValidationError("unknown factor '" + name + "'");
    }
    std::vector<uint8_t> bits(schema.condition_count(), 0);
    std::vector<int32_t> known;
    for (int f = 0; f < schema.factor_count(); ++f) {
        auto it = factor_values.find(schema.factors[f].name);
        if (it == factor_values.end() || it->second.empty() ||
            it->second == schema.missing_token)
            continue;
        int c = schema.condition_index(f, it->second);
        if (c < 0)
            throw ValidationError("factor '" + schema.factors[f].name +
                                  "' has no condition '" + it->second + "'");
        bits[c] = 1;
        known.push_back(f);
    }
    return {std::move(bits), std::move(known)};
}

std::unordered_map<std::string, std::string>
decode_situation(const std::vector<uint8_t>& bits, const std::vector<int32_t>& known_factors,
                 const DatasetSchema& schema) {
    std::unordered_map<std::string, std::string> out;
    for (int32_t f : known_factors) {
        int off = schema.condition_offset(f);
        int count = static_cast<int>(schema.factors[f].conditions.size());
        for (int c = 0; c < count; ++c) {
            if (bits[off + c]) {
                out.emplace(schema.factors[f].name, schema.factors[f].conditions[c]);
                break;
            }
        }
    }
    return out;
}

SituationKey key_of(const ContextualObservation& obs, const DatasetSchema& schema) {
    SituationKey key(schema.factor_count(), -1);
    for (int32_t f : obs.known_factors) {
        int off = schema.condition_offset(f);
        int count = static_cast<int>(schema.factors[f].conditions.size());
        for (int c = 0; c < count; ++c) {
            if (obs.conditions[off + c]) {
                key[f] = static_cast<int16_t>(c);
                break;
            }
        }
    }
    return key;
}

std::string key_to_string(const SituationKey& key, const DatasetSchema& schema) {
    std::string out;
    for (size_t f = 0; f < key.size(); ++f) {
        if (f) out += '|';
        out += schema.factors[f].name;
        out += '=';
        out += key[f] < 0 ? "unknown" : schema.factors[f].conditions[key[f]];
    }
    return out;
}

std::pair<std::vector<uint8_t>, std::vector<int32_t>>
key_to_bits(const SituationKey& key, const DatasetSchema& schema) {
    std::vector<uint8_t> bits(schema.condition_count(), 0);
    std::vector<int32_t> known;
    for (size_t f = 0; f < key.size(); ++f) {
        if (key[f] < 0) continue;
        bits[schema.condition_offset(static_cast<int>(f)) + key[f]] = 1;
        known.push_back(static_cast<int32_t>(f));
    }
    return {std::move(bits), std::move(known)};
}

StatsReport dataset_stats(const Dataset& d) {
    StatsReport r;
    r.ratings = static_cast<long>(d.observations.size());
    r.users = d.users.size();
    r.items = d.items.size();
    r.context_factors = d.schema.factor_count();
    r.context_conditions = d.schema.condition_count();
    r.item_attribute_count = static_cast<int>(d.schema.item_attributes.size());
    r.user_attribute_count = static_cast<int>(d.schema.user_attributes.size());

    if (r.ratings > 0) {
        std::vector<double> ratings;
        ratings.reserve(d.observations.size());
        for (const auto& obs : d.observations) ratings.push_back(obs.rating);

        double mean = std::accumulate(ratings.begin(), ratings.end(), 0.0) / r.ratings;
        r.rating_mean = mean;

        std::sort(ratings.begin(), ratings.end());
        size_t mid = ratings.size() / 2;
        r.rating_median = ratings.size() % 2 ? ratings[mid]
                                             : 0.5 * (ratings[mid - 1] + ratings[mid]);

        if (r.ratings > 1) {
            double ss = 0.0;
            for (double v : ratings) ss += (v - mean) * (v - mean);
            r.rating_stddev = std::sqrt(ss / (r.ratings - 1));
        } else {
            r.rating_stddev = 0.0;
        }

        double cells = static_cast<double>(r.users) * static_cast<double>(r.items);
        r.sparsity = 1.0 - static_cast<double>(r.ratings) / cells;
    }
    return r;
}

namespace {

std::string fmt(double v, const char* spec = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

} // namespace

std::string StatsReport::to_text() const {
    std::ostringstream out;
    auto row = [&out](const std::string& name, const std::string& value) {
        out << name;
        for (size_t i = name.size(); i < 28; ++i) out << ' ';
        out << value << '\n';
    };
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v, "%.2f") : "-"; };

    row("#ratings", std::to_string(ratings));
    row("#users", std::to_string(users));
    row("#items", std::to_string(items));
    row("rating mean", opt(rating_mean));
    row("rating median", opt(rating_median));
    row("rating stddev", opt(rating_stddev));
    row("sparsity", fmt(100.0 * sparsity, "%.2f") + "%");
    row("#context factors", std::to_string(context_factors));
    row("#context conditions", std::to_string(context_conditions));
    row("#item attributes", std::to_string(item_attribute_count));
    row("#user attributes", std::to_string(user_attribute_count));
    return out.str();
}

std::string StatsReport::to_csv() const {
    std::ostringstream out;
    out << "ratings,users,items,rating_mean,rating_median,rating_stddev,sparsity,"
           "context_factors,context_conditions,item_attributes,user_attributes\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v, "%.6f") : ""; };
    out << ratings << ',' << users << ',' << items << ',' << opt(rating_mean) << ','
        << opt(rating_median) << ',' << opt(rating_stddev) << ',' << fmt(sparsity, "%.6f")
        << ',' << context_factors << ',' << context_conditions << ','
        << item_attribute_count << ',' << user_attribute_count << '\n';
    return out.str();
}

} // namespace cbpf
