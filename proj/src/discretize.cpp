#include "cbpf/discretize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

namespace cbpf {

void DiscretizationRule::validate() const {
    switch (kind) {
    case RuleKind::threshold_bins:
        if (edges.empty()) throw ValidationError("rule '" + attribute + "': no bin edges");
        for (size_t i = 1; i < edges.size(); ++i)
            if (edges[i - 1] >= edges[i])
                throw ValidationError("rule '" + attribute + "': edges must be strictly increasing");
        if (!labels.empty() && labels.size() != edges.size() + 1)
            throw ValidationError("rule '" + attribute + "': need edges + 1 labels");
        break;
    case RuleKind::interval_bins:
        if (interval_width <= 0.0)
            throw ValidationError("rule '" + attribute + "': interval width must be > 0");
        break;
    case RuleKind::frequency_group:
        if (min_frequency <= 0.0 || min_frequency >= 1.0)
            throw ValidationError("rule '" + attribute + "': min_frequency must be in (0, 1)");
        break;
    case RuleKind::passthrough:
    case RuleKind::drop:
        break;
    }
}

namespace {

bool parse_number(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

std::string format_number(double v) {
    char buf[48];
    if (v == std::floor(v) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof(buf), "%.0f", v);
    else
        std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string threshold_label(const DiscretizationRule& rule, double v) {
    size_t bin = 0;
    while (bin < rule.edges.size() && v >= rule.edges[bin]) ++bin;
    if (!rule.labels.empty()) return rule.labels[bin];
    return "bin" + std::to_string(bin);
}

std::string interval_label(double width, double v) {
    double lo = std::floor(v / width) * width;
    return "[" + format_number(lo) + "," + format_number(lo + width) + ")";
}

} // namespace

AttributeTable apply_discretization(const AttributeTable& table,
                                    const std::vector<DiscretizationRule>& rules) {
    for (const auto& rule : rules) rule.validate();

    AttributeTable out = table;
    for (const auto& rule : rules) {
        switch (rule.kind) {
        case RuleKind::passthrough:
            break;
        case RuleKind::drop:
            for (auto& row : out) row.erase(rule.attribute);
            break;
        case RuleKind::threshold_bins:
        case RuleKind::interval_bins:
            for (auto& row : out) {
                auto it = row.find(rule.attribute);
                if (it == row.end()) continue;
                double v;
                if (!parse_number(it->second, v)) {
                    row.erase(it); // unparseable value becomes missing
                    continue;
                }
                it->second = rule.kind == RuleKind::threshold_bins
                                 ? threshold_label(rule, v)
                                 : interval_label(rule.interval_width, v);
            }
            break;
        case RuleKind::frequency_group: {
            std::map<std::string, long> counts;
            long total = 0;
            for (const auto& row : out) {
                auto it = row.find(rule.attribute);
                if (it == row.end()) continue;
                ++counts[it->second];
                ++total;
            }
            for (auto& row : out) {
                auto it = row.find(rule.attribute);
                if (it == row.end()) continue;
                if (static_cast<double>(counts[it->second]) < rule.min_frequency * total)
                    it->second = "other";
            }
            break;
        }
        }
    }
    return out;
}

std::vector<std::string> kept_attributes(const std::vector<std::string>& attributes,
                                         const std::vector<DiscretizationRule>& rules) {
    std::vector<std::string> out;
    for (const auto& a : attributes) {
        bool dropped = std::any_of(rules.begin(), rules.end(), [&](const auto& r) {
            return r.attribute == a && r.kind == RuleKind::drop;
        });
        if (!dropped) out.push_back(a);
    }
    return out;
}

} // namespace cbpf
