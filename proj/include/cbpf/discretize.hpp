#pragma once

#include <string>
#include <vector>

#include "cbpf/dataset.hpp"

namespace cbpf {

enum class RuleKind { threshold_bins, interval_bins, frequency_group, passthrough, drop };

// How one attribute column is turned into (or kept as) a categorical one.
struct DiscretizationRule {
    std::string attribute;
    RuleKind kind = RuleKind::passthrough;
    std::vector<double> edges;       // threshold_bins: strictly increasing
    std::vector<std::string> labels; // threshold_bins: edges.size() + 1 labels (optional)
    double interval_width = 0.0;     // interval_bins
    double min_frequency = 0.0;      // frequency_group: fraction in (0, 1)

    void validate() const;
};

// Applies the rules and returns a new table. Attributes without a rule pass
// through; non-numeric values under a numeric rule become missing.
AttributeTable apply_discretization(const AttributeTable& table,
                                    const std::vector<DiscretizationRule>& rules);

// Attribute names that survive the rules (declaration order, drops removed).
std::vector<std::string> kept_attributes(const std::vector<std::string>& attributes,
                                         const std::vector<DiscretizationRule>& rules);

} // namespace cbpf
