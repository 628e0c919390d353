#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cbpf/error.hpp"
#include "cbpf/eval.hpp"

namespace cbpf {

// Ranks are doubled throughout so midpoint ranks from ties stay integral;
// the doubled statistic ranges over 0..n(n+1).
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    double alpha) {
    if (a.size() != b.size())
        throw ValidationError("wilcoxon: paired samples differ in length");

    std::vector<double> diff;
    diff.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        if (d != 0.0) diff.push_back(d);
    }

    WilcoxonResult res;
    res.n_used = static_cast<int>(diff.size());
    res.conclusive = res.n_used >= 10;
    if (diff.empty()) return res;

    const int n = res.n_used;
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return std::fabs(diff[x]) < std::fabs(diff[y]); });

    std::vector<int64_t> doubled_rank(n);
    std::vector<int64_t> tie_sizes;
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && std::fabs(diff[order[j]]) == std::fabs(diff[order[i]])) ++j;
        for (int t = i; t < j; ++t) doubled_rank[order[t]] = i + j + 1; // 2 * avg rank
        tie_sizes.push_back(j - i);
        i = j;
    }

    int64_t w_plus2 = 0;
    const int64_t total2 = static_cast<int64_t>(n) * (n + 1);
    for (int i = 0; i < n; ++i)
        if (diff[i] > 0.0) w_plus2 += doubled_rank[i];
    const int64_t w_minus2 = total2 - w_plus2;

    res.statistic = w_plus2 / 2.0;
    res.a_better = w_plus2 < w_minus2;

    if (n <= 25) {
        // Exact null distribution: convolve over each rank being assigned
        // + or -, counting sign patterns per doubled statistic value.
        std::vector<uint64_t> count(total2 + 1, 0);
        count[0] = 1;
        int64_t reach = 0;
        for (int i = 0; i < n; ++i) {
            int64_t r = doubled_rank[i];
            for (int64_t s = reach; s >= 0; --s)
                if (count[s]) count[s + r] += count[s];
            reach += r;
        }
        const double denom = std::ldexp(1.0, n);
        double lo = 0.0, hi = 0.0;
        for (int64_t s = 0; s <= total2; ++s) {
            if (s <= w_plus2) lo += count[s];
            if (s >= w_plus2) hi += count[s];
        }
        res.p_value = std::min(1.0, 2.0 * std::min(lo, hi) / denom);
    } else {
        const double w = w_plus2 / 2.0;
        const double mean = n * (n + 1) / 4.0;
        double var = n * (n + 1) * (2.0 * n + 1) / 24.0;
        for (int64_t t : tie_sizes) var -= (static_cast<double>(t) * t * t - t) / 48.0;
        if (var <= 0.0) {
            res.p_value = 1.0;
        } else {
            double delta = std::fabs(w - mean);
            double z = std::max(0.0, delta - 0.5) / std::sqrt(var);
            res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
        }
    }

    res.significant = res.conclusive && res.p_value < alpha;
    return res;
}

} // namespace cbpf
