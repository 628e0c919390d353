// Times each parallel kernel against its serial reference on one synthetic
// workload and prints the largest output difference, which must be 0: the
// parallel paths are slot-merged and bit-exact.
//
//   cbpf_bench [scale]
//
// scale multiplies the workload (default 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cbpf/baselines.hpp"
#include "cbpf/cluster.hpp"
#include "cbpf/influence.hpp"
#include "cbpf/rng.hpp"
#include "cbpf/synth.hpp"

using namespace cbpf;

namespace {

template <typename F>
double seconds(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

double max_delta(const InfluenceMatrix& a, const InfluenceMatrix& b) {
    double worst = 0.0;
    if (a.size() != b.size()) return 1.0;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].values.size(); ++j)
            worst = std::max(worst, std::fabs(a[i].values[j] - b[i].values[j]));
    return worst;
}

double max_delta(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    if (a.size() != b.size()) return 1.0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    return worst;
}

void row(const char* name, const std::string& shape, double serial, double parallel,
         double delta) {
    std::printf("%-22s %-12s %10.4fs %10.4fs %8.2fx   %g\n", name, shape.c_str(), serial,
                parallel, parallel > 0 ? serial / parallel : 0.0, delta);
}

} // namespace

int main(int argc, char** argv) {
    int scale = argc > 1 ? std::atoi(argv[1]) : 1;
    if (scale < 1) scale = 1;

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel = serial\n");
#endif

    SynthParams p;
    p.users = 200 * scale;
    p.items = 120 * scale;
    p.factors = 3;
    p.conditions_per_factor = 3;
    p.item_clusters = 4;
    p.ratings = 20000 * scale;
    p.unknown_factor_prob = 0.1;
    p.seed = 42;
    auto synth = generate_synthetic(p);
    const Dataset& d = synth.dataset;
    auto pool = all_indices(d);
    std::printf("workload: %zu ratings, %d users, %d items, %d conditions\n\n",
                d.observations.size(), d.users.size(), d.items.size(),
                d.schema.condition_count());

    std::printf("%-22s %-12s %11s %11s %9s   %s\n", "kernel", "shape", "serial", "parallel",
                "speedup", "max|delta|");

    {
        InfluenceMode mode{InfluenceBasis::item, nullptr};
        InfluenceMatrix serial, parallel;
        double ts = seconds([&] { serial = influence_matrix_serial(d, pool, mode, {}); });
        double tp = seconds([&] { parallel = influence_matrix(d, pool, mode, {}, 0); });
        row("influence item", std::to_string(serial.size()) + "x" +
                                  std::to_string(serial.front().values.size()),
            ts, tp, max_delta(serial, parallel));
    }
    {
        InfluenceMode mode{InfluenceBasis::user, nullptr};
        InfluenceMatrix serial, parallel;
        double ts = seconds([&] { serial = influence_matrix_serial(d, pool, mode, {}); });
        double tp = seconds([&] { parallel = influence_matrix(d, pool, mode, {}, 0); });
        row("influence user", std::to_string(serial.size()) + "x" +
                                  std::to_string(serial.front().values.size()),
            ts, tp, max_delta(serial, parallel));
    }
    {
        DspfConfig cfg{InfluenceBasis::item, 5.0};
        InfluenceMatrix serial, parallel;
        double ts = seconds([&] { serial = dspf_influence_matrix_serial(d, pool, cfg); });
        double tp = seconds([&] { parallel = dspf_influence_matrix(d, pool, cfg, 0); });
        row("rating deviation", std::to_string(serial.size()) + "x" +
                                    std::to_string(serial.front().values.size()),
            ts, tp, max_delta(serial, parallel));
    }
    {
        // Attribute table sized independently of the dataset so the pairwise
        // loop dominates.
        Rng rng(7);
        std::vector<std::string> attrs = {"a0", "a1", "a2", "a3", "a4", "a5"};
        AttributeTable table(600 * scale);
        for (auto& r : table)
            for (const auto& name : attrs) {
                if (rng.uniform01() < 0.15) continue;
                r.emplace(name, std::to_string(rng.below(5)));
            }
        std::vector<const AttributeRow*> rows;
        for (const auto& r : table) rows.push_back(&r);

        std::vector<double> serial, parallel;
        double ts = seconds([&] { serial = gower_matrix_serial(rows, attrs); });
        double tp = seconds([&] { parallel = gower_matrix(rows, attrs, 0); });
        row("gower matrix", std::to_string(table.size()) + "^2", ts, tp,
            max_delta(serial, parallel));
    }

    return 0;
}
