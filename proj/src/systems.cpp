#include "cbpf/systems.hpp"

#include <algorithm>
#include <set>

#include "cbpf/error.hpp"
#include "cbpf/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cbpf {

namespace {

uint64_t key_hash(const SituationKey& key) {
    uint64_t h = 1469598103934665603ull;
    for (int16_t v : key) {
        h = (h ^ static_cast<uint8_t>(v & 0xff)) * 1099511628211ull;
        h = (h ^ static_cast<uint8_t>((v >> 8) & 0xff)) * 1099511628211ull;
    }
    return h;
}

} // namespace

SystemSpec make_system(const std::string& name) {
    SystemSpec s;
    s.name = name;
    if (name == "mf") {
        s.kind = SystemKind::filter_none;
    } else if (name == "exact_pf") {
        s.kind = SystemKind::filter_exact;
    } else if (name == "binary_pf") {
        s.kind = SystemKind::filter_binary;
    } else if (name == "dspf_ib") {
        s.kind = SystemKind::filter_dspf;
        s.basis = InfluenceBasis::item;
    } else if (name == "dspf_ub") {
        s.kind = SystemKind::filter_dspf;
        s.basis = InfluenceBasis::user;
    } else if (name == "cbpf_ib") {
        s.kind = SystemKind::filter_pcc;
        s.basis = InfluenceBasis::item;
    } else if (name == "cbpf_ub") {
        s.kind = SystemKind::filter_pcc;
        s.basis = InfluenceBasis::user;
    } else if (name == "cbpf_cib_ag") {
        s.kind = SystemKind::filter_pcc;
        s.basis = InfluenceBasis::item_cluster;
    } else if (name == "cbpf_cib_cn") {
        s.kind = SystemKind::filter_pcc;
        s.basis = InfluenceBasis::item_cluster;
        s.strategy = RepresentationStrategy::concatenation;
    } else if (name == "cbpf_cub_ag") {
        s.kind = SystemKind::filter_pcc;
        s.basis = InfluenceBasis::user_cluster;
    } else if (name == "cbpf_cub_cn") {
        s.kind = SystemKind::filter_pcc;
        s.basis = InfluenceBasis::user_cluster;
        s.strategy = RepresentationStrategy::concatenation;
    } else {
        throw ValidationError("unknown system: " + name);
    }
    return s;
}

std::vector<std::string> known_system_names() {
    return {"mf",      "exact_pf", "binary_pf",   "dspf_ib",     "dspf_ub",    "cbpf_ib",
            "cbpf_ub", "cbpf_cib_ag", "cbpf_cib_cn", "cbpf_cub_ag", "cbpf_cub_cn"};
}

FoldPredictor::FoldPredictor(const Dataset& d, std::vector<int32_t> train_pool,
                             SystemSpec spec, const ClusterAssignment* item_clusters,
                             const ClusterAssignment* user_clusters, uint64_t seed)
    : d_(d),
      train_pool_(std::move(train_pool)),
      spec_(std::move(spec)),
      item_clusters_(item_clusters),
      user_clusters_(user_clusters),
      seed_(seed) {
    spec_.mf.validate();
    MfHyperparams hp = spec_.mf;
    hp.seed = seed_mix(seed_, 0);
    global_ = train_mf(d_, train_pool_, hp);
}

void FoldPredictor::prepare(std::span<const int32_t> test_indices, int workers) {
    if (spec_.kind == SystemKind::filter_none) return;

    auto table = enumerate_situations(d_, train_pool_);
    if (spec_.kind == SystemKind::filter_binary) {
        auto reps = binary_represent_all(table, d_.schema);
        cache_ = std::make_unique<LocalDatasetCache>(std::move(table), std::move(reps),
                                                     spec_.threshold);
    } else if (spec_.kind == SystemKind::filter_pcc) {
        InfluenceMode mode{spec_.basis, nullptr};
        if (spec_.basis == InfluenceBasis::item_cluster) mode.cluster_assignment = item_clusters_;
        if (spec_.basis == InfluenceBasis::user_cluster) mode.cluster_assignment = user_clusters_;
        matrix_ = influence_matrix(d_, train_pool_, mode,
                                   {spec_.unknown_as_zero, spec_.influence_min_support}, workers);
        auto reps = represent_all(table, matrix_, d_.schema, spec_.strategy);
        cache_ = std::make_unique<LocalDatasetCache>(std::move(table), std::move(reps),
                                                     spec_.threshold);
    } else if (spec_.kind == SystemKind::filter_dspf) {
        DspfConfig cfg{spec_.basis, spec_.dspf_beta};
        matrix_ = dspf_influence_matrix(d_, train_pool_, cfg, workers);
        auto reps = represent_all(table, matrix_, d_.schema, spec_.strategy);
        cache_ = std::make_unique<LocalDatasetCache>(std::move(table), std::move(reps),
                                                     spec_.threshold);
    }

    std::set<SituationKey> distinct;
    for (int32_t idx : test_indices) distinct.insert(d_.situation_keys[idx]);
    std::vector<SituationKey> keys(distinct.begin(), distinct.end());

    const size_t min_size = std::max<size_t>(spec_.min_local_size, 1);
    std::vector<std::optional<MfModel>> models(keys.size());
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#endif
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(keys.size()); ++i) {
        auto selection = local_selection(keys[i]);
        if (selection.size() < min_size) continue;
        MfHyperparams hp = spec_.mf;
        hp.seed = seed_mix(seed_, key_hash(keys[i]));
        models[i] = train_mf(d_, selection, hp);
    }

    for (size_t i = 0; i < keys.size(); ++i) {
        if (models[i])
            locals_.emplace(keys[i], std::move(*models[i]));
        else
            ++fallbacks_;
    }
}

std::vector<int32_t> FoldPredictor::local_selection(const SituationKey& key) const {
    if (spec_.kind == SystemKind::filter_exact)
        return exact_prefilter(d_, train_pool_, key);

    SituationRepresentation target;
    if (spec_.kind == SystemKind::filter_binary) {
        target = binary_representation(key, d_.schema);
    } else {
        try {
            target = represent_situation(key, matrix_, d_.schema, spec_.strategy);
        } catch (const ValidationError&) {
            // All factors unknown under aggregation: zero vector, matches
            // nothing except its own exact key.
            target.key = key;
            target.strategy = spec_.strategy;
            target.all_unknown = true;
            target.vector.assign(matrix_.empty() ? 0 : matrix_[0].values.size(), 0.0);
        }
    }
    return *cache_->local_for(target);
}

double FoldPredictor::predict(int32_t obs_index) const {
    const auto& obs = d_.observations[obs_index];
    auto it = locals_.find(d_.situation_keys[obs_index]);
    const MfModel& model = it != locals_.end() ? it->second : global_;
    return model.predict(obs.user, obs.item);
}

} // namespace cbpf
