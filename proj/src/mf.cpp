#include "cbpf/mf.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cbpf/error.hpp"
#include "cbpf/rng.hpp"

namespace cbpf {

void MfHyperparams::validate() const {
    if (factors <= 0) throw ValidationError("mf: factors must be positive");
    if (learning_rate <= 0.0) throw ValidationError("mf: learning_rate must be positive");
    if (regularization < 0.0) throw ValidationError("mf: regularization must be non-negative");
    if (epochs < 0) throw ValidationError("mf: epochs must be non-negative");
    if (init_scale <= 0.0) throw ValidationError("mf: init_scale must be positive");
}

double MfModel::raw_predict(int32_t user, int32_t item) const {
    double pred = mu;
    bool has_user = user >= 0 && user < static_cast<int32_t>(user_bias.size());
    bool has_item = item >= 0 && item < static_cast<int32_t>(item_bias.size());
    if (has_user) pred += user_bias[user];
    if (has_item) pred += item_bias[item];
    if (has_user && has_item) {
        const double* p = user_factors.data() + static_cast<size_t>(user) * factor_count;
        const double* q = item_factors.data() + static_cast<size_t>(item) * factor_count;
        for (int k = 0; k < factor_count; ++k) pred += p[k] * q[k];
    }
    return pred;
}

double MfModel::predict(int32_t user, int32_t item) const {
    return scale.clamp(raw_predict(user, item));
}

double sample_loss(const MfModel& model, const ContextualObservation& obs,
                   double regularization) {
    double e = obs.rating - model.raw_predict(obs.user, obs.item);
    double reg = model.user_bias[obs.user] * model.user_bias[obs.user] +
                 model.item_bias[obs.item] * model.item_bias[obs.item];
    const double* p = model.user_factors.data() + static_cast<size_t>(obs.user) * model.factor_count;
    const double* q = model.item_factors.data() + static_cast<size_t>(obs.item) * model.factor_count;
    for (int k = 0; k < model.factor_count; ++k) reg += p[k] * p[k] + q[k] * q[k];
    return e * e + regularization * reg;
}

SampleGradient sample_gradient(const MfModel& model, const ContextualObservation& obs,
                               double regularization) {
    double e = obs.rating - model.raw_predict(obs.user, obs.item);
    const double* p = model.user_factors.data() + static_cast<size_t>(obs.user) * model.factor_count;
    const double* q = model.item_factors.data() + static_cast<size_t>(obs.item) * model.factor_count;

    SampleGradient g;
    g.user_bias = -2.0 * e + 2.0 * regularization * model.user_bias[obs.user];
    g.item_bias = -2.0 * e + 2.0 * regularization * model.item_bias[obs.item];
    g.user_factors.resize(model.factor_count);
    g.item_factors.resize(model.factor_count);
    for (int k = 0; k < model.factor_count; ++k) {
        g.user_factors[k] = -2.0 * e * q[k] + 2.0 * regularization * p[k];
        g.item_factors[k] = -2.0 * e * p[k] + 2.0 * regularization * q[k];
    }
    return g;
}

double pool_objective(const Dataset& d, std::span<const int32_t> pool, const MfModel& model,
                      double regularization) {
    double total = 0.0;
    for (int32_t idx : pool) total += sample_loss(model, d.observations[idx], regularization);
    return total;
}

MfModel train_mf(const Dataset& d, std::span<const int32_t> pool, const MfHyperparams& hp,
                 std::vector<double>* epoch_objective) {
    hp.validate();
    if (pool.empty()) throw EmptyLocalDataset("mf: empty training pool");

    const int32_t users = d.users.size();
    const int32_t items = d.items.size();
    const int k = hp.factors;

    MfModel model;
    model.scale = d.schema.rating_scale;
    model.factor_count = k;
    model.user_bias.assign(users, 0.0);
    model.item_bias.assign(items, 0.0);
    model.user_factors.resize(static_cast<size_t>(users) * k);
    model.item_factors.resize(static_cast<size_t>(items) * k);

    // Init draws cover every entity of the dataset, not just the pool's, so
    // two local models over the same dataset start common entities
    // identically.
    Rng rng(hp.seed);
    for (double& v : model.user_factors) v = rng.uniform(-hp.init_scale, hp.init_scale);
    for (double& v : model.item_factors) v = rng.uniform(-hp.init_scale, hp.init_scale);

    double sum = 0.0;
    for (int32_t idx : pool) sum += d.observations[idx].rating;
    model.mu = sum / pool.size();

    std::vector<int32_t> order(pool.begin(), pool.end());
    std::vector<double> p_old(k);
    const double lr = hp.learning_rate;
    const double reg = hp.regularization;

    if (epoch_objective) epoch_objective->clear();
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        rng.shuffle(order);
        for (int32_t idx : order) {
            const auto& obs = d.observations[idx];
            double e = obs.rating - model.raw_predict(obs.user, obs.item);
            double* p = model.user_factors.data() + static_cast<size_t>(obs.user) * k;
            double* q = model.item_factors.data() + static_cast<size_t>(obs.item) * k;
            model.user_bias[obs.user] += lr * (e - reg * model.user_bias[obs.user]);
            model.item_bias[obs.item] += lr * (e - reg * model.item_bias[obs.item]);
            for (int f = 0; f < k; ++f) p_old[f] = p[f];
            for (int f = 0; f < k; ++f) p[f] += lr * (e * q[f] - reg * p[f]);
            for (int f = 0; f < k; ++f) q[f] += lr * (e * p_old[f] - reg * q[f]);
        }
        if (epoch_objective)
            epoch_objective->push_back(pool_objective(d, pool, model, reg));
    }

    // Entities the pool never touched keep their random init; wipe it so
    // they predict exactly like unknown ids.
    std::vector<uint8_t> seen_user(users, 0), seen_item(items, 0);
    for (int32_t idx : pool) {
        seen_user[d.observations[idx].user] = 1;
        seen_item[d.observations[idx].item] = 1;
    }
    for (int32_t u = 0; u < users; ++u)
        if (!seen_user[u])
            std::fill_n(model.user_factors.begin() + static_cast<size_t>(u) * k, k, 0.0);
    for (int32_t i = 0; i < items; ++i)
        if (!seen_item[i])
            std::fill_n(model.item_factors.begin() + static_cast<size_t>(i) * k, k, 0.0);

    return model;
}

MfModel train_mf(const Dataset& d, const MfHyperparams& hp,
                 std::vector<double>* epoch_objective) {
    auto pool = all_indices(d);
    return train_mf(d, pool, hp, epoch_objective);
}

void save_mf(const MfModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("mf: cannot open " + path + " for writing");
    const size_t users = model.user_bias.size();
    const size_t items = model.item_bias.size();
    char buf[96];
    out << "cbpf-mf 1\n";
    out << users << ' ' << items << ' ' << model.factor_count << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", model.mu, model.scale.min,
                  model.scale.max);
    out << buf;
    auto row = [&](double bias, const double* factors, int k) {
        std::snprintf(buf, sizeof(buf), "%.17g", bias);
        out << buf;
        for (int f = 0; f < k; ++f) {
            std::snprintf(buf, sizeof(buf), " %.17g", factors[f]);
            out << buf;
        }
        out << '\n';
    };
    for (size_t u = 0; u < users; ++u)
        row(model.user_bias[u], model.user_factors.data() + u * model.factor_count,
            model.factor_count);
    for (size_t i = 0; i < items; ++i)
        row(model.item_bias[i], model.item_factors.data() + i * model.factor_count,
            model.factor_count);
    if (!out) throw ValidationError("mf: write to " + path + " failed");
}

MfModel load_mf(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open model file");
    std::string header;
    std::getline(in, header);
    if (header != "cbpf-mf 1") throw ParseError(path, 1, "bad model header");

    size_t users = 0, items = 0;
    MfModel model;
    if (!(in >> users >> items >> model.factor_count) || model.factor_count < 0)
        throw ParseError(path, 2, "bad model dimensions");
    if (!(in >> model.mu >> model.scale.min >> model.scale.max))
        throw ParseError(path, 3, "bad model scalars");

    model.user_bias.resize(users);
    model.item_bias.resize(items);
    model.user_factors.resize(users * model.factor_count);
    model.item_factors.resize(items * model.factor_count);
    auto read_rows = [&](std::vector<double>& bias, std::vector<double>& factors) {
        for (size_t r = 0; r < bias.size(); ++r) {
            if (!(in >> bias[r])) throw ParseError(path, 0, "truncated model parameters");
            for (int f = 0; f < model.factor_count; ++f)
                if (!(in >> factors[r * model.factor_count + f]))
                    throw ParseError(path, 0, "truncated model parameters");
        }
    };
    read_rows(model.user_bias, model.user_factors);
    read_rows(model.item_bias, model.item_factors);
    return model;
}

double BiasBaseline::predict(int32_t user, int32_t item) const {
    double pred = mu;
    if (user >= 0 && user < static_cast<int32_t>(user_dev.size())) pred += user_dev[user];
    if (item >= 0 && item < static_cast<int32_t>(item_dev.size())) pred += item_dev[item];
    return pred;
}

BiasBaseline fit_bias_baseline(const Dataset& d, std::span<const int32_t> pool,
                               double damping) {
    if (pool.empty()) throw ValidationError("bias baseline: empty pool");
    if (damping < 0.0) throw ValidationError("bias baseline: damping must be non-negative");

    BiasBaseline b;
    b.user_dev.assign(d.users.size(), 0.0);
    b.item_dev.assign(d.items.size(), 0.0);

    double sum = 0.0;
    for (int32_t idx : pool) sum += d.observations[idx].rating;
    b.mu = sum / pool.size();

    std::vector<int32_t> user_count(d.users.size(), 0), item_count(d.items.size(), 0);
    for (int32_t idx : pool) {
        const auto& obs = d.observations[idx];
        b.user_dev[obs.user] += obs.rating - b.mu;
        ++user_count[obs.user];
    }
    for (size_t u = 0; u < b.user_dev.size(); ++u)
        if (user_count[u] > 0) b.user_dev[u] /= user_count[u] + damping;

    for (int32_t idx : pool) {
        const auto& obs = d.observations[idx];
        b.item_dev[obs.item] += obs.rating - b.mu - b.user_dev[obs.user];
        ++item_count[obs.item];
    }
    for (size_t i = 0; i < b.item_dev.size(); ++i)
        if (item_count[i] > 0) b.item_dev[i] /= item_count[i] + damping;

    return b;
}

double baseline_predict(const Dataset& d, int32_t user, int32_t item, double damping) {
    auto pool = all_indices(d);
    return fit_bias_baseline(d, pool, damping).predict(user, item);
}

} // namespace cbpf
