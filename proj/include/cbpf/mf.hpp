#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbpf/dataset.hpp"

namespace cbpf {

struct MfHyperparams {
    int factors = 10;
    double learning_rate = 0.01;
    double regularization = 0.05;
    int epochs = 100;
    double init_scale = 0.1;
    uint64_t seed = 0;

    void validate() const;
};

// Biased matrix factorization: r_hat = mu + b_u + b_i + p_u . q_i, mu fixed
// to the training mean. Entities absent from the training pool keep zero
// bias and zero factor rows, so ids outside the pool (or outside the model
// entirely) degrade to bias or mean prediction.
struct MfModel {
    double mu = 0.0;
    RatingScale scale;
    int factor_count = 0;
    std::vector<double> user_bias;
    std::vector<double> item_bias;
    std::vector<double> user_factors; // row-major, user_bias.size() x factor_count
    std::vector<double> item_factors;

    double raw_predict(int32_t user, int32_t item) const; // unclamped
    double predict(int32_t user, int32_t item) const;     // clamped into scale
};

// SGD on sum over samples of (r - r_hat)^2 + reg * (b_u^2 + b_i^2 + |p_u|^2
// + |q_i|^2). Deterministic for a fixed seed: factor init covers every
// dataset entity in index order, and each epoch reshuffles a copy of the
// pool with the same generator. epoch_objective, when given, receives the
// objective after every epoch.
MfModel train_mf(const Dataset& d, std::span<const int32_t> pool, const MfHyperparams& hp,
                 std::vector<double>* epoch_objective = nullptr);
MfModel train_mf(const Dataset& d, const MfHyperparams& hp,
                 std::vector<double>* epoch_objective = nullptr);

double sample_loss(const MfModel& model, const ContextualObservation& obs,
                   double regularization);

struct SampleGradient {
    double user_bias = 0.0;
    double item_bias = 0.0;
    std::vector<double> user_factors;
    std::vector<double> item_factors;
};

// Exact partial derivatives of sample_loss with respect to the sample's own
// parameters.
SampleGradient sample_gradient(const MfModel& model, const ContextualObservation& obs,
                               double regularization);

double pool_objective(const Dataset& d, std::span<const int32_t> pool, const MfModel& model,
                      double regularization);

void save_mf(const MfModel& model, const std::string& path);
MfModel load_mf(const std::string& path);

// Damped-deviation baseline: mu plus user deviation fitted first, item
// deviation fitted on the residual. Predictions are not clamped.
struct BiasBaseline {
    double mu = 0.0;
    std::vector<double> user_dev;
    std::vector<double> item_dev;

    double predict(int32_t user, int32_t item) const;
};

BiasBaseline fit_bias_baseline(const Dataset& d, std::span<const int32_t> pool,
                               double damping);
double baseline_predict(const Dataset& d, int32_t user, int32_t item, double damping);

} // namespace cbpf
