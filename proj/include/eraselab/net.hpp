#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eraselab/dnf.hpp"
#include "eraselab/rng.hpp"

namespace eraselab {

inline constexpr double kProbClamp = 1e-12;

double sigmoid(double z);
double softplus(double z);

// Full parameter state of the two-layer network
//   p(x) = sigmoid( w2 . relu(W1 x + b1) + b2 ).
// Also doubles as the container for gradients and task vectors, which share
// its shape.
struct NetworkWeights {
    int hidden_dim = 0;
    int num_vars = 0;
    std::vector<double> w1;  // hidden_dim x num_vars, row-major
    std::vector<double> b1;  // hidden_dim
    std::vector<double> w2;  // hidden_dim
    double b2 = 0.0;

    static NetworkWeights zeros(int hidden_dim, int num_vars);

    double w1_at(int neuron, int var) const {
        return w1[static_cast<std::size_t>(neuron) * num_vars + var];
    }
    double& w1_at(int neuron, int var) {
        return w1[static_cast<std::size_t>(neuron) * num_vars + var];
    }

    bool same_shape(const NetworkWeights& o) const {
        return hidden_dim == o.hidden_dim && num_vars == o.num_vars;
    }
    bool all_finite() const;

    NetworkWeights& operator+=(const NetworkWeights& o);
    NetworkWeights& operator-=(const NetworkWeights& o);
    NetworkWeights& operator*=(double s);
};

NetworkWeights operator-(NetworkWeights a, const NetworkWeights& b);
NetworkWeights operator+(NetworkWeights a, const NetworkWeights& b);
NetworkWeights operator*(NetworkWeights a, double s);

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer; draw order is
// w1 row-major, b1, w2, b2.
NetworkWeights init_weights(int hidden_dim, int num_vars, std::uint64_t seed);

double forward_logit(const NetworkWeights& w, const Assignment& a);
double forward_logit(const NetworkWeights& w, std::span<const int> active);

// Probability clamped to [kProbClamp, 1 - kProbClamp], so strictly in (0,1).
double forward(const NetworkWeights& w, const Assignment& a);

inline bool classify(double p) { return p > 0.5; }

struct TrainConfig {
    double learning_rate = 0.01;
    int steps = 2000;
    int batch_size = 64;
    int loss_sign = +1;      // +1 descent, -1 ascent
    double momentum = 0.0;
    std::uint64_t seed = 0;
};

// Samples preprocessed for the optimizer: active input indices per sample and
// a target probability in [0,1]. Hard labels are targets 0/1 at temperature 1;
// distillation supplies soft targets and a temperature T, under which the
// per-sample loss is BCE(sigmoid(logit / T), target).
struct TrainData {
    int num_vars = 0;
    double temperature = 1.0;
    std::vector<std::vector<int>> actives;
    std::vector<double> targets;

    int size() const { return static_cast<int>(actives.size()); }
    static TrainData from(const Dataset& ds);
};

struct LossGrads {
    double loss = 0.0;
    NetworkWeights grads;
};

// Mean binary cross-entropy over the batch and its exact analytic gradients.
LossGrads loss_and_grads(const NetworkWeights& w, const std::vector<LabeledSample>& batch);
LossGrads loss_and_grads(const NetworkWeights& w, const TrainData& data,
                         std::span<const int> batch);

// cfg.steps mini-batch updates:
//   v <- momentum * v + g;  param <- param - loss_sign * lr * v.
// Each pass over the data is a fresh shuffle chunked into ceil(n/B) batches
// (last one short). Throws TrainingDivergedError on non-finite loss.
NetworkWeights train(const NetworkWeights& w, const TrainData& data, const TrainConfig& cfg,
                     std::vector<double>* loss_trace = nullptr);
NetworkWeights train(const NetworkWeights& w, const Dataset& ds, const TrainConfig& cfg,
                     std::vector<double>* loss_trace = nullptr);

struct BaseTrainResult {
    NetworkWeights weights;
    int steps_run = 0;
    bool early_stopped = false;
    double train_tpr = 0.0;
    double train_tnr = 0.0;
};

// Base-training recipe: momentum descent until the budget runs out or train
// TPR and TNR both reach the stop thresholds (checked every check_every steps).
BaseTrainResult train_base(const NetworkWeights& w, const Dataset& ds, const TrainConfig& cfg,
                           double stop_tpr = 0.99, double stop_tnr = 0.99, int check_every = 50);

enum class NeuronSign : std::uint8_t { Positive, Negative };

// Positive iff w2[j] >= 0 (ties count as positive).
std::vector<NeuronSign> neuron_signs(const NetworkWeights& w);

// Entries of W1 row `neuron` at the clause's variables, ascending variable order.
std::vector<double> clause_vector(const NetworkWeights& w, int neuron, const Clause& clause);

} // namespace eraselab
