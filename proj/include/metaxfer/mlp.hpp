#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "metaxfer/matrix.hpp"
#include "metaxfer/rng.hpp"

namespace metaxfer {

struct MlpSizes {
    size_t input = 0;
    size_t hidden1 = 0;
    size_t hidden2 = 0;
    size_t classes = 0;

    bool operator==(const MlpSizes&) const = default;
};

// Two hidden ReLU layers and a softmax output. freeze_mask[i] = true marks
// layer i (0 = first hidden, 1 = second hidden, 2 = output) as not trainable.
struct MlpModel {
    MlpSizes sizes;
    Matrix w1;  // hidden1 x input
    std::vector<double> b1;
    Matrix w2;  // hidden2 x hidden1
    std::vector<double> b2;
    Matrix w_out;  // classes x hidden2
    std::vector<double> b_out;
    std::array<bool, 3> freeze_mask{false, false, false};

    bool operator==(const MlpModel&) const = default;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    size_t epochs = 200;
    size_t batch_size = 32;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

struct AdamState {
    Matrix m_w1, v_w1, m_w2, v_w2, m_w_out, v_w_out;
    std::vector<double> m_b1, v_b1, m_b2, v_b2, m_b_out, v_b_out;
    uint64_t timestep = 0;

    static AdamState zeros_like(const MlpModel& model);
};

struct ForwardCache {
    Matrix input;
    Matrix hidden1;  // post-ReLU
    Matrix hidden2;  // post-ReLU
    Matrix probabilities;
};

struct Gradients {
    Matrix w1, w2, w_out;
    std::vector<double> b1, b2, b_out;
};

// Weights ~ Normal(0, 2/fan_in) per layer, biases zero, nothing frozen.
MlpModel he_init(const MlpSizes& sizes, Prng& rng);

// Row-wise softmax probabilities (max-subtracted for stability). The cache,
// when provided, holds what backward() needs.
Matrix forward(const MlpModel& model, const Matrix& x, ForwardCache* cache = nullptr);

// Mean over the batch of -ln p[true class], p floored at 1e-12.
double cross_entropy(const Matrix& probabilities, std::span<const int> y);

// Backprop through softmax cross-entropy; gradients of frozen layers are
// computed then zeroed so Adam state stays clean.
Gradients backward(const MlpModel& model, const ForwardCache& cache, std::span<const int> y);

// Standard Adam with bias correction; frozen layers are left untouched,
// parameters and accumulators both.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& config);

// Shuffled minibatch epochs (last partial batch kept); per-epoch rng derives
// from (config.seed, epoch). Returns per-epoch mean train loss.
std::vector<double> train(MlpModel& model, const Matrix& x, const std::vector<int>& y,
                          const TrainConfig& config);

struct EvalResult {
    double accuracy = 0.0;
    double loss = 0.0;
};

// Accuracy (argmax ties to the smallest class index) and mean cross-entropy.
EvalResult evaluate(const MlpModel& model, const Matrix& x, const std::vector<int>& y);

nlohmann::ordered_json serialize_model(const MlpModel& model,
                                       const TrainConfig* config_echo = nullptr);
MlpModel deserialize_model(const nlohmann::json& doc);
void save_model(const MlpModel& model, const std::filesystem::path& path,
                const TrainConfig* config_echo = nullptr);
MlpModel load_model(const std::filesystem::path& path);

void save_history_csv(std::span<const double> history, const std::filesystem::path& path);

}  // namespace metaxfer
