// Copyright 2026 The AQCF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Losses, the clipped Adam-style optimizer, the three-stage schedule, the
// trainer loop, and the gradient-variance (barren plateau) diagnostic.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqcf/autograd.hpp"
#include "aqcf/fusion.hpp"
#include "aqcf/model.hpp"

namespace aqcf::training {

struct LossWeights {
    double lambda_reg = 0.01;
    double lambda_fusion = 0.01;
    double tau_grad = 1e-3;
    double beta_entropy = 1.0;
    double beta_usage = 1.0;
    double lambda_target = 0.4;

    void validate() const;
    bool operator==(const LossWeights&) const = default;
};

ag::Tensor task_loss(const ag::Tensor& logits, int label);

/// max(0, tau - rms(grads))^2. Zero for an empty gradient vector.
double quantum_reg(std::span<const double> grads, double tau);

/// max(0, tau - Var(outputs))^2 over all entries of the circuit outputs.
ag::Tensor output_variance_penalty(const ag::Tensor& outputs, double tau);

/// mean((score - target)^2) for the depth predictor.
ag::Tensor depth_alignment_loss(const ag::Tensor& scores, const Eigen::Ref<const Eigen::VectorXd>& targets);

/// beta_e mean(-H_bin(lambda)) + beta_u max(0, mean(lambda) - target)^2.
ag::Tensor fusion_reg(std::span<const ag::Tensor> lambdas, const LossWeights& w);

/// task + lambda_reg quantum + lambda_fusion fusion. Throws NumericalError
/// if any component is not finite.
ag::Tensor total_loss(const ag::Tensor& task, const ag::Tensor& quantum, const ag::Tensor& fusion,
                      const LossWeights& w);

struct OptimizerConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double g_max = 1.0;
    long total_steps = 0;  // cosine horizon; <= 0 keeps the rate constant

    bool operator==(const OptimizerConfig&) const = default;
};

struct OptimizerState {
    std::map<std::string, ag::Matrix> first_moment;
    std::map<std::string, ag::Matrix> second_moment;
    std::map<std::string, long> updates;  // per-parameter bias-correction counter
    long step = 0;                        // drives the cosine schedule
};

/// eta_t = eta_0 (1 + cos(pi (t - 1) / T)) / 2 for t in [1, T].
double cosine_rate(const OptimizerConfig& cfg, long t);

/// One update of every parameter that has a gradient and passes `trainable`:
///   theta -= eta_t clip(m_hat / (sqrt(v_hat) + eps), -g_max, g_max).
/// Returns the step's learning rate.
double optimizer_step(ParameterList& params, OptimizerState& state, const OptimizerConfig& cfg,
                      const std::function<bool(const NamedParameter&)>& trainable = {});

struct StageSchedule {
    int total_epochs = 10;
    double pretrain_fraction = 0.2;
    double warmup_fraction = 0.3;
    int ramp_start_depth = 2;

    double warmup_begin() const { return pretrain_fraction * total_epochs; }
    double warmup_end() const { return (pretrain_fraction + warmup_fraction) * total_epochs; }
    void validate() const;
    bool operator==(const StageSchedule&) const = default;
};

struct StageFlags {
    int stage = 1;
    bool quantum_active = false;
    std::optional<double> lambda_override;
    int depth_cap = 0;
    bool train_classical = true;
    bool train_quantum = false;
    bool train_fusion = false;

    bool trains(ParamGroup g) const;
};

/// Flags for a (possibly fractional) epoch position.
StageFlags stage_config(double epoch, const StageSchedule& schedule, int max_depth);

struct Example {
    std::vector<int> tokens;
    int label = 0;
};

struct TrainConfig {
    LossWeights loss;
    OptimizerConfig optimizer;
    StageSchedule schedule;
    int batch_size = 32;
    std::uint64_t seed = 0;
    qsim::NoiseConfig noise{0.01, qsim::NoiseMode::ExactDamping, 1};
    bool update_memory = true;
};

struct StepMetrics {
    long step = 0;
    int stage = 1;
    double epoch = 0.0;
    double loss = 0.0;
    double task = 0.0;
    double quantum = 0.0;
    double fusion = 0.0;
    double mean_lambda = 0.0;
    double mean_depth = 0.0;
    double grad_rms = 0.0;  // over quantum parameters
    double learning_rate = 0.0;
};

/// Owns the optimizer state and runs staged mini-batch training on a model.
class Trainer {
public:
    Trainer(Model& model, TrainConfig config, long steps_per_epoch);

    /// One optimizer step on `batch` at the given fractional epoch.
    StepMetrics step(std::span<const Example> batch, double epoch);

    const OptimizerState& optimizer_state() const { return state_; }
    OptimizerState& optimizer_state() { return state_; }
    const TrainConfig& config() const { return config_; }
    double previous_grad_rms() const { return previous_grad_rms_; }
    void set_previous_grad_rms(double v) { previous_grad_rms_ = v; }

private:
    Model& model_;
    TrainConfig config_;
    OptimizerState state_;
    double previous_grad_rms_ = -1.0;  // < 0: no completed step yet
};

struct ClassificationMetrics {
    double accuracy = 0.0;
    double precision = 0.0;  // macro
    double recall = 0.0;     // macro
    double f1 = 0.0;         // macro
    std::vector<int> absent_classes;  // classes without support in the labels
};

ClassificationMetrics classification_metrics(std::span<const int> predictions, std::span<const int> labels,
                                             int num_classes);

struct EvalResult {
    ClassificationMetrics metrics;
    std::vector<int> predictions;
    std::vector<double> lambdas;
    fusion::Utilization utilization;
    double mean_loss = 0.0;
};

EvalResult evaluate(const Model& model, std::span<const Example> data, const ForwardOptions& options,
                    std::uint64_t seed);

struct PlateauCell {
    int n_qubits = 0;
    int depth = 0;
    double variance = 0.0;
    int samples = 0;
    bool skipped = false;  // no parameter exists (depth 0)
};

/// Random circuit used by the diagnostic: `depth` layers of rotations with
/// angles in [0, 2 pi), RY on even layers and RZ on odd ones, each followed
/// by a full CNOT chain. The first gate is theta_1 (layer 0, qubit 0).
std::vector<qsim::Gate> plateau_circuit(int n_qubits, int depth, Rng& rng);

/// Empirical Var[d<Z_1>/d theta_1] per (n_q, depth), by parameter shift.
std::vector<PlateauCell> plateau_diagnostic(std::span<const int> qubit_range, std::span<const int> depth_range,
                                            int samples, std::uint64_t seed, int threads = 1);

}  // namespace aqcf::training
