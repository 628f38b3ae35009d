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

// Input-adaptive variational circuit: projection to qubit space, depth
// prediction from projection statistics, learnable gate-axis selection,
// quantum dropout and learned adjacent entanglement.

#pragma once

#include <Eigen/Core>

#include <vector>

#include "aqcf/autograd.hpp"
#include "aqcf/layers.hpp"
#include "aqcf/qsim.hpp"

namespace aqcf::adaptive {

inline constexpr int kAxes = 3;  // RX, RY, RZ

struct AdaptiveCircuitParams {
    int n_qubits = 0;
    int max_depth = 1;
    double p_dropout = 0.1;

    ag::Tensor projection;       // d x n_q
    SigmoidMlp depth_net;        // 4 -> h -> 1
    ag::Tensor gate_logits;      // (max_depth * n_q) x 3, row l * n_q + i
    ag::Tensor rotation_angles;  // max_depth x n_q
    ag::Tensor entangle_logits;  // max_depth x (n_q - 1)

    static AdaptiveCircuitParams init(int d, int n_qubits, int max_depth, double p_dropout, int hidden, Rng& rng);
    void validate() const;
    void collect(const std::string& prefix, ParameterList& out) const;
};

/// One realized circuit shape for a single forward pass.
struct CircuitConfig {
    int depth = 1;
    int n_qubits = 0;
    std::vector<qsim::GateKind> gate_axes;  // depth * n_q
    std::vector<bool> keep;                 // depth * n_q; false = gate skipped
    std::vector<std::vector<int>> edges;    // per layer, i meaning CNOT(i -> i + 1)

    qsim::GateKind axis(int layer, int qubit) const { return gate_axes[std::size_t(layer * n_qubits + qubit)]; }
    bool kept(int layer, int qubit) const { return keep[std::size_t(layer * n_qubits + qubit)]; }
};

/// 1 + floor(score * (max_depth - 1)), clamped to [1, max_depth].
int depth_from_score(double score, int max_depth);

/// f_depth(stats(x_q)) in [0, 1].
double depth_score(const Eigen::Ref<const Eigen::VectorXd>& x_q, const AdaptiveCircuitParams& params);

int predict_depth(const Eigen::Ref<const Eigen::VectorXd>& x_q, const AdaptiveCircuitParams& params);

/// Train: sample each axis from softmax(logits). Infer: argmax, ties to the
/// lowest axis (RX < RY < RZ).
std::vector<qsim::GateKind> select_gates(const AdaptiveCircuitParams& params, int depth, Mode mode, Rng& rng);

/// depth x n_q keep-mask; each entry kept with probability 1 - p in Train, all kept in Infer.
std::vector<bool> sample_dropout_mask(int depth, int n_qubits, double p_dropout, Mode mode, Rng& rng);

/// Adjacent CNOT edges of one layer; edge i present with probability
/// sigmoid(eta_{l,i}) in Train, iff sigmoid(eta_{l,i}) >= 0.5 in Infer.
std::vector<int> entanglement_layer(int layer, const AdaptiveCircuitParams& params, Mode mode, Rng& rng);

/// depth (capped at depth_cap), axes, dropout and edges for one input.
CircuitConfig realize_config(const Eigen::Ref<const Eigen::VectorXd>& x_q, const AdaptiveCircuitParams& params,
                             Mode mode, Rng& rng, int depth_cap = 0);

/// Full gate list: angle encoding of x_q followed by the configured layers.
std::vector<qsim::Gate> build_gates(const Eigen::Ref<const Eigen::VectorXd>& x_q, const CircuitConfig& config,
                                    const ag::Matrix& angles);

struct AdaptiveOutput {
    ag::Tensor expectations;  // T x n_q, in [-1, 1]
    ag::Tensor depth_scores;  // T x 1, f_depth outputs (graph reaches depth_net only)
    ag::Tensor projected;     // T x n_q, x_q = x W_p
    std::vector<CircuitConfig> configs;
};

/// Applies the adaptive circuit to every row of x (T x d). depth_cap <= 0
/// means the configured maximum depth.
AdaptiveOutput forward(const ag::Tensor& x, const AdaptiveCircuitParams& params, Mode mode, Rng& rng,
                       const qsim::NoiseConfig& noise = {}, int depth_cap = 0);

/// Runs the circuit for fixed configs. Gradients flow to x_q and the
/// rotation angles exactly; to gate and edge probabilities via the
/// straight-through rule (d/dprob := d/d(hard choice)).
ag::Tensor circuit_expectations(const ag::Tensor& x_q, const ag::Tensor& angles, const ag::Tensor& gate_probs,
                                const ag::Tensor& entangle_probs, const std::vector<CircuitConfig>& configs,
                                const qsim::NoiseConfig& noise, Rng& rng);

}  // namespace aqcf::adaptive
