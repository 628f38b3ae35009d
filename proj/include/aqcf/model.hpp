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

// The hybrid classifier: token embedding with sinusoidal positions, N blocks
// of (quantum memory attention + feed-forward), a terminal adaptive circuit,
// complexity-driven fusion with a classical attention pathway, and a linear
// classification head.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aqcf/adaptive_circuit.hpp"
#include "aqcf/complexity.hpp"
#include "aqcf/fusion.hpp"
#include "aqcf/layers.hpp"
#include "aqcf/qmemory.hpp"
#include "aqcf/qsim.hpp"

namespace aqcf {

struct ModelConfig {
    int vocab_size = 30000;
    int d_model = 128;
    int n_heads = 4;
    int n_layers = 2;
    int n_qubits = 20;
    int max_depth = 20;
    int max_seq_len = 128;
    int memory_slots = 16;
    double quantum_dropout = 0.1;
    int num_classes = 2;
    int hidden = 16;  // width of the depth and fusion predictor nets
    double memory_gamma = 0.1;
    double lambda_target = 0.4;
    bool truncate = true;  // overlength input: truncate, or reject

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

struct ForwardOptions {
    Mode mode = Mode::Infer;
    bool quantum_active = true;
    std::optional<double> lambda_override;
    int depth_cap = 0;  // <= 0: the configured max depth
    qsim::NoiseConfig noise;
};

struct ForwardTrace {
    double lambda = 0.0;
    std::vector<int> depths;                // per token, empty when quantum is bypassed
    std::array<long, 3> gate_histogram{};  // kept RX / RY / RZ gates
};

struct ForwardResult {
    ag::Tensor logits;  // 1 x num_classes
    ag::Tensor lambda;  // 1 x 1
    ag::Tensor quantum_outputs;  // T x n_q circuit expectations (undefined if bypassed)
    ag::Tensor depth_scores;     // T x 1 (undefined if bypassed)
    Eigen::VectorXd depth_targets;  // normalized entropy of each circuit input row
    std::vector<qmemory::MultiHeadTrace> memory_traces;  // per block
    std::vector<ag::Matrix> block_inputs;                // per block, T x d
    ForwardTrace trace;
};

struct Block {
    qmemory::MultiHeadMemory attention;
    LayerNorm norm_attention;
    Linear ff_in;   // d -> 4d
    Linear ff_out;  // 4d -> d
    LayerNorm norm_ff;
};

class Model {
public:
    Model(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }

    /// Single sequence. Throws InvalidInputError on empty input, an
    /// out-of-vocabulary id, or overlength input when truncation is off.
    ForwardResult forward(std::span<const int> tokens, const ForwardOptions& options, Rng& rng) const;

    /// Logits for each sequence (rows), without recording a graph. Each
    /// sequence draws from its own stream mix_seed(seed, index).
    ag::Matrix forward_batch(const std::vector<std::vector<int>>& batch, const ForwardOptions& options,
                             std::uint64_t seed) const;

    /// Every learnable tensor with a stable name and its training group.
    ParameterList parameters() const;

    std::vector<Block>& blocks() { return blocks_; }
    const std::vector<Block>& blocks() const { return blocks_; }

    static long count_parameters(const ModelConfig& config);

private:
    ModelConfig config_;
    ag::Matrix positions_;  // max_seq_len x d
    ag::Tensor embedding_;
    std::vector<Block> blocks_;
    adaptive::AdaptiveCircuitParams circuit_;
    Linear up_projection_;  // n_q -> d
    fusion::ClassicalAttentionParams classical_;
    complexity::SyntacticHead syntactic_;
    fusion::FusionParams fusion_;
    Linear classifier_;
};

/// Fixed sinusoidal position table, rows = positions.
ag::Matrix sinusoidal_positions(int length, int d);

}  // namespace aqcf
