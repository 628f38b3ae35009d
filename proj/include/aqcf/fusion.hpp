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

// Complexity-weighted blending of the quantum and classical pathways, and the
// classical multi-head attention pathway itself.

#pragma once

#include <span>
#include <utility>

#include "aqcf/autograd.hpp"
#include "aqcf/complexity.hpp"
#include "aqcf/layers.hpp"

namespace aqcf::fusion {

struct FusionParams {
    SigmoidMlp fusion_net;  // 3 -> h -> 1
    Linear gate_quantum;    // d -> d
    Linear gate_classical;  // d -> d
    Linear output;          // d -> d
    double lambda_target = 0.4;

    static FusionParams init(int d, int hidden, double lambda_target, Rng& rng);
    void collect(const std::string& prefix, ParameterList& out) const;
};

struct ClassicalAttentionParams {
    Linear query, key, value, output;  // d -> d each
    int n_heads = 1;

    static ClassicalAttentionParams init(int d, int n_heads, Rng& rng);
    int head_dim() const { return static_cast<int>(query.weight.cols()) / n_heads; }
    void collect(const std::string& prefix, ParameterList& out) const;
};

/// lambda = f_fusion(c) for a 1 x 3 complexity row; 1 x 1 result in (0, 1).
ag::Tensor fusion_weight(const ag::Tensor& complexity_row, const FusionParams& params);
double fusion_weight(const complexity::PathwayComplexity& c, const FusionParams& params);

/// softmax(Q K^T / sqrt(head_dim)) V per head, concatenated, projected.
/// If `weights` is given it receives each head's seq x seq attention matrix.
ag::Tensor classical_attention(const ag::Tensor& x, const ClassicalAttentionParams& params,
                               std::vector<ag::Matrix>* weights = nullptr);

/// (sigmoid(A_q W_gq + b_q), sigmoid(A_c W_gc + b_c)).
std::pair<ag::Tensor, ag::Tensor> pathway_gates(const ag::Tensor& a_quantum, const ag::Tensor& a_classical,
                                                const FusionParams& params);

/// lambda (g_q * A_q) + (1 - lambda) (g_c * A_c), before projection.
ag::Tensor blend(const ag::Tensor& a_quantum, const ag::Tensor& a_classical, const ag::Tensor& lambda,
                 const ag::Tensor& g_quantum, const ag::Tensor& g_classical);

/// layer_norm(residual + W_out blend + b_out).
ag::Tensor fuse(const ag::Tensor& a_quantum, const ag::Tensor& a_classical, const ag::Tensor& lambda,
                const std::pair<ag::Tensor, ag::Tensor>& gates, const ag::Tensor& residual,
                const FusionParams& params);

struct Utilization {
    double mean_lambda = 0.0;
    double fraction_quantum = 0.0;  // share of lambda > 0.5
};

Utilization quantum_utilization(std::span<const double> lambdas);

}  // namespace aqcf::fusion
