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

// Quantum memory banks: slots of (quantum key, classical value) addressed by
// an interference similarity and softmax retrieval, plus the multi-head
// gated read used as quantum attention.

#pragma once

#include <Eigen/Core>

#include <vector>

#include "aqcf/autograd.hpp"
#include "aqcf/layers.hpp"
#include "aqcf/qsim.hpp"

namespace aqcf::qmemory {

/// Similarity circuit on n = dim(q) qubits, read out as <Z> of qubit 0:
///   RY(atan q_i)  -> CNOT(i, i+1) ascending -> RZ(atan q_i) -> RZ(-atan k_i)
///   -> CNOT(i, i+1) descending -> RY(-atan k_i)
/// i.e. W(k)^dagger W(q)|0>, so s(q, q) = 1 and |s| <= 1.
std::vector<qsim::Gate> similarity_circuit(const Eigen::Ref<const Eigen::VectorXd>& q,
                                           const Eigen::Ref<const Eigen::VectorXd>& k);

double quantum_similarity(const Eigen::Ref<const Eigen::VectorXd>& q, const Eigen::Ref<const Eigen::VectorXd>& k);

/// All pairwise similarities, (T x n_q) x (M x n_q) -> T x M, differentiable
/// in both queries and keys.
ag::Tensor similarity_matrix(const ag::Tensor& queries, const ag::Tensor& keys);

struct MemoryBank {
    ag::Tensor keys;    // M x n_q
    ag::Tensor values;  // M x d_v
    double gamma = 0.1;

    static MemoryBank init(int slots, int n_qubits, int value_dim, double gamma, Rng& rng);
    int slots() const { return static_cast<int>(keys.rows()); }
    int n_qubits() const { return static_cast<int>(keys.cols()); }
    int value_dim() const { return static_cast<int>(values.cols()); }
    void validate() const;
};

struct MemoryReadout {
    Eigen::VectorXd weights;    // alpha, on the simplex
    Eigen::VectorXd retrieved;  // r = sum alpha_m v_m
};

/// softmax(similarities / sqrt(n_q)).
Eigen::VectorXd retrieval_weights(const Eigen::Ref<const Eigen::VectorXd>& similarities, int n_qubits);

MemoryReadout retrieve(const Eigen::Ref<const Eigen::VectorXd>& q, const MemoryBank& bank);

/// Differentiable retrieval for every row of `queries` (T x n_q) -> T x d_v.
ag::Tensor retrieve_rows(const ag::Tensor& queries, const MemoryBank& bank);

/// Soft-updates the slot most similar to new_key (ties to the lowest index):
/// k <- (1 - gamma) k + gamma new_key, v likewise. Returns the slot index.
int update(MemoryBank& bank, const Eigen::Ref<const Eigen::VectorXd>& new_key,
           const Eigen::Ref<const Eigen::VectorXd>& new_value);

/// n_h banks over d / n_h value slices, per-head query projections d -> n_q,
/// and the blend gate W_g over [x; o].
struct MultiHeadMemory {
    std::vector<MemoryBank> banks;
    std::vector<ag::Tensor> query_projections;  // d x n_q each
    Linear gate;                                // 2d -> d

    static MultiHeadMemory init(int d, int n_heads, int slots, int n_qubits, double gamma, Rng& rng);
    int n_heads() const { return static_cast<int>(banks.size()); }
    void collect(const std::string& prefix, ParameterList& out) const;
};

struct MultiHeadTrace {
    std::vector<ag::Matrix> queries;  // per head, T x n_q (detached values)
};

/// y = g * o + (1 - g) * x with g = sigmoid(W_g [x; o] + b), o the
/// concatenation of per-head retrievals. x is T x d; output T x d.
ag::Tensor multihead_forward(const ag::Tensor& x, const MultiHeadMemory& memory, MultiHeadTrace* trace = nullptr);

}  // namespace aqcf::qmemory
