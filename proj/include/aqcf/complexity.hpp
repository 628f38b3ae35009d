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

// Statistical complexity measures that drive circuit depth and fusion.

#pragma once

#include <Eigen/Core>

#include "aqcf/autograd.hpp"

namespace aqcf::complexity {

struct ComplexityFeatures {
    double mean = 0.0;
    double variance = 0.0;
    double entropy = 0.0;   // nats
    double kurtosis = 0.0;  // excess

    Eigen::Vector4d as_vector() const { return {mean, variance, entropy, kurtosis}; }
};

struct QuantumStats {
    double mean = 0.0;
    double std = 0.0;
    double max = 0.0;
    double min = 0.0;

    Eigen::Vector4d as_vector() const { return {mean, std, max, min}; }
};

struct PathwayComplexity {
    double semantic = 0.0;
    double syntactic = 0.0;
    double length = 0.0;

    Eigen::Vector3d as_vector() const { return {semantic, syntactic, length}; }
};

/// -sum p_i ln p_i with p_i = |x_i| / sum_j |x_j|. Zero for an all-zero x.
double shannon_entropy(const Eigen::Ref<const Eigen::VectorXd>& x);

/// shannon_entropy(x) / ln(dim x), in [0, 1]. Zero when dim x == 1.
double normalized_entropy(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Population moments plus entropy. Kurtosis of a zero-variance x is 0.
ComplexityFeatures complexity_features(const Eigen::Ref<const Eigen::VectorXd>& x);

QuantumStats quantum_stats(const Eigen::Ref<const Eigen::VectorXd>& x_q);

/// Learnable linear + sigmoid head mapping the four complexity features of
/// the pooled embedding to the syntactic score.
struct SyntacticHead {
    ag::Tensor weight;  // 4 x 1
    ag::Tensor bias;    // 1 x 1
};

/// Differentiable form: returns a 1 x 3 row (semantic, syntactic, length).
/// Only the syntactic entry carries a gradient (into the head).
ag::Tensor pathway_complexity_row(const ag::Matrix& embeddings, int seq_len, int max_len, const SyntacticHead& head);

PathwayComplexity pathway_complexity(const ag::Matrix& embeddings, int seq_len, int max_len,
                                     const SyntacticHead& head);

}  // namespace aqcf::complexity
