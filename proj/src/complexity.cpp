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

#include "aqcf/complexity.hpp"

#include <algorithm>
#include <cmath>

namespace aqcf::complexity {

double shannon_entropy(const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() == 0) throw InvalidInputError("shannon_entropy: empty input");
    const double total = x.cwiseAbs().sum();
    if (total == 0.0) return 0.0;
    double h = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double p = std::abs(x(i)) / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double normalized_entropy(const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() <= 1) return 0.0;
    return std::clamp(shannon_entropy(x) / std::log(static_cast<double>(x.size())), 0.0, 1.0);
}

ComplexityFeatures complexity_features(const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() == 0) throw InvalidInputError("complexity_features: empty input");
    ComplexityFeatures f;
    f.mean = x.mean();
    const Eigen::ArrayXd centered = x.array() - f.mean;
    f.variance = centered.square().mean();
    const double m4 = centered.square().square().mean();
    f.kurtosis = f.variance > 0.0 ? m4 / (f.variance * f.variance) - 3.0 : 0.0;
    f.entropy = shannon_entropy(x);
    return f;
}

QuantumStats quantum_stats(const Eigen::Ref<const Eigen::VectorXd>& x_q) {
    if (x_q.size() == 0) throw InvalidInputError("quantum_stats: empty input");
    QuantumStats s;
    s.mean = x_q.mean();
    s.std = std::sqrt((x_q.array() - s.mean).square().mean());
    s.max = x_q.maxCoeff();
    s.min = x_q.minCoeff();
    return s;
}

ag::Tensor pathway_complexity_row(const ag::Matrix& embeddings, int seq_len, int max_len, const SyntacticHead& head) {
    if (seq_len < 1 || max_len < seq_len) {
        throw InvalidInputError("pathway_complexity: need 1 <= seq_len <= max_len");
    }
    if (embeddings.rows() < seq_len) throw DimensionError("pathway_complexity: fewer embedding rows than seq_len");
    const Eigen::VectorXd pooled = embeddings.topRows(seq_len).colwise().mean().transpose();
    const double semantic = normalized_entropy(pooled);
    const double length = std::min(1.0, static_cast<double>(seq_len) / static_cast<double>(max_len));

    const Eigen::Vector4d feats = complexity_features(pooled).as_vector();
    ag::Tensor syntactic = ag::sigmoid(ag::matmul(ag::Tensor::row(feats), head.weight) + head.bias);
    const ag::Tensor parts[] = {ag::Tensor::scalar(semantic), syntactic, ag::Tensor::scalar(length)};
    return ag::concat_cols(parts);
}

PathwayComplexity pathway_complexity(const ag::Matrix& embeddings, int seq_len, int max_len,
                                     const SyntacticHead& head) {
    ag::NoGradGuard guard;
    const ag::Tensor row = pathway_complexity_row(embeddings, seq_len, max_len, head);
    return {row(0, 0), row(0, 1), row(0, 2)};
}

}  // namespace aqcf::complexity
