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

#include "aqcf/fusion.hpp"

#include <cmath>

namespace aqcf::fusion {

FusionParams FusionParams::init(int d, int hidden, double lambda_target, Rng& rng) {
    return {SigmoidMlp::init(3, hidden, rng), Linear::init(d, d, rng), Linear::init(d, d, rng),
            Linear::init(d, d, rng), lambda_target};
}

void FusionParams::collect(const std::string& prefix, ParameterList& out) const {
    fusion_net.collect(prefix + ".fusion_net", ParamGroup::Fusion, out);
    gate_quantum.collect(prefix + ".gate_quantum", ParamGroup::Quantum, out);
    gate_classical.collect(prefix + ".gate_classical", ParamGroup::Classical, out);
    output.collect(prefix + ".output", ParamGroup::Classical, out);
}

ClassicalAttentionParams ClassicalAttentionParams::init(int d, int n_heads, Rng& rng) {
    if (n_heads < 1 || d % n_heads != 0) {
        throw ConfigError("attention: " + std::to_string(n_heads) + " heads do not divide d = " + std::to_string(d));
    }
    return {Linear::init(d, d, rng), Linear::init(d, d, rng), Linear::init(d, d, rng), Linear::init(d, d, rng),
            n_heads};
}

void ClassicalAttentionParams::collect(const std::string& prefix, ParameterList& out) const {
    query.collect(prefix + ".query", ParamGroup::Classical, out);
    key.collect(prefix + ".key", ParamGroup::Classical, out);
    value.collect(prefix + ".value", ParamGroup::Classical, out);
    output.collect(prefix + ".output", ParamGroup::Classical, out);
}

ag::Tensor fusion_weight(const ag::Tensor& complexity_row, const FusionParams& params) {
    if (complexity_row.rows() != 1 || complexity_row.cols() != 3) {
        throw DimensionError("fusion_weight: expected 1 x 3 complexity row, got " +
                             ag::to_string(complexity_row.shape()));
    }
    return params.fusion_net(complexity_row);
}

double fusion_weight(const complexity::PathwayComplexity& c, const FusionParams& params) {
    ag::NoGradGuard guard;
    return fusion_weight(ag::Tensor::row(c.as_vector()), params).item();
}

ag::Tensor classical_attention(const ag::Tensor& x, const ClassicalAttentionParams& params,
                               std::vector<ag::Matrix>* weights) {
    const ag::Index d = params.query.weight.rows();
    if (x.cols() != d) {
        throw DimensionError("attention: input " + ag::to_string(x.shape()) + " vs model width " + std::to_string(d));
    }
    const int hd = params.head_dim();
    const ag::Tensor q = params.query(x);
    const ag::Tensor k = params.key(x);
    const ag::Tensor v = params.value(x);
    if (weights) weights->clear();
    std::vector<ag::Tensor> heads;
    for (int h = 0; h < params.n_heads; ++h) {
        const ag::Tensor qh = ag::slice_cols(q, ag::Index(h) * hd, hd);
        const ag::Tensor kh = ag::slice_cols(k, ag::Index(h) * hd, hd);
        const ag::Tensor vh = ag::slice_cols(v, ag::Index(h) * hd, hd);
        const ag::Tensor scores = ag::scale(ag::matmul(qh, ag::transpose(kh)), 1.0 / std::sqrt(double(hd)));
        const ag::Tensor attn = ag::softmax_rows(scores);
        if (weights) weights->push_back(attn.value());
        heads.push_back(ag::matmul(attn, vh));
    }
    return params.output(ag::concat_cols(heads));
}

std::pair<ag::Tensor, ag::Tensor> pathway_gates(const ag::Tensor& a_quantum, const ag::Tensor& a_classical,
                                                const FusionParams& params) {
    return {ag::sigmoid(params.gate_quantum(a_quantum)), ag::sigmoid(params.gate_classical(a_classical))};
}

ag::Tensor blend(const ag::Tensor& a_quantum, const ag::Tensor& a_classical, const ag::Tensor& lambda,
                 const ag::Tensor& g_quantum, const ag::Tensor& g_classical) {
    if (a_quantum.shape() != a_classical.shape()) {
        throw DimensionError("fuse: pathway shapes " + ag::to_string(a_quantum.shape()) + " and " +
                             ag::to_string(a_classical.shape()));
    }
    return (g_quantum * a_quantum) * lambda + (g_classical * a_classical) * (1.0 - lambda);
}

ag::Tensor fuse(const ag::Tensor& a_quantum, const ag::Tensor& a_classical, const ag::Tensor& lambda,
                const std::pair<ag::Tensor, ag::Tensor>& gates, const ag::Tensor& residual,
                const FusionParams& params) {
    const ag::Tensor mixed = blend(a_quantum, a_classical, lambda, gates.first, gates.second);
    return ag::layer_norm_rows(residual + params.output(mixed));
}

Utilization quantum_utilization(std::span<const double> lambdas) {
    if (lambdas.empty()) throw InvalidInputError("quantum_utilization: no lambda values");
    Utilization u;
    long above = 0;
    for (double l : lambdas) {
        u.mean_lambda += l;
        if (l > 0.5) ++above;
    }
    u.mean_lambda /= static_cast<double>(lambdas.size());
    u.fraction_quantum = static_cast<double>(above) / static_cast<double>(lambdas.size());
    return u;
}

}  // namespace aqcf::fusion
