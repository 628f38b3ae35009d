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

#include "aqcf/model.hpp"

#include <cmath>

namespace aqcf {

void ModelConfig::validate() const {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("model config: " + what);
    };
    need(vocab_size >= 2, "vocab_size must be >= 2");
    need(d_model >= 1, "d_model must be >= 1");
    need(n_heads >= 1 && d_model % n_heads == 0, "n_heads must divide d_model");
    need(n_layers >= 0, "n_layers must be >= 0");
    need(n_qubits >= 1 && n_qubits <= qsim::kMaxQubits, "n_qubits outside [1, 24]");
    need(max_depth >= 1, "max_depth must be >= 1");
    need(max_seq_len >= 1, "max_seq_len must be >= 1");
    need(memory_slots >= 1, "memory_slots must be >= 1");
    need(quantum_dropout >= 0.0 && quantum_dropout < 1.0, "quantum_dropout outside [0, 1)");
    need(num_classes >= 2, "num_classes must be >= 2");
    need(hidden >= 1, "hidden must be >= 1");
    need(memory_gamma > 0.0 && memory_gamma <= 1.0, "memory_gamma outside (0, 1]");
    need(lambda_target >= 0.0 && lambda_target <= 1.0, "lambda_target outside [0, 1]");
}

ag::Matrix sinusoidal_positions(int length, int d) {
    ag::Matrix pe(length, d);
    for (int pos = 0; pos < length; ++pos) {
        for (int i = 0; i < d; ++i) {
            const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / d);
            pe(pos, i) = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
        }
    }
    return pe;
}

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(seed);
    const int d = config_.d_model;
    positions_ = sinusoidal_positions(config_.max_seq_len, d);
    embedding_ = uniform(config_.vocab_size, d, -0.1, 0.1, rng);
    for (int b = 0; b < config_.n_layers; ++b) {
        blocks_.push_back({qmemory::MultiHeadMemory::init(d, config_.n_heads, config_.memory_slots, config_.n_qubits,
                                                          config_.memory_gamma, rng),
                           LayerNorm::init(d), Linear::init(d, 4 * d, rng), Linear::init(4 * d, d, rng),
                           LayerNorm::init(d)});
    }
    circuit_ = adaptive::AdaptiveCircuitParams::init(d, config_.n_qubits, config_.max_depth, config_.quantum_dropout,
                                                     config_.hidden, rng);
    up_projection_ = Linear::init(config_.n_qubits, d, rng);
    classical_ = fusion::ClassicalAttentionParams::init(d, config_.n_heads, rng);
    syntactic_ = {xavier(4, 1, rng), zeros_param(1, 1)};
    fusion_ = fusion::FusionParams::init(d, config_.hidden, config_.lambda_target, rng);
    classifier_ = Linear::zeros(d, config_.num_classes);
}

ParameterList Model::parameters() const {
    ParameterList out;
    out.push_back({"embedding", embedding_, ParamGroup::Classical});
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const std::string p = "block" + std::to_string(b);
        blocks_[b].attention.collect(p + ".memory", out);
        blocks_[b].norm_attention.collect(p + ".norm_attention", ParamGroup::Classical, out);
        blocks_[b].ff_in.collect(p + ".ff_in", ParamGroup::Classical, out);
        blocks_[b].ff_out.collect(p + ".ff_out", ParamGroup::Classical, out);
        blocks_[b].norm_ff.collect(p + ".norm_ff", ParamGroup::Classical, out);
    }
    circuit_.collect("circuit", out);
    up_projection_.collect("circuit.up_projection", ParamGroup::Quantum, out);
    classical_.collect("classical_attention", out);
    out.push_back({"complexity.syntactic.weight", syntactic_.weight, ParamGroup::Fusion});
    out.push_back({"complexity.syntactic.bias", syntactic_.bias, ParamGroup::Fusion});
    fusion_.collect("fusion", out);
    classifier_.collect("classifier", ParamGroup::Classical, out);
    return out;
}

long Model::count_parameters(const ModelConfig& c) {
    c.validate();
    const long d = c.d_model, q = c.n_qubits, L = c.max_depth, M = c.memory_slots, h = c.hidden;
    const long heads = c.n_heads;
    const long linear_dd = d * d + d;
    long total = long(c.vocab_size) * d;
    const long memory = heads * (d * q + M * q + M * (d / heads)) + (2 * d * d + d);
    const long block = memory + 2 * d + (d * 4 * d + 4 * d) + (4 * d * d + d) + 2 * d;
    total += c.n_layers * block;
    total += d * q + (4 * h + h + h + 1) + L * q * 3 + L * q + L * (q - 1);
    total += q * d + d;
    total += 4 * linear_dd;
    total += 4 + 1;
    total += (3 * h + h + h + 1) + 3 * linear_dd;
    total += d * c.num_classes + c.num_classes;
    return total;
}

ForwardResult Model::forward(std::span<const int> tokens, const ForwardOptions& options, Rng& rng) const {
    if (tokens.empty()) throw InvalidInputError("model input is empty");
    std::span<const int> ids = tokens;
    if (static_cast<int>(ids.size()) > config_.max_seq_len) {
        if (!config_.truncate) {
            throw InvalidInputError("sequence of " + std::to_string(ids.size()) + " tokens exceeds max_seq_len " +
                                    std::to_string(config_.max_seq_len));
        }
        ids = ids.first(std::size_t(config_.max_seq_len));
    }
    for (int id : ids) {
        if (id < 0 || id >= config_.vocab_size) {
            throw InvalidInputError("token id " + std::to_string(id) + " outside vocabulary of " +
                                    std::to_string(config_.vocab_size));
        }
    }
    const int T = static_cast<int>(ids.size());

    ForwardResult out;
    const ag::Tensor x0 = ag::embedding(embedding_, ids) + ag::Tensor(ag::Matrix(positions_.topRows(T)));

    ag::Tensor h = x0;
    for (const Block& block : blocks_) {
        out.block_inputs.push_back(h.value());
        ag::Tensor attended = h;
        if (options.quantum_active) {
            qmemory::MultiHeadTrace trace;
            attended = qmemory::multihead_forward(h, block.attention, &trace);
            out.memory_traces.push_back(std::move(trace));
        }
        h = block.norm_attention(h + attended);
        h = block.norm_ff(h + block.ff_out(ag::relu(block.ff_in(h))));
    }

    ag::Tensor quantum_tokens = h;
    if (options.quantum_active) {
        adaptive::AdaptiveOutput circ =
            adaptive::forward(h, circuit_, options.mode, rng, options.noise, options.depth_cap);
        quantum_tokens = h + up_projection_(circ.expectations);
        out.quantum_outputs = circ.expectations;
        out.depth_scores = circ.depth_scores;
        out.depth_targets.resize(T);
        for (int t = 0; t < T; ++t) out.depth_targets(t) = complexity::normalized_entropy(h.value().row(t).transpose());
        for (const auto& c : circ.configs) {
            out.trace.depths.push_back(c.depth);
            for (int l = 0; l < c.depth; ++l) {
                for (int i = 0; i < c.n_qubits; ++i) {
                    if (!c.kept(l, i)) continue;
                    switch (c.axis(l, i)) {
                        case qsim::GateKind::RX:
                            ++out.trace.gate_histogram[0];
                            break;
                        case qsim::GateKind::RY:
                            ++out.trace.gate_histogram[1];
                            break;
                        default:
                            ++out.trace.gate_histogram[2];
                            break;
                    }
                }
            }
        }
    }

    const ag::Tensor a_quantum = ag::mean_rows(quantum_tokens);
    const ag::Tensor a_classical = ag::mean_rows(fusion::classical_attention(x0, classical_));
    if (options.lambda_override) {
        out.lambda = ag::Tensor::scalar(*options.lambda_override);
    } else {
        const ag::Tensor c = complexity::pathway_complexity_row(x0.value(), T, config_.max_seq_len, syntactic_);
        out.lambda = fusion::fusion_weight(c, fusion_);
    }
    out.trace.lambda = out.lambda.item();

    const auto gates = fusion::pathway_gates(a_quantum, a_classical, fusion_);
    const ag::Tensor residual = (ag::mean_rows(x0) + ag::mean_rows(h)) * 0.5;
    const ag::Tensor fused = fusion::fuse(a_quantum, a_classical, out.lambda, gates, residual, fusion_);
    out.logits = classifier_(fused);
    return out;
}

ag::Matrix Model::forward_batch(const std::vector<std::vector<int>>& batch, const ForwardOptions& options,
                                std::uint64_t seed) const {
    ag::NoGradGuard guard;
    ag::Matrix logits(static_cast<ag::Index>(batch.size()), config_.num_classes);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Rng rng(mix_seed(seed, i));
        logits.row(static_cast<ag::Index>(i)) = forward(batch[i], options, rng).logits.value();
    }
    return logits;
}

}  // namespace aqcf
