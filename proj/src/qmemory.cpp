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

#include "aqcf/qmemory.hpp"

#include <cmath>

namespace aqcf::qmemory {

namespace {

void check_lengths(Eigen::Index a, Eigen::Index b) {
    if (a != b) {
        throw DimensionError("quantum_similarity: query length " + std::to_string(a) + " vs key length " +
                             std::to_string(b));
    }
    if (a < 1) throw DimensionError("quantum_similarity: empty vectors");
}

// Gate offsets inside similarity_circuit for n qubits.
struct Layout {
    int n;
    int encode_q() const { return 0; }
    int phase_q() const { return 2 * n - 1; }
    int phase_k() const { return 3 * n - 1; }
    int decode_k() const { return 5 * n - 2; }
};

}  // namespace

std::vector<qsim::Gate> similarity_circuit(const Eigen::Ref<const Eigen::VectorXd>& q,
                                           const Eigen::Ref<const Eigen::VectorXd>& k) {
    check_lengths(q.size(), k.size());
    const int n = static_cast<int>(q.size());
    std::vector<qsim::Gate> gates;
    gates.reserve(std::size_t(6 * n));
    for (int i = 0; i < n; ++i) gates.push_back(qsim::Gate::ry(i, qsim::encoding_angle(q(i))));
    for (int i = 0; i + 1 < n; ++i) gates.push_back(qsim::Gate::cnot(i, i + 1));
    for (int i = 0; i < n; ++i) gates.push_back(qsim::Gate::rz(i, qsim::encoding_angle(q(i))));
    for (int i = 0; i < n; ++i) gates.push_back(qsim::Gate::rz(i, -qsim::encoding_angle(k(i))));
    for (int i = n - 2; i >= 0; --i) gates.push_back(qsim::Gate::cnot(i, i + 1));
    for (int i = 0; i < n; ++i) gates.push_back(qsim::Gate::ry(i, -qsim::encoding_angle(k(i))));
    return gates;
}

double quantum_similarity(const Eigen::Ref<const Eigen::VectorXd>& q, const Eigen::Ref<const Eigen::VectorXd>& k) {
    const auto gates = similarity_circuit(q, k);
    return qsim::expect_z(qsim::simulate(static_cast<int>(q.size()), gates), 0);
}

ag::Tensor similarity_matrix(const ag::Tensor& queries, const ag::Tensor& keys) {
    if (queries.cols() != keys.cols()) {
        throw DimensionError("similarity_matrix: queries " + ag::to_string(queries.shape()) + " vs keys " +
                             ag::to_string(keys.shape()));
    }
    const ag::Index T = queries.rows();
    const ag::Index M = keys.rows();
    const int n = static_cast<int>(queries.cols());
    ag::Matrix s(T, M);
    for (ag::Index t = 0; t < T; ++t) {
        for (ag::Index m = 0; m < M; ++m) {
            s(t, m) = quantum_similarity(queries.value().row(t).transpose(), keys.value().row(m).transpose());
        }
    }
    const ag::Matrix qv = queries.value();
    const ag::Matrix kv = keys.value();
    return ag::custom("quantum_similarity", {queries, keys}, std::move(s), [=](const ag::Matrix& g) {
        ag::Matrix dq = ag::Matrix::Zero(T, n);
        ag::Matrix dk = ag::Matrix::Zero(M, n);
        const Layout at{n};
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        for (ag::Index t = 0; t < T; ++t) {
            const Eigen::VectorXd q = qv.row(t).transpose();
            for (ag::Index m = 0; m < M; ++m) {
                if (g(t, m) == 0.0) continue;
                const Eigen::VectorXd k = kv.row(m).transpose();
                w(0) = g(t, m);
                const auto gates = similarity_circuit(q, k);
                const Eigen::VectorXd dg = qsim::adjoint_gradient(n, gates, w);
                for (int i = 0; i < n; ++i) {
                    dq(t, i) += (dg(at.encode_q() + i) + dg(at.phase_q() + i)) / (1.0 + q(i) * q(i));
                    dk(m, i) -= (dg(at.phase_k() + i) + dg(at.decode_k() + i)) / (1.0 + k(i) * k(i));
                }
            }
        }
        return std::vector<ag::Matrix>{dq, dk};
    });
}

MemoryBank MemoryBank::init(int slots, int n_qubits, int value_dim, double gamma, Rng& rng) {
    MemoryBank bank{uniform(slots, n_qubits, -1.0, 1.0, rng), uniform(slots, value_dim, -0.5, 0.5, rng), gamma};
    bank.validate();
    return bank;
}

void MemoryBank::validate() const {
    if (keys.rows() < 1) throw ConfigError("memory bank needs at least one slot");
    if (values.rows() != keys.rows()) throw ConfigError("memory bank keys and values disagree on slot count");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("memory update rate gamma outside (0, 1]");
}

Eigen::VectorXd retrieval_weights(const Eigen::Ref<const Eigen::VectorXd>& similarities, int n_qubits) {
    const Eigen::ArrayXd logits = similarities.array() / std::sqrt(static_cast<double>(n_qubits));
    Eigen::ArrayXd e = (logits - logits.maxCoeff()).exp();
    return (e / e.sum()).matrix();
}

MemoryReadout retrieve(const Eigen::Ref<const Eigen::VectorXd>& q, const MemoryBank& bank) {
    bank.validate();
    Eigen::VectorXd s(bank.slots());
    for (int m = 0; m < bank.slots(); ++m) s(m) = quantum_similarity(q, bank.keys.value().row(m).transpose());
    MemoryReadout out;
    out.weights = retrieval_weights(s, bank.n_qubits());
    out.retrieved = bank.values.value().transpose() * out.weights;
    return out;
}

ag::Tensor retrieve_rows(const ag::Tensor& queries, const MemoryBank& bank) {
    const ag::Tensor s = similarity_matrix(queries, bank.keys);
    const ag::Tensor alpha = ag::softmax_rows(ag::scale(s, 1.0 / std::sqrt(static_cast<double>(bank.n_qubits()))));
    return ag::matmul(alpha, bank.values);
}

int update(MemoryBank& bank, const Eigen::Ref<const Eigen::VectorXd>& new_key,
           const Eigen::Ref<const Eigen::VectorXd>& new_value) {
    bank.validate();
    if (new_key.size() != bank.n_qubits() || new_value.size() != bank.value_dim()) {
        throw DimensionError("memory update: key/value shapes do not match the bank");
    }
    int best = 0;
    double best_s = -2.0;
    for (int m = 0; m < bank.slots(); ++m) {
        const double s = quantum_similarity(new_key, bank.keys.value().row(m).transpose());
        if (s > best_s) {
            best_s = s;
            best = m;
        }
    }
    auto& k = bank.keys.mutable_value();
    auto& v = bank.values.mutable_value();
    k.row(best) = (1.0 - bank.gamma) * k.row(best) + bank.gamma * new_key.transpose();
    v.row(best) = (1.0 - bank.gamma) * v.row(best) + bank.gamma * new_value.transpose();
    return best;
}

MultiHeadMemory MultiHeadMemory::init(int d, int n_heads, int slots, int n_qubits, double gamma, Rng& rng) {
    if (n_heads < 1 || d % n_heads != 0) {
        throw ConfigError("multi-head memory: " + std::to_string(n_heads) + " heads do not divide d = " +
                          std::to_string(d));
    }
    MultiHeadMemory mem;
    for (int h = 0; h < n_heads; ++h) {
        mem.banks.push_back(MemoryBank::init(slots, n_qubits, d / n_heads, gamma, rng));
        mem.query_projections.push_back(xavier(d, n_qubits, rng));
    }
    mem.gate = Linear::init(2 * d, d, rng);
    return mem;
}

void MultiHeadMemory::collect(const std::string& prefix, ParameterList& out) const {
    for (std::size_t h = 0; h < banks.size(); ++h) {
        const std::string p = prefix + ".head" + std::to_string(h);
        out.push_back({p + ".query", query_projections[h], ParamGroup::Quantum});
        out.push_back({p + ".keys", banks[h].keys, ParamGroup::Quantum});
        out.push_back({p + ".values", banks[h].values, ParamGroup::Quantum});
    }
    gate.collect(prefix + ".gate", ParamGroup::Quantum, out);
}

ag::Tensor multihead_forward(const ag::Tensor& x, const MultiHeadMemory& memory, MultiHeadTrace* trace) {
    const int heads = memory.n_heads();
    if (heads < 1 || x.cols() % heads != 0) {
        throw ConfigError("multi-head memory: " + std::to_string(heads) + " heads do not divide d = " +
                          std::to_string(x.cols()));
    }
    std::vector<ag::Tensor> outputs;
    outputs.reserve(std::size_t(heads));
    if (trace) trace->queries.clear();
    for (int h = 0; h < heads; ++h) {
        const ag::Tensor q = ag::matmul(x, memory.query_projections[std::size_t(h)]);
        if (trace) trace->queries.push_back(q.value());
        outputs.push_back(retrieve_rows(q, memory.banks[std::size_t(h)]));
    }
    const ag::Tensor o = ag::concat_cols(outputs);
    if (o.cols() != x.cols()) {
        throw DimensionError("multi-head memory: head outputs " + ag::to_string(o.shape()) + " vs input " +
                             ag::to_string(x.shape()));
    }
    const ag::Tensor xo[] = {x, o};
    const ag::Tensor g = ag::sigmoid(memory.gate(ag::concat_cols(xo)));
    return g * o + (1.0 - g) * x;
}

}  // namespace aqcf::qmemory
