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

#include "aqcf/adaptive_circuit.hpp"

#include <algorithm>
#include <cmath>

#include "aqcf/complexity.hpp"

namespace aqcf::adaptive {

namespace {

constexpr qsim::GateKind kAxisKinds[kAxes] = {qsim::GateKind::RX, qsim::GateKind::RY, qsim::GateKind::RZ};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& z) {
    Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
    return p / p.sum();
}

ag::Matrix stats_rows(const ag::Matrix& x_q) {
    ag::Matrix s(x_q.rows(), 4);
    for (ag::Index t = 0; t < x_q.rows(); ++t) {
        s.row(t) = complexity::quantum_stats(x_q.row(t).transpose()).as_vector().transpose();
    }
    return s;
}

enum class Role { Encode, Rotation, Edge, AbsentEdge };

struct Op {
    qsim::Gate gate;
    Role role;
    int layer;
    int index;  // qubit, or edge start
};

std::vector<Op> build_ops(const Eigen::Ref<const Eigen::VectorXd>& x_q, const CircuitConfig& config,
                          const ag::Matrix& angles) {
    const int n = config.n_qubits;
    std::vector<Op> ops;
    for (int i = 0; i < n; ++i) ops.push_back({qsim::Gate::ry(i, qsim::encoding_angle(x_q(i))), Role::Encode, -1, i});
    for (int l = 0; l < config.depth; ++l) {
        for (int i = 0; i < n; ++i) {
            if (!config.kept(l, i)) continue;
            ops.push_back({qsim::Gate::rotation(config.axis(l, i), i, angles(l, i)), Role::Rotation, l, i});
        }
        const auto& present = config.edges[std::size_t(l)];
        for (int i = 0; i + 1 < n; ++i) {
            const bool on = std::find(present.begin(), present.end(), i) != present.end();
            ops.push_back({qsim::Gate::cnot(i, i + 1), on ? Role::Edge : Role::AbsentEdge, l, i});
        }
    }
    return ops;
}

}  // namespace

AdaptiveCircuitParams AdaptiveCircuitParams::init(int d, int n_qubits, int max_depth, double p_dropout, int hidden,
                                                  Rng& rng) {
    AdaptiveCircuitParams p;
    p.n_qubits = n_qubits;
    p.max_depth = max_depth;
    p.p_dropout = p_dropout;
    p.validate();
    p.projection = xavier(d, n_qubits, rng);
    p.depth_net = SigmoidMlp::init(4, hidden, rng);
    p.gate_logits = zeros_param(ag::Index(max_depth) * n_qubits, kAxes);
    p.rotation_angles = uniform(max_depth, n_qubits, -0.5, 0.5, rng);
    p.entangle_logits = zeros_param(max_depth, std::max(0, n_qubits - 1));
    return p;
}

void AdaptiveCircuitParams::validate() const {
    if (n_qubits < 1 || n_qubits > qsim::kMaxQubits) throw ConfigError("adaptive circuit: n_q outside [1, 24]");
    if (max_depth < 1) throw ConfigError("adaptive circuit: L_max must be >= 1");
    if (!(p_dropout >= 0.0 && p_dropout < 1.0)) throw ConfigError("adaptive circuit: p_dropout outside [0, 1)");
}

void AdaptiveCircuitParams::collect(const std::string& prefix, ParameterList& out) const {
    out.push_back({prefix + ".projection", projection, ParamGroup::Quantum});
    depth_net.collect(prefix + ".depth_net", ParamGroup::Quantum, out);
    out.push_back({prefix + ".gate_logits", gate_logits, ParamGroup::Quantum});
    out.push_back({prefix + ".rotation_angles", rotation_angles, ParamGroup::Quantum});
    out.push_back({prefix + ".entangle_logits", entangle_logits, ParamGroup::Quantum});
}

int depth_from_score(double score, int max_depth) {
    const double raw = 1.0 + std::floor(score * static_cast<double>(max_depth - 1));
    return static_cast<int>(std::clamp(raw, 1.0, static_cast<double>(max_depth)));
}

double depth_score(const Eigen::Ref<const Eigen::VectorXd>& x_q, const AdaptiveCircuitParams& params) {
    ag::NoGradGuard guard;
    const Eigen::Vector4d s = complexity::quantum_stats(x_q).as_vector();
    return params.depth_net(ag::Tensor::row(s)).item();
}

int predict_depth(const Eigen::Ref<const Eigen::VectorXd>& x_q, const AdaptiveCircuitParams& params) {
    return depth_from_score(depth_score(x_q, params), params.max_depth);
}

std::vector<qsim::GateKind> select_gates(const AdaptiveCircuitParams& params, int depth, Mode mode, Rng& rng) {
    const int n = params.n_qubits;
    std::vector<qsim::GateKind> axes;
    axes.reserve(std::size_t(depth * n));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int row = 0; row < depth * n; ++row) {
        const Eigen::VectorXd logits = params.gate_logits.value().row(row).transpose();
        int pick = 0;
        if (mode == Mode::Infer) {
            for (int a = 1; a < kAxes; ++a) {
                if (logits(a) > logits(pick)) pick = a;
            }
        } else {
            const Eigen::VectorXd p = softmax(logits);
            const double u = unit(rng);
            double acc = 0.0;
            pick = kAxes - 1;
            for (int a = 0; a < kAxes; ++a) {
                acc += p(a);
                if (u < acc) {
                    pick = a;
                    break;
                }
            }
        }
        axes.push_back(kAxisKinds[pick]);
    }
    return axes;
}

std::vector<bool> sample_dropout_mask(int depth, int n_qubits, double p_dropout, Mode mode, Rng& rng) {
    std::vector<bool> keep(std::size_t(depth * n_qubits), true);
    if (mode == Mode::Infer || p_dropout <= 0.0) return keep;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = unit(rng) >= p_dropout;
    return keep;
}

std::vector<int> entanglement_layer(int layer, const AdaptiveCircuitParams& params, Mode mode, Rng& rng) {
    std::vector<int> edges;
    if (params.n_qubits < 2) return edges;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i + 1 < params.n_qubits; ++i) {
        const double p = sigmoid(params.entangle_logits.value()(layer, i));
        const bool on = mode == Mode::Infer ? p >= 0.5 : unit(rng) < p;
        if (on) edges.push_back(i);
    }
    return edges;
}

CircuitConfig realize_config(const Eigen::Ref<const Eigen::VectorXd>& x_q, const AdaptiveCircuitParams& params,
                             Mode mode, Rng& rng, int depth_cap) {
    const int cap = depth_cap > 0 ? std::min(depth_cap, params.max_depth) : params.max_depth;
    CircuitConfig c;
    c.n_qubits = params.n_qubits;
    c.depth = depth_from_score(depth_score(x_q, params), cap);
    c.gate_axes = select_gates(params, c.depth, mode, rng);
    c.keep = sample_dropout_mask(c.depth, c.n_qubits, params.p_dropout, mode, rng);
    for (int l = 0; l < c.depth; ++l) c.edges.push_back(entanglement_layer(l, params, mode, rng));
    return c;
}

std::vector<qsim::Gate> build_gates(const Eigen::Ref<const Eigen::VectorXd>& x_q, const CircuitConfig& config,
                                    const ag::Matrix& angles) {
    std::vector<qsim::Gate> gates;
    for (const Op& op : build_ops(x_q, config, angles)) {
        if (op.role != Role::AbsentEdge) gates.push_back(op.gate);
    }
    return gates;
}

ag::Tensor circuit_expectations(const ag::Tensor& x_q, const ag::Tensor& angles, const ag::Tensor& gate_probs,
                                const ag::Tensor& entangle_probs, const std::vector<CircuitConfig>& configs,
                                const qsim::NoiseConfig& noise, Rng& rng) {
    noise.validate();
    const ag::Index tokens = x_q.rows();
    const int n = static_cast<int>(x_q.cols());
    if (static_cast<ag::Index>(configs.size()) != tokens) {
        throw DimensionError("adaptive circuit: " + std::to_string(configs.size()) + " configs for " +
                             std::to_string(tokens) + " inputs");
    }
    const bool trajectory = noise.mode == qsim::NoiseMode::Trajectory;
    const double damping = trajectory ? 1.0 : 1.0 - noise.epsilon;

    ag::Matrix out(tokens, n);
    std::vector<bool> replaced(std::size_t(tokens), false);
    for (ag::Index t = 0; t < tokens; ++t) {
        const Eigen::VectorXd xt = x_q.value().row(t).transpose();
        qsim::QuantumState state(n);
        for (const Op& op : build_ops(xt, configs[std::size_t(t)], angles.value())) {
            if (op.role != Role::AbsentEdge) state.apply(op.gate);
        }
        if (trajectory && noise.active()) replaced[std::size_t(t)] = qsim::depolarize(state, noise, rng);
        out.row(t) = qsim::expect_z_all(state).transpose() * damping;
    }

    const ag::Matrix xq_value = x_q.value();
    const ag::Matrix angle_value = angles.value();
    const ag::Index prob_rows = gate_probs.rows();
    const ag::Index edge_cols = entangle_probs.cols();
    const ag::Index angle_rows = angles.rows();
    return ag::custom(
        "adaptive_circuit", {x_q, angles, gate_probs, entangle_probs}, std::move(out),
        [=](const ag::Matrix& g) {
            ag::Matrix d_xq = ag::Matrix::Zero(tokens, n);
            ag::Matrix d_angles = ag::Matrix::Zero(angle_rows, n);
            ag::Matrix d_probs = ag::Matrix::Zero(prob_rows, kAxes);
            ag::Matrix d_edges = ag::Matrix::Zero(angle_rows, edge_cols);
            for (ag::Index t = 0; t < tokens; ++t) {
                if (replaced[std::size_t(t)]) continue;
                const Eigen::VectorXd xt = xq_value.row(t).transpose();
                const std::vector<Op> ops = build_ops(xt, configs[std::size_t(t)], angle_value);
                qsim::QuantumState psi(n);
                for (const Op& op : ops) {
                    if (op.role != Role::AbsentEdge) psi.apply(op.gate);
                }
                qsim::QuantumState lambda = psi;
                const Eigen::VectorXd w = g.row(t).transpose() * damping;
                for (ag::Index i = 0; i < lambda.dim(); ++i) {
                    double diag = 0.0;
                    for (int q = 0; q < n; ++q) diag += ((i >> q) & 1) ? -w(q) : w(q);
                    lambda.amplitudes()(i) *= diag;
                }
                for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
                    const Op& op = *it;
                    if (op.role != Role::AbsentEdge) psi.apply_adjoint(op.gate);
                    switch (op.role) {
                        case Role::Encode: {
                            const auto dm = qsim::rotation_derivative<double>(op.gate.kind, op.gate.angle);
                            const double x = xt(op.index);
                            d_xq(t, op.index) +=
                                2.0 * qsim::matrix_element(lambda, psi, op.index, dm).real() / (1.0 + x * x);
                            break;
                        }
                        case Role::Rotation: {
                            const auto dm = qsim::rotation_derivative<double>(op.gate.kind, op.gate.angle);
                            d_angles(op.layer, op.index) += 2.0 * qsim::matrix_element(lambda, psi, op.index, dm).real();
                            const ag::Index row = ag::Index(op.layer) * n + op.index;
                            for (int a = 0; a < kAxes; ++a) {
                                const auto m = qsim::rotation_matrix<double>(kAxisKinds[a], op.gate.angle);
                                d_probs(row, a) += 2.0 * qsim::matrix_element(lambda, psi, op.index, m).real();
                            }
                            break;
                        }
                        case Role::Edge:
                        case Role::AbsentEdge: {
                            const auto with = qsim::cnot_element(lambda, psi, op.index, op.index + 1);
                            const auto without = lambda.amplitudes().dot(psi.amplitudes());
                            d_edges(op.layer, op.index) += 2.0 * (with - without).real();
                            break;
                        }
                    }
                    if (op.role != Role::AbsentEdge) lambda.apply_adjoint_unaudited(op.gate);
                }
            }
            return std::vector<ag::Matrix>{d_xq, d_angles, d_probs, d_edges};
        });
}

AdaptiveOutput forward(const ag::Tensor& x, const AdaptiveCircuitParams& params, Mode mode, Rng& rng,
                       const qsim::NoiseConfig& noise, int depth_cap) {
    if (x.cols() != params.projection.rows()) {
        throw DimensionError("adaptive circuit: input " + ag::to_string(x.shape()) + " vs projection " +
                             ag::to_string(params.projection.shape()));
    }
    AdaptiveOutput out;
    out.projected = ag::matmul(x, params.projection);
    out.depth_scores = params.depth_net(ag::Tensor(stats_rows(out.projected.value())));

    const int cap = depth_cap > 0 ? std::min(depth_cap, params.max_depth) : params.max_depth;
    for (ag::Index t = 0; t < x.rows(); ++t) {
        CircuitConfig c;
        c.n_qubits = params.n_qubits;
        c.depth = depth_from_score(out.depth_scores.value()(t, 0), cap);
        c.gate_axes = select_gates(params, c.depth, mode, rng);
        c.keep = sample_dropout_mask(c.depth, c.n_qubits, params.p_dropout, mode, rng);
        for (int l = 0; l < c.depth; ++l) c.edges.push_back(entanglement_layer(l, params, mode, rng));
        out.configs.push_back(std::move(c));
    }

    const ag::Tensor gate_probs = ag::softmax_rows(params.gate_logits);
    const ag::Tensor edge_probs = ag::sigmoid(params.entangle_logits);
    out.expectations = circuit_expectations(out.projected, params.rotation_angles, gate_probs, edge_probs, out.configs,
                                            noise, rng);
    return out;
}

}  // namespace aqcf::adaptive
