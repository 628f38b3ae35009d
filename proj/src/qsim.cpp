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

#include "aqcf/qsim.hpp"

#include <numbers>

namespace aqcf::qsim {

std::string to_string(GateKind kind) {
    switch (kind) {
        case GateKind::RX:
            return "RX";
        case GateKind::RY:
            return "RY";
        case GateKind::RZ:
            return "RZ";
        case GateKind::CNOT:
            return "CNOT";
    }
    return "?";
}

void validate(const Gate& gate, int n_qubits) {
    auto bad = [&](const std::string& what) {
        throw InvalidInputError(to_string(gate.kind) + ": " + what + " for " + std::to_string(n_qubits) +
                                "-qubit state");
    };
    if (gate.target < 0 || gate.target >= n_qubits) bad("target " + std::to_string(gate.target) + " out of range");
    if (gate.kind == GateKind::CNOT) {
        if (gate.control < 0 || gate.control >= n_qubits) {
            bad("control " + std::to_string(gate.control) + " out of range");
        }
        if (gate.control == gate.target) bad("control equals target");
    }
}

QuantumState simulate(int n_qubits, std::span<const Gate> gates) {
    QuantumState state(n_qubits);
    for (const Gate& g : gates) state.apply(g);
    return state;
}

Eigen::VectorXd adjoint_gradient(int n_qubits, std::span<const Gate> gates,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights) {
    const QuantumState final_state = simulate(n_qubits, gates);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gates.size()));
    adjoint_sweep(final_state, gates, weights, [&](std::size_t k, const QuantumState& lambda, const QuantumState& psi) {
        const Gate& g = gates[k];
        if (!g.is_rotation()) return;
        const auto dm = rotation_derivative<double>(g.kind, g.angle);
        grad(static_cast<Eigen::Index>(k)) = 2.0 * matrix_element(lambda, psi, g.target, dm).real();
    });
    return grad;
}

double encoding_angle(double x) { return std::atan(x); }

std::vector<Gate> encoding_gates(const Eigen::Ref<const Eigen::VectorXd>& x) {
    std::vector<Gate> gates;
    gates.reserve(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x(i))) {
            throw InvalidInputError("angle_encode: component " + std::to_string(i) + " is not finite");
        }
        gates.push_back(Gate::ry(static_cast<int>(i), encoding_angle(x(i))));
    }
    return gates;
}

QuantumState angle_encode(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const auto gates = encoding_gates(x);
    return simulate(static_cast<int>(x.size()), gates);
}

Eigen::VectorXd run_circuit(const Eigen::Ref<const Eigen::VectorXd>& x, std::span<const Gate> gates) {
    QuantumState state = angle_encode(x);
    for (const Gate& g : gates) state.apply(g);
    return expect_z_all(state);
}

double param_shift_grad(const Eigen::Ref<const Eigen::VectorXd>& x, std::span<const Gate> gates, std::size_t k,
                        int qubit) {
    if (k >= gates.size()) throw InvalidInputError("parameter index " + std::to_string(k) + " out of range");
    if (!gates[k].is_rotation()) {
        throw NotDifferentiableError("gate " + std::to_string(k) + " is a CNOT and has no parameter");
    }
    std::vector<Gate> shifted(gates.begin(), gates.end());
    const double base = gates[k].angle;
    auto evaluate = [&](double angle) {
        shifted[k].angle = angle;
        QuantumState state = angle_encode(x);
        for (const Gate& g : shifted) state.apply(g);
        return expect_z(state, qubit);
    };
    const double plus = evaluate(base + std::numbers::pi / 2);
    const double minus = evaluate(base - std::numbers::pi / 2);
    return (plus - minus) / 2.0;
}

void NoiseConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ConfigError("depolarizing epsilon " + std::to_string(epsilon) + " outside [0, 1]");
    }
    if (trajectories < 1) throw ConfigError("trajectory count must be >= 1");
}

double depolarize(double value, const NoiseConfig& cfg) {
    cfg.validate();
    return (1.0 - cfg.epsilon) * value;
}

bool depolarize(QuantumState& state, const NoiseConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) >= cfg.epsilon) return false;
    std::uniform_int_distribution<Eigen::Index> pick(0, state.dim() - 1);
    state.set_basis_state(pick(rng));
    return true;
}

}  // namespace aqcf::qsim
