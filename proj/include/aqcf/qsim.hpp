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

// Dense statevector simulation of small qubit registers.
//
// Amplitudes are stored contiguously and indexed by the integer basis label,
// with qubit 0 as the least significant bit. Gates are applied by strided
// in-place kernels; no 2^n x 2^n matrix is ever formed.

#pragma once

#include <Eigen/Core>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aqcf/errors.hpp"

namespace aqcf::qsim {

inline constexpr int kMaxQubits = 24;

enum class GateKind : std::uint8_t { RX, RY, RZ, CNOT };

std::string to_string(GateKind kind);

struct Gate {
    GateKind kind = GateKind::RY;
    int target = 0;
    int control = -1;  // CNOT only
    double angle = 0.0;  // rotations only

    static Gate rx(int qubit, double angle) { return {GateKind::RX, qubit, -1, angle}; }
    static Gate ry(int qubit, double angle) { return {GateKind::RY, qubit, -1, angle}; }
    static Gate rz(int qubit, double angle) { return {GateKind::RZ, qubit, -1, angle}; }
    static Gate rotation(GateKind kind, int qubit, double angle) { return {kind, qubit, -1, angle}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, target, control, 0.0}; }

    bool is_rotation() const { return kind != GateKind::CNOT; }
};

/// Throws InvalidInputError if the gate does not fit an n-qubit register.
void validate(const Gate& gate, int n_qubits);

/// Records the worst |<psi|psi> - 1| seen after any gate while enabled.
/// Off by default; tests switch it on to audit whole workloads.
class NormAudit {
public:
    static void enable(bool on) { enabled_.store(on, std::memory_order_relaxed); }
    static bool enabled() { return enabled_.load(std::memory_order_relaxed); }
    static void reset() {
        worst_.store(0.0);
        checks_.store(0);
    }
    static double worst_deviation() { return worst_.load(); }
    static long checks() { return checks_.load(); }
    static void record(double deviation) {
        checks_.fetch_add(1, std::memory_order_relaxed);
        double seen = worst_.load();
        while (deviation > seen && !worst_.compare_exchange_weak(seen, deviation)) {
        }
    }

private:
    static inline std::atomic<bool> enabled_{false};
    static inline std::atomic<double> worst_{0.0};
    static inline std::atomic<long> checks_{0};
};

template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <typename Scalar>
Matrix2c<Scalar> rotation_matrix(GateKind kind, double angle) {
    using C = std::complex<Scalar>;
    const Scalar c = static_cast<Scalar>(std::cos(angle / 2));
    const Scalar s = static_cast<Scalar>(std::sin(angle / 2));
    Matrix2c<Scalar> m;
    switch (kind) {
        case GateKind::RX:
            m << C(c, 0), C(0, -s), C(0, -s), C(c, 0);
            break;
        case GateKind::RY:
            m << C(c, 0), C(-s, 0), C(s, 0), C(c, 0);
            break;
        case GateKind::RZ:
            m << C(c, -s), C(0, 0), C(0, 0), C(c, s);
            break;
        case GateKind::CNOT:
            throw NotDifferentiableError("CNOT has no rotation matrix");
    }
    return m;
}

/// d/dtheta of the rotation: -i/2 * sigma * R(theta).
template <typename Scalar>
Matrix2c<Scalar> rotation_derivative(GateKind kind, double angle) {
    using C = std::complex<Scalar>;
    Matrix2c<Scalar> pauli;
    switch (kind) {
        case GateKind::RX:
            pauli << C(0), C(1), C(1), C(0);
            break;
        case GateKind::RY:
            pauli << C(0), C(0, -1), C(0, 1), C(0);
            break;
        case GateKind::RZ:
            pauli << C(1), C(0), C(0), C(-1);
            break;
        case GateKind::CNOT:
            throw NotDifferentiableError("CNOT has no continuous parameter");
    }
    return C(0, Scalar(-0.5)) * pauli * rotation_matrix<Scalar>(kind, angle);
}

template <typename Scalar>
class BasicQuantumState {
public:
    using Complex = std::complex<Scalar>;
    using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
    using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    /// |0...0> on n qubits.
    explicit BasicQuantumState(int n_qubits) : n_(n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw CapacityError("qubit count " + std::to_string(n_qubits) + " outside [1, " +
                                std::to_string(kMaxQubits) + "]");
        }
        amps_ = Amplitudes::Zero(Eigen::Index{1} << n_qubits);
        amps_(0) = Complex(1, 0);
    }

    int n_qubits() const { return n_; }
    Eigen::Index dim() const { return amps_.size(); }
    const Amplitudes& amplitudes() const { return amps_; }
    Amplitudes& amplitudes() { return amps_; }
    Complex operator[](Eigen::Index i) const { return amps_(i); }

    Scalar norm_squared() const { return amps_.squaredNorm(); }

    /// Resets to the computational basis state |index>.
    void set_basis_state(Eigen::Index index) {
        amps_.setZero();
        amps_(index) = Complex(1, 0);
    }

    void apply(const Gate& gate) {
        apply_unaudited(gate);
        if (NormAudit::enabled()) NormAudit::record(std::abs(double(norm_squared()) - 1.0));
    }

    /// For unnormalized vectors such as adjoint costates.
    void apply_unaudited(const Gate& gate) {
        validate(gate, n_);
        if (gate.kind == GateKind::CNOT) {
            apply_cnot(gate.control, gate.target);
        } else if (gate.kind == GateKind::RZ) {
            apply_phase(gate.target, gate.angle);
        } else {
            apply_matrix(gate.target, rotation_matrix<Scalar>(gate.kind, gate.angle));
        }
    }

    /// Applies the inverse of `gate` (rotation by -angle; CNOT is self-inverse).
    void apply_adjoint(const Gate& gate) {
        Gate inverse = gate;
        inverse.angle = -gate.angle;
        apply(inverse);
    }

    void apply_adjoint_unaudited(const Gate& gate) {
        Gate inverse = gate;
        inverse.angle = -gate.angle;
        apply_unaudited(inverse);
    }

    /// Applies an arbitrary (not necessarily unitary) 2x2 operator to one qubit.
    void apply_matrix(int qubit, const Matrix2c<Scalar>& m) {
        const Eigen::Index stride = Eigen::Index{1} << qubit;
        const Eigen::Index d = dim();
        Complex* a = amps_.data();
        for (Eigen::Index block = 0; block < d; block += 2 * stride) {
            for (Eigen::Index j = block; j < block + stride; ++j) {
                const Complex a0 = a[j];
                const Complex a1 = a[j + stride];
                a[j] = m(0, 0) * a0 + m(0, 1) * a1;
                a[j + stride] = m(1, 0) * a0 + m(1, 1) * a1;
            }
        }
    }

    void apply_cnot(int control, int target) {
        const Eigen::Index cbit = Eigen::Index{1} << control;
        const Eigen::Index tbit = Eigen::Index{1} << target;
        const Eigen::Index d = dim();
        Complex* a = amps_.data();
        for (Eigen::Index i = 0; i < d; ++i) {
            if ((i & cbit) && !(i & tbit)) std::swap(a[i], a[i | tbit]);
        }
    }

private:
    void apply_phase(int qubit, double angle) {
        const Complex p0 = std::polar(Scalar(1), Scalar(-angle / 2));
        const Complex p1 = std::polar(Scalar(1), Scalar(angle / 2));
        const Eigen::Index bit = Eigen::Index{1} << qubit;
        const Eigen::Index d = dim();
        Complex* a = amps_.data();
        for (Eigen::Index i = 0; i < d; ++i) a[i] *= (i & bit) ? p1 : p0;
    }

    int n_;
    Amplitudes amps_;
};

using QuantumState = BasicQuantumState<double>;

template <typename Scalar = double>
BasicQuantumState<Scalar> zero_state(int n_qubits) {
    return BasicQuantumState<Scalar>(n_qubits);
}

/// Returns a copy of `state` with `gate` applied.
template <typename Scalar>
BasicQuantumState<Scalar> apply_gate(BasicQuantumState<Scalar> state, const Gate& gate) {
    state.apply(gate);
    return state;
}

template <typename Scalar>
Scalar expect_z(const BasicQuantumState<Scalar>& state, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits()) {
        throw InvalidInputError("qubit " + std::to_string(qubit) + " out of range for " +
                                std::to_string(state.n_qubits()) + "-qubit state");
    }
    const Eigen::Index bit = Eigen::Index{1} << qubit;
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < state.dim(); ++i) {
        const Scalar p = std::norm(state[i]);
        acc += (i & bit) ? -p : p;
    }
    return acc;
}

/// <Z_i> for every qubit, in one pass over the amplitudes.
template <typename Scalar>
typename BasicQuantumState<Scalar>::RealVector expect_z_all(const BasicQuantumState<Scalar>& state) {
    const int n = state.n_qubits();
    typename BasicQuantumState<Scalar>::RealVector out = BasicQuantumState<Scalar>::RealVector::Zero(n);
    for (Eigen::Index i = 0; i < state.dim(); ++i) {
        const Scalar p = std::norm(state[i]);
        for (int q = 0; q < n; ++q) out(q) += ((i >> q) & 1) ? -p : p;
    }
    return out;
}

/// <lambda| M_qubit |psi> for a 2x2 operator acting on one qubit.
template <typename Scalar>
std::complex<Scalar> matrix_element(const BasicQuantumState<Scalar>& lambda, const BasicQuantumState<Scalar>& psi,
                                    int qubit, const Matrix2c<Scalar>& m) {
    const Eigen::Index stride = Eigen::Index{1} << qubit;
    const auto* l = lambda.amplitudes().data();
    const auto* a = psi.amplitudes().data();
    std::complex<Scalar> acc = 0;
    for (Eigen::Index block = 0; block < psi.dim(); block += 2 * stride) {
        for (Eigen::Index j = block; j < block + stride; ++j) {
            const auto a0 = a[j];
            const auto a1 = a[j + stride];
            acc += std::conj(l[j]) * (m(0, 0) * a0 + m(0, 1) * a1);
            acc += std::conj(l[j + stride]) * (m(1, 0) * a0 + m(1, 1) * a1);
        }
    }
    return acc;
}

/// <lambda| CNOT(control, target) |psi>.
template <typename Scalar>
std::complex<Scalar> cnot_element(const BasicQuantumState<Scalar>& lambda, const BasicQuantumState<Scalar>& psi,
                                  int control, int target) {
    const Eigen::Index cbit = Eigen::Index{1} << control;
    const Eigen::Index tbit = Eigen::Index{1} << target;
    std::complex<Scalar> acc = 0;
    for (Eigen::Index i = 0; i < psi.dim(); ++i) {
        const Eigen::Index src = (i & cbit) ? (i ^ tbit) : i;
        acc += std::conj(lambda[i]) * psi[src];
    }
    return acc;
}

/// Reverse sweep used for adjoint differentiation of diag observables
/// O = sum_i w_i Z_i. Starting from the final state, the callback receives
/// (gate index k, lambda_k, psi_{k-1}) for k = N-1 down to 0, where
/// lambda_k = (U_{N-1} ... U_{k+1})^dagger O |psi_N> and psi_{k-1} is the
/// state right before gate k. d<O>/dp_k = 2 Re <lambda_k| dU_k/dp |psi_{k-1}>.
template <typename Scalar, typename Callback>
void adjoint_sweep(const BasicQuantumState<Scalar>& final_state, std::span<const Gate> gates,
                   const Eigen::Ref<const Eigen::VectorXd>& weights, Callback&& callback) {
    const int n = final_state.n_qubits();
    if (weights.size() != n) {
        throw DimensionError("observable weights have length " + std::to_string(weights.size()) + ", expected " +
                             std::to_string(n));
    }
    BasicQuantumState<Scalar> psi = final_state;
    BasicQuantumState<Scalar> lambda = final_state;
    for (Eigen::Index i = 0; i < lambda.dim(); ++i) {
        Scalar diag = 0;
        for (int q = 0; q < n; ++q) diag += ((i >> q) & 1) ? Scalar(-weights(q)) : Scalar(weights(q));
        lambda.amplitudes()(i) *= diag;
    }
    for (std::size_t k = gates.size(); k-- > 0;) {
        psi.apply_adjoint(gates[k]);
        callback(k, static_cast<const BasicQuantumState<Scalar>&>(lambda),
                 static_cast<const BasicQuantumState<Scalar>&>(psi));
        lambda.apply_adjoint_unaudited(gates[k]);
    }
}

/// Simulates `gates` from |0...0> on n qubits.
QuantumState simulate(int n_qubits, std::span<const Gate> gates);

/// Gradient of sum_i w_i <Z_i> with respect to every gate angle, for the
/// circuit `gates` applied to |0...0>. Entries for CNOT gates are zero.
Eigen::VectorXd adjoint_gradient(int n_qubits, std::span<const Gate> gates,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Encoding angle arctan(x_i), in (-pi/2, pi/2).
double encoding_angle(double x);

/// Product state  (x)_i RY(arctan x_i) |0>.
QuantumState angle_encode(const Eigen::Ref<const Eigen::VectorXd>& x);

/// The RY gates that angle_encode applies, for composing with other gates.
std::vector<Gate> encoding_gates(const Eigen::Ref<const Eigen::VectorXd>& x);

/// angle_encode(x), then each gate in order, then <Z_i> for every qubit.
Eigen::VectorXd run_circuit(const Eigen::Ref<const Eigen::VectorXd>& x, std::span<const Gate> gates);

/// (E(theta_k + pi/2) - E(theta_k - pi/2)) / 2 with E = <Z_qubit> of run_circuit.
double param_shift_grad(const Eigen::Ref<const Eigen::VectorXd>& x, std::span<const Gate> gates, std::size_t k,
                        int qubit);

enum class NoiseMode { ExactDamping, Trajectory };

struct NoiseConfig {
    double epsilon = 0.0;
    NoiseMode mode = NoiseMode::ExactDamping;
    int trajectories = 1;

    void validate() const;
    bool active() const { return epsilon > 0.0; }
    bool operator==(const NoiseConfig&) const = default;
};

/// Exact depolarization of a traceless-observable expectation: (1 - eps) v.
double depolarize(double value, const NoiseConfig& cfg);

/// Trajectory depolarization: with probability eps the state is replaced by
/// a uniformly random computational basis state. Returns true if replaced.
bool depolarize(QuantumState& state, const NoiseConfig& cfg, std::mt19937_64& rng);

}  // namespace aqcf::qsim
