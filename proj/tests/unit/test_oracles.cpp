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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using aqcf::qsim::Gate;
using aqcf::qsim::GateKind;

TEST_SUITE("oracles") {
    TEST_CASE("dense operators are unitary") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-3, 3);
        for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ}) {
            CHECK(oracle::unitarity_error(oracle::rotation(k, u(rng))) < 1e-14);
            CHECK(oracle::unitarity_error(oracle::embed(oracle::rotation(k, u(rng)), 1, 3)) < 1e-14);
        }
        CHECK(oracle::unitarity_error(oracle::cnot(0, 2, 3)) == 0.0);
        CHECK(oracle::unitarity_error(oracle::cnot(2, 1, 3)) == 0.0);
        const std::vector<Gate> gates{Gate::rx(0, 0.3), Gate::cnot(0, 1), Gate::rz(2, 1.1), Gate::cnot(1, 2)};
        CHECK(oracle::unitarity_error(oracle::circuit_unitary(Eigen::Vector3d(0.2, -1, 4), gates)) < 1e-13);
    }

    TEST_CASE("cnot flips the target on the control's set basis states") {
        const auto c = oracle::cnot(0, 1, 2);
        // basis index bit q is qubit q
        CHECK(c(0b11, 0b01) == 1.0);
        CHECK(c(0b01, 0b11) == 1.0);
        CHECK(c(0b00, 0b00) == 1.0);
        CHECK(c(0b10, 0b10) == 1.0);
    }

    TEST_CASE("the dense simulator refuses four qubits") {
        CHECK_THROWS(oracle::dense_simulate(Eigen::Vector4d::Zero(), {}));
    }

    TEST_CASE("an empty circuit is the angle encoding") {
        const Eigen::Vector3d x(0.5, -2.0, 0.0);
        const Eigen::VectorXd z = oracle::dense_simulate(x, {});
        for (int i = 0; i < 3; ++i) CHECK(std::abs(z(i) - std::cos(std::atan(x(i)))) < 1e-14);
    }

    TEST_CASE("finite differences") {
        const auto square = [](const Eigen::VectorXd& v) { return v(0) * v(0); };
        CHECK(std::abs(oracle::fd_gradient(square, Eigen::VectorXd::Constant(1, 3.0), 1e-5)(0) - 6.0) < 1e-8);
        const auto cosine = [](const Eigen::VectorXd& v) { return std::cos(v(0)); };
        CHECK(std::abs(oracle::fd_gradient(cosine, Eigen::VectorXd::Zero(1), 1e-5)(0)) < 1e-9);
        CHECK_THROWS(oracle::fd_gradient(square, Eigen::VectorXd::Zero(1), 1e-2));
        CHECK_THROWS(oracle::fd_gradient(square, Eigen::VectorXd::Zero(1), 1e-9));
    }

    TEST_CASE("elementary helpers") {
        CHECK(oracle::sigmoid(0.0) == 0.5);
        CHECK(oracle::softmax(Eigen::RowVector2d(1, 1)).isApprox(Eigen::RowVector2d(0.5, 0.5)));
        const Eigen::MatrixXd ln = oracle::layer_norm(Eigen::MatrixXd{{1.0, 3.0}});
        CHECK(ln(0, 0) == doctest::Approx(-1.0));
        CHECK(ln(0, 1) == doctest::Approx(1.0));
        CHECK(oracle::similarity(Eigen::Vector2d(0.7, -0.2), Eigen::Vector2d(0.7, -0.2)) == doctest::Approx(1.0));
    }
}
