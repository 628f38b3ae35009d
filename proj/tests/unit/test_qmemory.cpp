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
#include <random>

#include "aqcf/qmemory.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace aqcf;
using namespace aqcf::qmemory;

namespace {

ag::Matrix random_matrix(ag::Index r, ag::Index c, Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    ag::Matrix m(r, c);
    for (ag::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

MemoryBank make_bank(const ag::Matrix& keys, const ag::Matrix& values, double gamma) {
    MemoryBank b;
    b.keys = ag::Tensor(keys, true);
    b.values = ag::Tensor(values, true);
    b.gamma = gamma;
    return b;
}

}  // namespace

TEST_SUITE("qmemory") {
    TEST_CASE("similarity") {
        CHECK(quantum_similarity(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()) == doctest::Approx(1.0).epsilon(1e-15));
        const Eigen::Vector3d q(1, 0.5, -0.3), k(0.2, -1, 0.7);
        const double s = quantum_similarity(q, k);
        CHECK(std::abs(s - 0.7741562852777506) < 1e-12);
        CHECK(std::abs(s - oracle::similarity(q, k)) < 1e-12);
        CHECK_THROWS_AS(quantum_similarity(q, Eigen::Vector2d::Zero()), DimensionError);

        Rng rng(4);
        for (int t = 0; t < 200; ++t) {
            const int n = 1 + t % 3;
            const Eigen::VectorXd a = random_matrix(n, 1, rng, 4.0);
            const Eigen::VectorXd b = random_matrix(n, 1, rng, 4.0);
            const double v = quantum_similarity(a, b);
            CHECK(std::abs(v) <= 1.0 + 1e-12);
            CHECK(std::abs(v - oracle::similarity(a, b)) < 1e-12);
            CHECK(quantum_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("retrieval examples") {
        const ag::Matrix same = ag::Matrix::Constant(3, 2, 0.4);
        const ag::Matrix values{{1.0, 2.0}, {3.0, -1.0}, {5.0, 0.0}};
        const auto u = retrieve(Eigen::Vector2d(0.3, -2), make_bank(same, values, 0.1));
        CHECK((u.weights.array() - 1.0 / 3).abs().maxCoeff() < 1e-15);
        CHECK((u.retrieved - values.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-14);

        const auto one = retrieve(Eigen::Vector2d(1, 1), make_bank(ag::Matrix{{0.2, 0.7}}, ag::Matrix{{4.0, -3.0}}, 0.1));
        CHECK(one.weights(0) == 1.0);
        CHECK(one.retrieved == Eigen::Vector2d(4, -3));

        const Eigen::VectorXd alpha = retrieval_weights(Eigen::Vector2d(1, -1), 4);
        CHECK(std::abs(alpha(0) - 0.7310585786300049) < 1e-10);
        CHECK(std::abs(alpha(0) - oracle::sigmoid(1.0)) < 1e-15);
    }

    TEST_CASE("retrieval matches the dense oracle") {
        Rng rng(11);
        const ag::Matrix keys = random_matrix(5, 3, rng, 2.0);
        const ag::Matrix values = random_matrix(5, 4, rng);
        const Eigen::VectorXd q = random_matrix(3, 1, rng, 2.0);
        const auto got = retrieve(q, make_bank(keys, values, 0.1));
        const auto want = oracle::retrieve(q, keys, values);
        CHECK((got.weights - want.alpha).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((got.retrieved - want.r).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("update examples") {
        MemoryBank full = make_bank(ag::Matrix{{0.0, 0.0}, {2.0, -2.0}}, ag::Matrix{{1.0}, {2.0}}, 1.0);
        const int slot = update(full, Eigen::Vector2d(0.1, 0.2), Eigen::VectorXd::Constant(1, 9.0));
        CHECK(slot == 0);
        CHECK(full.keys.value().row(0) == Eigen::RowVector2d(0.1, 0.2));
        CHECK(full.values.value()(0, 0) == 9.0);

        MemoryBank soft = make_bank(ag::Matrix{{0.0, 0.0, 0.0}}, ag::Matrix{{0.0}}, 0.1);
        const Eigen::Vector3d u(1.5, -2.0, 0.25);
        update(soft, u, Eigen::VectorXd::Constant(1, 1.0));
        CHECK((soft.keys.value().row(0).transpose() - 0.1 * u).cwiseAbs().maxCoeff() < 1e-15);

        ag::Matrix keys{{3.0, -3.0}, {-3.0, 3.0}, {2.5, 2.5}, {0.3, -0.4}, {-2.0, -3.0}};
        const Eigen::Vector2d target = keys.row(3).transpose();
        int oracle_best = 0;
        for (int m = 1; m < 5; ++m) {
            if (oracle::similarity(target, keys.row(m).transpose()) >
                oracle::similarity(target, keys.row(oracle_best).transpose())) {
                oracle_best = m;
            }
        }
        REQUIRE(oracle_best == 3);
        MemoryBank bank = make_bank(keys, ag::Matrix::Zero(5, 1), 0.1);
        CHECK(update(bank, target, Eigen::VectorXd::Zero(1)) == 3);

        CHECK_THROWS_AS(update(bank, Eigen::Vector3d::Zero(), Eigen::VectorXd::Zero(1)), DimensionError);
        MemoryBank bad = make_bank(keys, ag::Matrix::Zero(5, 1), 0.0);
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("simplex, convexity and locality over 1k fuzzed banks") {
        Rng rng(2026);
        std::uniform_int_distribution<int> slots(1, 8), qubits(1, 4);
        std::uniform_real_distribution<double> rate(0.01, 1.0);
        for (int t = 0; t < 1000; ++t) {
            const int m = slots(rng), n = qubits(rng);
            MemoryBank bank = make_bank(random_matrix(m, n, rng, 3.0), random_matrix(m, 3, rng, 5.0), rate(rng));
            const Eigen::VectorXd q = random_matrix(n, 1, rng, 3.0);
            const auto r = retrieve(q, bank);
            CHECK(std::abs(r.weights.sum() - 1.0) < 1e-10);
            CHECK(r.weights.minCoeff() >= 0.0);
            const ag::Matrix& v = bank.values.value();
            for (int j = 0; j < 3; ++j) {
                CHECK(r.retrieved(j) >= v.col(j).minCoeff() - 1e-12);
                CHECK(r.retrieved(j) <= v.col(j).maxCoeff() + 1e-12);
            }

            const ag::Matrix k0 = bank.keys.value();
            const ag::Matrix v0 = bank.values.value();
            const Eigen::VectorXd nk = random_matrix(n, 1, rng, 3.0);
            const Eigen::VectorXd nv = random_matrix(3, 1, rng, 5.0);
            const int slot = update(bank, nk, nv);
            int changed = 0;
            for (int s = 0; s < m; ++s) {
                if (bank.keys.value().row(s) != k0.row(s) || bank.values.value().row(s) != v0.row(s)) ++changed;
            }
            CHECK(changed <= 1);
            const double moved = (bank.keys.value().row(slot) - k0.row(slot)).norm();
            CHECK(moved <= bank.gamma * (nk.transpose() - k0.row(slot)).norm() + 1e-12);
            const double vmoved = (bank.values.value().row(slot) - v0.row(slot)).norm();
            CHECK(vmoved <= bank.gamma * (nv.transpose() - v0.row(slot)).norm() + 1e-12);
        }
    }

    TEST_CASE("similarity gradients match finite differences") {
        Rng rng(5);
        for (int n = 1; n <= 4; ++n) {
            const ag::Matrix q0 = random_matrix(2, n, rng, 2.0);
            const ag::Matrix k0 = random_matrix(3, n, rng, 2.0);
            const ag::Matrix w = random_matrix(2, 3, rng);
            ag::Tensor q(q0, true), k(k0, true);
            ag::Tensor y = ag::sum(similarity_matrix(q, k) * ag::Tensor(w));
            y.backward();
            const auto value = [&](const ag::Matrix& qq, const ag::Matrix& kk) {
                double total = 0;
                for (int t = 0; t < 2; ++t) {
                    for (int m = 0; m < 3; ++m) total += w(t, m) * oracle::similarity(qq.row(t).transpose(), kk.row(m).transpose());
                }
                return total;
            };
            const auto fq = [&](const Eigen::VectorXd& v) {
                ag::Matrix m = q0;
                Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = v;
                return value(m, k0);
            };
            const auto fk = [&](const Eigen::VectorXd& v) {
                ag::Matrix m = k0;
                Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = v;
                return value(q0, m);
            };
            if (n > 3) {
                const auto fq4 = [&](const Eigen::VectorXd& v) {
                    ag::Matrix m = q0;
                    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = v;
                    double total = 0;
                    for (int t = 0; t < 2; ++t) {
                        for (int s = 0; s < 3; ++s) total += w(t, s) * quantum_similarity(m.row(t).transpose(), k0.row(s).transpose());
                    }
                    return total;
                };
                const Eigen::VectorXd g = oracle::fd_gradient(fq4, Eigen::Map<const Eigen::VectorXd>(q0.data(), q0.size()), 1e-5);
                for (ag::Index i = 0; i < g.size(); ++i) {
                    CHECK(std::abs(q.grad().data()[i] - g(i)) <= 1e-5 * std::max(1.0, std::abs(g(i))));
                }
                continue;
            }
            const Eigen::VectorXd gq = oracle::fd_gradient(fq, Eigen::Map<const Eigen::VectorXd>(q0.data(), q0.size()), 1e-5);
            const Eigen::VectorXd gk = oracle::fd_gradient(fk, Eigen::Map<const Eigen::VectorXd>(k0.data(), k0.size()), 1e-5);
            for (ag::Index i = 0; i < gq.size(); ++i) {
                CHECK(std::abs(q.grad().data()[i] - gq(i)) <= 1e-5 * std::max(1.0, std::abs(gq(i))));
            }
            for (ag::Index i = 0; i < gk.size(); ++i) {
                CHECK(std::abs(k.grad().data()[i] - gk(i)) <= 1e-5 * std::max(1.0, std::abs(gk(i))));
            }
        }
    }

    TEST_CASE("multi-head gate extremes") {
        Rng rng(8);
        MultiHeadMemory mem = MultiHeadMemory::init(8, 2, 4, 3, 0.1, rng);
        const ag::Tensor x(random_matrix(3, 8, rng));
        mem.gate.weight.mutable_value().setZero();
        mem.gate.bias.mutable_value().setConstant(-100);
        CHECK((multihead_forward(x, mem).value() - x.value()).cwiseAbs().maxCoeff() < 1e-12);

        mem.gate.bias.mutable_value().setConstant(100);
        const ag::Matrix y = multihead_forward(x, mem).value();
        for (int h = 0; h < 2; ++h) {
            const ag::Matrix q = x.value() * mem.query_projections[std::size_t(h)].value();
            for (int t = 0; t < 3; ++t) {
                const auto r = oracle::retrieve(q.row(t).transpose(), mem.banks[std::size_t(h)].keys.value(),
                                                mem.banks[std::size_t(h)].values.value());
                CHECK((y.row(t).segment(4 * h, 4).transpose() - r.r).cwiseAbs().maxCoeff() < 1e-12);
            }
        }

        CHECK_THROWS_AS(MultiHeadMemory::init(10, 3, 4, 3, 0.1, rng), ConfigError);
    }

    TEST_CASE("multi-head forward matches a straight-line composition") {
        Rng rng(31);
        const MultiHeadMemory mem = MultiHeadMemory::init(6, 3, 5, 2, 0.1, rng);
        const ag::Matrix x = random_matrix(4, 6, rng);
        MultiHeadTrace trace;
        const ag::Matrix y = multihead_forward(ag::Tensor(x), mem, &trace).value();
        REQUIRE(trace.queries.size() == 3);
        for (int t = 0; t < 4; ++t) {
            Eigen::VectorXd o(6);
            for (int h = 0; h < 3; ++h) {
                const Eigen::VectorXd q = (x.row(t) * mem.query_projections[std::size_t(h)].value()).transpose();
                o.segment(2 * h, 2) = retrieve(q, mem.banks[std::size_t(h)]).retrieved;
            }
            Eigen::VectorXd xo(12);
            xo << x.row(t).transpose(), o;
            const Eigen::VectorXd pre = mem.gate.weight.value().transpose() * xo + mem.gate.bias.value().transpose();
            const Eigen::VectorXd g = oracle::sigmoid(Eigen::MatrixXd(pre));
            const Eigen::VectorXd want = g.cwiseProduct(o) + (Eigen::VectorXd::Ones(6) - g).cwiseProduct(x.row(t).transpose());
            CHECK((y.row(t).transpose() - want).cwiseAbs().maxCoeff() < 1e-10);
        }
    }

    TEST_CASE("multi-head gradient wrt input matches finite differences") {
        Rng rng(32);
        const MultiHeadMemory mem = MultiHeadMemory::init(4, 2, 3, 2, 0.1, rng);
        const ag::Matrix x0 = random_matrix(2, 4, rng);
        const ag::Matrix w = random_matrix(2, 4, rng);
        ag::Tensor x(x0, true);
        ag::Tensor y = ag::sum(multihead_forward(x, mem) * ag::Tensor(w));
        y.backward();
        const auto f = [&](const Eigen::VectorXd& v) {
            ag::NoGradGuard guard;
            ag::Matrix m = x0;
            Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = v;
            return ag::sum(multihead_forward(ag::Tensor(m), mem) * ag::Tensor(w)).item();
        };
        const Eigen::VectorXd g = oracle::fd_gradient(f, Eigen::Map<const Eigen::VectorXd>(x0.data(), x0.size()), 1e-5);
        for (ag::Index i = 0; i < g.size(); ++i) {
            CHECK(std::abs(x.grad().data()[i] - g(i)) <= 1e-5 * std::max(1.0, std::abs(g(i))));
        }
    }
}
