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

#include "aqcf/model.hpp"
#include "aqcf/training.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace aqcf;

namespace {

ModelConfig micro_config() {
    ModelConfig c;
    c.vocab_size = 16;
    c.d_model = 8;
    c.n_heads = 2;
    c.n_layers = 1;
    c.n_qubits = 3;
    c.max_depth = 3;
    c.max_seq_len = 4;
    c.memory_slots = 4;
    c.hidden = 4;
    return c;
}

ModelConfig toy_config() {
    ModelConfig c;
    c.vocab_size = 40;
    c.d_model = 16;
    c.n_heads = 4;
    c.n_layers = 1;
    c.n_qubits = 4;
    c.max_depth = 4;
    c.max_seq_len = 12;
    c.memory_slots = 6;
    c.hidden = 8;
    return c;
}

ag::Tensor find(const ParameterList& params, const std::string& name) {
    for (const auto& p : params) {
        if (p.name == name) return p.tensor;
    }
    throw std::runtime_error("no parameter " + name);
}

}  // namespace

TEST_SUITE("model") {
    TEST_CASE("zero classifier head gives even logits") {
        Model m(micro_config(), 3);
        const auto params = m.parameters();
        find(params, "classifier.weight").mutable_value().setZero();
        find(params, "classifier.bias").mutable_value().setZero();
        Rng rng(0);
        const std::vector<int> tokens{2, 5, 7};
        const auto out = m.forward(tokens, ForwardOptions{}, rng);
        CHECK(out.logits.value() == ag::Matrix::Zero(1, 2));
        CHECK(oracle::softmax(out.logits.value().row(0))(0) == 0.5);
    }

    TEST_CASE("token order matters and inference is deterministic") {
        const Model m(toy_config(), 11);
        Rng init(4);
        std::normal_distribution<double> n(0, 1);
        for (auto& v : find(m.parameters(), "classifier.weight").mutable_value().reshaped()) v = n(init);
        const std::vector<int> a{3, 9, 14, 20}, b{20, 14, 9, 3};
        Rng r1(1), r2(2), r3(3);
        const ag::Matrix la = m.forward(a, ForwardOptions{}, r1).logits.value();
        const ag::Matrix la2 = m.forward(a, ForwardOptions{}, r2).logits.value();
        const ag::Matrix lb = m.forward(b, ForwardOptions{}, r3).logits.value();
        CHECK(la == la2);
        CHECK(la != lb);
    }

    TEST_CASE("input validation") {
        ModelConfig c = micro_config();
        const Model m(c, 1);
        Rng rng(0);
        CHECK_THROWS_AS(m.forward(std::vector<int>{}, ForwardOptions{}, rng), InvalidInputError);
        CHECK_THROWS_AS(m.forward(std::vector<int>{1, 16}, ForwardOptions{}, rng), InvalidInputError);
        CHECK_NOTHROW(m.forward(std::vector<int>{1, 2, 3, 4, 5, 6}, ForwardOptions{}, rng));
        c.truncate = false;
        const Model strict(c, 1);
        CHECK_THROWS_AS(strict.forward(std::vector<int>{1, 2, 3, 4, 5, 6}, ForwardOptions{}, rng), InvalidInputError);
        ModelConfig bad = micro_config();
        bad.n_heads = 3;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = micro_config();
        bad.n_qubits = 25;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("parameter counts") {
        ModelConfig c = micro_config();
        c.vocab_size = 200;
        const long with = Model::count_parameters(c);
        c.vocab_size = 100;
        CHECK(with - Model::count_parameters(c) == 800);

        ModelConfig deeper = micro_config();
        const long one = Model::count_parameters(deeper);
        deeper.n_layers = 2;
        CHECK(Model::count_parameters(deeper) > one);

        for (const ModelConfig& cfg : {micro_config(), toy_config()}) {
            const Model m(cfg, 5);
            long total = 0;
            for (const auto& p : m.parameters()) total += long(p.tensor.size());
            CHECK(total == Model::count_parameters(cfg));
        }

        ModelConfig reference;
        reference.vocab_size = 30000;
        const long count = Model::count_parameters(reference);
        CHECK(count == 4320629);
        CHECK(count >= 2000000);
        CHECK(count <= 6000000);
    }

    TEST_CASE("full-model gradients match finite differences") {
        const Model m(micro_config(), 17);
        const std::vector<int> tokens{3, 11, 0, 7};
        ForwardOptions opts;
        opts.mode = Mode::Infer;
        opts.noise = qsim::NoiseConfig{0.01};
        const auto loss_of = [&] {
            Rng rng(0);
            return training::task_loss(m.forward(tokens, opts, rng).logits, 1);
        };
        ParameterList params = m.parameters();
        for (auto& p : params) p.tensor.zero_grad();
        ag::Tensor loss = loss_of();
        loss.backward();

        long checked = 0;
        double worst = 0;
        std::string worst_name;
        for (auto& p : params) {
            // Gate-axis and edge choices are discrete: their finite difference is
            // zero while the straight-through estimate is not.
            if (p.name == "circuit.gate_logits" || p.name == "circuit.entangle_logits") continue;
            const ag::Matrix grad = p.tensor.has_grad() ? p.tensor.grad() : ag::Matrix::Zero(p.tensor.rows(), p.tensor.cols());
            ag::Matrix& value = p.tensor.mutable_value();
            for (ag::Index i = 0; i < value.size(); ++i) {
                const double keep = value.data()[i];
                const double h = 1e-5;
                double up, down;
                {
                    ag::NoGradGuard guard;
                    value.data()[i] = keep + h;
                    up = loss_of().item();
                    value.data()[i] = keep - h;
                    down = loss_of().item();
                }
                value.data()[i] = keep;
                const double fd = (up - down) / (2 * h);
                const double err = std::abs(grad.data()[i] - fd) / std::max({std::abs(fd), std::abs(grad.data()[i]), 1e-3});
                if (err > worst) {
                    worst = err;
                    worst_name = p.name;
                }
                ++checked;
            }
        }
        INFO("worst parameter: " << worst_name);
        CHECK(worst < 1e-4);
        CHECK(checked > 500);
    }

    TEST_CASE("shape contract") {
        const Model m(toy_config(), 2);
        const std::vector<std::vector<int>> batch{{1, 2, 3}, {4}, {5, 6, 7, 8, 9, 10, 11, 12, 13, 14}};
        const ag::Matrix logits = m.forward_batch(batch, ForwardOptions{}, 9);
        CHECK(logits.rows() == 3);
        CHECK(logits.cols() == 2);
        for (const auto& seq : batch) {
            Rng rng(0);
            const auto out = m.forward(seq, ForwardOptions{}, rng);
            CHECK(out.trace.depths.size() == seq.size());
            CHECK(out.block_inputs.size() == 1);
            for (int d : out.trace.depths) CHECK((d >= 1 && d <= 4));
            CHECK((out.trace.lambda > 0 && out.trace.lambda < 1));
        }
        ForwardOptions bypass;
        bypass.quantum_active = false;
        bypass.lambda_override = 0.0;
        Rng rng(0);
        const auto out = m.forward(batch[0], bypass, rng);
        CHECK(out.trace.depths.empty());
        CHECK(out.trace.lambda == 0.0);
        CHECK_FALSE(out.quantum_outputs.defined());
    }

    TEST_CASE("sinusoidal positions") {
        const ag::Matrix p = sinusoidal_positions(5, 6);
        CHECK(p(0, 0) == 0.0);
        CHECK(p(0, 1) == 1.0);
        CHECK(p(3, 0) == doctest::Approx(std::sin(3.0)));
        CHECK(p(3, 1) == doctest::Approx(std::cos(3.0)));
        CHECK(p(2, 2) == doctest::Approx(std::sin(2.0 / std::pow(10000.0, 2.0 / 6))));
    }

    TEST_CASE("no NaN over 100 random training steps") {
        ModelConfig c = toy_config();
        Model m(c, 21);
        training::TrainConfig tc;
        tc.seed = 21;
        tc.batch_size = 4;
        tc.optimizer.learning_rate = 1e-2;
        tc.schedule.total_epochs = 2;
        training::Trainer trainer(m, tc, 50);
        Rng rng(21);
        std::uniform_int_distribution<int> tok(0, c.vocab_size - 1), len(1, 15), lab(0, 1);
        for (int s = 0; s < 100; ++s) {
            std::vector<training::Example> batch(4);
            for (auto& e : batch) {
                e.tokens.resize(std::size_t(len(rng)));
                for (int& t : e.tokens) t = tok(rng);
                e.label = lab(rng);
            }
            const auto metrics = trainer.step(batch, s / 50.0);
            REQUIRE(std::isfinite(metrics.loss));
            REQUIRE(std::isfinite(metrics.grad_rms));
            for (const auto& p : m.parameters()) {
                REQUIRE(p.tensor.value().allFinite());
                if (p.tensor.has_grad()) REQUIRE(p.tensor.grad().allFinite());
            }
        }
    }
}
