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
#include <limits>
#include <numbers>
#include <random>

#include "aqcf/dataset.hpp"
#include "aqcf/training.hpp"
#include "doctest.h"

using namespace aqcf;
using namespace aqcf::training;

namespace {

ag::Tensor scalar(double v) { return ag::Tensor(ag::Matrix::Constant(1, 1, v)); }

NamedParameter param(const std::string& name, double value, double grad) {
    ag::Tensor t(ag::Matrix::Constant(1, 1, value), true);
    t.node()->accumulate(ag::Matrix::Constant(1, 1, grad));
    return {name, t, ParamGroup::Classical};
}

}  // namespace

TEST_SUITE("training") {
    TEST_CASE("task loss") {
        CHECK(task_loss(ag::Tensor(ag::Matrix{{0.0, 0.0}}), 0).item() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
        CHECK(std::abs(task_loss(ag::Tensor(ag::Matrix{{100.0, -100.0}}), 0).item()) < 1e-10);
        CHECK(task_loss(ag::Tensor(ag::Matrix{{100.0, -100.0}}), 1).item() == doctest::Approx(200.0).epsilon(1e-12));
        CHECK_THROWS_AS(task_loss(ag::Tensor(ag::Matrix{{0.0, 0.0}}), 2), InvalidInputError);
        CHECK_THROWS_AS(task_loss(ag::Tensor(ag::Matrix{{0.0}}), 0), InvalidInputError);
    }

    TEST_CASE("quantum regularizer") {
        const std::vector<double> big{0.5, -0.5};
        CHECK(quantum_reg(big, 0.1) == 0.0);
        const std::vector<double> zero(4, 0.0);
        CHECK(quantum_reg(zero, 0.01) == doctest::Approx(1e-4).epsilon(1e-12));
        CHECK(quantum_reg(zero, 0.0) == 0.0);
        CHECK(quantum_reg(std::vector<double>{}, 0.5) == 0.0);
        const std::vector<double> small{0.003, -0.004};
        const double rms = std::sqrt((9e-6 + 16e-6) / 2);
        CHECK(quantum_reg(small, 0.01) == doctest::Approx((0.01 - rms) * (0.01 - rms)).epsilon(1e-12));

        const ag::Tensor flat(ag::Matrix::Constant(3, 2, 0.4));
        CHECK(output_variance_penalty(flat, 0.1).item() == doctest::Approx(0.01).epsilon(1e-12));
        const ag::Tensor spread(ag::Matrix{{1.0, -1.0}, {-1.0, 1.0}});
        CHECK(output_variance_penalty(spread, 0.1).item() == 0.0);
    }

    TEST_CASE("fusion regularizer") {
        LossWeights w;
        w.lambda_target = 0.5;
        const std::vector<ag::Tensor> halves{scalar(0.5), scalar(0.5), scalar(0.5)};
        CHECK(fusion_reg(halves, w).item() == doctest::Approx(-std::log(2.0)).epsilon(1e-14));

        w.lambda_target = 0.4;
        w.beta_entropy = 0.0;
        const std::vector<ag::Tensor> on_target{scalar(0.3), scalar(0.5)};
        CHECK(std::abs(fusion_reg(on_target, w).item()) < 1e-15);
        const std::vector<ag::Tensor> over{scalar(0.9), scalar(0.7)};
        CHECK(fusion_reg(over, w).item() == doctest::Approx(0.16).epsilon(1e-12));

        w.beta_entropy = 1.0;
        w.beta_usage = 0.0;
        const std::vector<ag::Tensor> edge{scalar(1e-12), scalar(1.0 - 1e-12)};
        CHECK(std::abs(fusion_reg(edge, w).item()) < 1e-9);
    }

    TEST_CASE("total loss") {
        LossWeights w;
        w.lambda_reg = 0.0;
        w.lambda_fusion = 0.0;
        CHECK(total_loss(scalar(0.7), scalar(5), scalar(9), w).item() == 0.7);
        w.lambda_reg = 0.5;
        w.lambda_fusion = 0.1;
        CHECK(total_loss(scalar(1), scalar(2), scalar(3), w).item() == doctest::Approx(2.3).epsilon(1e-15));
        const double nan = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(total_loss(scalar(nan), scalar(2), scalar(3), w), NumericalError);
        CHECK_THROWS_AS(total_loss(scalar(1), scalar(nan), scalar(3), w), NumericalError);
        CHECK_THROWS_AS(total_loss(scalar(1), scalar(2), scalar(std::numeric_limits<double>::infinity()), w),
                        NumericalError);

        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-5, 5);
        for (int t = 0; t < 100; ++t) {
            const double a = u(rng), b = u(rng), c = u(rng), k = u(rng);
            const double base = total_loss(scalar(a), scalar(b), scalar(c), w).item();
            const double scaled = total_loss(scalar(k * a), scalar(k * b), scalar(k * c), w).item();
            CHECK(std::abs(scaled - k * base) < 1e-12);
        }
        w.lambda_reg = -1;
        CHECK_THROWS_AS(w.validate(), ConfigError);
    }

    TEST_CASE("optimizer step examples") {
        OptimizerConfig cfg;
        cfg.learning_rate = 0.01;
        {
            ParameterList ps{param("a", 2.0, 0.0)};
            OptimizerState st;
            optimizer_step(ps, st, cfg);
            CHECK(ps[0].tensor.item() == 2.0);
        }
        {
            OptimizerConfig frozen = cfg;
            frozen.g_max = 0.0;
            ParameterList ps{param("a", 2.0, 7.0)};
            OptimizerState st;
            optimizer_step(ps, st, frozen);
            CHECK(ps[0].tensor.item() == 2.0);
        }
        {
            ParameterList ps{param("a", 0.0, 1.0)};
            OptimizerState st;
            const double rate = optimizer_step(ps, st, cfg);
            CHECK(rate == 0.01);
            const double expected = -0.01 * std::min(1.0, 1.0 / (1.0 + 1e-8));
            CHECK(ps[0].tensor.item() == doctest::Approx(expected).epsilon(1e-14));
            CHECK(st.first_moment.at("a")(0, 0) == doctest::Approx(0.1));
            CHECK(st.second_moment.at("a")(0, 0) == doctest::Approx(0.001));
            CHECK(st.updates.at("a") == 1);
            CHECK(st.step == 1);
        }
        {
            ParameterList ps{param("a", 1.0, 5.0)};
            OptimizerState st;
            optimizer_step(ps, st, cfg, [](const NamedParameter&) { return false; });
            CHECK(ps[0].tensor.item() == 1.0);
        }
    }

    TEST_CASE("optimizer updates are bounded by eta * g_max") {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> n(0, 3);
        OptimizerConfig cfg;
        cfg.learning_rate = 0.05;
        cfg.g_max = 0.3;
        cfg.total_steps = 40;
        OptimizerState st;
        ag::Tensor t(ag::Matrix::Zero(3, 4), true);
        for (int step = 1; step <= 40; ++step) {
            t.zero_grad();
            ag::Matrix g(3, 4);
            for (auto& v : g.reshaped()) v = n(rng);
            t.node()->accumulate(g);
            ParameterList ps{{"t", t, ParamGroup::Quantum}};
            const ag::Matrix before = t.value();
            const double rate = optimizer_step(ps, st, cfg);
            CHECK(rate == doctest::Approx(cosine_rate(cfg, step)));
            CHECK((t.value() - before).cwiseAbs().maxCoeff() <= rate * cfg.g_max * (1 + 1e-12));
            CHECK(st.second_moment.at("t").minCoeff() >= 0.0);
        }
    }

    TEST_CASE("cosine schedule") {
        OptimizerConfig cfg;
        cfg.learning_rate = 1.0;
        cfg.total_steps = 0;
        CHECK(cosine_rate(cfg, 17) == 1.0);
        cfg.total_steps = 100;
        CHECK(cosine_rate(cfg, 1) == 1.0);
        CHECK(cosine_rate(cfg, 51) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(cosine_rate(cfg, 100) == doctest::Approx((1 + std::cos(std::numbers::pi * 99 / 100)) / 2));
        double last = 2;
        for (long t = 1; t <= 100; ++t) {
            CHECK(cosine_rate(cfg, t) <= last);
            last = cosine_rate(cfg, t);
        }
    }

    TEST_CASE("stage configuration") {
        StageSchedule s;
        s.total_epochs = 10;
        const auto first = stage_config(0.0, s, 10);
        CHECK(first.stage == 1);
        CHECK_FALSE(first.quantum_active);
        CHECK(first.lambda_override == 0.0);
        CHECK(first.trains(ParamGroup::Classical));
        CHECK_FALSE(first.trains(ParamGroup::Quantum));
        CHECK_FALSE(first.trains(ParamGroup::Fusion));

        const auto mid = stage_config(3.5, s, 10);
        CHECK(mid.stage == 2);
        CHECK(mid.depth_cap == 6);
        CHECK(mid.lambda_override == 0.5);
        CHECK(mid.quantum_active);
        CHECK_FALSE(mid.trains(ParamGroup::Fusion));
        CHECK(stage_config(2.0, s, 10).depth_cap == 2);

        const auto last = stage_config(12.0, s, 10);
        CHECK(last.stage == 3);
        CHECK_FALSE(last.lambda_override.has_value());
        CHECK(last.depth_cap == 0);
        CHECK(last.trains(ParamGroup::Fusion));
        CHECK_THROWS_AS(stage_config(-0.1, s, 10), InvalidInputError);

        int groups_before = 0;
        int stage_before = 0;
        for (double e = 0; e <= 10.0; e += 0.05) {
            const auto f = stage_config(e, s, 10);
            int groups = 0;
            for (auto g : {ParamGroup::Classical, ParamGroup::Quantum, ParamGroup::Fusion}) groups += f.trains(g);
            CHECK(groups >= groups_before);
            CHECK(f.stage >= stage_before);
            groups_before = groups;
            stage_before = f.stage;
        }
        StageSchedule bad = s;
        bad.pretrain_fraction = 0.9;
        bad.warmup_fraction = 0.3;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("classification metrics") {
        const std::vector<int> labels{0, 1, 1, 0};
        const auto perfect = classification_metrics(labels, labels, 2);
        CHECK(perfect.accuracy == 1.0);
        CHECK(perfect.f1 == 1.0);
        CHECK(perfect.absent_classes.empty());

        const std::vector<int> zeros(4, 0);
        const auto constant = classification_metrics(zeros, labels, 2);
        CHECK(constant.accuracy == 0.5);
        CHECK(constant.recall == 0.5);
        CHECK(constant.precision == 0.25);

        const std::vector<int> one_class{1, 1, 1};
        const std::vector<int> preds{1, 0, 1};
        const auto single = classification_metrics(preds, one_class, 2);
        CHECK(single.absent_classes == std::vector<int>{0});
        CHECK(single.recall == doctest::Approx(1.0 / 3));
        CHECK(single.accuracy == doctest::Approx(2.0 / 3));
        CHECK_THROWS_AS(classification_metrics(preds, labels, 2), DimensionError);
    }

    TEST_CASE("plateau diagnostic") {
        const std::vector<int> two{2}, one{1}, none{0};
        const auto cells = plateau_diagnostic(two, one, 500, 42);
        REQUIRE(cells.size() == 1);
        CHECK(std::abs(cells[0].variance - 0.5) < 0.05);
        CHECK(cells[0].samples == 500);

        const auto skipped = plateau_diagnostic(two, none, 100, 42);
        CHECK(skipped[0].skipped);
        CHECK_THROWS_AS(plateau_diagnostic(two, one, 29, 42), ConfigError);

        const std::vector<int> qubits{2, 8}, deep{8};
        const auto trend = plateau_diagnostic(qubits, deep, 500, 7, 2);
        REQUIRE(trend.size() == 2);
        CHECK(trend[1].variance < trend[0].variance);

        const auto again = plateau_diagnostic(qubits, deep, 500, 7, 1);
        CHECK(again[0].variance == trend[0].variance);
        CHECK(again[1].variance == trend[1].variance);
    }

    TEST_CASE("plateau circuit shape") {
        Rng rng(1);
        const auto gates = plateau_circuit(3, 2, rng);
        REQUIRE(gates.size() == 10);
        CHECK(gates[0].kind == qsim::GateKind::RY);
        CHECK(gates[0].target == 0);
        CHECK(gates[3].kind == qsim::GateKind::CNOT);
        CHECK(gates[5].kind == qsim::GateKind::RZ);
        for (const auto& g : gates) {
            if (g.is_rotation()) CHECK((g.angle >= 0 && g.angle < 2 * std::numbers::pi));
        }
    }

    TEST_CASE("training loss falls on the toy task") {
        double initial = 0, final = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto split = data::toy_dataset(400, 10, seed);
            const auto vocab = data::Vocab::build(split.train);
            const auto examples = data::encode_all(split.train, vocab, 16, true);
            ModelConfig mc;
            mc.vocab_size = vocab.size();
            mc.d_model = 16;
            mc.n_heads = 2;
            mc.n_layers = 1;
            mc.n_qubits = 4;
            mc.max_depth = 4;
            mc.max_seq_len = 16;
            mc.memory_slots = 4;
            mc.hidden = 8;
            Model model(mc, seed);
            TrainConfig tc;
            tc.seed = seed;
            tc.batch_size = 8;
            tc.optimizer.learning_rate = 5e-3;
            tc.schedule.total_epochs = 4;
            const long per_epoch = 50;
            Trainer trainer(model, tc, per_epoch);
            double first = 0, last = 0;
            for (long s = 0; s < 200; ++s) {
                const std::size_t start = std::size_t(s % per_epoch) * 8;
                const std::span<const Example> batch(examples.data() + start, 8);
                const auto m = trainer.step(batch, double(s) / per_epoch);
                if (s < 10) first += m.task / 10;
                if (s >= 190) last += m.task / 10;
            }
            initial += first / 5;
            final += last / 5;
        }
        INFO("initial " << initial << " final " << final);
        CHECK(final < 0.9 * initial);
    }
}
