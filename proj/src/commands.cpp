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

#include "aqcf/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>

#include "aqcf/checkpoint.hpp"
#include "json.hpp"

namespace aqcf::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json metrics_json(const training::ClassificationMetrics& m) {
    return {{"accuracy", m.accuracy},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"absent_classes", m.absent_classes}};
}

json utilization_json(const fusion::Utilization& u) {
    return {{"mean_lambda", u.mean_lambda}, {"fraction_quantum", u.fraction_quantum}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void warn_absent(const training::ClassificationMetrics& m, std::ostream& err) {
    for (int c : m.absent_classes) {
        err << "warning: class " << c << " has no examples; its precision, recall and f1 are reported as 0\n";
    }
}

ForwardOptions infer_options() {
    ForwardOptions o;
    o.mode = Mode::Infer;
    o.quantum_active = true;
    return o;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kConfig;
    }
}

}  // namespace

int resolve_threads(const GlobalOptions& opts, int configured) {
    if (const char* env = std::getenv("AQCF_THREADS"); env && *env) {
        int n = 0;
        const char* end = env + std::char_traits<char>::length(env);
        auto [ptr, ec] = std::from_chars(env, end, n);
        if (ec != std::errc() || ptr != end || n < 1) {
            throw ConfigError("AQCF_THREADS must be a positive integer, got '" + std::string(env) + "'");
        }
        return n;
    }
    if (opts.threads) {
        if (*opts.threads < 1) throw ConfigError("--threads must be >= 1");
        return *opts.threads;
    }
    return configured;
}

void apply_overrides(RunConfig& config, const GlobalOptions& opts) {
    if (opts.seed) config.seed = *opts.seed;
    if (opts.output_dir) config.output_dir = *opts.output_dir;
    config.threads = resolve_threads(opts, config.threads);
}

int cmd_train(const fs::path& config_path, const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunConfig config = load_config(config_path);
        apply_overrides(config, opts);
        if (config.data.train_path.empty()) throw ConfigError("[data] train is required");
        if (config.data.test_path.empty()) throw ConfigError("[data] test is required");
        const auto train_rows = data::read_csv(config.data.train_path);
        const auto test_rows = data::read_csv(config.data.test_path);
        if (train_rows.empty()) throw ConfigError("training data " + config.data.train_path + " has no examples");
        data::validate_labels(train_rows, config.model.num_classes);
        data::validate_labels(test_rows, config.model.num_classes);

        const data::Vocab vocab = data::Vocab::build(train_rows, config.data.min_count);
        config.model.vocab_size = vocab.size();
        config.validate();
        auto train = data::encode_all(train_rows, vocab, config.model.max_seq_len, config.model.truncate);
        const auto test = data::encode_all(test_rows, vocab, config.model.max_seq_len, config.model.truncate);

        const fs::path dir = config.output_dir;
        fs::create_directories(dir);
        {
            std::ofstream echo(dir / "config.ini", std::ios::trunc);
            echo << to_text(config);
        }
        std::ofstream metrics(dir / "metrics.jsonl", std::ios::trunc);
        if (!metrics) throw ConfigError("cannot write " + (dir / "metrics.jsonl").string());

        Model model(config.model, config.seed);
        const int batch = config.batch_size;
        const long steps_per_epoch = (long(train.size()) + batch - 1) / batch;
        training::Trainer trainer(model, config.train_config(), steps_per_epoch);
        auto checkpoint = [&](int epoch) {
            const io::Counters counters{trainer.optimizer_state().step, epoch, trainer.previous_grad_rms()};
            const auto named = dir / ("checkpoint-epoch-" + std::to_string(epoch) + ".aqcf");
            io::save_checkpoint(named, config, vocab, model, trainer.optimizer_state(), counters);
            fs::copy_file(named, dir / "checkpoint.aqcf", fs::copy_options::overwrite_existing);
        };
        checkpoint(0);
        out << "vocabulary " << vocab.size() << ", " << train.size() << " train / " << test.size()
            << " test examples, " << Model::count_parameters(config.model) << " parameters\n";

        std::vector<double> epoch_loss;
        const int epochs = config.schedule.total_epochs;
        for (int e = 0; e < epochs; ++e) {
            Rng shuffle(mix_seed(mix_seed(config.seed, 0x5348), std::uint64_t(e)));
            std::shuffle(train.begin(), train.end(), shuffle);
            double sum = 0.0;
            for (long b = 0; b < steps_per_epoch; ++b) {
                const std::size_t first = std::size_t(b) * std::size_t(batch);
                const std::size_t n = std::min<std::size_t>(std::size_t(batch), train.size() - first);
                const double position = e + double(b) / double(steps_per_epoch);
                const training::StepMetrics m = trainer.step(std::span(train).subspan(first, n), position);
                sum += m.loss;
                metrics << json{{"step", m.step},
                                {"epoch", m.epoch},
                                {"stage", m.stage},
                                {"loss", m.loss},
                                {"task_loss", m.task},
                                {"quantum_loss", m.quantum},
                                {"fusion_loss", m.fusion},
                                {"mean_lambda", m.mean_lambda},
                                {"mean_depth", m.mean_depth},
                                {"grad_rms", m.grad_rms},
                                {"learning_rate", m.learning_rate}}
                                   .dump()
                        << '\n'
                        << std::flush;
            }
            epoch_loss.push_back(sum / double(steps_per_epoch));
            checkpoint(e + 1);
            out << "epoch " << e + 1 << "/" << epochs << " mean loss " << epoch_loss.back() << '\n';
        }
        if (epochs == 0) return int(kOk);

        if (test.empty()) {
            err << "warning: empty test split, summary has no held-out metrics\n";
            write_json(dir / "summary.json", {{"epochs", epochs}, {"steps", trainer.optimizer_state().step},
                                              {"epoch_loss", epoch_loss}});
            return int(kOk);
        }
        const auto eval = training::evaluate(model, test, infer_options(), config.seed);
        warn_absent(eval.metrics, err);
        json summary = metrics_json(eval.metrics);
        summary["utilization"] = utilization_json(eval.utilization);
        summary["test_loss"] = eval.mean_loss;
        summary["epoch_loss"] = epoch_loss;
        summary["epochs"] = epochs;
        summary["steps"] = trainer.optimizer_state().step;
        summary["train_examples"] = train.size();
        summary["test_examples"] = test.size();
        write_json(dir / "summary.json", summary);
        out << "test accuracy " << eval.metrics.accuracy << ", f1 " << eval.metrics.f1 << ", mean lambda "
            << eval.utilization.mean_lambda << '\n';
        return int(kOk);
    });
}

int cmd_eval(const fs::path& checkpoint, const fs::path& data_path, const GlobalOptions& opts, std::ostream& out,
             std::ostream& err) {
    return guarded(err, [&] {
        io::Checkpoint ck = io::load_checkpoint(checkpoint);
        const auto rows = data::read_csv(data_path);
        if (rows.empty()) throw ConfigError("evaluation data " + data_path.string() + " has no examples");
        data::validate_labels(rows, ck.config.model.num_classes);
        const auto examples = data::encode_all(rows, ck.vocab, ck.config.model.max_seq_len, ck.config.model.truncate);
        const std::uint64_t seed = opts.seed.value_or(ck.config.seed);
        const auto eval = training::evaluate(*ck.model, examples, infer_options(), seed);
        warn_absent(eval.metrics, err);
        json j = metrics_json(eval.metrics);
        j["utilization"] = utilization_json(eval.utilization);
        j["loss"] = eval.mean_loss;
        j["examples"] = examples.size();
        const fs::path dir = opts.output_dir ? fs::path(*opts.output_dir) : checkpoint.parent_path();
        if (!dir.empty()) fs::create_directories(dir);
        write_json(dir / "eval.json", j);
        out << j.dump(2) << '\n';
        return int(kOk);
    });
}

int cmd_diagnose_plateau(const fs::path& config_path, const GlobalOptions& opts, std::ostream& out,
                         std::ostream& err) {
    return guarded(err, [&] {
        RunConfig config = load_config(config_path);
        apply_overrides(config, opts);
        const auto cells = training::plateau_diagnostic(config.plateau.qubits, config.plateau.depths,
                                                        config.plateau.samples, config.seed, config.threads);
        const fs::path dir = config.output_dir;
        fs::create_directories(dir);
        std::ofstream csv(dir / "plateau.csv", std::ios::binary | std::ios::trunc);
        if (!csv) throw ConfigError("cannot write " + (dir / "plateau.csv").string());
        csv << "n_qubits,depth,grad_variance,samples\n";
        for (const auto& c : cells) {
            csv << c.n_qubits << ',' << c.depth << ',';
            if (c.skipped) {
                csv << "skipped";
            } else {
                char buf[32];
                auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c.variance);
                csv.write(buf, ptr - buf);
            }
            csv << ',' << c.samples << '\n';
            out << "n_qubits " << c.n_qubits << " depth " << c.depth << " variance "
                << (c.skipped ? std::string("skipped") : std::to_string(c.variance)) << '\n';
        }
        return int(kOk);
    });
}

int cmd_encode(const std::string& text, const fs::path& checkpoint, const GlobalOptions& opts, std::ostream& out,
               std::ostream& err) {
    return guarded(err, [&] {
        io::Checkpoint ck = io::load_checkpoint(checkpoint);
        const auto ids = data::tokenize(text, ck.vocab, ck.config.model.max_seq_len, ck.config.model.truncate);
        Rng rng(opts.seed.value_or(ck.config.seed));
        ag::NoGradGuard guard;
        const ForwardResult r = ck.model->forward(ids, infer_options(), rng);
        out << "lambda " << r.trace.lambda << '\n';
        const ag::Matrix& q = r.quantum_outputs.value();
        for (std::size_t t = 0; t < ids.size(); ++t) {
            out << "token " << t << ' ' << ck.vocab.token(ids[t]) << " depth " << r.trace.depths[t] << " <Z>";
            for (ag::Index i = 0; i < q.cols(); ++i) out << ' ' << q(ag::Index(t), i);
            out << '\n';
        }
        out << "logits";
        for (ag::Index c = 0; c < r.logits.cols(); ++c) out << ' ' << r.logits(0, c);
        out << '\n';
        return int(kOk);
    });
}

int cmd_make_toy(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const std::uint64_t seed = opts.seed.value_or(0);
        const fs::path dir = opts.output_dir.value_or("toy");
        fs::create_directories(dir);
        const auto split = data::toy_dataset(2000, 500, seed);
        for (const auto& [name, rows] : {std::pair{"train.csv", &split.train}, std::pair{"test.csv", &split.test}}) {
            std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
            data::write_csv(f, *rows);
        }
        RunConfig config;
        config.model.d_model = 32;
        config.model.n_heads = 4;
        config.model.n_layers = 1;
        config.model.n_qubits = 4;
        config.model.max_depth = 4;
        config.model.memory_slots = 8;
        config.model.max_seq_len = 16;
        config.schedule.total_epochs = 6;
        config.optimizer.learning_rate = 5e-3;
        config.seed = seed;
        config.data.train_path = "train.csv";
        config.data.test_path = "test.csv";
        config.output_dir = "run";
        config.plateau.qubits = {2, 8};
        config.plateau.depths = {1, 8};
        std::ofstream f(dir / "config.ini", std::ios::trunc);
        f << to_text(config);
        out << "wrote " << (dir / "train.csv").string() << ", " << (dir / "test.csv").string() << ", "
            << (dir / "config.ini").string() << '\n';
        return int(kOk);
    });
}

}  // namespace aqcf::cli
