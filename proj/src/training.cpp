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

#include "aqcf/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace aqcf::training {

void LossWeights::validate() const {
    if (lambda_reg < 0 || lambda_fusion < 0 || tau_grad < 0 || beta_entropy < 0 || beta_usage < 0 ||
        lambda_target < 0) {
        throw ConfigError("loss weights must be non-negative");
    }
}

ag::Tensor task_loss(const ag::Tensor& logits, int label) {
    if (logits.cols() < 2) throw InvalidInputError("task_loss: need at least two classes");
    return ag::cross_entropy_with_logits(logits, label);
}

double quantum_reg(std::span<const double> grads, double tau) {
    if (grads.empty()) return 0.0;
    double sq = 0.0;
    for (double g : grads) sq += g * g;
    const double rms = std::sqrt(sq / static_cast<double>(grads.size()));
    const double gap = std::max(0.0, tau - rms);
    return gap * gap;
}

ag::Tensor output_variance_penalty(const ag::Tensor& outputs, double tau) {
    const ag::Tensor gap = ag::relu(ag::scale(ag::add_scalar(ag::variance(outputs), -tau), -1.0));
    return ag::square(gap);
}

ag::Tensor depth_alignment_loss(const ag::Tensor& scores, const Eigen::Ref<const Eigen::VectorXd>& targets) {
    if (scores.rows() != targets.size() || scores.cols() != 1) {
        throw DimensionError("depth_alignment_loss: scores " + ag::to_string(scores.shape()) + " vs " +
                             std::to_string(targets.size()) + " targets");
    }
    return ag::mean(ag::square(scores - ag::Tensor(ag::Matrix(targets))));
}

ag::Tensor fusion_reg(std::span<const ag::Tensor> lambdas, const LossWeights& w) {
    if (lambdas.empty()) return ag::Tensor::scalar(0.0);
    const ag::Tensor l = ag::concat_rows(lambdas);
    // -H_bin(l) = l ln l + (1 - l) ln(1 - l)
    const ag::Tensor one_minus = 1.0 - l;
    const ag::Tensor neg_entropy = l * ag::log(l) + one_minus * ag::log(one_minus);
    const ag::Tensor usage = ag::relu(ag::add_scalar(ag::mean(l), -w.lambda_target));
    return ag::mean(neg_entropy) * w.beta_entropy + ag::square(usage) * w.beta_usage;
}

ag::Tensor total_loss(const ag::Tensor& task, const ag::Tensor& quantum, const ag::Tensor& fusion,
                      const LossWeights& w) {
    for (const ag::Tensor* t : {&task, &quantum, &fusion}) {
        if (!std::isfinite(t->item())) throw NumericalError("loss component is not finite");
    }
    return task + quantum * w.lambda_reg + fusion * w.lambda_fusion;
}

double cosine_rate(const OptimizerConfig& cfg, long t) {
    if (cfg.total_steps <= 0) return cfg.learning_rate;
    const double progress = std::clamp(static_cast<double>(t - 1) / static_cast<double>(cfg.total_steps), 0.0, 1.0);
    return cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double optimizer_step(ParameterList& params, OptimizerState& state, const OptimizerConfig& cfg,
                      const std::function<bool(const NamedParameter&)>& trainable) {
    ++state.step;
    const double rate = cosine_rate(cfg, state.step);
    for (NamedParameter& p : params) {
        if (!p.tensor.has_grad()) continue;
        if (trainable && !trainable(p)) continue;
        const ag::Matrix& g = p.tensor.grad();
        auto [mit, fresh] = state.first_moment.try_emplace(p.name, ag::Matrix::Zero(g.rows(), g.cols()));
        auto& v = state.second_moment.try_emplace(p.name, ag::Matrix::Zero(g.rows(), g.cols())).first->second;
        auto& m = mit->second;
        long& t = state.updates[p.name];
        ++t;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        const ag::Matrix ratio =
            ((m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon)).cwiseMax(-cfg.g_max).cwiseMin(cfg.g_max);
        p.tensor.mutable_value() -= rate * ratio;
    }
    return rate;
}

void StageSchedule::validate() const {
    if (total_epochs < 0) throw ConfigError("epochs must be >= 0");
    if (pretrain_fraction < 0 || warmup_fraction < 0 || pretrain_fraction + warmup_fraction > 1.0) {
        throw ConfigError("stage fractions must be non-negative and sum to at most 1");
    }
    if (ramp_start_depth < 1) throw ConfigError("ramp start depth must be >= 1");
}

bool StageFlags::trains(ParamGroup g) const {
    switch (g) {
        case ParamGroup::Classical:
            return train_classical;
        case ParamGroup::Quantum:
            return train_quantum;
        case ParamGroup::Fusion:
            return train_fusion;
    }
    return false;
}

StageFlags stage_config(double epoch, const StageSchedule& schedule, int max_depth) {
    if (epoch < 0) throw InvalidInputError("stage_config: negative epoch");
    StageFlags f;
    const double b1 = schedule.warmup_begin();
    const double b2 = schedule.warmup_end();
    if (epoch < b1) {
        f.stage = 1;
        f.lambda_override = 0.0;
    } else if (epoch < b2) {
        f.stage = 2;
        f.quantum_active = true;
        f.train_quantum = true;
        f.lambda_override = 0.5;
        const double start = std::min<double>(schedule.ramp_start_depth, max_depth);
        const double frac = (epoch - b1) / (b2 - b1);
        f.depth_cap = std::clamp(static_cast<int>(std::lround(start + frac * (max_depth - start))), 1, max_depth);
    } else {
        f.stage = 3;
        f.quantum_active = true;
        f.train_quantum = true;
        f.train_fusion = true;
    }
    return f;
}

Trainer::Trainer(Model& model, TrainConfig config, long steps_per_epoch) : model_(model), config_(std::move(config)) {
    config_.loss.validate();
    config_.schedule.validate();
    config_.noise.validate();
    if (config_.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (config_.optimizer.total_steps <= 0) {
        config_.optimizer.total_steps = steps_per_epoch * config_.schedule.total_epochs;
    }
}

StepMetrics Trainer::step(std::span<const Example> batch, double epoch) {
    if (batch.empty()) throw InvalidInputError("training step on an empty batch");
    const StageFlags flags = stage_config(epoch, config_.schedule, model_.config().max_depth);
    ForwardOptions opts;
    opts.mode = Mode::Train;
    opts.quantum_active = flags.quantum_active;
    opts.lambda_override = flags.lambda_override;
    opts.depth_cap = flags.depth_cap;
    if (flags.stage >= 2) opts.noise = config_.noise;

    const std::uint64_t step_seed = mix_seed(config_.seed, static_cast<std::uint64_t>(state_.step));
    std::vector<ag::Tensor> task_terms, lambdas, outputs, scores;
    std::vector<double> targets;
    std::vector<ForwardResult> results;
    double depth_sum = 0.0;
    long depth_count = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Rng rng(mix_seed(step_seed, i));
        ForwardResult r = model_.forward(batch[i].tokens, opts, rng);
        task_terms.push_back(task_loss(r.logits, batch[i].label));
        lambdas.push_back(r.lambda);
        if (r.quantum_outputs.defined()) {
            outputs.push_back(r.quantum_outputs);
            scores.push_back(r.depth_scores);
            targets.insert(targets.end(), r.depth_targets.data(), r.depth_targets.data() + r.depth_targets.size());
        }
        for (int d : r.trace.depths) {
            depth_sum += d;
            ++depth_count;
        }
        results.push_back(std::move(r));
    }

    const ag::Tensor task = ag::mean(ag::concat_rows(task_terms));
    ag::Tensor quantum = ag::Tensor::scalar(0.0);
    if (!outputs.empty()) {
        const double carried = previous_grad_rms_ < 0
                                   ? 0.0
                                   : std::pow(std::max(0.0, config_.loss.tau_grad - previous_grad_rms_), 2.0);
        const Eigen::VectorXd tgt = Eigen::Map<const Eigen::VectorXd>(targets.data(), Eigen::Index(targets.size()));
        quantum = add_scalar(output_variance_penalty(ag::concat_rows(outputs), config_.loss.tau_grad) +
                                 depth_alignment_loss(ag::concat_rows(scores), tgt),
                             carried);
    }
    const ag::Tensor fusion =
        flags.lambda_override ? ag::Tensor::scalar(0.0) : fusion_reg(lambdas, config_.loss);
    ag::Tensor loss = total_loss(task, quantum, fusion, config_.loss);

    ParameterList params = model_.parameters();
    for (auto& p : params) p.tensor.zero_grad();
    loss.backward();

    double sq = 0.0;
    long count = 0;
    for (const auto& p : params) {
        if (p.group != ParamGroup::Quantum || !p.tensor.has_grad()) continue;
        sq += p.tensor.grad().squaredNorm();
        count += p.tensor.size();
    }
    const double grad_rms = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;

    StepMetrics m;
    m.learning_rate =
        optimizer_step(params, state_, config_.optimizer, [&](const NamedParameter& p) { return flags.trains(p.group); });
    if (count > 0) previous_grad_rms_ = grad_rms;

    if (config_.update_memory && flags.quantum_active && flags.train_quantum) {
        auto& blocks = model_.blocks();
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            auto& memory = blocks[b].attention;
            const int heads = memory.n_heads();
            const int width = model_.config().d_model / heads;
            for (int h = 0; h < heads; ++h) {
                Eigen::VectorXd key = Eigen::VectorXd::Zero(memory.banks[std::size_t(h)].n_qubits());
                Eigen::VectorXd value = Eigen::VectorXd::Zero(width);
                long rows = 0;
                for (const ForwardResult& r : results) {
                    const ag::Matrix& q = r.memory_traces[b].queries[std::size_t(h)];
                    key += q.colwise().sum().transpose();
                    value += r.block_inputs[b].middleCols(h * width, width).colwise().sum().transpose();
                    rows += q.rows();
                }
                qmemory::update(memory.banks[std::size_t(h)], key / double(rows), value / double(rows));
            }
        }
    }

    m.step = state_.step;
    m.stage = flags.stage;
    m.epoch = epoch;
    m.loss = loss.item();
    m.task = task.item();
    m.quantum = quantum.item();
    m.fusion = fusion.item();
    double lsum = 0.0;
    for (const auto& l : lambdas) lsum += l.item();
    m.mean_lambda = lsum / static_cast<double>(lambdas.size());
    m.mean_depth = depth_count > 0 ? depth_sum / static_cast<double>(depth_count) : 0.0;
    m.grad_rms = grad_rms;
    return m;
}

ClassificationMetrics classification_metrics(std::span<const int> predictions, std::span<const int> labels,
                                             int num_classes) {
    if (predictions.size() != labels.size()) throw DimensionError("metrics: prediction/label count mismatch");
    if (labels.empty()) throw InvalidInputError("metrics: empty evaluation set");
    Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes || predictions[i] < 0 || predictions[i] >= num_classes) {
            throw InvalidInputError("metrics: class index out of range");
        }
        ++confusion(labels[i], predictions[i]);
    }
    ClassificationMetrics out;
    out.accuracy = static_cast<double>(confusion.trace()) / static_cast<double>(labels.size());
    for (int c = 0; c < num_classes; ++c) {
        const double tp = confusion(c, c);
        const double support = confusion.row(c).sum();
        const double predicted = confusion.col(c).sum();
        const double precision = predicted > 0 ? tp / predicted : 0.0;
        const double recall = support > 0 ? tp / support : 0.0;
        if (support == 0) out.absent_classes.push_back(c);
        out.precision += precision;
        out.recall += recall;
        out.f1 += (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    }
    out.precision /= num_classes;
    out.recall /= num_classes;
    out.f1 /= num_classes;
    return out;
}

EvalResult evaluate(const Model& model, std::span<const Example> data, const ForwardOptions& options,
                    std::uint64_t seed) {
    if (data.empty()) throw InvalidInputError("evaluate: empty dataset");
    ag::NoGradGuard guard;
    EvalResult out;
    std::vector<int> labels;
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        Rng rng(mix_seed(seed, i));
        const ForwardResult r = model.forward(data[i].tokens, options, rng);
        const auto row = r.logits.value().row(0);
        int best = 0;
        for (int c = 1; c < row.size(); ++c) {
            if (row(c) > row(best)) best = c;
        }
        out.predictions.push_back(best);
        out.lambdas.push_back(r.trace.lambda);
        labels.push_back(data[i].label);
        loss += task_loss(r.logits, data[i].label).item();
    }
    out.metrics = classification_metrics(out.predictions, labels, model.config().num_classes);
    out.utilization = fusion::quantum_utilization(out.lambdas);
    out.mean_loss = loss / static_cast<double>(data.size());
    return out;
}

std::vector<qsim::Gate> plateau_circuit(int n_qubits, int depth, Rng& rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<qsim::Gate> gates;
    for (int l = 0; l < depth; ++l) {
        const qsim::GateKind axis = (l % 2 == 0) ? qsim::GateKind::RY : qsim::GateKind::RZ;
        for (int i = 0; i < n_qubits; ++i) gates.push_back(qsim::Gate::rotation(axis, i, angle(rng)));
        for (int i = 0; i + 1 < n_qubits; ++i) gates.push_back(qsim::Gate::cnot(i, i + 1));
    }
    return gates;
}

std::vector<PlateauCell> plateau_diagnostic(std::span<const int> qubit_range, std::span<const int> depth_range,
                                            int samples, std::uint64_t seed, int threads) {
    if (samples < 30) throw ConfigError("plateau diagnostic needs at least 30 samples per cell");
    for (int n : qubit_range) {
        if (n < 1 || n > qsim::kMaxQubits) throw ConfigError("plateau diagnostic: qubit count outside [1, 24]");
    }
    for (int d : depth_range) {
        if (d < 0) throw ConfigError("plateau diagnostic: negative depth");
    }
    threads = std::max(1, threads);
    std::vector<PlateauCell> cells;
    for (int n : qubit_range) {
        for (int depth : depth_range) {
            PlateauCell cell{n, depth, 0.0, samples, depth == 0};
            if (!cell.skipped) {
                const std::uint64_t cell_seed = mix_seed(seed, (std::uint64_t(n) << 32) | std::uint64_t(depth));
                std::vector<double> grads(static_cast<std::size_t>(samples));
                auto work = [&](int first, int stride) {
                    const Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
                    for (int s = first; s < samples; s += stride) {
                        Rng rng(mix_seed(cell_seed, std::uint64_t(s)));
                        const auto gates = plateau_circuit(n, depth, rng);
                        grads[std::size_t(s)] = qsim::param_shift_grad(x, gates, 0, 0);
                    }
                };
                if (threads == 1) {
                    work(0, 1);
                } else {
                    std::vector<std::jthread> pool;
                    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
                }
                double mu = 0.0;
                for (double g : grads) mu += g;
                mu /= samples;
                double var = 0.0;
                for (double g : grads) var += (g - mu) * (g - mu);
                cell.variance = var / (samples - 1);
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace aqcf::training
