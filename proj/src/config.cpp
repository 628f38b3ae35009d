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

#include "aqcf/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace aqcf {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view s) {
    T value{};
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (s.empty() || ec != std::errc() || ptr != end) throw InvalidInputError("bad number '" + std::string(s) + "'");
    return value;
}

template <typename T>
std::string format_number(T value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void parse_into(std::string_view s, int& out) { out = parse_number<int>(s); }
void parse_into(std::string_view s, std::uint64_t& out) { out = parse_number<std::uint64_t>(s); }
void parse_into(std::string_view s, double& out) { out = parse_number<double>(s); }
void parse_into(std::string_view s, std::string& out) { out = std::string(s); }

void parse_into(std::string_view s, bool& out) {
    if (s == "true") {
        out = true;
    } else if (s == "false") {
        out = false;
    } else {
        throw InvalidInputError("expected true or false, got '" + std::string(s) + "'");
    }
}

void parse_into(std::string_view s, std::vector<int>& out) {
    out.clear();
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        out.push_back(parse_number<int>(trim(s.substr(start, comma == std::string_view::npos ? comma : comma - start))));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
}

void parse_into(std::string_view s, qsim::NoiseMode& out) {
    if (s == "exact") {
        out = qsim::NoiseMode::ExactDamping;
    } else if (s == "trajectory") {
        out = qsim::NoiseMode::Trajectory;
    } else {
        throw InvalidInputError("noise mode must be exact or trajectory, got '" + std::string(s) + "'");
    }
}

std::string format(int v) { return format_number(v); }
std::string format(std::uint64_t v) { return format_number(v); }
std::string format(double v) { return format_number(v); }
std::string format(const std::string& v) { return v; }
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(qsim::NoiseMode m) { return m == qsim::NoiseMode::Trajectory ? "trajectory" : "exact"; }

std::string format(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_number(v[i]);
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Field field(std::string section, std::string key, Access access) {
    return {std::move(section), std::move(key), [access](RunConfig& c, std::string_view v) { parse_into(v, access(c)); },
            [access](const RunConfig& c) { return format(access(const_cast<RunConfig&>(c))); }};
}

#define AQCF_FIELD(section, key, expr) field(section, key, [](RunConfig& c) -> auto& { return c.expr; })

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        AQCF_FIELD("model", "vocab_size", model.vocab_size),
        AQCF_FIELD("model", "d_model", model.d_model),
        AQCF_FIELD("model", "n_heads", model.n_heads),
        AQCF_FIELD("model", "n_layers", model.n_layers),
        AQCF_FIELD("model", "n_qubits", model.n_qubits),
        AQCF_FIELD("model", "max_depth", model.max_depth),
        AQCF_FIELD("model", "max_seq_len", model.max_seq_len),
        AQCF_FIELD("model", "memory_slots", model.memory_slots),
        AQCF_FIELD("model", "quantum_dropout", model.quantum_dropout),
        AQCF_FIELD("model", "num_classes", model.num_classes),
        AQCF_FIELD("model", "hidden", model.hidden),
        AQCF_FIELD("model", "memory_gamma", model.memory_gamma),
        AQCF_FIELD("model", "lambda_target", model.lambda_target),
        AQCF_FIELD("model", "truncate", model.truncate),
        AQCF_FIELD("training", "epochs", schedule.total_epochs),
        AQCF_FIELD("training", "pretrain_fraction", schedule.pretrain_fraction),
        AQCF_FIELD("training", "warmup_fraction", schedule.warmup_fraction),
        AQCF_FIELD("training", "ramp_start_depth", schedule.ramp_start_depth),
        AQCF_FIELD("training", "batch_size", batch_size),
        AQCF_FIELD("training", "seed", seed),
        AQCF_FIELD("training", "learning_rate", optimizer.learning_rate),
        AQCF_FIELD("training", "beta1", optimizer.beta1),
        AQCF_FIELD("training", "beta2", optimizer.beta2),
        AQCF_FIELD("training", "epsilon", optimizer.epsilon),
        AQCF_FIELD("training", "g_max", optimizer.g_max),
        AQCF_FIELD("training", "lambda_reg", loss.lambda_reg),
        AQCF_FIELD("training", "lambda_fusion", loss.lambda_fusion),
        AQCF_FIELD("training", "tau_grad", loss.tau_grad),
        AQCF_FIELD("training", "beta_entropy", loss.beta_entropy),
        AQCF_FIELD("training", "beta_usage", loss.beta_usage),
        AQCF_FIELD("training", "update_memory", update_memory),
        AQCF_FIELD("training", "threads", threads),
        AQCF_FIELD("noise", "epsilon", noise.epsilon),
        AQCF_FIELD("noise", "mode", noise.mode),
        AQCF_FIELD("noise", "trajectories", noise.trajectories),
        AQCF_FIELD("data", "train", data.train_path),
        AQCF_FIELD("data", "test", data.test_path),
        AQCF_FIELD("data", "min_count", data.min_count),
        AQCF_FIELD("output", "directory", output_dir),
        AQCF_FIELD("plateau", "qubits", plateau.qubits),
        AQCF_FIELD("plateau", "depths", plateau.depths),
        AQCF_FIELD("plateau", "samples", plateau.samples),
    };
    return table;
}

#undef AQCF_FIELD

}  // namespace

void RunConfig::validate() const {
    model.validate();
    loss.validate();
    schedule.validate();
    noise.validate();
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (data.min_count < 1) throw ConfigError("min_count must be >= 1");
    if (optimizer.learning_rate <= 0 || optimizer.g_max <= 0 || optimizer.epsilon <= 0) {
        throw ConfigError("learning_rate, g_max and epsilon must be positive");
    }
    if (optimizer.beta1 < 0 || optimizer.beta1 >= 1 || optimizer.beta2 < 0 || optimizer.beta2 >= 1) {
        throw ConfigError("beta1 and beta2 must lie in [0, 1)");
    }
}

training::TrainConfig RunConfig::train_config() const {
    training::TrainConfig tc;
    tc.loss = loss;
    tc.loss.lambda_target = model.lambda_target;
    tc.optimizer = optimizer;
    tc.schedule = schedule;
    tc.batch_size = batch_size;
    tc.seed = seed;
    tc.noise = noise;
    tc.update_memory = update_memory;
    return tc;
}

bool RunConfig::operator==(const RunConfig& o) const {
    for (const Field& f : fields()) {
        if (f.get(*this) != f.get(o)) return false;
    }
    return true;
}

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    std::string section;
    std::set<std::string> seen;
    long line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        const std::string_view raw = text.substr(start, end == std::string_view::npos ? end : end - start);
        ++line_no;
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;

        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", line_no);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            bool known = false;
            for (const Field& f : fields()) known = known || f.section == section;
            if (!known) throw ParseError("unknown section [" + section + "]", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected `key = value`", line_no);
        if (section.empty()) throw ParseError("key outside of a section", line_no);
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const Field* match = nullptr;
        for (const Field& f : fields()) {
            if (f.section == section && f.key == key) match = &f;
        }
        if (!match) throw ParseError("unknown key '" + key + "' in [" + section + "]", line_no);
        if (!seen.insert(section + "." + key).second) {
            throw ParseError("duplicate key '" + key + "' in [" + section + "]", line_no);
        }
        try {
            match->set(config, value);
        } catch (const InvalidInputError& e) {
            throw ParseError(section + "." + key + ": " + e.what(), line_no);
        }
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig config;
    try {
        config = parse_config(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    for (std::string* p : {&config.data.train_path, &config.data.test_path, &config.output_dir}) {
        if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    }
    return config;
}

std::string to_text(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const Field& f : fields()) {
        if (f.section != section) {
            out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
            section = f.section;
        }
        out += f.key + " = " + f.get(config) + "\n";
    }
    return out;
}

}  // namespace aqcf
