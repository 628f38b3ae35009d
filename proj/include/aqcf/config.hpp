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

// Run configuration and its text format:
//
//   # comment
//   [section]
//   key = value
//
// Sections: model, training, noise, data, output, plateau. Every key is
// optional; unknown keys, duplicates and malformed values are errors.
// Lists are comma separated and `#` starts a comment. `to_text` writes
// every key and re-parses to an equal RunConfig.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "aqcf/model.hpp"
#include "aqcf/training.hpp"

namespace aqcf {

struct DataConfig {
    std::string train_path;
    std::string test_path;
    int min_count = 2;

    bool operator==(const DataConfig&) const = default;
};

struct PlateauConfig {
    std::vector<int> qubits{2, 4, 6, 8};
    std::vector<int> depths{1, 2, 4, 8};
    int samples = 500;

    bool operator==(const PlateauConfig&) const = default;
};

struct RunConfig {
    ModelConfig model;
    training::LossWeights loss;
    training::OptimizerConfig optimizer;
    training::StageSchedule schedule;
    int batch_size = 32;
    std::uint64_t seed = 0;
    bool update_memory = true;
    qsim::NoiseConfig noise{0.01, qsim::NoiseMode::ExactDamping, 1};
    DataConfig data;
    std::string output_dir = "aqcf-run";
    int threads = 1;
    PlateauConfig plateau;

    void validate() const;
    training::TrainConfig train_config() const;
    bool operator==(const RunConfig& o) const;
};

/// Throws ParseError (with a line number) on any grammar or value error.
RunConfig parse_config(std::string_view text);

/// Reads a file; relative data and output paths resolve against the file's
/// directory.
RunConfig load_config(const std::filesystem::path& path);

std::string to_text(const RunConfig& config);

}  // namespace aqcf
