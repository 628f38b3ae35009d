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

// The `aqcf` subcommands. Each returns a process exit status and reports
// problems on `err`.
//
// Output files:
//   config.ini       effective configuration (re-parses to an equal config)
//   metrics.jsonl    one JSON object per optimizer step: step, epoch, stage,
//                    loss, task_loss, quantum_loss, fusion_loss, mean_lambda,
//                    mean_depth, grad_rms, learning_rate
//   checkpoint-epoch-N.aqcf, checkpoint.aqcf (latest)
//   summary.json     held-out accuracy, macro precision/recall/f1,
//                    utilization, per-epoch mean training loss
//   eval.json        the same metric set for `eval`
//   plateau.csv      n_qubits,depth,grad_variance,samples

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "aqcf/config.hpp"

namespace aqcf::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfig = 2,     // bad config, missing or malformed input
    kNumerical = 3,  // non-finite loss; the last good checkpoint is kept
};

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<int> threads;
};

/// AQCF_THREADS, then --threads, then the config value.
int resolve_threads(const GlobalOptions& opts, int configured);

void apply_overrides(RunConfig& config, const GlobalOptions& opts);

int cmd_train(const std::filesystem::path& config_path, const GlobalOptions& opts, std::ostream& out,
              std::ostream& err);
int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data, const GlobalOptions& opts,
             std::ostream& out, std::ostream& err);
int cmd_diagnose_plateau(const std::filesystem::path& config_path, const GlobalOptions& opts, std::ostream& out,
                         std::ostream& err);
int cmd_encode(const std::string& text, const std::filesystem::path& checkpoint, const GlobalOptions& opts,
               std::ostream& out, std::ostream& err);

/// Writes train.csv, test.csv and a matching config.ini for the synthetic
/// two-cluster task.
int cmd_make_toy(const GlobalOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace aqcf::cli
