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

#include <iostream>

#include "CLI11.hpp"
#include "aqcf/commands.hpp"

int main(int argc, char** argv) {
    using namespace aqcf::cli;
    CLI::App app{"Adaptive quantum-classical fusion transformer"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions opts;
    std::uint64_t seed = 0;
    std::string output_dir;
    int threads = 1;
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
    auto* dir_opt = app.add_option("--output-dir", output_dir, "Directory for run artifacts");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads (AQCF_THREADS takes precedence)")
                            ->check(CLI::PositiveNumber);

    std::string config, checkpoint, data, text;
    auto* train = app.add_subcommand("train", "Run staged training");
    train->add_option("--config", config, "Run configuration")->required();
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a CSV dataset");
    eval->add_option("--checkpoint", checkpoint)->required();
    eval->add_option("--data", data)->required();
    auto* plateau = app.add_subcommand("diagnose-plateau", "Gradient variance of random circuits");
    plateau->add_option("--config", config)->required();
    auto* encode = app.add_subcommand("encode", "Print quantum expectations and lambda for one text");
    encode->add_option("--text", text)->required();
    encode->add_option("--checkpoint", checkpoint)->required();
    auto* toy = app.add_subcommand("make-toy", "Write the synthetic two-cluster dataset and a config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    if (*seed_opt) opts.seed = seed;
    if (*dir_opt) opts.output_dir = output_dir;
    if (*threads_opt) opts.threads = threads;

    if (train->parsed()) return cmd_train(config, opts, std::cout, std::cerr);
    if (eval->parsed()) return cmd_eval(checkpoint, data, opts, std::cout, std::cerr);
    if (plateau->parsed()) return cmd_diagnose_plateau(config, opts, std::cout, std::cerr);
    if (encode->parsed()) return cmd_encode(text, checkpoint, opts, std::cout, std::cerr);
    if (toy->parsed()) return cmd_make_toy(opts, std::cout, std::cerr);
    return kUsage;
}
