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

// Small building blocks shared by the network modules: dense layers,
// parameter bookkeeping and seeded initialization.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aqcf/autograd.hpp"

namespace aqcf {

using Rng = std::mt19937_64;

enum class Mode { Train, Infer };

/// Which stage of training may update a parameter.
enum class ParamGroup { Classical, Quantum, Fusion };

std::string to_string(ParamGroup g);

struct NamedParameter {
    std::string name;
    ag::Tensor tensor;
    ParamGroup group;
};

using ParameterList = std::vector<NamedParameter>;

/// splitmix64 finalizer; derives independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Leaf of shape rows x cols with U(-limit, limit) entries, limit = sqrt(6 / (rows + cols)).
ag::Tensor xavier(ag::Index rows, ag::Index cols, Rng& rng);
ag::Tensor uniform(ag::Index rows, ag::Index cols, double lo, double hi, Rng& rng);
ag::Tensor zeros_param(ag::Index rows, ag::Index cols);
ag::Tensor constant_param(ag::Index rows, ag::Index cols, double v);

struct Linear {
    ag::Tensor weight;  // in x out
    ag::Tensor bias;    // 1 x out

    static Linear init(ag::Index in, ag::Index out, Rng& rng);
    static Linear zeros(ag::Index in, ag::Index out);
    ag::Tensor operator()(const ag::Tensor& x) const { return ag::matmul(x, weight) + bias; }
    void collect(const std::string& prefix, ParamGroup group, ParameterList& out) const;
};

/// in -> hidden (tanh) -> 1 (sigmoid).
struct SigmoidMlp {
    Linear hidden;
    Linear output;

    static SigmoidMlp init(ag::Index in, ag::Index width, Rng& rng);
    ag::Tensor operator()(const ag::Tensor& x) const { return ag::sigmoid(output(ag::tanh(hidden(x)))); }
    void collect(const std::string& prefix, ParamGroup group, ParameterList& out) const;
};

/// Row-wise layer norm with learnable gain and shift.
struct LayerNorm {
    ag::Tensor gain;   // 1 x d
    ag::Tensor shift;  // 1 x d

    static LayerNorm init(ag::Index d);
    ag::Tensor operator()(const ag::Tensor& x) const { return ag::layer_norm_rows(x) * gain + shift; }
    void collect(const std::string& prefix, ParamGroup group, ParameterList& out) const;
};

}  // namespace aqcf
