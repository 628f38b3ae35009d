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

#include "aqcf/layers.hpp"

#include <cmath>

namespace aqcf {

std::string to_string(ParamGroup g) {
    switch (g) {
        case ParamGroup::Classical:
            return "classical";
        case ParamGroup::Quantum:
            return "quantum";
        case ParamGroup::Fusion:
            return "fusion";
    }
    return "?";
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

ag::Tensor uniform(ag::Index rows, ag::Index cols, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    ag::Matrix m(rows, cols);
    for (ag::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return ag::Tensor(std::move(m), true);
}

ag::Tensor xavier(ag::Index rows, ag::Index cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return uniform(rows, cols, -limit, limit, rng);
}

ag::Tensor zeros_param(ag::Index rows, ag::Index cols) { return ag::Tensor::zeros(rows, cols, true); }

ag::Tensor constant_param(ag::Index rows, ag::Index cols, double v) {
    return ag::Tensor(ag::Matrix::Constant(rows, cols, v), true);
}

Linear Linear::init(ag::Index in, ag::Index out, Rng& rng) { return {xavier(in, out, rng), zeros_param(1, out)}; }

Linear Linear::zeros(ag::Index in, ag::Index out) { return {zeros_param(in, out), zeros_param(1, out)}; }

void Linear::collect(const std::string& prefix, ParamGroup group, ParameterList& out) const {
    out.push_back({prefix + ".weight", weight, group});
    out.push_back({prefix + ".bias", bias, group});
}

SigmoidMlp SigmoidMlp::init(ag::Index in, ag::Index width, Rng& rng) {
    return {Linear::init(in, width, rng), Linear::init(width, 1, rng)};
}

void SigmoidMlp::collect(const std::string& prefix, ParamGroup group, ParameterList& out) const {
    hidden.collect(prefix + ".hidden", group, out);
    output.collect(prefix + ".output", group, out);
}

LayerNorm LayerNorm::init(ag::Index d) { return {constant_param(1, d, 1.0), zeros_param(1, d)}; }

void LayerNorm::collect(const std::string& prefix, ParamGroup group, ParameterList& out) const {
    out.push_back({prefix + ".gain", gain, group});
    out.push_back({prefix + ".shift", shift, group});
}

}  // namespace aqcf
