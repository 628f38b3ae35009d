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

// Binary checkpoint container.
//
//   "AQCF" | u32 version | u32 entry count | entries
//   entry: u32 name length | name bytes | u8 dtype | u32 rank | u64 dims[rank] | payload
//
// dtype 0 = f64 (row-major doubles), 1 = text (bytes), 2 = u64. All integers
// and doubles are little-endian, so values round-trip bit for bit.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "aqcf/config.hpp"
#include "aqcf/dataset.hpp"
#include "aqcf/model.hpp"
#include "aqcf/training.hpp"

namespace aqcf::io {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class DType : std::uint8_t { F64 = 0, Text = 1, U64 = 2 };

struct Entry {
    std::string name;
    DType dtype = DType::F64;
    std::vector<std::uint64_t> dims;
    std::vector<double> f64;
    std::string text;
    std::vector<std::uint64_t> u64;
};

class Container {
public:
    void add(const std::string& name, const ag::Matrix& m);
    void add(const std::string& name, std::string text);
    void add(const std::string& name, std::vector<std::uint64_t> values);

    const Entry& at(const std::string& name) const;  // ParseError if absent
    bool contains(const std::string& name) const;
    ag::Matrix matrix(const std::string& name) const;
    const std::string& text(const std::string& name) const;
    const std::vector<std::uint64_t>& u64(const std::string& name) const;
    const std::vector<Entry>& entries() const { return entries_; }

    void write(std::ostream& os) const;
    static Container read(std::istream& is);

    /// Writes to a temporary sibling, then renames over `path`.
    void save(const std::filesystem::path& path) const;
    static Container load(const std::filesystem::path& path);

private:
    void push(Entry e);

    std::vector<Entry> entries_;
};

struct Counters {
    long step = 0;
    int epoch = 0;
    double previous_grad_rms = -1.0;
};

struct Checkpoint {
    RunConfig config;
    data::Vocab vocab;
    std::unique_ptr<Model> model;
    training::OptimizerState optimizer;
    Counters counters;
};

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, const data::Vocab& vocab,
                     const Model& model, const training::OptimizerState& optimizer, const Counters& counters);

/// Rebuilds the model from the stored config and overwrites every
/// parameter. Throws ConfigError if names or shapes disagree.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aqcf::io
