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

#include "aqcf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace aqcf::io {

namespace {

constexpr char kMagic[4] = {'A', 'Q', 'C', 'F'};

template <typename T>
void put(std::ostream& os, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ParseError("checkpoint truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

std::string get_bytes(std::istream& is, std::uint64_t n) {
    if (n > (1ull << 34)) throw ParseError("checkpoint entry too large");
    std::string s(n, '\0');
    if (n && !is.read(s.data(), static_cast<std::streamsize>(n))) throw ParseError("checkpoint truncated");
    return s;
}

std::uint64_t product(const std::vector<std::uint64_t>& dims) {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

}  // namespace

void Container::push(Entry e) {
    if (contains(e.name)) throw InvalidInputError("duplicate checkpoint entry " + e.name);
    entries_.push_back(std::move(e));
}

void Container::add(const std::string& name, const ag::Matrix& m) {
    Entry e{name, DType::F64, {std::uint64_t(m.rows()), std::uint64_t(m.cols())}, {}, {}, {}};
    e.f64.assign(m.data(), m.data() + m.size());
    push(std::move(e));
}

void Container::add(const std::string& name, std::string text) {
    const auto n = text.size();
    push({name, DType::Text, {n}, {}, std::move(text), {}});
}

void Container::add(const std::string& name, std::vector<std::uint64_t> values) {
    const auto n = values.size();
    push({name, DType::U64, {n}, {}, {}, std::move(values)});
}

bool Container::contains(const std::string& name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return true;
    }
    return false;
}

const Entry& Container::at(const std::string& name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return e;
    }
    throw ParseError("checkpoint has no entry " + name);
}

ag::Matrix Container::matrix(const std::string& name) const {
    const Entry& e = at(name);
    if (e.dtype != DType::F64 || e.dims.size() != 2) throw ParseError("entry " + name + " is not a matrix");
    ag::Matrix m(ag::Index(e.dims[0]), ag::Index(e.dims[1]));
    std::copy(e.f64.begin(), e.f64.end(), m.data());
    return m;
}

const std::string& Container::text(const std::string& name) const {
    const Entry& e = at(name);
    if (e.dtype != DType::Text) throw ParseError("entry " + name + " is not text");
    return e.text;
}

const std::vector<std::uint64_t>& Container::u64(const std::string& name) const {
    const Entry& e = at(name);
    if (e.dtype != DType::U64) throw ParseError("entry " + name + " is not u64");
    return e.u64;
}

void Container::write(std::ostream& os) const {
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kFormatVersion);
    put<std::uint32_t>(os, std::uint32_t(entries_.size()));
    for (const Entry& e : entries_) {
        put<std::uint32_t>(os, std::uint32_t(e.name.size()));
        os.write(e.name.data(), std::streamsize(e.name.size()));
        put<std::uint8_t>(os, static_cast<std::uint8_t>(e.dtype));
        put<std::uint32_t>(os, std::uint32_t(e.dims.size()));
        for (auto d : e.dims) put<std::uint64_t>(os, d);
        switch (e.dtype) {
            case DType::F64:
                for (double v : e.f64) put<double>(os, v);
                break;
            case DType::Text:
                os.write(e.text.data(), std::streamsize(e.text.size()));
                break;
            case DType::U64:
                for (auto v : e.u64) put<std::uint64_t>(os, v);
                break;
        }
    }
}

Container Container::read(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("not an AQCF checkpoint");
    const auto version = get<std::uint32_t>(is);
    if (version != kFormatVersion) {
        throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = get<std::uint32_t>(is);
    Container c;
    for (std::uint32_t i = 0; i < count; ++i) {
        Entry e;
        e.name = get_bytes(is, get<std::uint32_t>(is));
        const auto tag = get<std::uint8_t>(is);
        if (tag > 2) throw ParseError("entry " + e.name + " has unknown dtype " + std::to_string(tag));
        e.dtype = static_cast<DType>(tag);
        const auto rank = get<std::uint32_t>(is);
        if (rank > 8) throw ParseError("entry " + e.name + " has rank " + std::to_string(rank));
        for (std::uint32_t r = 0; r < rank; ++r) e.dims.push_back(get<std::uint64_t>(is));
        const std::uint64_t n = product(e.dims);
        if (n > (1ull << 31)) throw ParseError("entry " + e.name + " too large");
        switch (e.dtype) {
            case DType::F64:
                e.f64.resize(n);
                for (auto& v : e.f64) v = get<double>(is);
                break;
            case DType::Text:
                e.text = get_bytes(is, n);
                break;
            case DType::U64:
                e.u64.resize(n);
                for (auto& v : e.u64) v = get<std::uint64_t>(is);
                break;
        }
        c.push(std::move(e));
    }
    return c;
}

void Container::save(const std::filesystem::path& path) const {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        write(out);
        out.flush();
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Container Container::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint " + path.string());
    return read(in);
}

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, const data::Vocab& vocab,
                     const Model& model, const training::OptimizerState& optimizer, const Counters& counters) {
    Container c;
    c.add("meta/config", to_text(config));
    c.add("meta/vocab", vocab.serialize());
    std::uint64_t rms_bits;
    std::memcpy(&rms_bits, &counters.previous_grad_rms, sizeof rms_bits);
    c.add("meta/counters", std::vector<std::uint64_t>{std::uint64_t(counters.step), std::uint64_t(counters.epoch),
                                                       std::uint64_t(optimizer.step), rms_bits});
    // Per-sample streams are mix_seed(seed, step, index), so seed and step
    // together are the full RNG state.
    c.add("meta/rng", std::vector<std::uint64_t>{config.seed, std::uint64_t(counters.step)});
    for (const auto& p : model.parameters()) c.add("param/" + p.name, p.tensor.value());
    for (const auto& [name, m] : optimizer.first_moment) c.add("adam/m/" + name, m);
    for (const auto& [name, v] : optimizer.second_moment) c.add("adam/v/" + name, v);
    std::string updates;
    for (const auto& [name, t] : optimizer.updates) updates += name + ' ' + std::to_string(t) + '\n';
    c.add("adam/updates", updates);
    c.save(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const Container c = Container::load(path);
    Checkpoint out;
    out.config = parse_config(c.text("meta/config"));
    out.vocab = data::Vocab::deserialize(c.text("meta/vocab"));
    if (out.vocab.size() != out.config.model.vocab_size) {
        throw ConfigError("checkpoint vocabulary size " + std::to_string(out.vocab.size()) +
                          " does not match model vocab_size " + std::to_string(out.config.model.vocab_size));
    }
    const auto& counters = c.u64("meta/counters");
    if (counters.size() != 4) throw ParseError("meta/counters must hold 4 values");
    out.counters.step = long(counters[0]);
    out.counters.epoch = int(counters[1]);
    out.optimizer.step = long(counters[2]);
    std::memcpy(&out.counters.previous_grad_rms, &counters[3], sizeof(double));

    out.model = std::make_unique<Model>(out.config.model, out.config.seed);
    long params = 0;
    for (auto& p : out.model->parameters()) {
        const ag::Matrix m = c.matrix("param/" + p.name);
        if (m.rows() != p.tensor.rows() || m.cols() != p.tensor.cols()) {
            throw ConfigError("checkpoint tensor " + p.name + " has shape " + ag::to_string({m.rows(), m.cols()}) +
                              ", model expects " + ag::to_string(p.tensor.shape()));
        }
        p.tensor.mutable_value() = m;
        ++params;
    }
    long stored = 0;
    for (const auto& e : c.entries()) {
        if (e.name.rfind("param/", 0) == 0) ++stored;
        if (e.name.rfind("adam/m/", 0) == 0) out.optimizer.first_moment[e.name.substr(7)] = c.matrix(e.name);
        if (e.name.rfind("adam/v/", 0) == 0) out.optimizer.second_moment[e.name.substr(7)] = c.matrix(e.name);
    }
    if (stored != params) {
        throw ConfigError("checkpoint holds " + std::to_string(stored) + " parameter tensors, model has " +
                          std::to_string(params));
    }
    const std::string& updates = c.text("adam/updates");
    std::size_t start = 0;
    while (start < updates.size()) {
        const auto end = updates.find('\n', start);
        const std::string line = updates.substr(start, end - start);
        const auto space = line.rfind(' ');
        if (space == std::string::npos) throw ParseError("malformed adam/updates");
        out.optimizer.updates[line.substr(0, space)] = std::stol(line.substr(space + 1));
        start = end == std::string::npos ? updates.size() : end + 1;
    }
    return out;
}

}  // namespace aqcf::io
