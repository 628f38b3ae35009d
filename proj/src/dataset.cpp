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

#include "aqcf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace aqcf::data {

namespace {

struct Record {
    std::vector<std::string> fields;
    long line = 0;
};

std::vector<Record> split_records(std::string_view s) {
    std::vector<Record> out;
    std::size_t i = 0;
    long line = 1;
    if (s.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
    while (i < s.size()) {
        Record rec;
        rec.line = line;
        std::string field;
        bool done = false;
        while (!done) {
            field.clear();
            if (i < s.size() && s[i] == '"') {
                ++i;
                for (;;) {
                    if (i >= s.size()) throw ParseError("unterminated quoted field", rec.line);
                    const char c = s[i++];
                    if (c == '"') {
                        if (i < s.size() && s[i] == '"') {
                            field += '"';
                            ++i;
                        } else {
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        field += c;
                    }
                }
                if (i < s.size() && s[i] != ',' && s[i] != '\n' && s[i] != '\r') {
                    throw ParseError("unexpected character after closing quote", line);
                }
            } else {
                while (i < s.size() && s[i] != ',' && s[i] != '\n' && s[i] != '\r') {
                    if (s[i] == '"') throw ParseError("quote inside unquoted field", line);
                    field += s[i++];
                }
            }
            rec.fields.push_back(field);
            if (i < s.size() && s[i] == ',') {
                ++i;
                continue;
            }
            if (i < s.size() && s[i] == '\r') ++i;
            if (i < s.size() && s[i] == '\n') ++i;
            ++line;
            done = true;
        }
        const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
        if (!blank) out.push_back(std::move(rec));
    }
    return out;
}

int parse_label(const std::string& text, long line) {
    int value = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end || value < 0) {
        throw ParseError("label '" + text + "' is not a non-negative integer", line);
    }
    return value;
}

bool needs_quotes(const std::string& s) {
    return s.find_first_of(",\"\r\n") != std::string::npos || s.empty();
}

}  // namespace

std::vector<LabeledText> parse_csv(std::string_view content) {
    const std::vector<Record> records = split_records(content);
    if (records.empty()) throw ParseError("missing header `text,label`", 1);
    const auto& header = records.front();
    if (header.fields != std::vector<std::string>{"text", "label"}) {
        throw ParseError("header must be `text,label`", header.line);
    }
    std::vector<LabeledText> rows;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const Record& rec = records[r];
        if (rec.fields.size() != 2) {
            throw ParseError("expected 2 fields, found " + std::to_string(rec.fields.size()) +
                                 " (quote text containing commas)",
                             rec.line);
        }
        rows.push_back({rec.fields[0], parse_label(rec.fields[1], rec.line), rec.line});
    }
    return rows;
}

std::vector<LabeledText> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open data file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_csv(std::ostream& os, const std::vector<LabeledText>& rows) {
    os << "text,label\n";
    for (const auto& r : rows) {
        if (needs_quotes(r.text)) {
            os << '"';
            for (char c : r.text) {
                if (c == '"') os << '"';
                os << c;
            }
            os << '"';
        } else {
            os << r.text;
        }
        os << ',' << r.label << '\n';
    }
}

void validate_labels(const std::vector<LabeledText>& rows, int num_classes) {
    for (const auto& r : rows) {
        if (r.label >= num_classes) {
            throw InvalidInputError("line " + std::to_string(r.line) + ": label " + std::to_string(r.label) +
                                    " unknown for " + std::to_string(num_classes) + " classes");
        }
    }
}

std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        } else {
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

Vocab::Vocab() {
    add("<pad>");
    add("<unk>");
}

void Vocab::add(const std::string& word) {
    ids_.emplace(word, size());
    tokens_.push_back(word);
}

Vocab Vocab::build(const std::vector<LabeledText>& rows, int min_count) {
    std::map<std::string, long> counts;
    for (const auto& r : rows) {
        for (auto& w : words(r.text)) ++counts[w];
    }
    std::vector<std::pair<std::string, long>> kept;
    for (auto& [w, c] : counts) {
        if (c >= min_count && w != "<pad>" && w != "<unk>") kept.emplace_back(w, c);
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocab v;
    for (auto& [w, c] : kept) v.add(w);
    return v;
}

Vocab Vocab::deserialize(std::string_view text) {
    Vocab v;
    v.tokens_.clear();
    v.ids_.clear();
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find('\n', start);
        const std::string word(text.substr(start, end == std::string_view::npos ? end : end - start));
        if (v.ids_.count(word)) throw ParseError("duplicate vocabulary entry '" + word + "'");
        v.add(word);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    if (v.size() < 2 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<unk>") {
        throw ParseError("vocabulary must start with <pad> and <unk>");
    }
    return v;
}

std::string Vocab::serialize() const {
    std::string out;
    for (const auto& t : tokens_) out += t + '\n';
    return out;
}

int Vocab::id(const std::string& word) const {
    const auto it = ids_.find(word);
    return it == ids_.end() ? kUnkId : it->second;
}

std::vector<int> tokenize(std::string_view text, const Vocab& vocab, int max_len, bool truncate) {
    const auto ws = words(text);
    if (static_cast<int>(ws.size()) > max_len && !truncate) {
        throw InvalidInputError("text has " + std::to_string(ws.size()) + " tokens, limit is " +
                                std::to_string(max_len));
    }
    std::vector<int> ids;
    for (std::size_t i = 0; i < ws.size() && static_cast<int>(i) < max_len; ++i) ids.push_back(vocab.id(ws[i]));
    return ids;
}

std::vector<training::Example> encode_all(const std::vector<LabeledText>& rows, const Vocab& vocab, int max_len,
                                          bool truncate) {
    std::vector<training::Example> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        try {
            out.push_back({tokenize(r.text, vocab, max_len, truncate), r.label});
        } catch (const InvalidInputError& e) {
            throw InvalidInputError("line " + std::to_string(r.line) + ": " + e.what());
        }
    }
    return out;
}

ToySplit toy_dataset(int n_train, int n_test, std::uint64_t seed) {
    if (n_train < 0 || n_test < 0) throw InvalidInputError("toy dataset sizes must be non-negative");
    constexpr int kWords = 50;
    std::vector<std::string> lexicon;
    Eigen::VectorXd polarity(kWords);
    for (int w = 0; w < kWords; ++w) {
        char name[16];
        std::snprintf(name, sizeof name, "w%02d", w);
        lexicon.emplace_back(name);
        polarity(w) = -1.0 + 2.0 * w / (kWords - 1);
    }
    auto generate = [&](int count, std::uint64_t stream) {
        Rng rng(mix_seed(seed, stream));
        std::normal_distribution<double> noise(0.0, 0.5);
        std::uniform_int_distribution<int> length(8, 16);
        std::vector<LabeledText> rows;
        for (int i = 0; i < count; ++i) {
            const int label = i % 2;
            const double z = (label == 1 ? 1.0 : -1.0) + noise(rng);
            std::vector<double> weights(kWords);
            for (int w = 0; w < kWords; ++w) weights[std::size_t(w)] = std::exp(2.0 * z * polarity(w));
            std::discrete_distribution<int> pick(weights.begin(), weights.end());
            const int n = length(rng);
            std::string text;
            for (int k = 0; k < n; ++k) {
                if (k) text += ' ';
                text += lexicon[std::size_t(pick(rng))];
            }
            rows.push_back({std::move(text), label, 0});
        }
        return rows;
    };
    return {generate(n_train, 1), generate(n_test, 2)};
}

}  // namespace aqcf::data
