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

// Labelled text ingestion: RFC 4180 CSV with a `text,label` header, a
// whitespace vocabulary, and the tokenizer feeding the model.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aqcf/training.hpp"

namespace aqcf::data {

struct LabeledText {
    std::string text;
    int label = 0;
    long line = 0;  // 1-based line where the record starts (0 if synthetic)
};

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;

/// Parses CSV text. The first record must be the header `text,label`.
/// Throws ParseError naming the line on a malformed record.
std::vector<LabeledText> parse_csv(std::string_view content);

/// Reads and parses a file. Throws ConfigError if it cannot be opened.
std::vector<LabeledText> read_csv(const std::filesystem::path& path);

void write_csv(std::ostream& os, const std::vector<LabeledText>& rows);

/// Throws InvalidInputError naming the line if a label is >= num_classes.
void validate_labels(const std::vector<LabeledText>& rows, int num_classes);

/// Lowercased whitespace tokens.
std::vector<std::string> words(std::string_view text);

class Vocab {
public:
    Vocab();  // only <pad> and <unk>

    /// Words with at least `min_count` occurrences, most frequent first,
    /// ties broken alphabetically. Ids are dense from 2.
    static Vocab build(const std::vector<LabeledText>& rows, int min_count = 2);

    /// One token per line, ids in order.
    static Vocab deserialize(std::string_view text);
    std::string serialize() const;

    int id(const std::string& word) const;  // kUnkId when absent
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token(int id) const { return tokens_.at(std::size_t(id)); }
    bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

private:
    void add(const std::string& word);

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

/// Lowercase, split on whitespace, map through the vocabulary. An overlong
/// text is cut to max_len, or rejected with InvalidInputError when
/// `truncate` is false. The empty string gives an empty sequence.
std::vector<int> tokenize(std::string_view text, const Vocab& vocab, int max_len, bool truncate);

/// Tokenized examples ready for training or evaluation.
std::vector<training::Example> encode_all(const std::vector<LabeledText>& rows, const Vocab& vocab, int max_len,
                                          bool truncate);

struct ToySplit {
    std::vector<LabeledText> train;
    std::vector<LabeledText> test;
};

/// Synthetic binary sentiment task over a 50-word vocabulary. Each text
/// draws a latent polarity z ~ N(+-1, 0.5^2) by class, then 8 to 16 words
/// with probability proportional to exp(2 z s_w), s_w spread over [-1, 1].
ToySplit toy_dataset(int n_train, int n_test, std::uint64_t seed);

}  // namespace aqcf::data
