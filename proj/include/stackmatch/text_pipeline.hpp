// Copyright 2026-present the stackmatch project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Tokenization, dictionary, bag-of-words and TF-IDF weighting.
//
// Tokens are maximal runs of [a-z0-9_] after ASCII lowercasing; every other
// byte (punctuation, whitespace, anything non-ASCII) separates tokens. There
// is no stopword list and no out-of-vocabulary id: a query token absent from
// the dictionary simply contributes nothing.
//
// Weighting is raw term count times log2(N / df), L2-normalized, so the dot
// product of two vectors is their cosine similarity and lies in [0, 1].

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stackmatch {

using TermId = std::uint32_t;

enum class Execution { Serial, Parallel };

std::vector<std::string> tokenize(std::string_view text);

/// Calls `sink(std::string_view)` for each token without allocating per
/// token. The view is only valid during the call.
template <class Sink>
void
for_each_token(std::string_view text, Sink&& sink) {
    std::string token;
    for (const char raw : text) {
        char c = raw;
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') {
            token.push_back(c);
        } else if (!token.empty()) {
            sink(std::string_view(token));
            token.clear();
        }
    }
    if (!token.empty()) {
        sink(std::string_view(token));
    }
}

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyCorpus : public std::runtime_error {
public:
    EmptyCorpus() : std::runtime_error("empty corpus") {}
};

/// token -> dense term id, assigned in first-occurrence order.
class Dictionary {
public:
    TermId add(std::string_view token);
    std::optional<TermId> find(std::string_view token) const;
    const std::string& token(TermId id) const { return tokens_.at(id); }
    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }

    /// "token<TAB>term_id" per line, ascending id.
    void save(const std::filesystem::path& path) const;
    static Dictionary load(const std::filesystem::path& path);

    bool operator==(const Dictionary& other) const { return tokens_ == other.tokens_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TermId, Hash, std::equal_to<>> ids_;
};

Dictionary build_dictionary(std::span<const std::vector<std::string>> token_streams);

/// (term_id, count) pairs with strictly increasing term ids, counts >= 1.
struct BagOfWords {
    std::vector<std::pair<TermId, std::uint32_t>> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
    bool operator==(const BagOfWords&) const = default;
};

/// Unknown tokens are dropped.
BagOfWords to_bow(std::span<const std::string> tokens, const Dictionary& dict);

/// Token and known-token counts of a raw text under a dictionary.
struct QueryTerms {
    BagOfWords bow;
    std::size_t tokens_total = 0;
    std::size_t tokens_known = 0;
};
QueryTerms query_terms(std::string_view text, const Dictionary& dict);

/// Tokenizes `text`, adding unseen tokens to `dict`, and returns its bag.
BagOfWords add_document(std::string_view text, Dictionary& dict);

struct SparseEntry {
    TermId term;
    double weight;

    bool operator==(const SparseEntry&) const = default;
};

/// Unit-norm (or empty) non-negative vector tagged with the digest of the
/// model that produced it.
struct SparseVector {
    std::vector<SparseEntry> entries;
    std::uint64_t model_digest = 0;

    bool empty() const { return entries.empty(); }
    double norm() const;
    bool operator==(const SparseVector&) const = default;
};

class TfIdfModel {
public:
    TfIdfModel() = default;

    /// df counted over `bags`; every dictionary term must occur at least
    /// once. Throws EmptyCorpus when `bags` is empty.
    static TfIdfModel fit(std::span<const BagOfWords> bags, const Dictionary& dict);

    std::uint64_t documents() const { return documents_; }
    std::size_t vocabulary() const { return df_.size(); }
    std::uint32_t df(TermId t) const { return df_.at(t); }
    double idf(TermId t) const { return idf_.at(t); }
    std::uint64_t digest() const { return digest_; }

    /// Header "N=<n><TAB>V=<v>", then "term_id<TAB>df" lines. idf is not
    /// stored; it is recomputed on load.
    void save(const std::filesystem::path& path) const;
    static TfIdfModel load(const std::filesystem::path& path, const Dictionary& dict);

private:
    TfIdfModel(std::uint64_t n, std::vector<std::uint32_t> df, const Dictionary& dict);

    std::uint64_t documents_ = 0;
    std::vector<std::uint32_t> df_;
    std::vector<double> idf_;
    std::uint64_t digest_ = 0;
};

/// Tokenizer and weighting configuration folded together with the fitted
/// vocabulary and document frequencies.
std::uint64_t model_digest(const Dictionary& dict, std::uint64_t documents,
                           std::span<const std::uint32_t> df);

SparseVector vectorize(const BagOfWords& bow, const TfIdfModel& model);

std::vector<SparseVector> vectorize_corpus(std::span<const BagOfWords> bags,
                                           const TfIdfModel& model,
                                           Execution exec = Execution::Parallel);

}  // namespace stackmatch
