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

#include "stackmatch/text_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace stackmatch {

namespace {

constexpr std::string_view kWeightingConfig =
    "stackmatch-tfidf/1;token=[a-z0-9_]+;lower=ascii;tf=raw;idf=log2(N/df);norm=l2";

class Fnv1a {
public:
    void update(std::string_view bytes) {
        for (const unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }
    void update_u64(std::uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) {
            buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        }
        update({buf, 8});
    }
    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

bool
is_token_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

template <class Int>
std::optional<Int>
parse_uint(std::string_view text) {
    Int value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

BagOfWords
bag_from_ids(std::vector<TermId>& ids) {
    std::sort(ids.begin(), ids.end());
    BagOfWords bow;
    for (const auto id : ids) {
        if (!bow.entries.empty() && bow.entries.back().first == id) {
            ++bow.entries.back().second;
        } else {
            bow.entries.emplace_back(id, 1);
        }
    }
    return bow;
}

}  // namespace

std::vector<std::string>
tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    for_each_token(text, [&](std::string_view t) { tokens.emplace_back(t); });
    return tokens;
}

// ---------------------------------------------------------------------------

TermId
Dictionary::add(std::string_view token) {
    if (auto it = ids_.find(token); it != ids_.end()) {
        return it->second;
    }
    const auto id = static_cast<TermId>(tokens_.size());
    tokens_.emplace_back(token);
    ids_.emplace(tokens_.back(), id);
    return id;
}

std::optional<TermId>
Dictionary::find(std::string_view token) const {
    if (auto it = ids_.find(token); it != ids_.end()) {
        return it->second;
    }
    return std::nullopt;
}

void
Dictionary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        out << tokens_[i] << '\t' << i << '\n';
    }
    if (!out.flush()) {
        throw std::runtime_error("write failure on " + path.string());
    }
}

Dictionary
Dictionary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open dictionary " + path.string());
    }
    Dictionary dict;
    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw FormatError("dictionary line without token/id pair");
        }
        const std::string_view token(line.data(), tab);
        if (!std::all_of(token.begin(), token.end(), is_token_char)) {
            throw FormatError("dictionary token with invalid characters");
        }
        auto id = parse_uint<TermId>(std::string_view(line).substr(tab + 1));
        if (!id || *id != dict.size()) {
            throw FormatError("dictionary ids not dense and ascending");
        }
        if (dict.add(token) != *id) {
            throw FormatError("duplicate dictionary token");
        }
    }
    return dict;
}

Dictionary
build_dictionary(std::span<const std::vector<std::string>> token_streams) {
    Dictionary dict;
    for (const auto& stream : token_streams) {
        for (const auto& token : stream) {
            dict.add(token);
        }
    }
    return dict;
}

BagOfWords
to_bow(std::span<const std::string> tokens, const Dictionary& dict) {
    std::vector<TermId> ids;
    ids.reserve(tokens.size());
    for (const auto& token : tokens) {
        if (auto id = dict.find(token)) {
            ids.push_back(*id);
        }
    }
    return bag_from_ids(ids);
}

QueryTerms
query_terms(std::string_view text, const Dictionary& dict) {
    QueryTerms out;
    std::vector<TermId> ids;
    for_each_token(text, [&](std::string_view token) {
        ++out.tokens_total;
        if (auto id = dict.find(token)) {
            ids.push_back(*id);
        }
    });
    out.tokens_known = ids.size();
    out.bow = bag_from_ids(ids);
    return out;
}

BagOfWords
add_document(std::string_view text, Dictionary& dict) {
    std::vector<TermId> ids;
    for_each_token(text, [&](std::string_view token) { ids.push_back(dict.add(token)); });
    return bag_from_ids(ids);
}

// ---------------------------------------------------------------------------

double
SparseVector::norm() const {
    double sum = 0.0;
    for (const auto& e : entries) {
        sum += e.weight * e.weight;
    }
    return std::sqrt(sum);
}

std::uint64_t
model_digest(const Dictionary& dict, std::uint64_t documents, std::span<const std::uint32_t> df) {
    Fnv1a h;
    h.update(kWeightingConfig);
    h.update_u64(documents);
    h.update_u64(dict.size());
    for (std::size_t t = 0; t < dict.size(); ++t) {
        h.update(dict.token(static_cast<TermId>(t)));
        h.update({"\0", 1});
        h.update_u64(t < df.size() ? df[t] : 0);
    }
    return h.value();
}

TfIdfModel::TfIdfModel(std::uint64_t n, std::vector<std::uint32_t> df, const Dictionary& dict)
    : documents_(n), df_(std::move(df)), idf_(df_.size()) {
    for (std::size_t t = 0; t < df_.size(); ++t) {
        // df == N gives exactly log2(1) == 0.
        idf_[t] = std::log2(static_cast<double>(documents_) / static_cast<double>(df_[t]));
    }
    digest_ = model_digest(dict, documents_, df_);
}

TfIdfModel
TfIdfModel::fit(std::span<const BagOfWords> bags, const Dictionary& dict) {
    if (bags.empty()) {
        throw EmptyCorpus();
    }
    std::vector<std::uint32_t> df(dict.size(), 0);
    for (const auto& bag : bags) {
        for (const auto& [term, count] : bag.entries) {
            if (term >= df.size()) {
                throw std::invalid_argument("bag term outside dictionary");
            }
            ++df[term];
        }
    }
    for (std::size_t t = 0; t < df.size(); ++t) {
        if (df[t] == 0) {
            throw std::invalid_argument("dictionary term '" + dict.token(static_cast<TermId>(t)) +
                                        "' never occurs in the corpus");
        }
    }
    return TfIdfModel(bags.size(), std::move(df), dict);
}

void
TfIdfModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << "N=" << documents_ << "\tV=" << df_.size() << '\n';
    for (std::size_t t = 0; t < df_.size(); ++t) {
        out << t << '\t' << df_[t] << '\n';
    }
    if (!out.flush()) {
        throw std::runtime_error("write failure on " + path.string());
    }
}

TfIdfModel
TfIdfModel::load(const std::filesystem::path& path, const Dictionary& dict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open model " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("N=")) {
        throw FormatError("model header missing");
    }
    const auto tab = line.find("\tV=");
    if (tab == std::string::npos) {
        throw FormatError("model header malformed");
    }
    auto n = parse_uint<std::uint64_t>(std::string_view(line).substr(2, tab - 2));
    auto v = parse_uint<std::uint64_t>(std::string_view(line).substr(tab + 3));
    if (!n || !v || *n == 0 || *v != dict.size()) {
        throw FormatError("model header inconsistent with dictionary");
    }
    std::vector<std::uint32_t> df;
    df.reserve(*v);
    while (std::getline(in, line)) {
        const auto sep = line.find('\t');
        if (sep == std::string::npos) {
            throw FormatError("model line malformed");
        }
        auto id = parse_uint<std::uint64_t>(std::string_view(line).substr(0, sep));
        auto count = parse_uint<std::uint32_t>(std::string_view(line).substr(sep + 1));
        if (!id || !count || *id != df.size() || *count == 0 || *count > *n) {
            throw FormatError("model df entry out of range");
        }
        df.push_back(*count);
    }
    if (df.size() != *v) {
        throw FormatError("model truncated");
    }
    return TfIdfModel(*n, std::move(df), dict);
}

SparseVector
vectorize(const BagOfWords& bow, const TfIdfModel& model) {
    SparseVector out;
    out.model_digest = model.digest();
    out.entries.reserve(bow.entries.size());
    double sum_sq = 0.0;
    for (const auto& [term, count] : bow.entries) {
        const double w = static_cast<double>(count) * model.idf(term);
        if (w > 0.0) {
            out.entries.push_back({term, w});
            sum_sq += w * w;
        }
    }
    if (!out.entries.empty()) {
        const double inv = 1.0 / std::sqrt(sum_sq);
        for (auto& e : out.entries) {
            e.weight *= inv;
        }
    }
    return out;
}

std::vector<SparseVector>
vectorize_corpus(std::span<const BagOfWords> bags, const TfIdfModel& model, Execution exec) {
    std::vector<SparseVector> out(bags.size());
    const auto n = static_cast<std::int64_t>(bags.size());
    if (exec == Execution::Serial) {
        for (std::int64_t i = 0; i < n; ++i) {
            out[i] = vectorize(bags[i], model);
        }
        return out;
    }
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = vectorize(bags[i], model);
    }
    return out;
}

}  // namespace stackmatch
