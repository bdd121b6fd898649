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

// Sparse inverted index answering exact top-k cosine queries.
//
// Postings are stored CSR-style: one offsets array over terms and two
// parallel arrays of doc ids (ascending within a term) and float weights.
// Document vectors are L2-normalized before transposition, so a query's dot
// product with a document is its cosine similarity. Scores accumulate in
// double.
//
// query_topk(..., Execution::Serial) is the reference term-at-a-time kernel.
// The parallel kernel splits the doc-id range across OpenMP threads and
// visits terms in the same order, so per-document sums are bit-identical.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "stackmatch/post_extract.hpp"
#include "stackmatch/text_pipeline.hpp"

namespace stackmatch {

inline constexpr std::size_t kDefaultRetrieveK = 30;

struct SearchHit {
    DocId doc_id = 0;
    std::uint64_t post_id = 0;
    double similarity = 0.0;

    bool operator==(const SearchHit&) const = default;
};

class ConfigMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvertedIndex {
public:
    InvertedIndex() = default;
    InvertedIndex(std::size_t vocabulary, std::uint64_t config_digest,
                  std::vector<std::uint64_t> offsets, std::vector<DocId> doc_ids,
                  std::vector<float> weights, std::vector<std::uint64_t> doc_table);

    std::size_t documents() const { return doc_table_.size(); }
    std::size_t vocabulary() const { return vocabulary_; }
    std::size_t postings() const { return doc_ids_.size(); }
    std::uint64_t config_digest() const { return config_digest_; }

    std::span<const DocId> posting_docs(TermId t) const;
    std::span<const float> posting_weights(TermId t) const;
    std::span<const std::uint64_t> offsets() const { return offsets_; }
    std::span<const DocId> doc_ids() const { return doc_ids_; }
    std::span<const float> weights() const { return weights_; }
    std::span<const std::uint64_t> doc_table() const { return doc_table_; }

    /// Bytes held by the posting and doc-table arrays.
    std::size_t memory_bytes() const;

    bool operator==(const InvertedIndex&) const = default;

private:
    std::size_t vocabulary_ = 0;
    std::uint64_t config_digest_ = 0;
    std::vector<std::uint64_t> offsets_{0};
    std::vector<DocId> doc_ids_;
    std::vector<float> weights_;
    std::vector<std::uint64_t> doc_table_;
};

/// vectors[i] is document i; doc_table[i] its post id. Zero vectors stay in
/// the doc table but contribute no postings. Throws DimensionMismatch when a
/// term id reaches `vocabulary` and ConfigMismatch when a vector was produced
/// by another model.
InvertedIndex build_index(std::span<const SparseVector> vectors,
                          std::span<const std::uint64_t> doc_table, std::size_t vocabulary,
                          std::uint64_t config_digest);

/// Exact top-k by cosine, descending, ties by doc id ascending. Only
/// documents with positive similarity are returned; an empty query yields
/// no hits. Throws ConfigMismatch when the query's model digest differs
/// from the index's.
std::vector<SearchHit> query_topk(const InvertedIndex& index, const SparseVector& query,
                                  std::size_t k = kDefaultRetrieveK,
                                  Execution exec = Execution::Serial);

/// One query per OpenMP iteration (or a plain loop for Serial).
std::vector<std::vector<SearchHit>> query_topk_batch(const InvertedIndex& index,
                                                     std::span<const SparseVector> queries,
                                                     std::size_t k = kDefaultRetrieveK,
                                                     Execution exec = Execution::Parallel);

}  // namespace stackmatch
