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

#include "stackmatch/sim_index.hpp"

#include <algorithm>
#include <omp.h>

namespace stackmatch {

namespace {

struct Candidate {
    double score;
    DocId doc;
};

bool
better(const Candidate& a, const Candidate& b) {
    return a.score > b.score || (a.score == b.score && a.doc < b.doc);
}

void
keep_best(std::vector<Candidate>& candidates, std::size_t k) {
    if (candidates.size() > k) {
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                          candidates.end(), better);
        candidates.resize(k);
    } else {
        std::sort(candidates.begin(), candidates.end(), better);
    }
}

void
check_query(const InvertedIndex& index, const SparseVector& query, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("k must be positive");
    }
    if (query.model_digest != index.config_digest()) {
        throw ConfigMismatch("query vectorized under a different model than the index");
    }
}

// Accumulates scores for docs in [lo, hi) and appends positive ones.
void
score_range(const InvertedIndex& index, const SparseVector& query, DocId lo, DocId hi,
            std::vector<double>& acc, std::vector<Candidate>& out) {
    std::fill(acc.begin(), acc.begin() + (hi - lo), 0.0);
    const bool full_range = lo == 0 && hi == index.documents();
    for (const auto& [term, qw] : query.entries) {
        if (term >= index.vocabulary()) {
            continue;
        }
        const auto docs = index.posting_docs(term);
        const auto weights = index.posting_weights(term);
        std::size_t begin = 0;
        std::size_t end = docs.size();
        if (!full_range) {
            begin = static_cast<std::size_t>(std::lower_bound(docs.begin(), docs.end(), lo) -
                                             docs.begin());
            end = static_cast<std::size_t>(std::lower_bound(docs.begin() + begin, docs.end(), hi) -
                                           docs.begin());
        }
        for (std::size_t p = begin; p < end; ++p) {
            acc[docs[p] - lo] += qw * static_cast<double>(weights[p]);
        }
    }
    for (DocId d = lo; d < hi; ++d) {
        const double s = acc[d - lo];
        if (s > 0.0) {
            out.push_back({std::min(s, 1.0), d});
        }
    }
}

std::vector<SearchHit>
to_hits(const InvertedIndex& index, const std::vector<Candidate>& best) {
    std::vector<SearchHit> hits;
    hits.reserve(best.size());
    for (const auto& c : best) {
        hits.push_back({c.doc, index.doc_table()[c.doc], c.score});
    }
    return hits;
}

std::vector<SearchHit>
query_serial(const InvertedIndex& index, const SparseVector& query, std::size_t k) {
    const auto d = static_cast<DocId>(index.documents());
    std::vector<double> acc(d);
    std::vector<Candidate> candidates;
    score_range(index, query, 0, d, acc, candidates);
    keep_best(candidates, k);
    return to_hits(index, candidates);
}

std::vector<SearchHit>
query_parallel(const InvertedIndex& index, const SparseVector& query, std::size_t k) {
    const auto d = static_cast<std::size_t>(index.documents());
    const int threads = std::max(1, omp_get_max_threads());
    std::vector<std::vector<Candidate>> partial(static_cast<std::size_t>(threads));

#pragma omp parallel num_threads(threads)
    {
        const auto t = static_cast<std::size_t>(omp_get_thread_num());
        const auto team = static_cast<std::size_t>(omp_get_num_threads());
        const auto lo = static_cast<DocId>(d * t / team);
        const auto hi = static_cast<DocId>(d * (t + 1) / team);
        std::vector<double> acc(hi - lo);
        score_range(index, query, lo, hi, acc, partial[t]);
        keep_best(partial[t], k);
    }

    std::vector<Candidate> merged;
    for (auto& p : partial) {
        merged.insert(merged.end(), p.begin(), p.end());
    }
    keep_best(merged, k);
    return to_hits(index, merged);
}

}  // namespace

InvertedIndex::InvertedIndex(std::size_t vocabulary, std::uint64_t config_digest,
                             std::vector<std::uint64_t> offsets, std::vector<DocId> doc_ids,
                             std::vector<float> weights, std::vector<std::uint64_t> doc_table)
    : vocabulary_(vocabulary),
      config_digest_(config_digest),
      offsets_(std::move(offsets)),
      doc_ids_(std::move(doc_ids)),
      weights_(std::move(weights)),
      doc_table_(std::move(doc_table)) {
    if (offsets_.size() != vocabulary_ + 1 || doc_ids_.size() != weights_.size() ||
        offsets_.front() != 0 || offsets_.back() != doc_ids_.size()) {
        throw std::invalid_argument("inconsistent posting arrays");
    }
}

std::span<const DocId>
InvertedIndex::posting_docs(TermId t) const {
    return std::span<const DocId>(doc_ids_).subspan(offsets_[t], offsets_[t + 1] - offsets_[t]);
}

std::span<const float>
InvertedIndex::posting_weights(TermId t) const {
    return std::span<const float>(weights_).subspan(offsets_[t], offsets_[t + 1] - offsets_[t]);
}

std::size_t
InvertedIndex::memory_bytes() const {
    return offsets_.size() * sizeof(std::uint64_t) + doc_ids_.size() * sizeof(DocId) +
           weights_.size() * sizeof(float) + doc_table_.size() * sizeof(std::uint64_t);
}

InvertedIndex
build_index(std::span<const SparseVector> vectors, std::span<const std::uint64_t> doc_table,
            std::size_t vocabulary, std::uint64_t config_digest) {
    if (vectors.size() != doc_table.size()) {
        throw std::invalid_argument("vector count differs from doc table size");
    }
    std::vector<std::uint64_t> offsets(vocabulary + 1, 0);
    for (const auto& v : vectors) {
        if (v.model_digest != config_digest) {
            throw ConfigMismatch("document vector from a different model");
        }
        for (const auto& e : v.entries) {
            if (e.term >= vocabulary) {
                throw DimensionMismatch("term id " + std::to_string(e.term) +
                                        " outside vocabulary of " + std::to_string(vocabulary));
            }
            ++offsets[e.term + 1];
        }
    }
    for (std::size_t t = 0; t < vocabulary; ++t) {
        offsets[t + 1] += offsets[t];
    }
    std::vector<DocId> doc_ids(offsets.back());
    std::vector<float> weights(offsets.back());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t d = 0; d < vectors.size(); ++d) {
        for (const auto& e : vectors[d].entries) {
            const auto slot = cursor[e.term]++;
            doc_ids[slot] = static_cast<DocId>(d);
            weights[slot] = static_cast<float>(e.weight);
        }
    }
    return InvertedIndex(vocabulary, config_digest, std::move(offsets), std::move(doc_ids),
                         std::move(weights),
                         std::vector<std::uint64_t>(doc_table.begin(), doc_table.end()));
}

std::vector<SearchHit>
query_topk(const InvertedIndex& index, const SparseVector& query, std::size_t k, Execution exec) {
    check_query(index, query, k);
    if (query.empty() || index.documents() == 0) {
        return {};
    }
    return exec == Execution::Serial ? query_serial(index, query, k)
                                     : query_parallel(index, query, k);
}

std::vector<std::vector<SearchHit>>
query_topk_batch(const InvertedIndex& index, std::span<const SparseVector> queries, std::size_t k,
                 Execution exec) {
    for (const auto& q : queries) {
        check_query(index, q, k);
    }
    std::vector<std::vector<SearchHit>> out(queries.size());
    const auto n = static_cast<std::int64_t>(queries.size());
    if (exec == Execution::Serial) {
        for (std::int64_t i = 0; i < n; ++i) {
            out[i] = query_topk(index, queries[i], k, Execution::Serial);
        }
        return out;
    }
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = query_topk(index, queries[i], k, Execution::Serial);
    }
    return out;
}

}  // namespace stackmatch
