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

// Serial reference vs OpenMP kernels on a synthetic corpus:
//
//   bench_kernels [--docs N] [--vocab V] [--queries Q] [--threads T] [--seed S]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

#include <CLI11.hpp>

#include "stackmatch/sim_index.hpp"
#include "stackmatch/text_pipeline.hpp"

using namespace stackmatch;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double
best_ms(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    return best;
}

void
row(const char* kernel, double serial, double parallel) {
    std::printf("%-22s %12.2f %12.2f %8.2fx\n", kernel, serial, parallel, serial / parallel);
}

}  // namespace

int
main(int argc, char** argv) {
    std::size_t docs = 50000;
    std::size_t vocab = 30000;
    std::size_t queries = 500;
    int threads = omp_get_max_threads();
    std::uint64_t seed = 1;
    CLI::App app{"Serial vs parallel kernel timings"};
    app.add_option("--docs", docs);
    app.add_option("--vocab", vocab);
    app.add_option("--queries", queries);
    app.add_option("--threads", threads);
    app.add_option("--seed", seed);
    CLI11_PARSE(app, argc, argv);
    omp_set_num_threads(threads);

    std::mt19937_64 rng(seed);
    std::vector<double> weights(vocab);
    for (std::size_t i = 0; i < vocab; ++i) {
        weights[i] = 1.0 / double(i + 1);
    }
    std::discrete_distribution<TermId> term(weights.begin(), weights.end());
    std::uniform_int_distribution<std::size_t> len(60, 140);
    auto random_bag = [&](std::size_t n) {
        std::vector<std::uint32_t> counts(vocab, 0);
        std::vector<TermId> touched;
        for (std::size_t j = 0; j < n; ++j) {
            const auto t = term(rng);
            if (counts[t]++ == 0) {
                touched.push_back(t);
            }
        }
        std::sort(touched.begin(), touched.end());
        BagOfWords bow;
        for (const auto t : touched) {
            bow.entries.emplace_back(t, counts[t]);
        }
        return bow;
    };

    Dictionary dict;
    for (std::size_t i = 0; i < vocab; ++i) {
        dict.add("t" + std::to_string(i));
    }
    std::vector<BagOfWords> bags;
    for (std::size_t i = 0; i < docs; ++i) {
        bags.push_back(random_bag(len(rng)));
    }
    // Give every term a document so the model can be fitted.
    for (TermId t = 0; t < vocab; ++t) {
        bags[t % docs].entries.emplace_back(t, 1);
    }
    for (auto& b : bags) {
        std::sort(b.entries.begin(), b.entries.end());
        std::vector<std::pair<TermId, std::uint32_t>> merged;
        for (const auto& e : b.entries) {
            if (!merged.empty() && merged.back().first == e.first) {
                merged.back().second += e.second;
            } else {
                merged.push_back(e);
            }
        }
        b.entries = std::move(merged);
    }
    const auto model = TfIdfModel::fit(bags, dict);

    std::vector<SparseVector> vectors;
    const double vec_serial = best_ms(3, [&] { vectors = vectorize_corpus(bags, model, Execution::Serial); });
    const double vec_parallel = best_ms(3, [&] { vectors = vectorize_corpus(bags, model, Execution::Parallel); });

    std::vector<std::uint64_t> table(docs);
    for (std::size_t i = 0; i < docs; ++i) {
        table[i] = i + 1;
    }
    const auto index = build_index(vectors, table, vocab, model.digest());

    std::vector<SparseVector> qs;
    for (std::size_t i = 0; i < queries; ++i) {
        qs.push_back(vectorize(random_bag(len(rng)), model));
    }
    std::size_t checksum = 0;
    const double q_serial = best_ms(3, [&] {
        for (const auto& q : qs) {
            checksum += query_topk(index, q, 30, Execution::Serial).size();
        }
    });
    const double q_parallel = best_ms(3, [&] {
        for (const auto& q : qs) {
            checksum += query_topk(index, q, 30, Execution::Parallel).size();
        }
    });
    const double b_serial = best_ms(3, [&] { checksum += query_topk_batch(index, qs, 30, Execution::Serial).size(); });
    const double b_parallel = best_ms(3, [&] { checksum += query_topk_batch(index, qs, 30, Execution::Parallel).size(); });

    std::printf("docs=%zu vocab=%zu postings=%zu queries=%zu threads=%d\n", docs, vocab, index.postings(),
                queries, threads);
    std::printf("%-22s %12s %12s %9s\n", "kernel (best of 3)", "serial ms", "parallel ms", "speedup");
    row("vectorize_corpus", vec_serial, vec_parallel);
    row("query_topk (per query)", q_serial / double(queries), q_parallel / double(queries));
    row("query_topk_batch", b_serial, b_parallel);
    std::printf("checksum=%zu\n", checksum);
    return 0;
}
