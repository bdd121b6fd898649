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

#include <numeric>
#include <string>
#include <vector>

#include "stackmatch/sim_index.hpp"
#include "stackmatch/text_pipeline.hpp"

namespace stackmatch::test {

/// Library index over pre-tokenized documents; doc i gets post id 1000 + i.
struct TokenIndex {
    Dictionary dict;
    TfIdfModel model;
    std::vector<SparseVector> vectors;
    InvertedIndex index;

    explicit TokenIndex(const std::vector<std::vector<std::string>>& docs,
                        Execution exec = Execution::Serial) {
        dict = build_dictionary(docs);
        std::vector<BagOfWords> bags;
        bags.reserve(docs.size());
        for (const auto& d : docs) {
            bags.push_back(to_bow(d, dict));
        }
        model = TfIdfModel::fit(bags, dict);
        vectors = vectorize_corpus(bags, model, exec);
        std::vector<std::uint64_t> table(docs.size());
        std::iota(table.begin(), table.end(), std::uint64_t{1000});
        index = build_index(vectors, table, dict.size(), model.digest());
    }

    SparseVector query(const std::vector<std::string>& tokens) const {
        return vectorize(to_bow(tokens, dict), model);
    }
};

}  // namespace stackmatch::test
