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

#include "stackmatch/pipeline.hpp"

namespace stackmatch {

IndexBundle
build_bundle(Corpus corpus, Execution exec) {
    if (corpus.documents.empty()) {
        throw EmptyCorpus();
    }
    IndexBundle bundle;
    std::vector<BagOfWords> bags;
    std::vector<std::uint64_t> doc_table;
    bags.reserve(corpus.documents.size());
    doc_table.reserve(corpus.documents.size());
    for (const auto& doc : corpus.documents) {
        bags.push_back(add_document(doc.text, bundle.dictionary));
        doc_table.push_back(doc.post_id);
    }
    bundle.model = TfIdfModel::fit(bags, bundle.dictionary);
    const auto vectors = vectorize_corpus(bags, bundle.model, exec);
    bundle.index =
        build_index(vectors, doc_table, bundle.dictionary.size(), bundle.model.digest());
    bundle.meta = std::move(corpus.meta);
    return bundle;
}

IndexBundle
build_bundle_from_rows(const std::filesystem::path& rows, Execution exec) {
    CorpusBuilder builder;
    for_each_row(rows, [&](RawPost&& post) { builder.add(post); });
    return build_bundle(std::move(builder).finish(), exec);
}

}  // namespace stackmatch
