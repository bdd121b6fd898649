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

// On-disk index directory:
//
//   MANIFEST        key=value text: format, version, documents, vocabulary,
//                   postings, config_digest, per-file size and CRC-32, and a
//                   final CRC-32 over the manifest itself
//   dictionary.tsv  token<TAB>term_id
//   model.tsv       N/V header, term_id<TAB>df
//   postings.bin    "SMPOST01", u64 V, u64 P, u64 offsets[V+1],
//                   u32 doc_ids[P], f32 weights[P]   (little-endian)
//   doctable.bin    "SMDOCS01", u64 D, u64 post_ids[D]
//   meta.jsonl      metadata store
//
// Any truncation, bit flip or cross-file inconsistency surfaces as
// CorruptIndex on load.

#include <filesystem>
#include <stdexcept>

#include "stackmatch/post_extract.hpp"
#include "stackmatch/sim_index.hpp"
#include "stackmatch/text_pipeline.hpp"

namespace stackmatch {

inline constexpr int kIndexFormatVersion = 1;

class CorruptIndex : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IndexWriteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything the query side needs, loaded together.
struct IndexBundle {
    Dictionary dictionary;
    TfIdfModel model;
    InvertedIndex index;
    MetaStore meta;
};

void save_index(const IndexBundle& bundle, const std::filesystem::path& directory);
IndexBundle load_index(const std::filesystem::path& directory);

/// File names written by save_index, MANIFEST last.
std::vector<std::string> index_file_names();

}  // namespace stackmatch
