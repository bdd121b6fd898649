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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stackmatch/dump_ingest.hpp"

namespace stackmatch {

using DocId = std::uint32_t;

struct CodeDocument {
    DocId doc_id = 0;
    std::uint64_t post_id = 0;
    std::string text;

    bool operator==(const CodeDocument&) const = default;
};

struct PostMeta {
    std::uint64_t post_id = 0;
    PostType post_type = PostType::Question;
    std::optional<std::uint64_t> parent_id;
    std::optional<std::uint64_t> accepted_answer_id;
    std::optional<std::string> title;
    std::optional<Timestamp> creation_date;
    std::optional<std::uint64_t> view_count;
    std::int64_t score = 0;
    // Plain-text problem description of a question (body minus <pre> blocks);
    // empty for answers. Feeds the summarizer.
    std::string description;

    bool operator==(const PostMeta&) const = default;
};

/// Inner text of every <code ...>...</code> span in document order. Nested
/// tags inside a span are stripped and HTML entities decoded afterwards. An
/// unterminated final <code> runs to the end of the input.
std::vector<std::string> extract_code_blocks(std::string_view body_html);

/// nullopt when the post carries no non-blank code. doc_id is left at 0;
/// Corpus assigns the dense ordinal.
std::optional<CodeDocument> build_code_document(const RawPost& post);

PostMeta build_meta(const RawPost& post);

class MetaStore {
public:
    void insert(PostMeta meta);
    const PostMeta* find(std::uint64_t post_id) const;
    std::size_t size() const { return by_id_.size(); }
    /// Entries ordered by post_id.
    std::vector<const PostMeta*> sorted() const;

private:
    std::unordered_map<std::uint64_t, PostMeta> by_id_;
};

/// The indexed corpus plus its metadata. Documents are ordered by post_id so
/// doc_id == position.
struct Corpus {
    std::vector<CodeDocument> documents;
    MetaStore meta;
};

/// Incremental corpus builder; doc_ids are assigned in finish().
class CorpusBuilder {
public:
    void add(const RawPost& post);
    Corpus finish() &&;

private:
    std::vector<CodeDocument> docs_;
    MetaStore meta_;
};

Corpus build_corpus(std::span<const RawPost> posts);

/// Corpus file: {"doc_id","post_id","text"} per line.
void write_corpus(std::span<const CodeDocument> docs, const std::filesystem::path& path);
std::vector<CodeDocument> read_corpus(const std::filesystem::path& path);

/// Metadata store file: one JSON object per line, ascending post_id.
void write_meta(const MetaStore& meta, const std::filesystem::path& path);
MetaStore read_meta(const std::filesystem::path& path);

}  // namespace stackmatch
