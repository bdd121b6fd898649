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

#include "stackmatch/post_extract.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "stackmatch/html.hpp"

namespace stackmatch {

namespace {

// Case-insensitive search for an ASCII lowercase needle.
std::size_t
ifind(std::string_view hay, std::string_view needle, std::size_t from) {
    if (needle.size() > hay.size()) {
        return std::string_view::npos;
    }
    for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
        std::size_t j = 0;
        while (j < needle.size() &&
               std::tolower(static_cast<unsigned char>(hay[i + j])) == needle[j]) {
            ++j;
        }
        if (j == needle.size()) {
            return i;
        }
    }
    return std::string_view::npos;
}

std::string
strip_tags(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '<' && i + 1 < text.size() &&
            (std::isalpha(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '/' ||
             text[i + 1] == '!')) {
            const auto gt = text.find('>', i);
            if (gt != std::string_view::npos) {
                i = gt + 1;
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

bool
is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

void
write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (const auto& line : lines) {
        out << line << '\n';
    }
    if (!out.flush()) {
        throw std::runtime_error("write failure on " + path.string());
    }
}

template <class Visit>
void
read_json_lines(const std::filesystem::path& path, Visit&& visit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            visit(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
}

}  // namespace

std::vector<std::string>
extract_code_blocks(std::string_view body_html) {
    std::vector<std::string> blocks;
    std::size_t i = 0;
    while (true) {
        const auto open = ifind(body_html, "<code", i);
        if (open == std::string_view::npos) {
            break;
        }
        const auto after = open + 5;
        if (after < body_html.size() && body_html[after] != '>' &&
            !std::isspace(static_cast<unsigned char>(body_html[after]))) {
            i = after;  // <codex>, <code/> and friends
            continue;
        }
        const auto gt = body_html.find('>', after);
        if (gt == std::string_view::npos) {
            break;
        }
        const auto content_begin = gt + 1;
        const auto close = ifind(body_html, "</code", content_begin);
        const auto content_end = close == std::string_view::npos ? body_html.size() : close;
        blocks.push_back(decode_html_entities(
            strip_tags(body_html.substr(content_begin, content_end - content_begin))));
        if (close == std::string_view::npos) {
            break;
        }
        const auto close_gt = body_html.find('>', close);
        i = close_gt == std::string_view::npos ? body_html.size() : close_gt + 1;
    }
    return blocks;
}

std::optional<CodeDocument>
build_code_document(const RawPost& post) {
    if (post.post_type == PostType::Other) {
        return std::nullopt;
    }
    std::string text;
    for (const auto& block : extract_code_blocks(post.body_html)) {
        if (is_blank(block)) {
            continue;
        }
        if (!text.empty()) {
            text.push_back('\n');
        }
        text += block;
    }
    if (text.empty()) {
        return std::nullopt;
    }
    return CodeDocument{0, post.post_id, std::move(text)};
}

PostMeta
build_meta(const RawPost& post) {
    PostMeta meta;
    meta.post_id = post.post_id;
    meta.post_type = post.post_type;
    meta.parent_id = post.parent_id;
    meta.accepted_answer_id = post.accepted_answer_id;
    meta.title = post.title;
    meta.creation_date = post.creation_date;
    meta.view_count = post.view_count;
    meta.score = post.score;
    if (post.post_type == PostType::Question) {
        meta.description = html_to_text(post.body_html);
    }
    return meta;
}

void
MetaStore::insert(PostMeta meta) {
    const auto id = meta.post_id;
    if (!by_id_.emplace(id, std::move(meta)).second) {
        throw std::invalid_argument("duplicate post_id " + std::to_string(id));
    }
}

const PostMeta*
MetaStore::find(std::uint64_t post_id) const {
    auto it = by_id_.find(post_id);
    return it == by_id_.end() ? nullptr : &it->second;
}

std::vector<const PostMeta*>
MetaStore::sorted() const {
    std::vector<const PostMeta*> out;
    out.reserve(by_id_.size());
    for (const auto& [id, meta] : by_id_) {
        out.push_back(&meta);
    }
    std::sort(out.begin(), out.end(),
              [](const PostMeta* a, const PostMeta* b) { return a->post_id < b->post_id; });
    return out;
}

void
CorpusBuilder::add(const RawPost& post) {
    if (post.post_type == PostType::Other) {
        return;
    }
    meta_.insert(build_meta(post));
    if (auto doc = build_code_document(post)) {
        docs_.push_back(std::move(*doc));
    }
}

Corpus
CorpusBuilder::finish() && {
    std::sort(docs_.begin(), docs_.end(),
              [](const CodeDocument& a, const CodeDocument& b) { return a.post_id < b.post_id; });
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        docs_[i].doc_id = static_cast<DocId>(i);
    }
    return Corpus{std::move(docs_), std::move(meta_)};
}

Corpus
build_corpus(std::span<const RawPost> posts) {
    CorpusBuilder builder;
    for (const auto& post : posts) {
        builder.add(post);
    }
    return std::move(builder).finish();
}

void
write_corpus(std::span<const CodeDocument> docs, const std::filesystem::path& path) {
    std::vector<std::string> lines;
    lines.reserve(docs.size());
    for (const auto& doc : docs) {
        nlohmann::ordered_json j;
        j["doc_id"] = doc.doc_id;
        j["post_id"] = doc.post_id;
        j["text"] = doc.text;
        lines.push_back(j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace));
    }
    write_lines(path, lines);
}

std::vector<CodeDocument>
read_corpus(const std::filesystem::path& path) {
    std::vector<CodeDocument> docs;
    read_json_lines(path, [&](const nlohmann::json& j) {
        docs.push_back({j.at("doc_id").get<DocId>(), j.at("post_id").get<std::uint64_t>(),
                        j.at("text").get<std::string>()});
    });
    return docs;
}

void
write_meta(const MetaStore& meta, const std::filesystem::path& path) {
    std::vector<std::string> lines;
    lines.reserve(meta.size());
    for (const auto* m : meta.sorted()) {
        nlohmann::ordered_json j;
        j["post_id"] = m->post_id;
        j["post_type"] = m->post_type == PostType::Question ? "q" : "a";
        if (m->parent_id) {
            j["parent_id"] = *m->parent_id;
        }
        if (m->accepted_answer_id) {
            j["accepted_answer_id"] = *m->accepted_answer_id;
        }
        if (m->title) {
            j["title"] = *m->title;
        }
        if (m->creation_date) {
            j["creation_date"] = format_timestamp(*m->creation_date);
        }
        if (m->view_count) {
            j["view_count"] = *m->view_count;
        }
        j["score"] = m->score;
        if (!m->description.empty()) {
            j["description"] = m->description;
        }
        lines.push_back(j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace));
    }
    write_lines(path, lines);
}

MetaStore
read_meta(const std::filesystem::path& path) {
    MetaStore store;
    read_json_lines(path, [&](const nlohmann::json& j) {
        PostMeta m;
        m.post_id = j.at("post_id").get<std::uint64_t>();
        const auto type = j.at("post_type").get<std::string>();
        if (type != "q" && type != "a") {
            throw std::runtime_error("bad post_type in metadata store");
        }
        m.post_type = type == "q" ? PostType::Question : PostType::Answer;
        if (j.contains("parent_id")) {
            m.parent_id = j["parent_id"].get<std::uint64_t>();
        }
        if (j.contains("accepted_answer_id")) {
            m.accepted_answer_id = j["accepted_answer_id"].get<std::uint64_t>();
        }
        if (j.contains("title")) {
            m.title = j["title"].get<std::string>();
        }
        if (j.contains("creation_date")) {
            m.creation_date = parse_timestamp(j["creation_date"].get<std::string>());
            if (!m.creation_date) {
                throw std::runtime_error("bad creation_date in metadata store");
            }
        }
        if (j.contains("view_count")) {
            m.view_count = j["view_count"].get<std::uint64_t>();
        }
        m.score = j.at("score").get<std::int64_t>();
        m.description = j.value("description", std::string{});
        store.insert(std::move(m));
    });
    return store;
}

}  // namespace stackmatch
