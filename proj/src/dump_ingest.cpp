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

#include "stackmatch/dump_ingest.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "stackmatch/html.hpp"

namespace stackmatch {

namespace {

template <class Int>
std::optional<Int>
parse_int(std::string_view text) {
    Int value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

const std::string*
find_attr(const AttributeMap& attrs, std::string_view name) {
    auto it = attrs.find(name);
    return it == attrs.end() ? nullptr : &it->second;
}

bool
is_xml_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

bool
is_name_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':';
}

bool
is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

int
parse_fixed_digits(std::string_view text, std::size_t pos, std::size_t count) {
    if (pos + count > text.size()) {
        return -1;
    }
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const char c = text[pos + i];
        if (c < '0' || c > '9') {
            return -1;
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

constexpr std::string_view kRowOpen = "<row";

}  // namespace

std::string
RowError::message() const {
    switch (kind) {
        case Kind::MissingField:
            return "missing field " + field;
        case Kind::BadValue:
            return "bad value for " + field;
        case Kind::Schema:
            return "schema violation: " + field;
    }
    return field;
}

std::optional<Timestamp>
parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    if (!text.empty() && text.back() == 'Z') {
        text.remove_suffix(1);
    }
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    const int y = parse_fixed_digits(text, 0, 4);
    const int mo = parse_fixed_digits(text, 5, 2);
    const int d = parse_fixed_digits(text, 8, 2);
    const int h = parse_fixed_digits(text, 11, 2);
    const int mi = parse_fixed_digits(text, 14, 2);
    const int s = parse_fixed_digits(text, 17, 2);
    if (y < 0 || mo < 0 || d < 0 || h < 0 || mi < 0 || s < 0 || h > 23 || mi > 59 || s > 59) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    int millis = 0;
    if (text.size() > 19) {
        if (text[19] != '.' || text.size() == 20) {
            return std::nullopt;
        }
        int scale = 100;
        for (std::size_t i = 20; i < text.size(); ++i) {
            const char c = text[i];
            if (c < '0' || c > '9') {
                return std::nullopt;
            }
            millis += (c - '0') * scale;
            scale /= 10;
        }
    }
    return Timestamp{sys_days{ymd}.time_since_epoch() + hours{h} + minutes{mi} + seconds{s} +
                     milliseconds{millis}};
}

std::string
format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day_point = floor<days>(ts);
    const year_month_day ymd{day_point};
    const hh_mm_ss<milliseconds> tod{ts - day_point};
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long>(tod.hours().count()),
                  static_cast<long>(tod.minutes().count()), static_cast<long>(tod.seconds().count()),
                  static_cast<long>(tod.subseconds().count()));
    return buf;
}

std::variant<RawPost, RowError>
parse_row(const AttributeMap& attributes) {
    using K = RowError::Kind;
    RawPost post;

    const auto* id = find_attr(attributes, "Id");
    if (id == nullptr) {
        return RowError{K::MissingField, "Id"};
    }
    const auto* type = find_attr(attributes, "PostTypeId");
    if (type == nullptr) {
        return RowError{K::MissingField, "PostTypeId"};
    }
    const auto* body = find_attr(attributes, "Body");
    if (body == nullptr) {
        return RowError{K::MissingField, "Body"};
    }

    auto id_value = parse_int<std::uint64_t>(*id);
    if (!id_value || *id_value == 0) {
        return RowError{K::BadValue, "Id"};
    }
    post.post_id = *id_value;

    auto type_value = parse_int<int>(*type);
    if (!type_value) {
        return RowError{K::BadValue, "PostTypeId"};
    }
    post.type_code = *type_value;
    post.post_type = *type_value == 1   ? PostType::Question
                     : *type_value == 2 ? PostType::Answer
                                        : PostType::Other;
    post.body_html = *body;

    for (auto [name, slot] : {std::pair{"ParentId", &post.parent_id},
                              std::pair{"AcceptedAnswerId", &post.accepted_answer_id}}) {
        if (const auto* raw = find_attr(attributes, name)) {
            auto v = parse_int<std::uint64_t>(*raw);
            if (!v || *v == 0) {
                return RowError{K::BadValue, name};
            }
            *slot = *v;
        }
    }
    if (const auto* raw = find_attr(attributes, "ViewCount")) {
        auto v = parse_int<std::uint64_t>(*raw);
        if (!v) {
            return RowError{K::BadValue, "ViewCount"};
        }
        post.view_count = *v;
    }
    if (const auto* raw = find_attr(attributes, "Score")) {
        auto v = parse_int<std::int64_t>(*raw);
        if (!v) {
            return RowError{K::BadValue, "Score"};
        }
        post.score = *v;
    }
    if (const auto* raw = find_attr(attributes, "CreationDate")) {
        auto v = parse_timestamp(*raw);
        if (!v) {
            return RowError{K::BadValue, "CreationDate"};
        }
        post.creation_date = *v;
    }
    if (const auto* raw = find_attr(attributes, "Title")) {
        post.title = *raw;
    }
    if (const auto* raw = find_attr(attributes, "Tags")) {
        post.tags = *raw;
    }

    if (post.post_type != PostType::Other) {
        if (post.body_html.empty()) {
            return RowError{K::Schema, "Body"};
        }
        if (post.post_type == PostType::Answer && !post.parent_id) {
            return RowError{K::Schema, "ParentId"};
        }
        if (post.post_type == PostType::Question && post.parent_id) {
            return RowError{K::Schema, "ParentId"};
        }
        if (post.post_type == PostType::Answer && post.accepted_answer_id) {
            return RowError{K::Schema, "AcceptedAnswerId"};
        }
    }
    return post;
}

// ---------------------------------------------------------------------------

PostStreamReader::PostStreamReader(std::istream& in, std::size_t chunk_bytes)
    : in_(in), chunk_bytes_(chunk_bytes == 0 ? 1 : chunk_bytes) {
}

void
PostStreamReader::compact() {
    if (pos_ > 0) {
        buffer_.erase(0, pos_);
        pos_ = 0;
    }
}

bool
PostStreamReader::refill() {
    if (eof_) {
        return false;
    }
    compact();
    const auto old_size = buffer_.size();
    buffer_.resize(old_size + chunk_bytes_);
    in_.read(buffer_.data() + old_size, static_cast<std::streamsize>(chunk_bytes_));
    const auto got = static_cast<std::size_t>(in_.gcount());
    buffer_.resize(old_size + got);
    stats_.bytes_read += got;
    if (in_.bad()) {
        throw IngestError("read failure on post dump stream");
    }
    if (got < chunk_bytes_) {
        eof_ = true;
    }
    return got > 0;
}

bool
PostStreamReader::parse_attributes(std::string_view element, AttributeMap& out) const {
    std::size_t i = kRowOpen.size();
    const auto n = element.size();
    while (true) {
        const std::size_t before_space = i;
        while (i < n && is_xml_space(element[i])) {
            ++i;
        }
        if (i + 1 < n && element[i] == '/' && element[i + 1] == '>') {
            i += 2;
            break;
        }
        if (i >= n || i == before_space || !is_name_start(element[i])) {
            return false;
        }
        const std::size_t name_begin = i;
        while (i < n && is_name_char(element[i])) {
            ++i;
        }
        std::string_view name = element.substr(name_begin, i - name_begin);
        while (i < n && is_xml_space(element[i])) {
            ++i;
        }
        if (i >= n || element[i] != '=') {
            return false;
        }
        ++i;
        while (i < n && is_xml_space(element[i])) {
            ++i;
        }
        if (i >= n || (element[i] != '"' && element[i] != '\'')) {
            return false;
        }
        const char quote = element[i++];
        const auto close = element.find(quote, i);
        if (close == std::string_view::npos) {
            return false;
        }
        auto decoded = decode_xml_entities(element.substr(i, close - i));
        if (!decoded || !is_valid_utf8(*decoded)) {
            return false;
        }
        if (!out.emplace(std::string(name), std::move(*decoded)).second) {
            return false;
        }
        i = close + 1;
    }
    // Character data between the row and the next tag must be whitespace.
    for (; i < n; ++i) {
        if (!is_xml_space(element[i])) {
            return false;
        }
    }
    return true;
}

bool
PostStreamReader::seen_before(std::uint64_t id) {
    constexpr std::uint64_t kBitsetLimit = std::uint64_t{1} << 28;
    if (id < kBitsetLimit) {
        const auto word = id / 64;
        if (word >= id_bits_.size()) {
            id_bits_.resize(std::max<std::size_t>(word + 1, id_bits_.size() * 2), 0);
        }
        const auto mask = std::uint64_t{1} << (id % 64);
        const bool seen = (id_bits_[word] & mask) != 0;
        id_bits_[word] |= mask;
        return seen;
    }
    return !large_ids_.insert(id).second;
}

std::optional<RawPost>
PostStreamReader::next() {
    while (true) {
        const char* base = buffer_.data();
        const void* lt = pos_ < buffer_.size()
                             ? std::memchr(base + pos_, '<', buffer_.size() - pos_)
                             : nullptr;
        if (lt == nullptr) {
            pos_ = buffer_.size();
            if (!refill()) {
                return std::nullopt;
            }
            continue;
        }
        pos_ = static_cast<std::size_t>(static_cast<const char*>(lt) - base);
        std::string_view rest(buffer_.data() + pos_, buffer_.size() - pos_);

        // Need enough lookahead to classify the tag.
        if (rest.size() < 9 && !eof_) {
            refill();
            continue;
        }

        if (rest.starts_with("<!--") || rest.starts_with("<?")) {
            const std::string_view terminator = rest[1] == '!' ? "-->" : "?>";
            const auto end = rest.find(terminator);
            if (end == std::string_view::npos) {
                if (eof_) {
                    pos_ = buffer_.size();
                    return std::nullopt;
                }
                refill();
                continue;
            }
            pos_ += end + terminator.size();
            continue;
        }

        const bool is_row = rest.starts_with(kRowOpen) &&
                            (rest.size() == kRowOpen.size() ||
                             is_xml_space(rest[kRowOpen.size()]) || rest[kRowOpen.size()] == '/' ||
                             rest[kRowOpen.size()] == '>');
        const auto next_lt = rest.find('<', 1);
        if (next_lt == std::string_view::npos && !eof_) {
            refill();
            continue;
        }
        const auto extent = next_lt == std::string_view::npos ? rest.size() : next_lt;
        if (!is_row) {
            pos_ += extent;
            continue;
        }

        std::string_view element = rest.substr(0, extent);
        pos_ += extent;
        ++stats_.rows_seen;

        AttributeMap attrs;
        if (!parse_attributes(element, attrs)) {
            ++stats_.rows_skipped_malformed;
            continue;
        }
        auto parsed = parse_row(attrs);
        auto* post = std::get_if<RawPost>(&parsed);
        if (post == nullptr || post->post_type == PostType::Other || seen_before(post->post_id)) {
            ++stats_.rows_skipped_schema;
            continue;
        }
        ++stats_.rows_emitted;
        return std::move(*post);
    }
}

// ---------------------------------------------------------------------------

std::string
encode_row(const RawPost& post) {
    if (post.post_type == PostType::Other) {
        throw IngestError("row file only holds questions and answers");
    }
    nlohmann::ordered_json j;
    j["post_id"] = post.post_id;
    j["post_type"] = post.post_type == PostType::Question ? "q" : "a";
    if (post.parent_id) {
        j["parent_id"] = *post.parent_id;
    }
    if (post.accepted_answer_id) {
        j["accepted_answer_id"] = *post.accepted_answer_id;
    }
    if (post.creation_date) {
        j["creation_date"] = format_timestamp(*post.creation_date);
    }
    j["score"] = post.score;
    if (post.view_count) {
        j["view_count"] = *post.view_count;
    }
    if (post.title) {
        j["title"] = *post.title;
    }
    j["body_html"] = post.body_html;
    if (post.tags) {
        j["tags"] = *post.tags;
    }
    return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

RawPost
decode_row(std::string_view line) {
    RawPost post;
    try {
        const auto j = nlohmann::json::parse(line);
        post.post_id = j.at("post_id").get<std::uint64_t>();
        const auto type = j.at("post_type").get<std::string>();
        if (type == "q") {
            post.post_type = PostType::Question;
            post.type_code = 1;
        } else if (type == "a") {
            post.post_type = PostType::Answer;
            post.type_code = 2;
        } else {
            throw IngestError("unknown post_type '" + type + "'");
        }
        if (j.contains("parent_id")) {
            post.parent_id = j["parent_id"].get<std::uint64_t>();
        }
        if (j.contains("accepted_answer_id")) {
            post.accepted_answer_id = j["accepted_answer_id"].get<std::uint64_t>();
        }
        if (j.contains("creation_date")) {
            auto ts = parse_timestamp(j["creation_date"].get<std::string>());
            if (!ts) {
                throw IngestError("bad creation_date");
            }
            post.creation_date = *ts;
        }
        post.score = j.value("score", std::int64_t{0});
        if (j.contains("view_count")) {
            post.view_count = j["view_count"].get<std::uint64_t>();
        }
        if (j.contains("title")) {
            post.title = j["title"].get<std::string>();
        }
        post.body_html = j.at("body_html").get<std::string>();
        if (j.contains("tags")) {
            post.tags = j["tags"].get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw IngestError(std::string("undecodable row: ") + e.what());
    }
    return post;
}

namespace {

template <class Produce>
void
write_atomically(const std::filesystem::path& sink, Produce&& produce) {
    auto partial = sink;
    partial += ".partial";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IngestError("cannot open " + partial.string() + " for writing");
        }
        try {
            produce(out);
            out.flush();
            if (!out) {
                throw IngestError("write failure on " + partial.string());
            }
        } catch (...) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(partial, ec);
            throw;
        }
    }
    std::error_code ec;
    std::filesystem::rename(partial, sink, ec);
    if (ec) {
        std::filesystem::remove(partial, ec);
        throw IngestError("cannot move row file into place at " + sink.string());
    }
}

}  // namespace

IngestStats
write_rows(PostStreamReader& reader, const std::filesystem::path& sink) {
    write_atomically(sink, [&](std::ofstream& out) {
        while (auto post = reader.next()) {
            out << encode_row(*post) << '\n';
            if (!out) {
                throw IngestError("write failure on " + sink.string());
            }
        }
    });
    return reader.stats();
}

std::size_t
write_rows(std::span<const RawPost> records, const std::filesystem::path& sink) {
    write_atomically(sink, [&](std::ofstream& out) {
        for (const auto& post : records) {
            out << encode_row(post) << '\n';
        }
    });
    return records.size();
}

void
for_each_row(const std::filesystem::path& source, const std::function<void(RawPost&&)>& visit) {
    std::ifstream in(source, std::ios::binary);
    if (!in) {
        throw IngestError("cannot open row file " + source.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            visit(decode_row(line));
        } catch (const IngestError& e) {
            throw IngestError(source.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (in.bad()) {
        throw IngestError("read failure on " + source.string());
    }
}

std::vector<RawPost>
read_rows(const std::filesystem::path& source) {
    std::vector<RawPost> rows;
    for_each_row(source, [&](RawPost&& p) { rows.push_back(std::move(p)); });
    return rows;
}

}  // namespace stackmatch
