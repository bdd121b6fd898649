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

// Streaming reader for Stack Exchange style post dumps. The dump is an XML
// document whose payload is a sequence of self-closing <row .../> elements.
// Rows are delimited by the next '<' (which cannot appear raw inside an
// attribute value), so one malformed row never affects its neighbours.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

namespace stackmatch {

enum class PostType { Question, Answer, Other };

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

struct RawPost {
    std::uint64_t post_id = 0;
    PostType post_type = PostType::Question;
    int type_code = 1;  // raw PostTypeId, kept for Other
    std::optional<std::uint64_t> parent_id;
    std::optional<std::uint64_t> accepted_answer_id;
    std::optional<Timestamp> creation_date;
    std::int64_t score = 0;
    std::optional<std::uint64_t> view_count;
    std::optional<std::string> title;
    std::string body_html;
    std::optional<std::string> tags;

    bool operator==(const RawPost&) const = default;
};

struct IngestStats {
    std::uint64_t rows_seen = 0;
    std::uint64_t rows_emitted = 0;
    std::uint64_t rows_skipped_malformed = 0;
    std::uint64_t rows_skipped_schema = 0;
    std::uint64_t bytes_read = 0;

    bool conserved() const {
        return rows_seen == rows_emitted + rows_skipped_malformed + rows_skipped_schema;
    }
    bool operator==(const IngestStats&) const = default;
};

struct RowError {
    enum class Kind { MissingField, BadValue, Schema };
    Kind kind;
    std::string field;

    std::string message() const;
    bool operator==(const RowError&) const = default;
};

using AttributeMap = std::map<std::string, std::string, std::less<>>;

/// Maps decoded row attributes onto a typed post. Unknown attributes are
/// ignored. Id, PostTypeId and Body are required; everything else optional.
std::variant<RawPost, RowError> parse_row(const AttributeMap& attributes);

/// ISO-8601 without offset (or with a trailing 'Z') read as UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);
/// Always "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string format_timestamp(Timestamp ts);

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pulls RawPost records out of an XML byte stream in file order. Memory is
/// bounded by the largest single row plus one read chunk.
///
/// Rows with broken syntax (quoting, entities, truncation, invalid UTF-8)
/// count as malformed. Syntactically fine rows rejected by parse_row, rows
/// repeating an earlier Id, and rows whose PostTypeId is neither question nor
/// answer count as schema skips. Neither aborts the stream; a failing read
/// on the underlying stream throws IngestError.
class PostStreamReader {
public:
    explicit PostStreamReader(std::istream& in, std::size_t chunk_bytes = 1 << 16);

    std::optional<RawPost> next();
    const IngestStats& stats() const { return stats_; }

private:
    bool refill();
    void compact();
    bool parse_attributes(std::string_view element, AttributeMap& out) const;
    bool seen_before(std::uint64_t id);

    std::istream& in_;
    std::size_t chunk_bytes_;
    std::string buffer_;
    std::size_t pos_ = 0;
    bool eof_ = false;
    IngestStats stats_;
    std::vector<std::uint64_t> id_bits_;
    std::unordered_set<std::uint64_t> large_ids_;
};

/// Intermediate row file: one JSON object per line with the fields
/// post_id, post_type ("q"|"a"), parent_id, accepted_answer_id,
/// creation_date, score, view_count, title, body_html, tags. Absent
/// optionals are omitted.
std::string encode_row(const RawPost& post);
RawPost decode_row(std::string_view line);

/// Writes via a ".partial" sibling that is renamed into place on success and
/// removed on failure. Returns the reader's final stats.
IngestStats write_rows(PostStreamReader& reader, const std::filesystem::path& sink);
std::size_t write_rows(std::span<const RawPost> records, const std::filesystem::path& sink);

/// Streams records back out of a row file. Throws IngestError on I/O failure
/// or an undecodable line (with its line number).
void for_each_row(const std::filesystem::path& source,
                  const std::function<void(RawPost&&)>& visit);
std::vector<RawPost> read_rows(const std::filesystem::path& source);

}  // namespace stackmatch
