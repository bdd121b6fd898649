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

// Collapses per-post hits into question threads and orders them.
//
// A thread's similarity is the best similarity among its matched posts. When
// both the question and at least one answer matched, the thread gets a small
// multiplicative boost (kCoMatchBoost) capped at 1.0. Ordering is
// rank_score desc, accepted answer first, view_count desc, question_id asc.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stackmatch/post_extract.hpp"
#include "stackmatch/sim_index.hpp"

namespace stackmatch {

inline constexpr double kCoMatchBoost = 0.05;
inline constexpr std::size_t kDefaultDisplayK = 3;

enum class PostRole { Question, Answer };

struct MatchedPost {
    std::uint64_t post_id = 0;
    PostRole role = PostRole::Question;
    double similarity = 0.0;

    bool operator==(const MatchedPost&) const = default;
};

struct ThreadResult {
    std::uint64_t question_id = 0;
    std::optional<std::string> title;
    std::string url;
    double similarity = 0.0;
    double rank_score = 0.0;
    bool co_match = false;
    bool has_accepted_answer = false;
    std::optional<std::uint64_t> view_count;
    std::int64_t score = 0;
    std::vector<MatchedPost> matched_posts;

    bool operator==(const ThreadResult&) const = default;
};

std::string question_url(std::uint64_t question_id);

/// Threads come out in order of first appearance in `hits`. Hits with no
/// metadata at all are treated as questions with absent fields.
std::vector<ThreadResult> aggregate_threads(std::span<const SearchHit> hits,
                                            const MetaStore& meta);

/// Sorted copy, truncated to `n`.
std::vector<ThreadResult> rank_threads(std::vector<ThreadResult> threads,
                                       std::size_t n = kDefaultDisplayK);

/// Strict weak ordering used by rank_threads.
bool ranks_before(const ThreadResult& a, const ThreadResult& b);

}  // namespace stackmatch
