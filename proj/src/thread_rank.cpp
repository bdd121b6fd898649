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

#include "stackmatch/thread_rank.hpp"

#include <algorithm>
#include <unordered_map>

namespace stackmatch {

std::string
question_url(std::uint64_t question_id) {
    return "https://stackoverflow.com/q/" + std::to_string(question_id);
}

std::vector<ThreadResult>
aggregate_threads(std::span<const SearchHit> hits, const MetaStore& meta) {
    std::vector<ThreadResult> threads;
    std::unordered_map<std::uint64_t, std::size_t> slot;

    for (const auto& hit : hits) {
        const auto* post = meta.find(hit.post_id);
        const bool is_answer = post != nullptr && post->post_type == PostType::Answer;
        const auto question_id = is_answer ? post->parent_id.value_or(hit.post_id) : hit.post_id;

        auto [it, inserted] = slot.emplace(question_id, threads.size());
        if (inserted) {
            ThreadResult t;
            t.question_id = question_id;
            t.url = question_url(question_id);
            if (const auto* q = meta.find(question_id);
                q != nullptr && q->post_type == PostType::Question) {
                t.title = q->title;
                t.has_accepted_answer = q->accepted_answer_id.has_value();
                t.view_count = q->view_count;
                t.score = q->score;
            }
            threads.push_back(std::move(t));
        }
        auto& t = threads[it->second];
        t.matched_posts.push_back(
            {hit.post_id, is_answer ? PostRole::Answer : PostRole::Question, hit.similarity});
    }

    for (auto& t : threads) {
        bool question = false;
        bool answer = false;
        for (const auto& m : t.matched_posts) {
            t.similarity = std::max(t.similarity, m.similarity);
            (m.role == PostRole::Question ? question : answer) = true;
        }
        t.co_match = question && answer;
        t.rank_score = t.co_match ? std::min(1.0, t.similarity * (1.0 + kCoMatchBoost))
                                  : t.similarity;
    }
    return threads;
}

bool
ranks_before(const ThreadResult& a, const ThreadResult& b) {
    if (a.rank_score != b.rank_score) {
        return a.rank_score > b.rank_score;
    }
    if (a.has_accepted_answer != b.has_accepted_answer) {
        return a.has_accepted_answer;
    }
    const auto va = a.view_count.value_or(0);
    const auto vb = b.view_count.value_or(0);
    if (va != vb) {
        return va > vb;
    }
    return a.question_id < b.question_id;
}

std::vector<ThreadResult>
rank_threads(std::vector<ThreadResult> threads, std::size_t n) {
    std::sort(threads.begin(), threads.end(), ranks_before);
    if (threads.size() > n) {
        threads.resize(n);
    }
    return threads;
}

}  // namespace stackmatch
