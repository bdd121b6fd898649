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

#include "stackmatch/summarizer.hpp"

#include <algorithm>
#include <numeric>

namespace stackmatch {

namespace {

bool
is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

void
push_trimmed(std::vector<std::string>& out, std::string_view segment) {
    while (!segment.empty() && is_space(segment.front())) {
        segment.remove_prefix(1);
    }
    while (!segment.empty() && is_space(segment.back())) {
        segment.remove_suffix(1);
    }
    if (!segment.empty()) {
        out.emplace_back(segment);
    }
}

double
mean_idf(std::string_view sentence, const TfIdfModel& model, const Dictionary& dict) {
    double sum = 0.0;
    std::size_t known = 0;
    for_each_token(sentence, [&](std::string_view token) {
        if (auto id = dict.find(token); id && *id < model.vocabulary()) {
            sum += model.idf(*id);
            ++known;
        }
    });
    return known == 0 ? 0.0 : sum / static_cast<double>(known);
}

}  // namespace

std::size_t
count_chars(std::string_view text) {
    return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

std::vector<std::string>
split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            push_trimmed(out, text.substr(start, i - start));
            start = i + 1;
        } else if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() &&
                   is_space(text[i + 1])) {
            push_trimmed(out, text.substr(start, i + 1 - start));
            start = i + 1;
        }
    }
    push_trimmed(out, text.substr(start));
    return out;
}

Summary
summarize(std::string_view text, const TfIdfModel& model, const Dictionary& dict, double ratio,
          std::size_t threshold_chars) {
    Summary summary;
    summary.original_chars = count_chars(text);
    if (summary.original_chars <= threshold_chars) {
        summary.text = std::string(text);
        summary.summary_chars = summary.original_chars;
        summary.ratio_achieved = 1.0;
        return summary;
    }

    const auto sentences = split_sentences(text);
    std::vector<double> scores(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        scores[i] = mean_idf(sentences[i], model, dict);
    }
    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double target = ratio * static_cast<double>(summary.original_chars);
    std::vector<bool> picked(sentences.size(), false);
    double taken = 0.0;
    for (const auto idx : order) {
        if (taken >= target) {
            break;
        }
        picked[idx] = true;
        taken += static_cast<double>(count_chars(sentences[idx]) + 1);
    }

    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (!picked[i]) {
            continue;
        }
        if (!summary.text.empty()) {
            summary.text.push_back(' ');
        }
        summary.text += sentences[i];
    }
    summary.summary_chars = count_chars(summary.text);
    summary.ratio_achieved =
        static_cast<double>(summary.summary_chars) / static_cast<double>(summary.original_chars);
    return summary;
}

}  // namespace stackmatch
