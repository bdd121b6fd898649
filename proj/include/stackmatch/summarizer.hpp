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

// Extractive summaries of question descriptions. Sentences are scored by the
// mean idf of their known tokens and picked best-first until the picked
// text (each sentence counted with its joining space) reaches `ratio` of the
// original length. Picked sentences are emitted in source order.
//
// Lengths are counted in Unicode code points.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "stackmatch/text_pipeline.hpp"

namespace stackmatch {

inline constexpr double kDefaultSummaryRatio = 0.25;
inline constexpr std::size_t kSummaryThresholdChars = 280;

struct Summary {
    std::string text;
    std::size_t original_chars = 0;
    std::size_t summary_chars = 0;
    double ratio_achieved = 1.0;
};

std::size_t count_chars(std::string_view text);

/// Splits at newline runs and after [.!?] followed by whitespace. Segments
/// are trimmed; empty ones are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Texts at or under `threshold_chars` come back unchanged.
Summary summarize(std::string_view text, const TfIdfModel& model, const Dictionary& dict,
                  double ratio = kDefaultSummaryRatio,
                  std::size_t threshold_chars = kSummaryThresholdChars);

}  // namespace stackmatch
