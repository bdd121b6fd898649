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

#include <optional>
#include <string>
#include <string_view>

namespace stackmatch {

/// Appends the UTF-8 encoding of `cp`. Returns false for surrogates and
/// values past U+10FFFF, leaving `out` untouched.
bool append_utf8(std::string& out, char32_t cp);

/// True when `text` is well-formed UTF-8 (no overlongs, no surrogates).
bool is_valid_utf8(std::string_view text);

/// Strict XML attribute decoding: &lt; &gt; &amp; &quot; &apos; &#NN; &#xHH;.
/// Any other or unterminated reference yields nullopt.
std::optional<std::string> decode_xml_entities(std::string_view text);

/// Lenient HTML decoding used on post bodies. Recognizes the XML set plus
/// &nbsp; and numeric references; anything unrecognized is copied verbatim.
std::string decode_html_entities(std::string_view text);

/// Converts a post body to plain prose: <pre> blocks are dropped, block-level
/// tags become line breaks, remaining tags are stripped, entities decoded.
std::string html_to_text(std::string_view html);

}  // namespace stackmatch
