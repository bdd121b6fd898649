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

#include "stackmatch/html.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>

namespace stackmatch {

namespace {

struct NamedEntity {
    std::string_view name;
    char32_t cp;
};

constexpr std::array<NamedEntity, 5> kXmlEntities{{
    {"lt", U'<'},
    {"gt", U'>'},
    {"amp", U'&'},
    {"quot", U'"'},
    {"apos", U'\''},
}};

// Parses the body of a reference between '&' and ';'.
std::optional<char32_t>
resolve_reference(std::string_view ref, bool allow_html_names) {
    if (ref.empty()) {
        return std::nullopt;
    }
    if (ref.front() == '#') {
        ref.remove_prefix(1);
        int base = 10;
        if (!ref.empty() && (ref.front() == 'x' || ref.front() == 'X')) {
            base = 16;
            ref.remove_prefix(1);
        }
        if (ref.empty() || ref.size() > 8) {
            return std::nullopt;
        }
        std::uint32_t value = 0;
        auto [end, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), value, base);
        if (ec != std::errc{} || end != ref.data() + ref.size() || value == 0) {
            return std::nullopt;
        }
        return static_cast<char32_t>(value);
    }
    for (const auto& e : kXmlEntities) {
        if (e.name == ref) {
            return e.cp;
        }
    }
    if (allow_html_names && ref == "nbsp") {
        return U' ';
    }
    return std::nullopt;
}

bool
iequals_prefix(std::string_view text, std::size_t pos, std::string_view word) {
    if (pos + word.size() > text.size()) {
        return false;
    }
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != word[i]) {
            return false;
        }
    }
    return true;
}

// Tag name starting right after '<' (and an optional '/'), lowercased.
std::string
tag_name_at(std::string_view html, std::size_t pos) {
    if (pos < html.size() && html[pos] == '/') {
        ++pos;
    }
    std::string name;
    while (pos < html.size() && std::isalnum(static_cast<unsigned char>(html[pos]))) {
        name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[pos]))));
        ++pos;
    }
    return name;
}

bool
is_block_tag(const std::string& name) {
    static constexpr std::array<std::string_view, 14> kBlock{
        "p", "br", "div", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "blockquote", "hr"};
    for (auto b : kBlock) {
        if (name == b) {
            return true;
        }
    }
    return false;
}

}  // namespace

bool
append_utf8(std::string& out, char32_t cp) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        return false;
    }
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return true;
}

bool
is_valid_utf8(std::string_view text) {
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len = 0;
        char32_t cp = 0;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n) {
            return false;
        }
        for (std::size_t j = 1; j < len; ++j) {
            const auto cc = static_cast<unsigned char>(text[i + j]);
            if ((cc & 0xC0) != 0x80) {
                return false;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += len;
    }
    return true;
}

std::optional<std::string>
decode_xml_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto amp = text.find('&', i);
        if (amp == std::string_view::npos) {
            out.append(text.substr(i));
            break;
        }
        out.append(text.substr(i, amp - i));
        const auto semi = text.find(';', amp + 1);
        if (semi == std::string_view::npos || semi - amp > 12) {
            return std::nullopt;
        }
        auto cp = resolve_reference(text.substr(amp + 1, semi - amp - 1), false);
        if (!cp || !append_utf8(out, *cp)) {
            return std::nullopt;
        }
        i = semi + 1;
    }
    return out;
}

std::string
decode_html_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto amp = text.find('&', i);
        if (amp == std::string_view::npos) {
            out.append(text.substr(i));
            break;
        }
        out.append(text.substr(i, amp - i));
        const auto semi = text.find(';', amp + 1);
        if (semi != std::string_view::npos && semi - amp <= 12) {
            auto cp = resolve_reference(text.substr(amp + 1, semi - amp - 1), true);
            if (cp && append_utf8(out, *cp)) {
                i = semi + 1;
                continue;
            }
        }
        out.push_back('&');
        i = amp + 1;
    }
    return out;
}

std::string
html_to_text(std::string_view html) {
    std::string stripped;
    stripped.reserve(html.size());
    std::size_t i = 0;
    while (i < html.size()) {
        const char c = html[i];
        const bool tag_start = c == '<' && i + 1 < html.size() &&
                               (std::isalpha(static_cast<unsigned char>(html[i + 1])) ||
                                html[i + 1] == '/' || html[i + 1] == '!');
        if (!tag_start) {
            stripped.push_back(c);
            ++i;
            continue;
        }
        if (iequals_prefix(html, i, "<pre")) {
            auto close = html.find("</pre>", i);
            if (close == std::string_view::npos) {
                close = html.find("</PRE>", i);
            }
            i = close == std::string_view::npos ? html.size() : close + 6;
            stripped.push_back('\n');
            continue;
        }
        const auto name = tag_name_at(html, i + 1);
        const auto gt = html.find('>', i);
        i = gt == std::string_view::npos ? html.size() : gt + 1;
        if (is_block_tag(name)) {
            stripped.push_back('\n');
        }
    }
    auto decoded = decode_html_entities(stripped);

    // Collapse horizontal whitespace runs and trim each line.
    std::string out;
    out.reserve(decoded.size());
    std::size_t line_start = 0;
    while (line_start <= decoded.size()) {
        auto line_end = decoded.find('\n', line_start);
        if (line_end == std::string::npos) {
            line_end = decoded.size();
        }
        std::string line;
        bool pending_space = false;
        for (std::size_t k = line_start; k < line_end; ++k) {
            const char ch = decoded[k];
            if (ch == ' ' || ch == '\t' || ch == '\r') {
                pending_space = !line.empty();
                continue;
            }
            if (pending_space) {
                line.push_back(' ');
                pending_space = false;
            }
            line.push_back(ch);
        }
        if (!line.empty()) {
            if (!out.empty()) {
                out.push_back('\n');
            }
            out += line;
        }
        line_start = line_end + 1;
    }
    return out;
}

}  // namespace stackmatch
