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
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef STACKMATCH_TEST_DATA
#error "STACKMATCH_TEST_DATA must point at tests/data"
#endif

namespace stackmatch::test {

inline std::filesystem::path
data_path(const std::string& name) {
    return std::filesystem::path(STACKMATCH_TEST_DATA) / name;
}

inline std::string
slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

inline void
spit(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("stackmatch_test_" + std::to_string(rd()) + "_" + std::to_string(++counter));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Random documents over tokens "w0".."w{vocab-1}" with a skewed (Zipf-like)
/// term distribution, so df varies widely and some terms hit every doc.
inline std::vector<std::vector<std::string>>
random_token_docs(std::mt19937_64& rng, std::size_t docs, std::size_t vocab,
                  std::size_t min_len, std::size_t max_len) {
    std::vector<double> weights(vocab);
    for (std::size_t i = 0; i < vocab; ++i) {
        weights[i] = 1.0 / static_cast<double>(i + 1);
    }
    std::discrete_distribution<std::size_t> term(weights.begin(), weights.end());
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::vector<std::vector<std::string>> out(docs);
    for (auto& doc : out) {
        const auto n = len(rng);
        for (std::size_t j = 0; j < n; ++j) {
            doc.push_back("w" + std::to_string(term(rng)));
        }
    }
    return out;
}

inline std::string
join(const std::vector<std::string>& tokens, const std::string& sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += tokens[i];
    }
    return out;
}

}  // namespace stackmatch::test
