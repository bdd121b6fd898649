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

#include "stackmatch/index_store.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <zlib.h>

namespace stackmatch {

namespace {

namespace fs = std::filesystem;

constexpr const char* kManifest = "MANIFEST";
constexpr const char* kDictionary = "dictionary.tsv";
constexpr const char* kModel = "model.tsv";
constexpr const char* kPostings = "postings.bin";
constexpr const char* kDocTable = "doctable.bin";
constexpr const char* kMeta = "meta.jsonl";
constexpr std::string_view kPostingsMagic = "SMPOST01";
constexpr std::string_view kDocTableMagic = "SMDOCS01";

std::uint32_t
crc32_of(std::string_view bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + done), chunk);
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::string
hex(std::uint64_t v, int width) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%0*llx", width, static_cast<unsigned long long>(v));
    return buf;
}

// Little-endian encoders.
void
put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void
put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

class ByteReader {
public:
    ByteReader(std::string_view data, const char* what) : data_(data), what_(what) {}

    std::string_view take(std::size_t n) {
        if (n > data_.size() - pos_) {
            throw CorruptIndex(std::string(what_) + " truncated");
        }
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint32_t u32() {
        auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
        }
        return v;
    }
    std::uint64_t u64() {
        auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
        }
        return v;
    }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::string_view data_;
    const char* what_;
    std::size_t pos_ = 0;
};

std::string
read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorruptIndex("missing index file " + path.filename().string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void
write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IndexWriteError("cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) {
        throw IndexWriteError("write failure on " + path.string());
    }
}

std::string
encode_postings(const InvertedIndex& index) {
    std::string out;
    out.reserve(24 + index.offsets().size() * 8 + index.postings() * 8);
    out.append(kPostingsMagic);
    put_u64(out, index.vocabulary());
    put_u64(out, index.postings());
    for (const auto o : index.offsets()) {
        put_u64(out, o);
    }
    for (const auto d : index.doc_ids()) {
        put_u32(out, d);
    }
    for (const auto w : index.weights()) {
        put_u32(out, std::bit_cast<std::uint32_t>(w));
    }
    return out;
}

std::string
encode_doc_table(const InvertedIndex& index) {
    std::string out;
    out.append(kDocTableMagic);
    put_u64(out, index.documents());
    for (const auto id : index.doc_table()) {
        put_u64(out, id);
    }
    return out;
}

std::string
slurp_written(const fs::path& path) {
    try {
        return read_file(path);
    } catch (const CorruptIndex&) {
        throw IndexWriteError("cannot re-read " + path.string());
    }
}

template <class Int>
Int
manifest_int(const std::map<std::string, std::string>& kv, const std::string& key, int base = 10) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        throw CorruptIndex("manifest lacks " + key);
    }
    Int v{};
    const auto& s = it->second;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
        throw CorruptIndex("manifest value for " + key + " unreadable");
    }
    return v;
}

}  // namespace

std::vector<std::string>
index_file_names() {
    return {kDictionary, kModel, kPostings, kDocTable, kMeta, kManifest};
}

void
save_index(const IndexBundle& bundle, const fs::path& directory) {
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec || !fs::is_directory(directory)) {
        throw IndexWriteError("cannot create index directory " + directory.string());
    }
    const auto& index = bundle.index;
    if (index.config_digest() != bundle.model.digest() ||
        index.vocabulary() != bundle.dictionary.size()) {
        throw std::invalid_argument("index was not built from this dictionary/model");
    }

    // Stale manifest first, so a crash mid-save never leaves a loadable mix.
    fs::remove(directory / kManifest, ec);

    std::string manifest;
    manifest += "format=stackmatch-index\n";
    manifest += "version=" + std::to_string(kIndexFormatVersion) + "\n";
    manifest += "documents=" + std::to_string(index.documents()) + "\n";
    manifest += "vocabulary=" + std::to_string(index.vocabulary()) + "\n";
    manifest += "postings=" + std::to_string(index.postings()) + "\n";
    manifest += "config_digest=" + hex(index.config_digest(), 16) + "\n";

    auto record = [&](const char* name, std::string_view bytes) {
        manifest += std::string("file.") + name + "=" + std::to_string(bytes.size()) + ":" +
                    hex(crc32_of(bytes), 8) + "\n";
    };

    try {
        bundle.dictionary.save(directory / kDictionary);
        bundle.model.save(directory / kModel);
        write_meta(bundle.meta, directory / kMeta);
    } catch (const std::runtime_error& e) {
        throw IndexWriteError(e.what());
    }
    record(kDictionary, slurp_written(directory / kDictionary));
    record(kModel, slurp_written(directory / kModel));
    {
        const auto postings = encode_postings(index);
        write_file(directory / kPostings, postings);
        record(kPostings, postings);
    }
    {
        const auto table = encode_doc_table(index);
        write_file(directory / kDocTable, table);
        record(kDocTable, table);
    }
    record(kMeta, slurp_written(directory / kMeta));

    manifest += "manifest_crc32=" + hex(crc32_of(manifest), 8) + "\n";
    write_file(directory / kManifest, manifest);
}

IndexBundle
load_index(const fs::path& directory) {
    const auto manifest = read_file(directory / kManifest);

    // Last line carries the CRC of everything before it.
    const std::string_view crc_key = "manifest_crc32=";
    const auto crc_pos = manifest.rfind(crc_key);
    if (crc_pos == std::string::npos || (crc_pos != 0 && manifest[crc_pos - 1] != '\n')) {
        throw CorruptIndex("manifest checksum missing");
    }
    const std::string_view body(manifest.data(), crc_pos);
    const std::string crc_line = manifest.substr(crc_pos + crc_key.size());
    if (crc_line != hex(crc32_of(body), 8) + "\n") {
        throw CorruptIndex("manifest checksum mismatch");
    }

    std::map<std::string, std::string> kv;
    std::size_t start = 0;
    while (start < body.size()) {
        auto nl = body.find('\n', start);
        if (nl == std::string_view::npos) {
            throw CorruptIndex("manifest line unterminated");
        }
        const auto line = body.substr(start, nl - start);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos ||
            !kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1))).second) {
            throw CorruptIndex("manifest line malformed");
        }
        start = nl + 1;
    }
    if (kv["format"] != "stackmatch-index") {
        throw CorruptIndex("not a stackmatch index");
    }
    if (manifest_int<int>(kv, "version") != kIndexFormatVersion) {
        throw CorruptIndex("unsupported index version");
    }
    const auto documents = manifest_int<std::uint64_t>(kv, "documents");
    const auto vocabulary = manifest_int<std::uint64_t>(kv, "vocabulary");
    const auto postings = manifest_int<std::uint64_t>(kv, "postings");
    const auto digest = manifest_int<std::uint64_t>(kv, "config_digest", 16);

    auto checked = [&](const char* name) {
        auto it = kv.find(std::string("file.") + name);
        if (it == kv.end()) {
            throw CorruptIndex(std::string("manifest lacks entry for ") + name);
        }
        const auto colon = it->second.find(':');
        if (colon == std::string::npos) {
            throw CorruptIndex(std::string("manifest entry malformed for ") + name);
        }
        auto bytes = read_file(directory / name);
        if (std::to_string(bytes.size()) != it->second.substr(0, colon)) {
            throw CorruptIndex(std::string(name) + " has the wrong size");
        }
        if (hex(crc32_of(bytes), 8) != it->second.substr(colon + 1)) {
            throw CorruptIndex(std::string(name) + " checksum mismatch");
        }
        return bytes;
    };

    IndexBundle bundle;
    checked(kDictionary);
    checked(kModel);
    checked(kMeta);
    try {
        bundle.dictionary = Dictionary::load(directory / kDictionary);
        bundle.model = TfIdfModel::load(directory / kModel, bundle.dictionary);
        bundle.meta = read_meta(directory / kMeta);
    } catch (const std::exception& e) {
        throw CorruptIndex(e.what());
    }
    if (bundle.dictionary.size() != vocabulary || bundle.model.documents() != documents) {
        throw CorruptIndex("manifest counts disagree with dictionary/model");
    }
    if (bundle.model.digest() != digest) {
        throw CorruptIndex("config digest mismatch");
    }

    const auto postings_bytes = checked(kPostings);
    ByteReader pr(postings_bytes, kPostings);
    if (pr.take(8) != kPostingsMagic) {
        throw CorruptIndex("postings magic mismatch");
    }
    if (pr.u64() != vocabulary || pr.u64() != postings) {
        throw CorruptIndex("postings header disagrees with manifest");
    }
    if (pr.remaining() != (vocabulary + 1) * 8 + postings * 8) {
        throw CorruptIndex("postings size mismatch");
    }
    std::vector<std::uint64_t> offsets(vocabulary + 1);
    for (auto& o : offsets) {
        o = pr.u64();
    }
    if (offsets.front() != 0 || offsets.back() != postings) {
        throw CorruptIndex("posting offsets out of range");
    }
    for (std::size_t t = 0; t < vocabulary; ++t) {
        if (offsets[t] > offsets[t + 1]) {
            throw CorruptIndex("posting offsets not monotone");
        }
    }
    std::vector<DocId> doc_ids(postings);
    for (auto& d : doc_ids) {
        d = pr.u32();
        if (d >= documents) {
            throw CorruptIndex("posting doc id out of range");
        }
    }
    for (std::size_t t = 0; t < vocabulary; ++t) {
        for (auto p = offsets[t] + 1; p < offsets[t + 1]; ++p) {
            if (doc_ids[p - 1] >= doc_ids[p]) {
                throw CorruptIndex("posting doc ids not strictly increasing");
            }
        }
    }
    std::vector<float> weights(postings);
    for (auto& w : weights) {
        w = std::bit_cast<float>(pr.u32());
        if (!std::isfinite(w) || w <= 0.0f || w > 1.0f + 1e-6f) {
            throw CorruptIndex("posting weight out of range");
        }
    }

    const auto table_bytes = checked(kDocTable);
    ByteReader tr(table_bytes, kDocTable);
    if (tr.take(8) != kDocTableMagic || tr.u64() != documents ||
        tr.remaining() != documents * 8) {
        throw CorruptIndex("doc table header mismatch");
    }
    std::vector<std::uint64_t> doc_table(documents);
    for (auto& id : doc_table) {
        id = tr.u64();
        if (bundle.meta.find(id) == nullptr) {
            throw CorruptIndex("doc table references post without metadata");
        }
    }

    bundle.index = InvertedIndex(vocabulary, digest, std::move(offsets), std::move(doc_ids),
                                 std::move(weights), std::move(doc_table));
    return bundle;
}

}  // namespace stackmatch
