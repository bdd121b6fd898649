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

// HTTP search service. The index bundle is loaded once and then shared,
// immutable, by every request handler; handlers take no locks beyond the
// pointer copy that pins the current engine.
//
//   POST /api/v1/search        {"stacktrace": "...", "k": 3}
//   GET  /api/v1/post/{id}     question metadata plus summary
//   GET  /api/v1/stats         corpus and index sizes
//   GET  /healthz              {"status":"ok","index_loaded":bool}
//   GET  /                     static web UI bundle, when configured

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stackmatch/index_store.hpp"
#include "stackmatch/summarizer.hpp"
#include "stackmatch/thread_rank.hpp"

namespace httplib {
class Server;
}

namespace stackmatch {

struct ServiceConfig {
    std::size_t max_body_bytes = 1 << 20;
    std::size_t default_k = kDefaultDisplayK;
    std::size_t max_k = kDefaultRetrieveK;
    std::size_t retrieve_k = kDefaultRetrieveK;
    std::optional<std::filesystem::path> static_dir;
};

struct RenderedThread {
    std::uint64_t question_id = 0;
    std::optional<std::string> title;
    std::string url;
    double similarity = 0.0;
    Summary summary;
    bool has_accepted_answer = false;
    std::optional<std::uint64_t> view_count;
    std::int64_t score = 0;
};

struct SearchResponse {
    std::vector<RenderedThread> results;
    std::size_t query_tokens_total = 0;
    std::size_t query_tokens_known = 0;
    double elapsed_ms = 0.0;
    std::optional<std::string> reason;

    nlohmann::json to_json() const;
};

/// The read-only query pipeline over one loaded bundle.
class SearchEngine {
public:
    explicit SearchEngine(IndexBundle bundle);

    /// vectorize -> top retrieve_k posts -> threads -> top display_k ->
    /// summaries. elapsed_ms is left for the caller to fill.
    SearchResponse search(std::string_view stacktrace, std::size_t display_k,
                          std::size_t retrieve_k = kDefaultRetrieveK) const;

    const IndexBundle& bundle() const { return bundle_; }
    Summary summary_for(std::uint64_t question_id) const;
    std::size_t resident_bytes() const;

private:
    IndexBundle bundle_;
};

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

class SearchService {
public:
    explicit SearchService(ServiceConfig config = {});

    void install(std::shared_ptr<const SearchEngine> engine);
    bool index_loaded() const;
    const ServiceConfig& config() const { return config_; }

    HttpReply handle_search(std::string_view request_body) const;
    HttpReply handle_post_lookup(std::string_view question_id) const;
    HttpReply handle_health() const;
    HttpReply handle_stats() const;

    /// Wires the handlers (and the static mount, if configured) onto a server.
    void register_routes(httplib::Server& server) const;

private:
    std::shared_ptr<const SearchEngine> engine() const;

    ServiceConfig config_;
    mutable std::mutex mu_;
    std::shared_ptr<const SearchEngine> engine_;
};

/// Owns an httplib server bound to one address. bind() fails cleanly when
/// the port is taken; serve() blocks until stop().
class HttpServer {
public:
    explicit HttpServer(const SearchService& service, std::size_t worker_threads = 32);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// port 0 picks an ephemeral port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    void serve();
    void stop();
    bool running() const;

private:
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace stackmatch
