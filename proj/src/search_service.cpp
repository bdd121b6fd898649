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

#include "stackmatch/search_service.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>

#include <httplib.h>

namespace stackmatch {

namespace {

nlohmann::json
error_body(std::string_view code, std::string_view message) {
    return {{"error", code}, {"message", message}};
}

nlohmann::json
summary_json(const Summary& s) {
    return {{"text", s.text},
            {"original_chars", s.original_chars},
            {"summary_chars", s.summary_chars},
            {"ratio_achieved", s.ratio_achieved}};
}

bool
is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    });
}

void
send(httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                    "application/json");
}

}  // namespace

nlohmann::json
SearchResponse::to_json() const {
    nlohmann::json out;
    out["results"] = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json item;
        item["question_id"] = r.question_id;
        item["title"] = r.title ? nlohmann::json(*r.title) : nlohmann::json(nullptr);
        item["url"] = r.url;
        item["similarity"] = r.similarity;
        item["summary"] = r.summary.text;
        item["has_accepted_answer"] = r.has_accepted_answer;
        item["view_count"] = r.view_count ? nlohmann::json(*r.view_count) : nlohmann::json(nullptr);
        item["score"] = r.score;
        out["results"].push_back(std::move(item));
    }
    out["query_tokens_total"] = query_tokens_total;
    out["query_tokens_known"] = query_tokens_known;
    out["elapsed_ms"] = elapsed_ms;
    if (reason) {
        out["reason"] = *reason;
    }
    return out;
}

// ---------------------------------------------------------------------------

SearchEngine::SearchEngine(IndexBundle bundle) : bundle_(std::move(bundle)) {
}

Summary
SearchEngine::summary_for(std::uint64_t question_id) const {
    const auto* q = bundle_.meta.find(question_id);
    if (q == nullptr) {
        return {};
    }
    return summarize(q->description, bundle_.model, bundle_.dictionary);
}

SearchResponse
SearchEngine::search(std::string_view stacktrace, std::size_t display_k,
                     std::size_t retrieve_k) const {
    SearchResponse response;
    const auto terms = query_terms(stacktrace, bundle_.dictionary);
    response.query_tokens_total = terms.tokens_total;
    response.query_tokens_known = terms.tokens_known;

    const auto query = vectorize(terms.bow, bundle_.model);
    if (query.empty()) {
        response.reason = "no_known_terms";
        return response;
    }
    const auto hits = query_topk(bundle_.index, query, retrieve_k);
    const auto ranked = rank_threads(aggregate_threads(hits, bundle_.meta), display_k);
    for (const auto& t : ranked) {
        RenderedThread r;
        r.question_id = t.question_id;
        r.title = t.title;
        r.url = t.url;
        r.similarity = t.similarity;
        r.summary = summary_for(t.question_id);
        r.has_accepted_answer = t.has_accepted_answer;
        r.view_count = t.view_count;
        r.score = t.score;
        response.results.push_back(std::move(r));
    }
    return response;
}

std::size_t
SearchEngine::resident_bytes() const {
    std::size_t bytes = bundle_.index.memory_bytes();
    for (std::size_t t = 0; t < bundle_.dictionary.size(); ++t) {
        // token storage plus hash-map node overhead, roughly
        bytes += bundle_.dictionary.token(static_cast<TermId>(t)).size() + 64;
    }
    bytes += bundle_.model.vocabulary() * (sizeof(std::uint32_t) + sizeof(double));
    for (const auto* m : bundle_.meta.sorted()) {
        bytes += sizeof(PostMeta) + m->description.size() + (m->title ? m->title->size() : 0);
    }
    return bytes;
}

// ---------------------------------------------------------------------------

SearchService::SearchService(ServiceConfig config) : config_(std::move(config)) {
}

void
SearchService::install(std::shared_ptr<const SearchEngine> engine) {
    std::lock_guard lock(mu_);
    engine_ = std::move(engine);
}

std::shared_ptr<const SearchEngine>
SearchService::engine() const {
    std::lock_guard lock(mu_);
    return engine_;
}

bool
SearchService::index_loaded() const {
    return engine() != nullptr;
}

HttpReply
SearchService::handle_search(std::string_view request_body) const {
    const auto started = std::chrono::steady_clock::now();
    if (request_body.size() > config_.max_body_bytes) {
        return {413, error_body("PayloadTooLarge", "request body exceeds the configured limit")};
    }
    const auto engine = this->engine();
    if (!engine) {
        return {503, error_body("IndexNotLoaded", "the index is still loading")};
    }

    auto request = nlohmann::json::parse(request_body, nullptr, false);
    if (request.is_discarded() || !request.is_object()) {
        return {400, error_body("BadRequest", "body must be a JSON object")};
    }
    auto st = request.find("stacktrace");
    if (st == request.end() || !st->is_string()) {
        return {400, error_body("EmptyStacktrace", "stacktrace is required")};
    }
    const auto& stacktrace = st->get_ref<const std::string&>();
    if (is_blank(stacktrace)) {
        return {400, error_body("EmptyStacktrace", "stacktrace is empty")};
    }

    std::size_t k = config_.default_k;
    if (auto kit = request.find("k"); kit != request.end() && !kit->is_null()) {
        if (!kit->is_number_integer() || kit->get<std::int64_t>() < 1 ||
            kit->get<std::int64_t>() > static_cast<std::int64_t>(config_.max_k)) {
            return {400, error_body("BadRequest",
                                    "k must be an integer in [1, " + std::to_string(config_.max_k) +
                                        "]")};
        }
        k = kit->get<std::size_t>();
    }

    auto response = engine->search(stacktrace, k, config_.retrieve_k);
    response.elapsed_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - started)
                              .count();
    return {200, response.to_json()};
}

HttpReply
SearchService::handle_post_lookup(std::string_view question_id) const {
    const auto engine = this->engine();
    if (!engine) {
        return {503, error_body("IndexNotLoaded", "the index is still loading")};
    }
    std::uint64_t id = 0;
    auto [end, ec] = std::from_chars(question_id.data(), question_id.data() + question_id.size(), id);
    if (question_id.empty() || ec != std::errc{} || end != question_id.data() + question_id.size()) {
        return {404, error_body("NotFound", "unknown question id")};
    }
    const auto* meta = engine->bundle().meta.find(id);
    if (meta == nullptr || meta->post_type != PostType::Question) {
        return {404, error_body("NotFound", "unknown question id")};
    }
    nlohmann::json body;
    body["question_id"] = meta->post_id;
    body["title"] = meta->title ? nlohmann::json(*meta->title) : nlohmann::json(nullptr);
    body["url"] = question_url(meta->post_id);
    body["accepted_answer_id"] =
        meta->accepted_answer_id ? nlohmann::json(*meta->accepted_answer_id) : nlohmann::json(nullptr);
    body["has_accepted_answer"] = meta->accepted_answer_id.has_value();
    body["creation_date"] = meta->creation_date ? nlohmann::json(format_timestamp(*meta->creation_date))
                                                : nlohmann::json(nullptr);
    body["view_count"] = meta->view_count ? nlohmann::json(*meta->view_count) : nlohmann::json(nullptr);
    body["score"] = meta->score;
    body["summary"] = summary_json(engine->summary_for(id));
    return {200, std::move(body)};
}

HttpReply
SearchService::handle_health() const {
    return {200, {{"status", "ok"}, {"index_loaded", index_loaded()}}};
}

HttpReply
SearchService::handle_stats() const {
    const auto engine = this->engine();
    if (!engine) {
        return {200,
                {{"index_loaded", false},
                 {"documents", 0},
                 {"vocabulary", 0},
                 {"postings", 0},
                 {"index_bytes", 0}}};
    }
    const auto& b = engine->bundle();
    return {200,
            {{"index_loaded", true},
             {"documents", b.index.documents()},
             {"vocabulary", b.index.vocabulary()},
             {"postings", b.index.postings()},
             {"posts", b.meta.size()},
             {"index_bytes", engine->resident_bytes()}}};
}

void
SearchService::register_routes(httplib::Server& server) const {
    server.set_payload_max_length(config_.max_body_bytes);
    server.Post("/api/v1/search", [this](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_search(req.body));
    });
    server.Get(R"(/api/v1/post/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_post_lookup(req.matches[1].str()));
    });
    server.Get("/api/v1/stats", [this](const httplib::Request&, httplib::Response& res) {
        send(res, handle_stats());
    });
    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        send(res, handle_health());
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.status == 413) {
            send(res, {413, error_body("PayloadTooLarge", "request body exceeds the configured limit")});
        } else if (res.body.empty()) {
            send(res, {res.status, error_body("HttpError", httplib::status_message(res.status))});
        }
    });
    if (config_.static_dir && std::filesystem::is_directory(*config_.static_dir)) {
        server.set_mount_point("/", config_.static_dir->string());
    }
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(const SearchService& service, std::size_t worker_threads)
    : server_(std::make_unique<httplib::Server>()) {
    server_->new_task_queue = [worker_threads] { return new httplib::ThreadPool(worker_threads); };
    // httplib's default adds SO_REUSEPORT, which would let a second server
    // share an occupied port instead of failing to bind.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    service.register_routes(*server_);
}

HttpServer::~HttpServer() {
    stop();
}

int
HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        return server_->bind_to_any_port(host);
    }
    return server_->bind_to_port(host, port) ? port : -1;
}

void
HttpServer::serve() {
    server_->listen_after_bind();
}

void
HttpServer::stop() {
    if (server_) {
        server_->stop();
    }
}

bool
HttpServer::running() const {
    return server_->is_running();
}

}  // namespace stackmatch
