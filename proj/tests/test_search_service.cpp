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

#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "stackmatch/search_service.hpp"
#include "support/bundle_fixture.hpp"
#include "support/test_util.hpp"

using namespace stackmatch;
using nlohmann::json;

namespace {

std::vector<RawPost>
small_thread_posts() {
    std::vector<RawPost> posts;
    RawPost q;
    q.post_id = 10;
    q.title = "Segfault in parser";
    q.accepted_answer_id = 12;
    q.view_count = 40;
    q.score = 3;
    q.body_html = "<p>My parser crashes.</p><pre><code>Segmentation fault in parse_header at line 42</code></pre>";
    posts.push_back(q);
    RawPost a;
    a.post_id = 12;
    a.post_type = PostType::Answer;
    a.type_code = 2;
    a.parent_id = 10;
    a.body_html = "<p>Check bounds.</p><code>parse_header buffer overflow fix</code>";
    posts.push_back(a);
    RawPost other;
    other.post_id = 20;
    other.title = "Timeout connecting";
    other.body_html = "<pre><code>ETIMEDOUT connect registry timeout</code></pre>";
    posts.push_back(other);
    return posts;
}

std::shared_ptr<const SearchEngine>
engine_of(IndexBundle bundle) {
    return std::make_shared<const SearchEngine>(std::move(bundle));
}

std::unique_ptr<SearchService>
loaded_service(ServiceConfig config = {}) {
    auto service = std::make_unique<SearchService>(std::move(config));
    service->install(engine_of(build_bundle(build_corpus(small_thread_posts()))));
    return service;
}

json
search_body(const std::string& stacktrace, std::optional<int> k = std::nullopt) {
    json j{{"stacktrace", stacktrace}};
    if (k) {
        j["k"] = *k;
    }
    return j;
}

json
without_timing(json j) {
    j.erase("elapsed_ms");
    return j;
}

/// Runs an HttpServer on an ephemeral port for the lifetime of the object.
class LiveServer {
public:
    explicit LiveServer(const SearchService& service) : server_(service) {
        port_ = server_.bind("127.0.0.1", 0);
        thread_ = std::thread([this] { server_.serve(); });
        for (int i = 0; i < 500 && !server_.running(); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
    }
    ~LiveServer() {
        server_.stop();
        thread_.join();
    }
    int port() const { return port_; }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(30, 0);
        return c;
    }

private:
    HttpServer server_;
    int port_ = -1;
    std::thread thread_;
};

}  // namespace

TEST(SearchService, HealthBeforeAndAfterLoad) {
    SearchService service;
    auto before = service.handle_health();
    EXPECT_EQ(before.status, 200);
    EXPECT_EQ(before.body["status"], "ok");
    EXPECT_EQ(before.body["index_loaded"], false);
    EXPECT_EQ(service.handle_search(search_body("x").dump()).status, 503);
    service.install(engine_of(build_bundle(build_corpus(small_thread_posts()))));
    EXPECT_EQ(service.handle_health().body["index_loaded"], true);
}

TEST(SearchService, StatsOnTwoDocFixture) {
    SearchService service;
    service.install(engine_of(test::bundle_of({"a b a", "a c"})));
    const auto reply = service.handle_stats();
    EXPECT_EQ(reply.status, 200);
    EXPECT_EQ(reply.body["documents"], 2);
    EXPECT_EQ(reply.body["vocabulary"], 3);
    EXPECT_EQ(reply.body["postings"], 2);
    EXPECT_GT(reply.body["index_bytes"].get<std::size_t>(), 0u);
}

TEST(SearchService, SearchRanksThreadAndReportsTokens) {
    const auto service = loaded_service();
    const auto reply = service->handle_search(search_body("Segmentation fault in parse_header!").dump());
    ASSERT_EQ(reply.status, 200) << reply.body.dump();
    const auto& results = reply.body["results"];
    ASSERT_EQ(results.size(), 1u);
    EXPECT_EQ(results[0]["question_id"], 10);
    EXPECT_EQ(results[0]["title"], "Segfault in parser");
    EXPECT_EQ(results[0]["url"], "https://stackoverflow.com/q/10");
    EXPECT_EQ(results[0]["has_accepted_answer"], true);
    EXPECT_EQ(results[0]["view_count"], 40);
    EXPECT_EQ(results[0]["score"], 3);
    EXPECT_EQ(results[0]["summary"], "My parser crashes.");
    EXPECT_GT(results[0]["similarity"].get<double>(), 0.0);
    EXPECT_LE(results[0]["similarity"].get<double>(), 1.0);
    EXPECT_EQ(reply.body["query_tokens_total"], 4);
    EXPECT_EQ(reply.body["query_tokens_known"], 4);
    EXPECT_TRUE(reply.body.contains("elapsed_ms"));
    EXPECT_FALSE(reply.body.contains("reason"));
}

TEST(SearchService, UnknownTokensGiveEmptyResultsWithReason) {
    const auto service = loaded_service();
    const auto reply = service->handle_search(search_body("zzzz qqqq").dump());
    ASSERT_EQ(reply.status, 200);
    EXPECT_TRUE(reply.body["results"].empty());
    EXPECT_EQ(reply.body["reason"], "no_known_terms");
    EXPECT_EQ(reply.body["query_tokens_total"], 2);
    EXPECT_EQ(reply.body["query_tokens_known"], 0);
}

TEST(SearchService, RequestValidation) {
    const auto service = loaded_service();
    EXPECT_EQ(service->handle_search(search_body("").dump()).status, 400);
    EXPECT_EQ(service->handle_search(search_body("  \n\t").dump()).body["error"], "EmptyStacktrace");
    EXPECT_EQ(service->handle_search("{}").status, 400);
    EXPECT_EQ(service->handle_search("not json").status, 400);
    EXPECT_EQ(service->handle_search("[1,2]").status, 400);
    EXPECT_EQ(service->handle_search(search_body("parse", 0).dump()).status, 400);
    EXPECT_EQ(service->handle_search(search_body("parse", 31).dump()).status, 400);
    EXPECT_EQ(service->handle_search(R"({"stacktrace":"parse","k":"3"})").status, 400);
    EXPECT_EQ(service->handle_search(search_body("parse", 30).dump()).status, 200);
    EXPECT_EQ(service->handle_search(R"({"stacktrace":"parse","k":null})").status, 200);
}

TEST(SearchService, OversizedBodyIs413) {
    const auto service = loaded_service();
    const std::string big = search_body(std::string((1 << 20) + 10, 'a')).dump();
    const auto reply = service->handle_search(big);
    EXPECT_EQ(reply.status, 413);
    EXPECT_EQ(reply.body["error"], "PayloadTooLarge");
}

TEST(SearchService, DisplayKLimitsResults) {
    const auto service = loaded_service();
    EXPECT_EQ(service->handle_search(search_body("parse_header timeout registry", 1).dump())
                  .body["results"]
                  .size(),
              1u);
    EXPECT_EQ(service->handle_search(search_body("parse_header timeout registry").dump())
                  .body["results"]
                  .size(),
              2u);
}

TEST(SearchService, PostLookup) {
    const auto service = loaded_service();
    const auto known = service->handle_post_lookup("10");
    ASSERT_EQ(known.status, 200);
    EXPECT_EQ(known.body["title"], "Segfault in parser");
    EXPECT_EQ(known.body["summary"]["text"], "My parser crashes.");
    EXPECT_EQ(known.body["accepted_answer_id"], 12);
    EXPECT_EQ(service->handle_post_lookup("999").status, 404);
    EXPECT_EQ(service->handle_post_lookup("12").status, 404);
    EXPECT_EQ(service->handle_post_lookup("ten").status, 404);
}

TEST(SearchService, DeterministicModuloTiming) {
    const auto service = loaded_service();
    const auto body = search_body("parse_header timeout registry Segmentation").dump();
    EXPECT_EQ(without_timing(service->handle_search(body).body),
              without_timing(service->handle_search(body).body));
}

TEST(HttpServer, EndpointsOverHttp) {
    const auto service = loaded_service();
    LiveServer live(*service);
    ASSERT_GT(live.port(), 0);
    auto client = live.client();

    auto health = client.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(json::parse(health->body)["index_loaded"], true);

    auto search = client.Post("/api/v1/search", search_body("Segmentation fault").dump(), "application/json");
    ASSERT_TRUE(search);
    EXPECT_EQ(search->status, 200);
    EXPECT_EQ(json::parse(search->body)["results"][0]["question_id"], 10);

    auto empty = client.Post("/api/v1/search", search_body("").dump(), "application/json");
    ASSERT_TRUE(empty);
    EXPECT_EQ(empty->status, 400);

    auto big = client.Post("/api/v1/search", std::string((1 << 20) + 1, ' '), "application/json");
    ASSERT_TRUE(big);
    EXPECT_EQ(big->status, 413);

    auto post = client.Get("/api/v1/post/10");
    ASSERT_TRUE(post);
    EXPECT_EQ(post->status, 200);
    auto missing = client.Get("/api/v1/post/12");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    auto stats = client.Get("/api/v1/stats");
    ASSERT_TRUE(stats);
    EXPECT_EQ(json::parse(stats->body)["documents"], 3);

    // No static directory configured.
    auto root = client.Get("/");
    ASSERT_TRUE(root);
    EXPECT_EQ(root->status, 404);
}

TEST(HttpServer, NotLoadedIs503) {
    SearchService service;
    LiveServer live(service);
    auto client = live.client();
    auto reply = client.Post("/api/v1/search", search_body("x").dump(), "application/json");
    ASSERT_TRUE(reply);
    EXPECT_EQ(reply->status, 503);
    EXPECT_EQ(json::parse(reply->body)["error"], "IndexNotLoaded");
}

TEST(HttpServer, ServesStaticDirectoryAtRoot) {
    test::TempDir dir;
    test::spit(dir / "index.html", "<html>ui</html>");
    ServiceConfig config;
    config.static_dir = dir.path();
    const auto service = loaded_service(config);
    LiveServer live(*service);
    auto client = live.client();
    auto root = client.Get("/");
    ASSERT_TRUE(root);
    EXPECT_EQ(root->status, 200);
    EXPECT_EQ(root->body, "<html>ui</html>");
    auto api = client.Get("/healthz");
    ASSERT_TRUE(api);
    EXPECT_EQ(api->status, 200);
}

TEST(HttpServer, OccupiedPortFailsToBind) {
    const auto service = loaded_service();
    LiveServer first(*service);
    HttpServer second(*service);
    EXPECT_EQ(second.bind("127.0.0.1", first.port()), -1);
}

TEST(HttpServer, ParallelIdenticalRequestsAgree) {
    SearchService service;
    service.install(engine_of(test::bundle_from_xml(test::data_path("npm_fixture.xml"))));
    LiveServer live(service);
    const auto body = search_body(test::slurp(test::data_path("npm_query.txt"))).dump();

    constexpr int kClients = 16;
    std::vector<json> replies(kClients);
    std::vector<int> statuses(kClients, 0);
    std::vector<std::thread> threads;
    for (int i = 0; i < kClients; ++i) {
        threads.emplace_back([&, i] {
            auto client = live.client();
            if (auto r = client.Post("/api/v1/search", body, "application/json")) {
                statuses[i] = r->status;
                replies[i] = without_timing(json::parse(r->body));
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (int i = 0; i < kClients; ++i) {
        EXPECT_EQ(statuses[i], 200) << i;
        EXPECT_EQ(replies[i], replies[0]) << i;
    }
    EXPECT_FALSE(replies[0]["results"].empty());
}
