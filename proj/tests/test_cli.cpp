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
#include <json.hpp>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "stackmatch/cli.hpp"
#include "stackmatch/index_store.hpp"
#include "support/test_util.hpp"

#ifndef STACKMATCH_CLI_BINARY
#error "STACKMATCH_CLI_BINARY must name the built CLI"
#endif

using namespace stackmatch;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result
run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
    args.insert(args.begin(), "stackmatch");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::istringstream in(stdin_text);
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(argv, in, out, err);
    return {code, out.str(), err.str()};
}

/// Output buffer another thread can poll while `serve` writes to it.
class SharedBuf : public std::streambuf {
public:
    std::string snapshot() const {
        std::lock_guard lock(mu_);
        return data_;
    }

protected:
    int_type overflow(int_type c) override {
        if (c != traits_type::eof()) {
            std::lock_guard lock(mu_);
            data_.push_back(static_cast<char>(c));
        }
        return c;
    }
    std::streamsize xsputn(const char* s, std::streamsize n) override {
        std::lock_guard lock(mu_);
        data_.append(s, static_cast<std::size_t>(n));
        return n;
    }

private:
    mutable std::mutex mu_;
    std::string data_;
};

int
port_from(const std::string& out) {
    std::smatch m;
    static const std::regex re("listening=[^:]+:(\\d+)");
    return std::regex_search(out, m, re) ? std::stoi(m[1]) : -1;
}

/// convert + build the npm fixture into `dir`/index.
fs::path
npm_index(const test::TempDir& dir) {
    const auto rows = dir / "rows.jsonl";
    EXPECT_EQ(run_cli({"convert", test::data_path("npm_fixture.xml").string(), rows.string()}).code, 0);
    EXPECT_EQ(run_cli({"build", rows.string(), (dir / "index").string()}).code, 0);
    return dir / "index";
}

}  // namespace

TEST(CliConvert, StatsLineAndSkips) {
    test::TempDir dir;
    const auto r = run_cli({"convert", test::data_path("ingest_100.xml").string(), (dir / "rows.jsonl").string()});
    EXPECT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.out.find("rows_seen=100"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("rows_emitted=97"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("rows_skipped_malformed=3"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(dir / "rows.jsonl"));
}

TEST(CliConvert, MissingInputAndUnwritableOutput) {
    test::TempDir dir;
    EXPECT_EQ(run_cli({"convert", (dir / "nope.xml").string(), (dir / "rows.jsonl").string()}).code,
              cli::kUnreadableInput);
    EXPECT_FALSE(fs::exists(dir / "rows.jsonl"));
    EXPECT_EQ(run_cli({"convert", test::data_path("ingest_100.xml").string(),
                       (dir / "no" / "such" / "rows.jsonl").string()})
                  .code,
              cli::kUnwritableOutput);
}

TEST(CliUsage, BadArgumentsAre64) {
    EXPECT_EQ(run_cli({}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"convert", "only-one"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"query", "idx", "-k", "0"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
}

TEST(CliExtract, WritesCorpusAndMeta) {
    test::TempDir dir;
    ASSERT_EQ(run_cli({"convert", test::data_path("npm_fixture.xml").string(), (dir / "rows").string()}).code, 0);
    const auto r = run_cli({"extract", (dir / "rows").string(), "--corpus", (dir / "corpus.jsonl").string(),
                            "--meta", (dir / "meta.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto corpus = read_corpus(dir / "corpus.jsonl");
    const auto meta = read_meta(dir / "meta.jsonl");
    EXPECT_FALSE(corpus.empty());
    for (const auto& d : corpus) {
        EXPECT_NE(meta.find(d.post_id), nullptr);
    }
}

TEST(CliBuild, TwoPostFixture) {
    test::TempDir dir;
    test::spit(dir / "two.xml",
               "<posts>\n"
               "<row Id=\"1\" PostTypeId=\"1\" Title=\"one\" Body=\"&lt;code&gt;a b a&lt;/code&gt;\" />\n"
               "<row Id=\"2\" PostTypeId=\"1\" Title=\"two\" Body=\"&lt;code&gt;a c&lt;/code&gt;\" />\n"
               "</posts>\n");
    ASSERT_EQ(run_cli({"convert", (dir / "two.xml").string(), (dir / "rows").string()}).code, 0);
    const auto r = run_cli({"build", (dir / "rows").string(), (dir / "index").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("documents=2 vocabulary=3"), std::string::npos) << r.out;
    EXPECT_EQ(load_index(dir / "index").index.documents(), 2u);

    const auto stats = run_cli({"stats", (dir / "index").string()});
    EXPECT_EQ(stats.code, 0);
    EXPECT_NE(stats.out.find("documents=2"), std::string::npos);
}

TEST(CliBuild, EmptyCorpusIs4) {
    test::TempDir dir;
    test::spit(dir / "rows", "");
    const auto r = run_cli({"build", (dir / "rows").string(), (dir / "index").string()});
    EXPECT_EQ(r.code, cli::kEmptyCorpus);
    EXPECT_NE(r.err.find("empty corpus"), std::string::npos);
}

TEST(CliBuild, ErrorsAndDeterminism) {
    test::TempDir dir;
    EXPECT_EQ(run_cli({"build", (dir / "missing").string(), (dir / "index").string()}).code,
              cli::kUnreadableInput);
    ASSERT_EQ(run_cli({"convert", test::data_path("npm_fixture.xml").string(), (dir / "rows").string()}).code, 0);
    test::spit(dir / "blocker", "x");
    EXPECT_EQ(run_cli({"build", (dir / "rows").string(), (dir / "blocker" / "index").string()}).code,
              cli::kUnwritableOutput);

    ASSERT_EQ(run_cli({"build", (dir / "rows").string(), (dir / "a").string()}).code, 0);
    ASSERT_EQ(run_cli({"build", (dir / "rows").string(), (dir / "b").string(), "--serial"}).code, 0);
    for (const auto& name : index_file_names()) {
        EXPECT_EQ(test::slurp(dir / "a" / name), test::slurp(dir / "b" / name)) << name;
    }
}

TEST(CliQuery, ResultsNoResultsAndCorruptIndex) {
    test::TempDir dir;
    const auto index = npm_index(dir);
    const auto hit = run_cli({"query", index.string(), "-k", "3"}, test::slurp(test::data_path("npm_query.txt")));
    ASSERT_EQ(hit.code, cli::kOk) << hit.err;
    std::istringstream lines(hit.out);
    std::string first;
    std::getline(lines, first);
    const auto j = nlohmann::json::parse(first);
    EXPECT_EQ(j["rank"], 1);
    EXPECT_TRUE(j.contains("question_id"));
    EXPECT_TRUE(j.contains("similarity"));
    EXPECT_TRUE(j.contains("title"));
    EXPECT_TRUE(j.contains("url"));

    EXPECT_EQ(run_cli({"query", index.string()}, "qqqq zzzz xyzzy").code, cli::kNoResults);
    EXPECT_EQ(run_cli({"query", (dir / "nothing").string()}, "npm").code, cli::kUnreadableInput);

    fs::resize_file(index / "postings.bin", fs::file_size(index / "postings.bin") - 1);
    EXPECT_EQ(run_cli({"query", index.string()}, "npm").code, cli::kUnreadableInput);
    EXPECT_EQ(run_cli({"stats", index.string()}).code, cli::kUnreadableInput);
}

TEST(CliQuery, SelfQueryFindsOwnThread) {
    test::TempDir dir;
    test::spit(dir / "f.xml",
               "<posts>\n"
               "<row Id=\"5\" PostTypeId=\"1\" Title=\"t5\" Body=\"&lt;code&gt;KeyError: 'user_id' in handler.py line 9&lt;/code&gt;\" />\n"
               "<row Id=\"6\" PostTypeId=\"1\" Title=\"t6\" Body=\"&lt;code&gt;NullPointerException at Main.java:3&lt;/code&gt;\" />\n"
               "<row Id=\"7\" PostTypeId=\"2\" ParentId=\"6\" Body=\"&lt;code&gt;check for null first&lt;/code&gt;\" />\n"
               "</posts>\n");
    ASSERT_EQ(run_cli({"convert", (dir / "f.xml").string(), (dir / "rows").string()}).code, 0);
    ASSERT_EQ(run_cli({"build", (dir / "rows").string(), (dir / "index").string()}).code, 0);
    const auto r = run_cli({"query", (dir / "index").string()}, "KeyError: 'user_id' in handler.py line 9");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));
    EXPECT_EQ(j["question_id"], 5);
    EXPECT_NEAR(j["similarity"].get<double>(), 1.0, 1e-6);
}

TEST(CliServe, HealthzThenShutdown) {
    test::TempDir dir;
    const auto index = npm_index(dir);
    SharedBuf buf;
    std::ostream out(&buf);
    std::ostringstream err;
    std::istringstream in;
    int code = -1;
    const std::string idx = index.string();
    std::thread serving([&] {
        const char* argv[] = {"stackmatch", "serve", idx.c_str(), "--port", "0"};
        code = cli::run(argv, in, out, err);
    });
    int port = -1;
    for (int i = 0; i < 1000 && port < 0; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        port = port_from(buf.snapshot());
    }
    ASSERT_GT(port, 0);
    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(nlohmann::json::parse(health->body)["index_loaded"], true);
    auto search = client.Post("/api/v1/search",
                              nlohmann::json{{"stacktrace", test::slurp(test::data_path("npm_query.txt"))}}.dump(),
                              "application/json");
    ASSERT_TRUE(search);
    EXPECT_EQ(search->status, 200);

    // A second serve on the same port cannot bind.
    const auto clash = run_cli({"serve", idx, "--port", std::to_string(port)});
    EXPECT_EQ(clash.code, cli::kBindFailure);

    cli::request_shutdown();
    serving.join();
    EXPECT_EQ(code, cli::kOk);
}

TEST(CliServe, MissingIndexIs2) {
    test::TempDir dir;
    EXPECT_EQ(run_cli({"serve", (dir / "none").string(), "--port", "0"}).code, cli::kUnreadableInput);
}

// The installed binary: real process, real exit codes, SIGTERM shutdown.
TEST(CliBinary, EndToEndAndSignalShutdown) {
    test::TempDir dir;
    const std::string bin = STACKMATCH_CLI_BINARY;
    auto sh = [](const std::string& cmd) {
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    const auto rows = (dir / "rows").string();
    const auto idx = (dir / "index").string();
    EXPECT_EQ(sh(bin + " convert " + test::data_path("npm_fixture.xml").string() + " " + rows + " >/dev/null"), 0);
    EXPECT_EQ(sh(bin + " build " + rows + " " + idx + " >/dev/null"), 0);
    EXPECT_EQ(sh(bin + " query " + idx + " < " + test::data_path("npm_query.txt").string() + " >/dev/null"), 0);
    EXPECT_EQ(sh("echo qqqq | " + bin + " query " + idx + " >/dev/null"), 1);
    EXPECT_EQ(sh(bin + " query " + (dir / "none").string() + " </dev/null 2>/dev/null"), 2);
    EXPECT_EQ(sh(bin + " bogus 2>/dev/null >/dev/null"), 64);

    int pipefd[2];
    ASSERT_EQ(pipe(pipefd), 0);
    const pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        dup2(pipefd[1], STDOUT_FILENO);
        close(pipefd[0]);
        close(pipefd[1]);
        execl(bin.c_str(), bin.c_str(), "serve", idx.c_str(), "--port", "0", static_cast<char*>(nullptr));
        _exit(127);
    }
    close(pipefd[1]);
    std::string out;
    char chunk[256];
    while (port_from(out) < 0) {
        const auto n = read(pipefd[0], chunk, sizeof(chunk));
        if (n <= 0) {
            break;
        }
        out.append(chunk, static_cast<std::size_t>(n));
    }
    close(pipefd[0]);
    const int port = port_from(out);
    EXPECT_GT(port, 0) << out;
    if (port > 0) {
        httplib::Client client("127.0.0.1", port);
        auto health = client.Get("/healthz");
        ASSERT_TRUE(health);
        EXPECT_EQ(health->status, 200);
    }
    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
}
