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

#include "stackmatch/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "stackmatch/dump_ingest.hpp"
#include "stackmatch/index_store.hpp"
#include "stackmatch/pipeline.hpp"
#include "stackmatch/search_service.hpp"

namespace stackmatch::cli {

namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_stop{false};

extern "C" void
on_signal(int) {
    g_stop.store(true);
}

class Log {
public:
    Log(std::ostream& err, int verbosity) : err_(err), verbosity_(verbosity) {}

    void info(const std::string& msg) const {
        if (verbosity_ >= 1) {
            err_ << "[stackmatch] " << msg << '\n';
        }
    }
    void error(const std::string& msg) const { err_ << "[stackmatch] error: " << msg << '\n'; }

private:
    std::ostream& err_;
    int verbosity_;
};

double
seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int
cmd_convert(const fs::path& xml, const fs::path& rows, std::ostream& out, const Log& log) {
    std::ifstream in(xml, std::ios::binary);
    if (!in) {
        log.error("cannot read " + xml.string());
        return kUnreadableInput;
    }
    IngestStats stats;
    try {
        PostStreamReader reader(in);
        stats = write_rows(reader, rows);
    } catch (const IngestError& e) {
        log.error(e.what());
        return kUnwritableOutput;
    }
    out << "rows_seen=" << stats.rows_seen << " rows_emitted=" << stats.rows_emitted
        << " rows_skipped_malformed=" << stats.rows_skipped_malformed
        << " rows_skipped_schema=" << stats.rows_skipped_schema
        << " bytes_read=" << stats.bytes_read << '\n';
    return kOk;
}

int
cmd_extract(const fs::path& rows, const fs::path& corpus_path, const fs::path& meta_path,
            std::ostream& out, const Log& log) {
    Corpus corpus;
    try {
        CorpusBuilder builder;
        for_each_row(rows, [&](RawPost&& post) { builder.add(post); });
        corpus = std::move(builder).finish();
    } catch (const std::exception& e) {
        log.error(e.what());
        return kUnreadableInput;
    }
    try {
        write_corpus(corpus.documents, corpus_path);
        write_meta(corpus.meta, meta_path);
    } catch (const std::exception& e) {
        log.error(e.what());
        return kUnwritableOutput;
    }
    out << "documents=" << corpus.documents.size() << " posts=" << corpus.meta.size() << '\n';
    return kOk;
}

int
cmd_build(const fs::path& rows, const fs::path& index_dir, bool serial, std::ostream& out,
          const Log& log) {
    const auto started = std::chrono::steady_clock::now();
    IndexBundle bundle;
    try {
        bundle = build_bundle_from_rows(rows, serial ? Execution::Serial : Execution::Parallel);
    } catch (const EmptyCorpus&) {
        log.error("empty corpus");
        return kEmptyCorpus;
    } catch (const std::exception& e) {
        log.error(e.what());
        return kUnreadableInput;
    }
    try {
        save_index(bundle, index_dir);
    } catch (const std::exception& e) {
        log.error(e.what());
        return kUnwritableOutput;
    }
    out << "documents=" << bundle.index.documents() << " vocabulary=" << bundle.index.vocabulary()
        << " postings=" << bundle.index.postings() << " build_seconds=" << seconds_since(started)
        << '\n';
    return kOk;
}

int
cmd_query(const fs::path& index_dir, std::size_t k, std::istream& in, std::ostream& out,
          const Log& log) {
    std::shared_ptr<SearchEngine> engine;
    try {
        engine = std::make_shared<SearchEngine>(load_index(index_dir));
    } catch (const std::exception& e) {
        log.error(e.what());
        return kUnreadableInput;
    }
    const std::string stacktrace{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto response = engine->search(stacktrace, k);
    log.info("query tokens " + std::to_string(response.query_tokens_known) + "/" +
             std::to_string(response.query_tokens_total) + " known");
    std::size_t rank = 0;
    for (const auto& r : response.results) {
        nlohmann::ordered_json line;
        line["rank"] = ++rank;
        line["question_id"] = r.question_id;
        line["similarity"] = r.similarity;
        line["title"] = r.title ? nlohmann::ordered_json(*r.title) : nlohmann::ordered_json(nullptr);
        line["url"] = r.url;
        out << line.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
    }
    return response.results.empty() ? kNoResults : kOk;
}

int
cmd_stats(const fs::path& index_dir, std::ostream& out, const Log& log) {
    try {
        const SearchEngine engine(load_index(index_dir));
        const auto& b = engine.bundle();
        out << "documents=" << b.index.documents() << " vocabulary=" << b.index.vocabulary()
            << " postings=" << b.index.postings() << " posts=" << b.meta.size()
            << " index_bytes=" << engine.resident_bytes() << '\n';
    } catch (const std::exception& e) {
        log.error(e.what());
        return kUnreadableInput;
    }
    return kOk;
}

int
cmd_serve(const fs::path& index_dir, const std::string& host, int port, ServiceConfig config,
          std::ostream& out, const Log& log) {
    if (!fs::exists(index_dir / "MANIFEST")) {
        log.error("no index at " + index_dir.string());
        return kUnreadableInput;
    }
    g_stop.store(false);
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    auto restore = [&] {
        std::signal(SIGINT, prev_int);
        std::signal(SIGTERM, prev_term);
    };

    SearchService service(std::move(config));
    HttpServer server(service);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        log.error("cannot bind " + host + ":" + std::to_string(port));
        restore();
        return kBindFailure;
    }
    std::thread listener([&] { server.serve(); });

    const auto started = std::chrono::steady_clock::now();
    try {
        service.install(std::make_shared<const SearchEngine>(load_index(index_dir)));
    } catch (const std::exception& e) {
        log.error(e.what());
        server.stop();
        listener.join();
        restore();
        return kUnreadableInput;
    }
    log.info("index loaded in " + std::to_string(seconds_since(started)) + " s");
    out << "listening=" << host << ":" << bound << '\n' << std::flush;

    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    log.info("shutting down");
    server.stop();
    listener.join();
    restore();
    return kOk;
}

}  // namespace

void
request_shutdown() {
    g_stop.store(true);
}

int
run(std::span<const char* const> args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"stackmatch: find Q&A threads whose code matches a stacktrace"};
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "Log progress to stderr (repeatable)");

    fs::path xml_path, rows_path, index_dir, corpus_path, meta_path;

    auto* convert = app.add_subcommand("convert", "Stream a Posts.xml dump into a row file");
    convert->add_option("xml", xml_path, "Input XML dump")->required();
    convert->add_option("rows", rows_path, "Output row file (JSON lines)")->required();

    auto* extract = app.add_subcommand("extract", "Write the code corpus and metadata store");
    extract->add_option("rows", rows_path, "Row file from convert")->required();
    extract->add_option("--corpus", corpus_path, "Corpus output")->required();
    extract->add_option("--meta", meta_path, "Metadata store output")->required();

    bool serial = false;
    auto* build = app.add_subcommand("build", "Build and save the search index");
    build->add_option("rows", rows_path, "Row file from convert")->required();
    build->add_option("index_dir", index_dir, "Index directory")->required();
    build->add_flag("--serial", serial, "Use the serial reference kernels");

    std::size_t k = kDefaultDisplayK;
    auto* query = app.add_subcommand("query", "Rank threads for a stacktrace read from stdin");
    query->add_option("index_dir", index_dir, "Index directory")->required();
    query->add_option("-k,--k", k, "Threads to print")->check(CLI::Range(1, 30));

    std::string host = "127.0.0.1";
    int port = 8080;
    ServiceConfig config;
    std::string static_dir;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP search API");
    serve->add_option("index_dir", index_dir, "Index directory")->envname("STACKMATCH_INDEX")->required();
    serve->add_option("--host", host, "Bind address")->envname("STACKMATCH_HOST");
    serve->add_option("--port", port, "Bind port (0 = ephemeral)")->envname("STACKMATCH_PORT");
    serve->add_option("--max-body", config.max_body_bytes, "Maximum request body in bytes")
        ->envname("STACKMATCH_MAX_BODY");
    serve->add_option("--display-k", config.default_k, "Default number of threads returned")
        ->envname("STACKMATCH_DISPLAY_K")
        ->check(CLI::Range(1, 30));
    serve->add_option("--static-dir", static_dir, "Web UI bundle served at /")
        ->envname("STACKMATCH_STATIC_DIR");

    auto* stats = app.add_subcommand("stats", "Print index statistics");
    stats->add_option("index_dir", index_dir, "Index directory")->required();

    try {
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    const Log log(err, verbosity);
    if (*convert) {
        return cmd_convert(xml_path, rows_path, out, log);
    }
    if (*extract) {
        return cmd_extract(rows_path, corpus_path, meta_path, out, log);
    }
    if (*build) {
        return cmd_build(rows_path, index_dir, serial, out, log);
    }
    if (*query) {
        return cmd_query(index_dir, k, in, out, log);
    }
    if (*serve) {
        if (!static_dir.empty()) {
            config.static_dir = static_dir;
        }
        return cmd_serve(index_dir, host, port, std::move(config), out, log);
    }
    if (*stats) {
        return cmd_stats(index_dir, out, log);
    }
    return kUsage;
}

}  // namespace stackmatch::cli
