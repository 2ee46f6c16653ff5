/*
 * Copyright 2026 The SciQA Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// sciqa: ingest | query | eval | serve

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sciqa/sciqa.hpp"

namespace {

std::string DefaultIndexDir() {
  const char* env = std::getenv("SCIQA_INDEX_DIR");
  return env ? env : "";
}

struct ReaderFlags {
  std::string mode = "baseline";
  std::string reader_url;
  std::string scorer_url;
  int timeout_ms = 10000;
};

void AddReaderFlags(CLI::App* cmd, ReaderFlags& flags) {
  cmd->add_option("--reader", flags.mode, "Reader: baseline or remote")
      ->check(CLI::IsMember({"baseline", "remote"}));
  cmd->add_option("--reader-url", flags.reader_url,
                  "Base URL of a remote reader (POST /read)");
  cmd->add_option("--timeout-ms", flags.timeout_ms,
                  "Per-request timeout for remote calls");
}

sciqa::ServiceConfig MakeConfig(const std::string& index_dir,
                                const ReaderFlags& flags) {
  if (index_dir.empty()) {
    throw sciqa::Error(sciqa::ErrorCode::kInvalidArgument,
                       "no index directory (pass --index-dir or set "
                       "SCIQA_INDEX_DIR)");
  }
  sciqa::ServiceConfig config;
  config.index_dir = index_dir;
  config.reader_mode = flags.mode == "remote" ? sciqa::ReaderMode::kRemote
                                              : sciqa::ReaderMode::kBaseline;
  if (!flags.reader_url.empty()) config.remote_reader_url = flags.reader_url;
  if (!flags.scorer_url.empty()) config.remote_scorer_url = flags.scorer_url;
  config.remote_timeout = std::chrono::milliseconds(flags.timeout_ms);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retriever-reader question answering over publication corpora"};
  app.require_subcommand(1);

  std::string index_dir = DefaultIndexDir();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build an index from a CSV file");
  std::string csv_path;
  std::vector<std::string> columns;
  std::string date_from, date_to, language;
  sciqa::IngestOptions ingest_options;
  ingest->add_option("--csv", csv_path, "Input CSV")->required();
  ingest->add_option("--index-dir", index_dir, "Output index directory");
  ingest->add_option("--column", columns,
                     "Column mapping field=Header (fields: pmid, title, "
                     "paragraphs, url, publication_date, authors, full_text, "
                     "language)");
  ingest->add_option("--from", date_from, "Earliest publication date (ISO)");
  ingest->add_option("--to", date_to, "Latest publication date (ISO)");
  ingest->add_option("--language", language,
                     "Keep only this language (needs a language column)");
  ingest->add_option("--max-tokens", ingest_options.split.max_tokens,
                     "Passage window in tokens");
  ingest->add_option("--stride", ingest_options.split.stride,
                     "Passage stride in tokens (default: max-tokens)");
  ingest->add_flag("--force", ingest_options.force,
                   "Overwrite an existing index");

  // query
  auto* query = app.add_subcommand("query", "Answer a question");
  sciqa::QueryRequest request;
  std::string format = "table";
  ReaderFlags query_flags;
  query->add_option("--index-dir", index_dir, "Index directory");
  query->add_option("-q,--query", request.query, "Question")->required();
  query->add_option("--retriever-top-k", request.retriever_top_k,
                    "Documents to retrieve");
  query->add_option("--reader-top-k", request.reader_top_k, "Answers to return");
  query->add_option("--format", format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  AddReaderFlags(query, query_flags);

  // eval
  auto* evaluate = app.add_subcommand("eval", "Evaluate on a SQuAD dataset");
  std::string squad_path, ks_text = "5,10,20", report_path = "eval_report.json";
  std::string scorer_mode = "baseline";
  ReaderFlags eval_flags;
  evaluate->add_option("--index-dir", index_dir, "Index directory");
  evaluate->add_option("--squad", squad_path, "SQuAD 2.0 JSON")->required();
  evaluate->add_option("--ks", ks_text, "Comma-separated k values");
  evaluate->add_option("--report", report_path, "Where to write the JSON report");
  evaluate->add_option("--scorer", scorer_mode, "baseline or remote")
      ->check(CLI::IsMember({"baseline", "remote"}));
  evaluate->add_option("--scorer-url", eval_flags.scorer_url,
                       "Base URL of a remote scorer (POST /score)");
  AddReaderFlags(evaluate, eval_flags);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string listen = "127.0.0.1:8080";
  ReaderFlags serve_flags;
  std::size_t serve_retriever_k = 10, serve_reader_k = 5;
  serve->add_option("--index-dir", index_dir, "Index directory");
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--retriever-top-k", serve_retriever_k,
                    "Default retriever_top_k");
  serve->add_option("--reader-top-k", serve_reader_k, "Default reader_top_k");
  serve->add_option("--scorer-url", serve_flags.scorer_url,
                    "Remote scorer URL");
  AddReaderFlags(serve, serve_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      if (index_dir.empty()) {
        throw sciqa::Error(sciqa::ErrorCode::kInvalidArgument,
                           "no index directory (pass --index-dir or set "
                           "SCIQA_INDEX_DIR)");
      }
      if (ingest->count("--max-tokens") && !ingest->count("--stride")) {
        ingest_options.split.stride = ingest_options.split.max_tokens;
      }
      for (const auto& c : columns) {
        const auto eq = c.find('=');
        if (eq == std::string::npos) {
          throw sciqa::Error(sciqa::ErrorCode::kInvalidArgument,
                             "--column expects field=Header, got '" + c + "'");
        }
        ingest_options.schema.Set(c.substr(0, eq), c.substr(eq + 1));
      }
      if (!date_from.empty()) ingest_options.filters.date_from = date_from;
      if (!date_to.empty()) ingest_options.filters.date_to = date_to;
      if (!language.empty()) ingest_options.filters.language = language;
      sciqa::CliIngest(csv_path, index_dir, ingest_options, std::cout);
    } else if (*query) {
      sciqa::CliQuery(MakeConfig(index_dir, query_flags), request, format,
                      std::cout);
    } else if (*evaluate) {
      if (scorer_mode == "remote" && eval_flags.scorer_url.empty()) {
        throw sciqa::Error(sciqa::ErrorCode::kInvalidArgument,
                           "--scorer remote needs --scorer-url");
      }
      if (scorer_mode == "baseline") eval_flags.scorer_url.clear();
      sciqa::CliEval(MakeConfig(index_dir, eval_flags), squad_path,
                     sciqa::ParseKs(ks_text), report_path, std::cout);
    } else if (*serve) {
      auto config = MakeConfig(index_dir, serve_flags);
      config.listen_address = listen;
      config.retriever_top_k_default = serve_retriever_k;
      config.reader_top_k_default = serve_reader_k;
      sciqa::Serve(config, std::cerr);
    }
  } catch (const sciqa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
