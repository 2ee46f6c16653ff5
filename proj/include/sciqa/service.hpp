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

// HTTP search service and the command implementations behind the CLI
// (ingest, query, eval, serve).
//
// Endpoints:
//   GET  /health            {"status": "ok", "documents": N, "passages": M}
//   GET  /stats             index statistics
//   GET  /documents/{id}    stored document, 404 when unknown
//   POST /query             {"query", "retriever_top_k"?, "reader_top_k"?}
//                           -> {"answers": [row, ...]}

#ifndef SCIQA_SERVICE_HPP_
#define SCIQA_SERVICE_HPP_

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "sciqa/corpus.hpp"
#include "sciqa/error.hpp"
#include "sciqa/eval.hpp"
#include "sciqa/persistence.hpp"
#include "sciqa/pipeline.hpp"
#include "sciqa/reader.hpp"
#include "sciqa/squad.hpp"

namespace sciqa {

enum class ReaderMode { kBaseline, kRemote };

struct ServiceConfig {
  std::filesystem::path index_dir;
  std::string listen_address = "127.0.0.1:8080";
  std::size_t retriever_top_k_default = 10;
  std::size_t reader_top_k_default = 5;
  ReaderMode reader_mode = ReaderMode::kBaseline;
  std::optional<std::string> remote_reader_url;
  std::optional<std::string> remote_scorer_url;
  std::chrono::milliseconds remote_timeout = std::chrono::seconds(10);
  ReaderConfig reader;

  void Validate() const {
    if (reader_mode == ReaderMode::kRemote && !remote_reader_url) {
      throw Error(ErrorCode::kInvalidArgument,
                  "remote reader mode needs remote_reader_url");
    }
    if (retriever_top_k_default < 1 || reader_top_k_default < 1) {
      throw Error(ErrorCode::kInvalidArgument, "default k values must be >= 1");
    }
    reader.Validate();
  }

  /// host:port split of listen_address.
  std::pair<std::string, int> HostPort() const {
    const auto colon = listen_address.rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "listen address '" + listen_address + "' lacks a port");
    }
    int port = 0;
    try {
      port = std::stoi(listen_address.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad port in '" + listen_address + "'");
    }
    return {listen_address.substr(0, colon), port};
  }
};

inline std::shared_ptr<const Reader> MakeReader(
    const std::shared_ptr<const Index>& index, const ServiceConfig& config) {
  config.Validate();
  if (config.reader_mode == ReaderMode::kRemote) {
    return std::make_shared<RemoteReader>(*config.remote_reader_url,
                                          config.reader, config.remote_timeout);
  }
  return std::make_shared<BaselineReader>(
      std::shared_ptr<const TfIdfModel>(index, &index->model), config.reader);
}

// ---------------------------------------------------------------------------
// Service

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

inline int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kField:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kRemoteUnavailable:
    case ErrorCode::kProtocolViolation:
      return 502;
    default:
      return 500;
  }
}

/// Request handlers over one immutable index snapshot. Handlers never
/// modify shared state, so one instance serves concurrent requests.
class SearchService {
 public:
  SearchService(std::shared_ptr<const Index> index, ServiceConfig config)
      : index_(std::move(index)), config_(std::move(config)) {
    config_.Validate();
    pipeline_ = BuildDefaultPipeline(index_, MakeReader(index_, config_));
    pipeline_.Validate();
  }

  const Index& index() const { return *index_; }
  const Pipeline& pipeline() const { return pipeline_; }

  HttpReply Health() const {
    return {200,
            {{"status", "ok"},
             {"documents", index_->store.document_count()},
             {"passages", index_->store.passage_count()}}};
  }

  HttpReply Stats() const {
    return {200,
            {{"documents", index_->store.document_count()},
             {"passages", index_->store.passage_count()},
             {"vocabulary", index_->model.vocabulary_size()},
             {"format_version", kIndexFormatVersion},
             {"created_at", index_->created_at},
             {"split",
              {{"max_tokens", index_->split.max_tokens},
               {"stride", index_->split.stride}}},
             {"reader", config_.reader_mode == ReaderMode::kRemote
                            ? "remote"
                            : "baseline"},
             {"defaults",
              {{"retriever_top_k", config_.retriever_top_k_default},
               {"reader_top_k", config_.reader_top_k_default}}}}};
  }

  HttpReply GetDocument(const std::string& doc_id) const {
    const Document* doc = index_->store.FindDocument(doc_id);
    if (!doc) {
      return {404, {{"error", "unknown document '" + doc_id + "'"}}};
    }
    auto passages = nlohmann::json::array();
    for (const auto& pid : index_->store.PassageIds(doc_id)) {
      const auto& p = index_->store.GetPassage(pid);
      passages.push_back({{"passage_id", p.passage_id},
                          {"char_start", p.char_start},
                          {"char_end", p.char_end}});
    }
    return {200,
            {{"doc_id", doc->doc_id},
             {"text", doc->text},
             {"meta", doc->meta},
             {"passages", passages}}};
  }

  /// Parses a /query body into a request with defaults applied.
  QueryRequest ParseQuery(const std::string& body) const {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kParse, "request body is not a JSON object");
    }
    if (!j.contains("query") || !j["query"].is_string()) {
      throw Error(ErrorCode::kField, "'query' must be a string");
    }
    QueryRequest request;
    request.query = j["query"].get<std::string>();
    request.retriever_top_k = config_.retriever_top_k_default;
    request.reader_top_k = config_.reader_top_k_default;
    for (auto [key, target] :
         {std::pair{"retriever_top_k", &request.retriever_top_k},
          std::pair{"reader_top_k", &request.reader_top_k}}) {
      if (!j.contains(key)) continue;
      if (!j[key].is_number_integer() || j[key].get<long long>() < 1) {
        throw Error(ErrorCode::kField,
                    std::string("'") + key + "' must be an integer >= 1");
      }
      *target = j[key].get<std::size_t>();
    }
    request.Validate();
    return request;
  }

  HttpReply Query(const std::string& body) const {
    try {
      const auto rows = pipeline_.Run(ParseQuery(body));
      return {200, {{"answers", ToJson(rows)}}};
    } catch (const Error& e) {
      return {HttpStatusFor(e.code()),
              {{"error", e.what()},
               {"code", std::string(ErrorCodeName(e.code()))}}};
    }
  }

  /// Routes on an httplib server.
  void Register(httplib::Server& server) const {
    auto send = [](httplib::Response& res, const HttpReply& reply) {
      res.status = reply.status;
      res.set_content(reply.body.dump(), "application/json");
    };
    server.Get("/health", [this, send](const httplib::Request&,
                                       httplib::Response& res) {
      send(res, Health());
    });
    server.Get("/stats", [this, send](const httplib::Request&,
                                      httplib::Response& res) {
      send(res, Stats());
    });
    server.Get(R"(/documents/(.+))",
               [this, send](const httplib::Request& req,
                            httplib::Response& res) {
                 send(res, GetDocument(req.matches[1]));
               });
    server.Post("/query", [this, send](const httplib::Request& req,
                                       httplib::Response& res) {
      send(res, Query(req.body));
    });
  }

 private:
  std::shared_ptr<const Index> index_;
  ServiceConfig config_;
  Pipeline pipeline_;
};

/// Loads the index once and serves until the server is stopped.
inline void Serve(const ServiceConfig& config, std::ostream& log) {
  config.Validate();
  const auto [host, port] = config.HostPort();
  const SearchService service(LoadIndex(config.index_dir), config);
  httplib::Server server;
  service.Register(server);
  if (!server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + config.listen_address);
  }
  log << "serving " << service.index().store.document_count()
      << " documents on http://" << config.listen_address << std::endl;
  server.listen_after_bind();
}

// ---------------------------------------------------------------------------
// Commands

struct IngestOptions {
  ColumnMapping schema;
  IngestFilters filters;
  SplitConfig split;
  bool force = false;
};

struct IngestSummary {
  std::size_t articles_in = 0;
  std::size_t rejected = 0;
  std::size_t kept = 0;
  std::size_t documents = 0;
  std::size_t passages = 0;
  std::size_t vocabulary = 0;
};

inline IngestSummary CliIngest(const std::filesystem::path& csv_path,
                               const std::filesystem::path& index_dir,
                               const IngestOptions& options, std::ostream& out) {
  namespace fs = std::filesystem;
  if (fs::exists(index_dir) && !fs::is_empty(index_dir) && !options.force) {
    throw Error(ErrorCode::kIo, "index directory " + index_dir.string() +
                                    " is not empty (use --force)");
  }
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + csv_path.string());
  auto ingested = IngestCsv(in, options.schema);

  IngestSummary summary;
  summary.rejected = ingested.rejected.size();
  summary.articles_in = ingested.articles.size() + summary.rejected;
  for (const auto& issue : ingested.rejected) {
    out << "warning: row " << issue.row << " skipped: " << issue.reason << "\n";
  }
  const auto kept = options.filters.Apply(std::move(ingested.articles));
  summary.kept = kept.size();
  if (kept.empty()) {
    out << "warning: no articles left after filtering\n";
    throw Error(ErrorCode::kEmptyCorpus,
                "ingestion produced 0 documents; at least one is required");
  }
  const auto store = AddDocuments(DocumentStore{}, kept, options.split);
  const auto index = BuildIndex(store, options.split);
  SaveIndex(*index, index_dir, options.force);

  summary.documents = index->store.document_count();
  summary.passages = index->store.passage_count();
  summary.vocabulary = index->model.vocabulary_size();
  out << "articles in:      " << summary.articles_in << "\n"
      << "rejected rows:    " << summary.rejected << "\n"
      << "kept by filters:  " << summary.kept << "\n"
      << "documents:        " << summary.documents << "\n"
      << "passages:         " << summary.passages << "\n"
      << "vocabulary:       " << summary.vocabulary << "\n"
      << "index written to  " << index_dir.string() << "\n";
  return summary;
}

inline std::string RenderRowsTable(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-5s  %-8s  %-12s  %s\n", "index", "score",
                "doc_id", "answer");
  out << buf;
  for (const auto& row : rows) {
    std::string answer = row.type == "no_answer" ? "(no answer)" : row.answer;
    std::snprintf(buf, sizeof(buf), "%-5zu  %-8.4f  %-12s  ", row.index,
                  row.score, row.doc_id.substr(0, 12).c_str());
    out << buf << answer << "\n";
  }
  return out.str();
}

inline std::vector<ResultRow> CliQuery(const ServiceConfig& config,
                                       const QueryRequest& request,
                                       const std::string& format,
                                       std::ostream& out) {
  if (format != "json" && format != "table") {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown output format '" + format + "'");
  }
  const auto index = LoadIndex(config.index_dir);
  const auto pipeline = BuildDefaultPipeline(index, MakeReader(index, config));
  const auto rows = pipeline.Run(request);
  if (format == "json") {
    out << ToJson(rows).dump(2) << "\n";
  } else {
    out << RenderRowsTable(rows);
  }
  return rows;
}

inline std::vector<std::size_t> ParseKs(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long k = 0;
    try {
      k = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || k < 1) {
      throw Error(ErrorCode::kInvalidArgument, "bad k value '" + item + "'");
    }
    ks.push_back(static_cast<std::size_t>(k));
  }
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "no k values");
  return ks;
}

inline eval::EvalReport CliEval(const ServiceConfig& config,
                                const std::filesystem::path& squad_path,
                                const std::vector<std::size_t>& ks,
                                const std::filesystem::path& report_path,
                                std::ostream& out) {
  std::ifstream in(squad_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + squad_path.string());
  std::ostringstream bytes;
  bytes << in.rdbuf();
  auto dataset = squad::Parse(bytes.str());
  const auto violations = squad::Validate(dataset);
  if (!violations.empty()) {
    for (const auto& v : violations) {
      out << "violation: " << v.reason << "\n";
    }
    throw Error(ErrorCode::kInvalidDataset,
                std::to_string(violations.size()) +
                    " dataset violation(s) in " + squad_path.string());
  }
  if (!dataset.provenance.count("source")) {
    dataset.provenance["source"] = squad_path.stem().string();
  }

  const auto index = LoadIndex(config.index_dir);
  const auto pipeline = BuildDefaultPipeline(index, MakeReader(index, config));
  std::unique_ptr<eval::SemanticScorer> scorer;
  if (config.remote_scorer_url) {
    scorer = std::make_unique<eval::RemoteScorer>(*config.remote_scorer_url,
                                                  config.remote_timeout);
  } else {
    scorer = std::make_unique<eval::TokenF1Scorer>();
  }
  const auto report =
      eval::Evaluate(pipeline, dataset, index->store, ks, *scorer);
  if (!report_path.empty()) {
    std::ofstream file(report_path, std::ios::binary | std::ios::trunc);
    file << eval::ToJson(report).dump(2) << "\n";
    if (!file) {
      throw Error(ErrorCode::kIo, "cannot write " + report_path.string());
    }
  }
  out << eval::RenderTable(report);
  return report;
}

}  // namespace sciqa

#endif  // SCIQA_SERVICE_HPP_
