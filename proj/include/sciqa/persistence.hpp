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

// On-disk index layout (format_version 1):
//
//   manifest.json     format_version, created_at, counts, split config
//   documents.jsonl   {"doc_id", "meta", "text"} per line
//   passages.jsonl    {"passage_id", "doc_id", "index_in_doc",
//                      "char_start", "char_end", "text"} per line
//   vocab.json        {term: {"id", "df", "idf"}}
//   vectors.jsonl     {"passage_id", "weights": [[term_id, weight], ...]}
//
// Weights are written with 17 significant digits so a reload reproduces
// every double exactly.

#ifndef SCIQA_PERSISTENCE_HPP_
#define SCIQA_PERSISTENCE_HPP_

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sciqa/corpus.hpp"
#include "sciqa/error.hpp"
#include "sciqa/pipeline.hpp"
#include "sciqa/retriever.hpp"

namespace sciqa {

inline constexpr int kIndexFormatVersion = 1;

namespace persistence_detail {

namespace fs = std::filesystem;

inline const char* const kIndexFiles[] = {"manifest.json", "documents.jsonl",
                                          "passages.jsonl", "vocab.json",
                                          "vectors.jsonl"};

inline std::string NowUtc() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

inline std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string FormatWeight(double w) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

/// Parses one JSON value per non-empty line; a malformed line (e.g. a
/// truncated tail) is an integrity error.
inline std::vector<nlohmann::json> ReadJsonLines(const fs::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    auto value = nlohmann::json::parse(line, nullptr, false);
    if (value.is_discarded() || !value.is_object()) {
      throw Error(ErrorCode::kIntegrity, path.filename().string() + " line " +
                                             std::to_string(number) +
                                             " is not a JSON object");
    }
    out.push_back(std::move(value));
  }
  return out;
}

template <typename T>
T Field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw Error(ErrorCode::kIntegrity, where + ": missing '" + key + "'");
  }
  try {
    return obj[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kIntegrity, where + ": bad '" + key + "'");
  }
}

}  // namespace persistence_detail

/// Writes the index. An existing non-empty directory is refused unless
/// `force`, in which case the index files in it are replaced.
inline void SaveIndex(const Index& index, const std::filesystem::path& dir,
                      bool force = false) {
  namespace fs = std::filesystem;
  using namespace persistence_detail;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
    }
    if (!fs::is_empty(dir)) {
      if (!force) {
        throw Error(ErrorCode::kIo, "index directory " + dir.string() +
                                        " is not empty (use --force)");
      }
      for (const char* name : kIndexFiles) fs::remove(dir / name);
    }
  } else {
    fs::create_directories(dir);
  }

  std::string docs;
  for (const auto& [id, doc] : index.store.documents()) {
    docs += nlohmann::json{{"doc_id", doc.doc_id},
                           {"meta", doc.meta},
                           {"text", doc.text}}
                .dump() +
            "\n";
  }
  std::string passages;
  for (const auto& [id, p] : index.store.passages()) {
    passages += nlohmann::json{{"passage_id", p.passage_id},
                               {"doc_id", p.doc_id},
                               {"index_in_doc", p.index_in_doc},
                               {"char_start", p.char_start},
                               {"char_end", p.char_end},
                               {"text", p.text}}
                    .dump() +
                "\n";
  }
  nlohmann::json vocab = nlohmann::json::object();
  const auto& terms = index.model.terms();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    vocab[terms[i].term] = {{"id", i}, {"df", terms[i].df}, {"idf", terms[i].idf}};
  }
  std::string vectors;
  const auto& ids = index.model.passage_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::string line = "{\"passage_id\":" + nlohmann::json(ids[i]).dump() +
                       ",\"weights\":[";
    bool first = true;
    for (const auto& [term, w] : index.model.vectors()[i]) {
      if (!first) line += ",";
      first = false;
      line += "[" + std::to_string(term) + "," + FormatWeight(w) + "]";
    }
    vectors += line + "]}\n";
  }

  nlohmann::json manifest;
  manifest["format_version"] = kIndexFormatVersion;
  manifest["created_at"] =
      index.created_at.empty() ? NowUtc() : index.created_at;
  manifest["counts"] = {{"documents", index.store.document_count()},
                        {"passages", index.store.passage_count()},
                        {"vocabulary", terms.size()},
                        {"vectors", ids.size()}};
  manifest["split"] = {{"max_tokens", index.split.max_tokens},
                       {"stride", index.split.stride}};

  WriteFile(dir / "documents.jsonl", docs);
  WriteFile(dir / "passages.jsonl", passages);
  WriteFile(dir / "vocab.json", vocab.dump() + "\n");
  WriteFile(dir / "vectors.jsonl", vectors);
  // Manifest last: a directory without one is not a loadable index.
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline std::shared_ptr<const Index> LoadIndex(
    const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  using namespace persistence_detail;
  if (!fs::exists(dir / "manifest.json")) {
    throw Error(ErrorCode::kNotFound,
                "no index found in " + dir.string() + " (manifest.json missing)");
  }
  nlohmann::json manifest = nlohmann::json::parse(
      ReadFile(dir / "manifest.json"), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw Error(ErrorCode::kIntegrity, "manifest.json is not a JSON object");
  }
  const int version = Field<int>(manifest, "format_version", "manifest.json");
  if (version != kIndexFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "index format_version expected " +
                    std::to_string(kIndexFormatVersion) + ", found " +
                    std::to_string(version));
  }
  const auto counts =
      Field<nlohmann::json>(manifest, "counts", "manifest.json");
  const auto n_docs = Field<std::size_t>(counts, "documents", "manifest.counts");
  const auto n_passages =
      Field<std::size_t>(counts, "passages", "manifest.counts");
  const auto n_vocab = Field<std::size_t>(counts, "vocabulary", "manifest.counts");

  auto index = std::make_shared<Index>();
  index->created_at = Field<std::string>(manifest, "created_at", "manifest.json");
  const auto split = Field<nlohmann::json>(manifest, "split", "manifest.json");
  index->split.max_tokens = Field<std::size_t>(split, "max_tokens", "manifest.split");
  index->split.stride = Field<std::size_t>(split, "stride", "manifest.split");

  std::map<std::string, std::vector<Passage>> by_doc;
  const auto passage_lines = ReadJsonLines(dir / "passages.jsonl");
  if (passage_lines.size() != n_passages) {
    throw Error(ErrorCode::kIntegrity,
                "passages.jsonl holds " + std::to_string(passage_lines.size()) +
                    " passages, manifest says " + std::to_string(n_passages));
  }
  for (std::size_t i = 0; i < passage_lines.size(); ++i) {
    const auto where = "passages.jsonl line " + std::to_string(i + 1);
    const auto& j = passage_lines[i];
    Passage p;
    p.passage_id = Field<std::string>(j, "passage_id", where);
    p.doc_id = Field<std::string>(j, "doc_id", where);
    p.index_in_doc = Field<std::size_t>(j, "index_in_doc", where);
    p.char_start = Field<std::size_t>(j, "char_start", where);
    p.char_end = Field<std::size_t>(j, "char_end", where);
    p.text = Field<std::string>(j, "text", where);
    by_doc[p.doc_id].push_back(std::move(p));
  }

  const auto doc_lines = ReadJsonLines(dir / "documents.jsonl");
  if (doc_lines.size() != n_docs) {
    throw Error(ErrorCode::kIntegrity,
                "documents.jsonl holds " + std::to_string(doc_lines.size()) +
                    " documents, manifest says " + std::to_string(n_docs));
  }
  for (std::size_t i = 0; i < doc_lines.size(); ++i) {
    const auto where = "documents.jsonl line " + std::to_string(i + 1);
    Document doc;
    doc.doc_id = Field<std::string>(doc_lines[i], "doc_id", where);
    doc.text = Field<std::string>(doc_lines[i], "text", where);
    doc.meta = Field<Meta>(doc_lines[i], "meta", where);
    auto passages = std::move(by_doc[doc.doc_id]);
    by_doc.erase(doc.doc_id);
    std::sort(passages.begin(), passages.end(),
              [](const Passage& a, const Passage& b) {
                return a.index_in_doc < b.index_in_doc;
              });
    index->store.Insert(std::move(doc), std::move(passages));
  }
  if (!by_doc.empty()) {
    throw Error(ErrorCode::kIntegrity, "passages reference unknown document '" +
                                           by_doc.begin()->first + "'");
  }

  const auto vocab = nlohmann::json::parse(ReadFile(dir / "vocab.json"),
                                           nullptr, false);
  if (vocab.is_discarded() || !vocab.is_object() || vocab.size() != n_vocab) {
    throw Error(ErrorCode::kIntegrity,
                "vocab.json is unreadable or disagrees with the manifest");
  }
  std::vector<TfIdfModel::TermStats> terms(n_vocab);
  std::vector<bool> filled(n_vocab, false);
  for (const auto& [term, stats] : vocab.items()) {
    const auto where = "vocab.json term '" + term + "'";
    const auto id = Field<std::size_t>(stats, "id", where);
    if (id >= n_vocab || filled[id]) {
      throw Error(ErrorCode::kIntegrity, where + ": bad id");
    }
    filled[id] = true;
    terms[id] = {term, Field<std::size_t>(stats, "df", where),
                 Field<double>(stats, "idf", where)};
  }

  const auto vector_lines = ReadJsonLines(dir / "vectors.jsonl");
  if (vector_lines.size() != n_passages) {
    throw Error(ErrorCode::kIntegrity,
                "vectors.jsonl holds " + std::to_string(vector_lines.size()) +
                    " vectors, manifest says " + std::to_string(n_passages));
  }
  std::vector<std::string> ids;
  std::vector<SparseVector> vectors;
  for (std::size_t i = 0; i < vector_lines.size(); ++i) {
    const auto where = "vectors.jsonl line " + std::to_string(i + 1);
    ids.push_back(Field<std::string>(vector_lines[i], "passage_id", where));
    if (!index->store.passages().count(ids.back())) {
      throw Error(ErrorCode::kIntegrity,
                  where + ": unknown passage '" + ids.back() + "'");
    }
    vectors.push_back(Field<SparseVector>(vector_lines[i], "weights", where));
  }
  index->model =
      TfIdfModel::FromParts(std::move(terms), n_passages, std::move(ids),
                            std::move(vectors));
  return index;
}

}  // namespace sciqa

#endif  // SCIQA_PERSISTENCE_HPP_
