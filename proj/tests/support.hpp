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

// Shared fixtures and brute-force oracles for the unit and acceptance tests.
// The oracles deliberately avoid the library's tokenizer and vector code:
// they work on plain ASCII text and recompute everything from counts.

#ifndef SCIQA_TESTS_SUPPORT_HPP_
#define SCIQA_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sciqa/sciqa.hpp"

namespace sciqa::testing {

namespace fs = std::filesystem;

inline fs::path DataDir() { return fs::path(SCIQA_DATA_DIR); }

inline std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("sciqa_test_" + std::to_string(rd()) + "_" +
             std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// Store with one single-passage document per (id, text) pair.
inline DocumentStore StoreFromTexts(
    const std::vector<std::pair<std::string, std::string>>& docs,
    SplitConfig split = {}) {
  DocumentStore store;
  for (const auto& [id, text] : docs) {
    Document doc{id, text, {{"name", "Title " + id}}};
    auto passages = SplitPassages(doc, split);
    store.Insert(std::move(doc), std::move(passages));
  }
  return store;
}

/// Passages cut straight from texts, ids p0, p1, ...
inline std::vector<Passage> PassagesFromTexts(
    const std::vector<std::string>& texts) {
  std::vector<Passage> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto id = "p" + std::to_string(i);
    out.push_back({id, "d" + std::to_string(i), 0, 0, utf8::Length(texts[i]),
                   texts[i]});
  }
  return out;
}

inline DocumentStore LoadToyStore() {
  const auto ingested =
      IngestCsv(ReadText(DataDir() / "toy_corpus.csv"), ColumnMapping{});
  return AddDocuments(DocumentStore{}, ingested.articles, SplitConfig{});
}

/// An httplib server on an ephemeral loopback port, run on its own thread.
class ScopedServer {
 public:
  explicit ScopedServer(const std::function<void(httplib::Server&)>& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ScopedServer() {
    server_.stop();
    thread_.join();
  }
  ScopedServer(const ScopedServer&) = delete;
  ScopedServer& operator=(const ScopedServer&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

// ---------------------------------------------------------------------------
// Random text

inline const std::vector<std::string>& Lexicon() {
  static const std::vector<std::string> words = {
      "fever",  "cough",   "virus",   "covid", "vaccine", "trial",
      "mask",   "aerosol", "patient", "lung",  "sars",    "rna",
      "dose",   "camel",   "bat",     "renal", "ward",    "onset",
      "saline", "titre",   "serum",   "the",   "of",      "and"};
  return words;
}

/// Words from the lexicon joined by spaces, with an occasional comma or
/// full stop glued to a word.
inline std::string RandomText(std::mt19937_64& rng, std::size_t n_tokens,
                              std::size_t lexicon_size) {
  std::uniform_int_distribution<std::size_t> pick(0, lexicon_size - 1);
  std::uniform_int_distribution<int> punct(0, 9);
  std::string out;
  for (std::size_t i = 0; i < n_tokens; ++i) {
    if (i) out += ' ';
    out += Lexicon()[pick(rng)];
    const int p = punct(rng);
    if (p == 0) out += ',';
    if (p == 1) out += '.';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracles

struct OracleToken {
  std::string term;
  std::size_t start = 0;  // characters; test text is ASCII
  std::size_t end = 0;
};

/// ASCII alphanumeric runs, lowercased.
inline std::vector<OracleToken> OracleTokens(const std::string& text) {
  std::vector<OracleToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalnum(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string term;
    while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) {
      term += static_cast<char>(std::tolower(static_cast<unsigned char>(text[j])));
      ++j;
    }
    out.push_back({term, i, j});
    i = j;
  }
  return out;
}

/// Dense tf-idf cosine computed directly from counts.
class OracleTfIdf {
 public:
  explicit OracleTfIdf(const std::vector<std::string>& passages) {
    n_ = passages.size();
    for (const auto& text : passages) {
      std::map<std::string, double> tf;
      for (const auto& t : OracleTokens(text)) tf[t.term] += 1.0;
      for (const auto& [term, count] : tf) df_[term] += 1;
      tf_.push_back(std::move(tf));
    }
  }

  double Idf(const std::string& term) const {
    const auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(n_)) / (1.0 + df)) + 1.0;
  }

  std::size_t Df(const std::string& term) const {
    const auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
  }

  /// cos(q, p) = (q . p) / (|q| |p|); out-of-vocabulary query terms dropped.
  double Score(const std::string& query, std::size_t p) const {
    std::map<std::string, double> q;
    for (const auto& t : OracleTokens(query)) {
      if (df_.count(t.term)) q[t.term] += 1.0;
    }
    double dot = 0.0, qq = 0.0, pp = 0.0;
    for (const auto& [term, tf] : q) {
      const double w = tf * Idf(term);
      qq += w * w;
      const auto it = tf_[p].find(term);
      if (it != tf_[p].end()) dot += w * it->second * Idf(term);
    }
    for (const auto& [term, tf] : tf_[p]) {
      const double w = tf * Idf(term);
      pp += w * w;
    }
    if (qq == 0.0 || pp == 0.0) return 0.0;
    return dot / (std::sqrt(qq) * std::sqrt(pp));
  }

  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::map<std::string, std::size_t> df_;
  std::vector<std::map<std::string, double>> tf_;
};

struct OracleSpan {
  std::size_t passage = 0;
  std::size_t start = 0;  // characters in the passage
  std::size_t end = 0;
  double raw = 0.0;
};

/// Scores every token window up to `cap` tokens in every passage, then picks
/// non-overlapping spans greedily. Ties: earlier start, shorter, passage id.
inline std::vector<OracleSpan> OracleReader(
    const OracleTfIdf& idf, const std::string& query,
    const std::vector<std::string>& passages,
    const std::vector<std::string>& passage_ids, std::size_t top_k,
    std::size_t cap = 30) {
  std::set<std::string> qterms;
  for (const auto& t : OracleTokens(query)) qterms.insert(t.term);

  struct Cand {
    double raw;
    std::size_t p, i, j, start, end;
  };
  std::vector<Cand> all;
  std::vector<std::vector<OracleToken>> toks;
  for (std::size_t p = 0; p < passages.size(); ++p) {
    toks.push_back(OracleTokens(passages[p]));
    const auto& t = toks.back();
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t j = i; j < t.size() && j - i + 1 <= cap; ++j) {
        std::set<std::string> seen;
        for (std::size_t x = i; x <= j; ++x) {
          if (qterms.count(t[x].term)) seen.insert(t[x].term);
        }
        double sum = 0.0;
        for (const auto& term : seen) sum += idf.Idf(term);
        const double raw = sum / std::sqrt(static_cast<double>(j - i + 1));
        if (raw > 0.0) all.push_back({raw, p, i, j, t[i].start, t[j].end});
      }
    }
  }
  std::sort(all.begin(), all.end(), [&](const Cand& a, const Cand& b) {
    if (a.raw != b.raw) return a.raw > b.raw;
    if (a.start != b.start) return a.start < b.start;
    if (a.j - a.i != b.j - b.i) return a.j - a.i < b.j - b.i;
    if (passage_ids[a.p] != passage_ids[b.p]) {
      return passage_ids[a.p] < passage_ids[b.p];
    }
    return a.p < b.p;
  });
  std::vector<OracleSpan> out;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> used(
      passages.size());
  for (const auto& c : all) {
    if (out.size() >= top_k) break;
    bool clash = false;
    for (const auto& [a, b] : used[c.p]) clash |= !(c.j < a || b < c.i);
    if (clash) continue;
    used[c.p].emplace_back(c.i, c.j);
    out.push_back({c.p, c.start, c.end, c.raw});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formaldehyde table fixture

inline const std::string& FormaldehydeContext() {
  static const std::string context =
      "om residents with recently installed urea-formaldehyde foam insulation "
      "who complained of formaldehyde odor, irritation, or increased "
      "pre-existing illness patterns. In 40/55 homes investigated, the most "
      "common symptoms were tearing of the eyes, sore throat, cough, and "
      "runny nose. Air samples were collected in 22 homes. In 14 homes where "
      "formaldehyde was detected, levels ranged from 0.01 to 0.78 ppm. In New "
      "Hampshire,";
  return context;
}

inline const std::string& FormaldehydeAnswer() {
  static const std::string answer =
      "tearing of the eyes, sore throat, cough, and runny nose";
  return answer;
}

/// A document whose 512-token windows put the context at the start of a
/// passage that begins at character 96904 of the document.
inline Document FormaldehydeDocument() {
  // 8192 = 16 * 512 filler words, 1400 of ten letters and 6792 of eleven:
  // 1400 * 11 + 6792 * 12 = 96904 characters including separators.
  std::string text;
  text.reserve(98000);
  for (int i = 0; i < 8192; ++i) {
    text += i < 1400 ? "fillerterm " : "fillerterms ";
  }
  text += FormaldehydeContext();
  Document doc{"fda-panel", std::move(text),
               {{"name", "Report of the Federal Panel on Formaldehyde"}}};
  return doc;
}

}  // namespace sciqa::testing

#endif  // SCIQA_TESTS_SUPPORT_HPP_
