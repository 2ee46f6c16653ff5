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

// Extractive readers: a deterministic lexical span scorer and a client for
// an external reader speaking JSON over HTTP (POST /read).

#ifndef SCIQA_READER_HPP_
#define SCIQA_READER_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "sciqa/corpus.hpp"
#include "sciqa/error.hpp"
#include "sciqa/retriever.hpp"
#include "sciqa/text.hpp"

namespace sciqa {

struct ReaderConfig {
  std::size_t max_query_tokens = 100;
  std::size_t max_answer_tokens = 250;
  std::size_t max_seq_tokens = 512;
  std::size_t baseline_span_cap = 30;
  double no_answer_threshold = 0.0;

  void Validate() const {
    if (max_query_tokens < 1 || max_answer_tokens < 1 || max_seq_tokens < 1 ||
        baseline_span_cap < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "reader lengths must all be positive");
    }
    if (baseline_span_cap > max_answer_tokens) {
      throw Error(ErrorCode::kInvalidArgument,
                  "baseline_span_cap exceeds max_answer_tokens");
    }
    if (!(no_answer_threshold >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no_answer_threshold must be >= 0");
    }
  }
};

enum class AnswerType { kExtractive, kNoAnswer };

inline std::string_view AnswerTypeName(AnswerType type) {
  return type == AnswerType::kExtractive ? "extractive" : "no_answer";
}

struct Offsets {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t width() const { return end - start; }
  friend bool operator==(const Offsets&, const Offsets&) = default;
};

struct Answer {
  std::string answer;
  AnswerType type = AnswerType::kNoAnswer;
  double score = 0.0;
  std::string context;
  Meta meta;
  Offsets offsets_in_document;
  Offsets offsets_in_context;
  std::string doc_id;
  std::string passage_id;

  friend bool operator==(const Answer&, const Answer&) = default;
};

/// A passage handed to a reader together with its document metadata.
struct ReaderPassage {
  Passage passage;
  Meta meta;
};

inline Answer NoAnswer(double score = 0.0) {
  Answer a;
  a.type = AnswerType::kNoAnswer;
  a.score = score;
  return a;
}

/// Maps a raw span score onto [0, 1): s / (1 + s).
inline double Confidence(double raw_score) {
  if (!(raw_score >= 0.0)) {
    throw Error(ErrorCode::kDomain, "confidence needs a non-negative score");
  }
  if (std::isinf(raw_score)) return 1.0;
  return raw_score / (1.0 + raw_score);
}

/// Checks the extractive substring law: both offset pairs slice to the
/// answer and have the answer's character width. Throws kIntegrity.
inline void CheckSubstringLaw(const Answer& a, std::string_view document_text) {
  if (a.type != AnswerType::kExtractive) return;
  const auto width = utf8::Length(a.answer);
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kIntegrity, "answer '" + a.answer + "' from " +
                                           a.passage_id + ": " + what);
  };
  if (a.offsets_in_context.start > a.offsets_in_context.end ||
      a.offsets_in_document.start > a.offsets_in_document.end) {
    fail("offsets out of order");
  }
  if (a.offsets_in_context.width() != width ||
      a.offsets_in_document.width() != width) {
    fail("offset width differs from answer length");
  }
  if (utf8::Slice(a.context, a.offsets_in_context.start,
                  a.offsets_in_context.end) != a.answer) {
    fail("context slice differs from answer");
  }
  if (utf8::Slice(document_text, a.offsets_in_document.start,
                  a.offsets_in_document.end) != a.answer) {
    fail("document slice differs from answer");
  }
}

class Reader {
 public:
  virtual ~Reader() = default;
  virtual std::vector<Answer> Read(std::string_view query,
                                   std::span<const ReaderPassage> passages,
                                   std::size_t top_k) const = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Lexical baseline
//
// Span score s = (sum of idf over distinct query terms inside the span) /
// sqrt(span length in tokens). Spans are picked greedily across passages by
// descending s, skipping spans overlapping an already picked span of the
// same passage. Ties: earlier start in the passage, then shorter, then
// passage id. Idf sums always run in ascending term order so equal term sets
// give bit-identical sums.

namespace detail {

struct SpanCandidate {
  double score = 0.0;
  std::size_t passage = 0;  // index into the input list
  std::size_t first = 0;    // token indices, inclusive
  std::size_t last = 0;
  std::size_t char_start = 0;
};

inline bool BetterSpan(const SpanCandidate& a, const SpanCandidate& b,
                       std::span<const ReaderPassage> passages) {
  if (a.score != b.score) return a.score > b.score;
  if (a.char_start != b.char_start) return a.char_start < b.char_start;
  const auto len_a = a.last - a.first, len_b = b.last - b.first;
  if (len_a != len_b) return len_a < len_b;
  const auto& pa = passages[a.passage].passage.passage_id;
  const auto& pb = passages[b.passage].passage.passage_id;
  if (pa != pb) return pa < pb;
  return a.passage < b.passage;
}

}  // namespace detail

struct QueryTerms {
  std::vector<std::string> terms;  // sorted, unique
  std::vector<double> idf;         // aligned with terms
};

inline QueryTerms PrepareQuery(const TfIdfModel& model, std::string_view query,
                               const ReaderConfig& cfg) {
  const auto tokens = Tokenize(query);
  const auto kept = Truncate<Token>(tokens, cfg.max_query_tokens);
  std::set<std::string> unique;
  for (const auto& t : kept) unique.insert(t.term);
  QueryTerms q;
  for (const auto& term : unique) {
    q.terms.push_back(term);
    q.idf.push_back(model.Idf(term));
  }
  return q;
}

inline std::vector<Answer> ExtractAnswersBaseline(
    const TfIdfModel& model, std::string_view query,
    std::span<const ReaderPassage> passages, std::size_t top_k,
    const ReaderConfig& cfg = {}) {
  cfg.Validate();
  if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  if (passages.empty()) {
    throw Error(ErrorCode::kEmptyInput, "reader received no passages");
  }
  const QueryTerms q = PrepareQuery(model, query, cfg);
  const std::size_t cap = std::min(cfg.baseline_span_cap, cfg.max_answer_tokens);

  std::vector<std::vector<Token>> passage_tokens;
  std::vector<detail::SpanCandidate> candidates;
  for (std::size_t p = 0; p < passages.size(); ++p) {
    auto tokens = Tokenize(passages[p].passage.text);
    if (tokens.size() > cfg.max_seq_tokens) tokens.resize(cfg.max_seq_tokens);

    std::vector<int> slot(tokens.size(), -1);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto it = std::lower_bound(q.terms.begin(), q.terms.end(),
                                       tokens[i].term);
      if (it != q.terms.end() && *it == tokens[i].term) {
        slot[i] = static_cast<int>(it - q.terms.begin());
      }
    }

    // A span that starts or ends on a non-query token has the same idf sum
    // as its trimmed core but is longer, so it always loses to that core and
    // overlaps it; only spans bounded by query tokens need scoring.
    std::vector<char> present(q.terms.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (slot[i] < 0) continue;
      std::fill(present.begin(), present.end(), 0);
      double sum = 0.0;
      const std::size_t stop = std::min(tokens.size(), i + cap);
      for (std::size_t j = i; j < stop; ++j) {
        if (slot[j] < 0) continue;
        if (!present[static_cast<std::size_t>(slot[j])]) {
          present[static_cast<std::size_t>(slot[j])] = 1;
          sum = 0.0;
          for (std::size_t t = 0; t < present.size(); ++t) {
            if (present[t]) sum += q.idf[t];
          }
        }
        const double s = sum / std::sqrt(static_cast<double>(j - i + 1));
        if (s > cfg.no_answer_threshold) {
          candidates.push_back({s, p, i, j, tokens[i].char_start});
        }
      }
    }
    passage_tokens.push_back(std::move(tokens));
  }

  if (candidates.empty()) return {NoAnswer(0.0)};

  std::sort(candidates.begin(), candidates.end(),
            [&](const auto& a, const auto& b) {
              return detail::BetterSpan(a, b, passages);
            });

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> taken(
      passages.size());
  std::vector<Answer> answers;
  for (const auto& c : candidates) {
    if (answers.size() >= top_k) break;
    auto& used = taken[c.passage];
    const bool overlaps =
        std::any_of(used.begin(), used.end(), [&](const auto& r) {
          return c.first <= r.second && r.first <= c.last;
        });
    if (overlaps) continue;
    used.emplace_back(c.first, c.last);

    const auto& rp = passages[c.passage];
    const auto& first = passage_tokens[c.passage][c.first];
    const auto& last = passage_tokens[c.passage][c.last];
    Answer a;
    a.type = AnswerType::kExtractive;
    a.answer =
        rp.passage.text.substr(first.byte_start, last.byte_end - first.byte_start);
    a.score = Confidence(c.score);
    a.context = rp.passage.text;
    a.meta = rp.meta;
    a.offsets_in_context = {first.char_start, last.char_end};
    a.offsets_in_document = {rp.passage.char_start + first.char_start,
                             rp.passage.char_start + last.char_end};
    a.doc_id = rp.passage.doc_id;
    a.passage_id = rp.passage.passage_id;
    answers.push_back(std::move(a));
  }
  return answers;
}

class BaselineReader : public Reader {
 public:
  BaselineReader(std::shared_ptr<const TfIdfModel> model, ReaderConfig cfg = {})
      : model_(std::move(model)), cfg_(cfg) {
    cfg_.Validate();
  }

  std::vector<Answer> Read(std::string_view query,
                           std::span<const ReaderPassage> passages,
                           std::size_t top_k) const override {
    return ExtractAnswersBaseline(*model_, query, passages, top_k, cfg_);
  }

  std::string name() const override { return "baseline"; }
  const ReaderConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<const TfIdfModel> model_;
  ReaderConfig cfg_;
};

// ---------------------------------------------------------------------------
// Remote reader wire protocol
//
//   POST {endpoint}/read
//   request:  {"query": str, "top_k": int,
//              "passages": [{"passage_id": str, "text": str, "meta": {...}}]}
//   response: {"answers": [{"passage_id": str, "start": int, "end": int,
//                           "text": str, "score": real}]}
//
// Offsets count Unicode scalar values, half-open, relative to the passage
// text that was sent.

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash

  static Endpoint Parse(std::string_view url) {
    const auto scheme = url.find("://");
    if (scheme == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "endpoint '" + std::string(url) + "' lacks a scheme");
    }
    const auto slash = url.find('/', scheme + 3);
    Endpoint e;
    e.origin = std::string(url.substr(0, slash));
    if (slash != std::string_view::npos) e.path = std::string(url.substr(slash));
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
  }
};

/// POSTs a JSON body and returns the parsed JSON reply. Transport failures
/// and non-2xx statuses raise kRemoteUnavailable, unparsable replies raise
/// kProtocolViolation.
inline nlohmann::json PostJson(const std::string& url, std::string_view route,
                               const nlohmann::json& body,
                               std::chrono::milliseconds timeout) {
  const auto endpoint = Endpoint::Parse(url);
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const std::string path = endpoint.path + std::string(route);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kRemoteUnavailable,
                url + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::kRemoteUnavailable,
                url + path + ": HTTP " + std::to_string(res->status));
  }
  auto parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) {
    throw Error(ErrorCode::kProtocolViolation,
                url + path + ": response is not JSON");
  }
  return parsed;
}

inline nlohmann::json ReadRequestJson(std::string_view query,
                                      std::span<const ReaderPassage> passages,
                                      std::size_t top_k) {
  nlohmann::json request;
  request["query"] = query;
  request["top_k"] = top_k;
  request["passages"] = nlohmann::json::array();
  for (const auto& rp : passages) {
    request["passages"].push_back({{"passage_id", rp.passage.passage_id},
                                   {"text", rp.passage.text},
                                   {"meta", rp.meta}});
  }
  return request;
}

/// Validates a /read response against the passages that were sent and maps
/// it to answers (document offsets computed locally), sorted by score and
/// cut to top_k. An empty answer list becomes one no_answer.
inline std::vector<Answer> DecodeReadResponse(
    const nlohmann::json& response, std::span<const ReaderPassage> passages,
    std::size_t top_k) {
  auto violation = [](const std::string& what) {
    return Error(ErrorCode::kProtocolViolation, what);
  };
  if (!response.is_object() || !response.contains("answers") ||
      !response["answers"].is_array()) {
    throw violation("response lacks an 'answers' array");
  }
  std::vector<Answer> answers;
  const auto& items = response["answers"];
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    const std::string where = "answer " + std::to_string(i);
    if (!item.is_object() || !item.contains("passage_id") ||
        !item["passage_id"].is_string() || !item.contains("start") ||
        !item["start"].is_number_integer() || !item.contains("end") ||
        !item["end"].is_number_integer() || !item.contains("text") ||
        !item["text"].is_string() || !item.contains("score") ||
        !item["score"].is_number()) {
      throw violation(where + ": missing or mistyped field");
    }
    const auto pid = item["passage_id"].get<std::string>();
    const auto it = std::find_if(
        passages.begin(), passages.end(),
        [&](const ReaderPassage& rp) { return rp.passage.passage_id == pid; });
    if (it == passages.end()) {
      throw violation(where + ": unknown passage_id '" + pid + "'");
    }
    const auto start = item["start"].get<long long>();
    const auto end = item["end"].get<long long>();
    if (start < 0 || end < 0 || start > end) {
      throw violation(where + ": offsets [" + std::to_string(start) + ", " +
                      std::to_string(end) + ") are not ordered");
    }
    const auto length = utf8::Length(it->passage.text);
    if (static_cast<std::size_t>(end) > length) {
      throw violation(where + ": end " + std::to_string(end) +
                      " beyond passage length " + std::to_string(length));
    }
    const auto text = item["text"].get<std::string>();
    const auto slice = utf8::Slice(it->passage.text,
                                   static_cast<std::size_t>(start),
                                   static_cast<std::size_t>(end));
    if (slice != text) {
      throw violation(where + ": text does not match passage slice");
    }
    const double score = item["score"].get<double>();
    if (!(score >= 0.0 && score <= 1.0)) {
      throw violation(where + ": score outside [0, 1]");
    }
    Answer a;
    a.type = AnswerType::kExtractive;
    a.answer = text;
    a.score = score;
    a.context = it->passage.text;
    a.meta = it->meta;
    a.offsets_in_context = {static_cast<std::size_t>(start),
                            static_cast<std::size_t>(end)};
    a.offsets_in_document = {it->passage.char_start + a.offsets_in_context.start,
                             it->passage.char_start + a.offsets_in_context.end};
    a.doc_id = it->passage.doc_id;
    a.passage_id = pid;
    answers.push_back(std::move(a));
  }
  if (answers.empty()) return {NoAnswer(0.0)};
  std::stable_sort(answers.begin(), answers.end(),
                   [](const Answer& a, const Answer& b) {
                     return a.score > b.score;
                   });
  if (answers.size() > top_k) answers.resize(top_k);
  return answers;
}

inline std::vector<Answer> RemoteRead(
    const std::string& endpoint, std::string_view query,
    std::span<const ReaderPassage> passages, std::size_t top_k,
    const ReaderConfig& cfg = {},
    std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
  cfg.Validate();
  if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  if (passages.empty()) {
    throw Error(ErrorCode::kEmptyInput, "reader received no passages");
  }
  const auto tokens = Tokenize(query);
  std::string truncated(query);
  if (tokens.size() > cfg.max_query_tokens) {
    truncated = std::string(query.substr(
        0, tokens[cfg.max_query_tokens - 1].byte_end));
  }
  const auto response = PostJson(endpoint, "/read",
                                 ReadRequestJson(truncated, passages, top_k),
                                 timeout);
  return DecodeReadResponse(response, passages, top_k);
}

class RemoteReader : public Reader {
 public:
  RemoteReader(std::string endpoint, ReaderConfig cfg = {},
               std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : endpoint_(std::move(endpoint)), cfg_(cfg), timeout_(timeout) {
    cfg_.Validate();
    Endpoint::Parse(endpoint_);
  }

  std::vector<Answer> Read(std::string_view query,
                           std::span<const ReaderPassage> passages,
                           std::size_t top_k) const override {
    return RemoteRead(endpoint_, query, passages, top_k, cfg_, timeout_);
  }

  std::string name() const override { return "remote"; }

 private:
  std::string endpoint_;
  ReaderConfig cfg_;
  std::chrono::milliseconds timeout_;
};

}  // namespace sciqa

#endif  // SCIQA_READER_HPP_
