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

// Retrieval metrics (precision@k, recall@k, MRR@k) and reader metrics
// (exact match, answer accuracy, semantic answer similarity).

#ifndef SCIQA_EVAL_HPP_
#define SCIQA_EVAL_HPP_

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sciqa/error.hpp"
#include "sciqa/pipeline.hpp"
#include "sciqa/reader.hpp"
#include "sciqa/squad.hpp"
#include "sciqa/text.hpp"

namespace sciqa::eval {

using RelevantSet = std::set<std::string>;

namespace detail {

inline std::size_t HitsInTopK(std::span<const std::string> ranked,
                              const RelevantSet& relevant, std::size_t k) {
  std::set<std::string> seen;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (relevant.count(ranked[i]) && seen.insert(ranked[i]).second) ++hits;
  }
  return hits;
}

inline void RequireK(std::size_t k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
}

}  // namespace detail

/// |relevant ∩ top-k| / k; missing slots count as irrelevant.
inline double PrecisionAtK(std::span<const std::string> ranked,
                           const RelevantSet& relevant, std::size_t k) {
  detail::RequireK(k);
  return static_cast<double>(detail::HitsInTopK(ranked, relevant, k)) /
         static_cast<double>(k);
}

/// |relevant ∩ top-k| / |relevant|; nullopt when nothing is relevant.
inline std::optional<double> RecallAtK(std::span<const std::string> ranked,
                                       const RelevantSet& relevant,
                                       std::size_t k) {
  detail::RequireK(k);
  if (relevant.empty()) return std::nullopt;
  return static_cast<double>(detail::HitsInTopK(ranked, relevant, k)) /
         static_cast<double>(relevant.size());
}

/// 1 / position of the first relevant item within the top k, else 0.
inline double ReciprocalRankAtK(std::span<const std::string> ranked,
                                const RelevantSet& relevant, std::size_t k) {
  detail::RequireK(k);
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (relevant.count(ranked[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

/// Mean reciprocal rank over the queries that have relevance judgments.
/// nullopt when no query can be scored.
inline std::optional<double> MrrAtK(
    const std::map<std::string, std::vector<std::string>>& rankings,
    const squad::Qrels& qrels, std::size_t k) {
  detail::RequireK(k);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [query, ranked] : rankings) {
    const auto it = qrels.find(query);
    if (it == qrels.end() || it->second.empty()) continue;
    sum += ReciprocalRankAtK(ranked, it->second, k);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

/// 1 iff the normalized prediction equals some normalized gold. With no
/// golds (unanswerable), an empty prediction matches.
inline int ExactMatch(std::string_view pred,
                      std::span<const std::string> golds) {
  const auto p = NormalizeAnswer(pred);
  if (golds.empty()) return p.empty() ? 1 : 0;
  for (const auto& g : golds) {
    if (NormalizeAnswer(g) == p) return 1;
  }
  return 0;
}

/// F1 over normalized token multisets.
inline double TokenF1(std::string_view pred, std::string_view gold) {
  const auto p = SplitWhitespace(NormalizeAnswer(pred));
  const auto g = SplitWhitespace(NormalizeAnswer(gold));
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, std::size_t> counts;
  for (const auto& t : g) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision =
      static_cast<double>(common) / static_cast<double>(p.size());
  const double recall =
      static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

// ---------------------------------------------------------------------------
// Semantic answer similarity

struct ScorePair {
  std::string pred;
  std::string gold;
};

class SemanticScorer {
 public:
  virtual ~SemanticScorer() = default;
  virtual double Score(std::string_view pred, std::string_view gold) const = 0;

  virtual std::vector<double> ScoreBatch(std::span<const ScorePair> pairs) const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(Score(p.pred, p.gold));
    return out;
  }
};

class TokenF1Scorer : public SemanticScorer {
 public:
  double Score(std::string_view pred, std::string_view gold) const override {
    return TokenF1(pred, gold);
  }
};

/// Cross-encoder (or any) similarity model behind
///   POST {endpoint}/score  {"pairs": [{"pred", "gold"}]} -> {"scores": [real]}
class RemoteScorer : public SemanticScorer {
 public:
  explicit RemoteScorer(
      std::string endpoint,
      std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : endpoint_(std::move(endpoint)), timeout_(timeout) {
    Endpoint::Parse(endpoint_);
  }

  double Score(std::string_view pred, std::string_view gold) const override {
    const ScorePair pair{std::string(pred), std::string(gold)};
    return ScoreBatch(std::span<const ScorePair>(&pair, 1)).front();
  }

  std::vector<double> ScoreBatch(
      std::span<const ScorePair> pairs) const override {
    if (pairs.empty()) return {};
    nlohmann::json body;
    body["pairs"] = nlohmann::json::array();
    for (const auto& p : pairs) {
      body["pairs"].push_back({{"pred", p.pred}, {"gold", p.gold}});
    }
    const auto reply = PostJson(endpoint_, "/score", body, timeout_);
    if (!reply.is_object() || !reply.contains("scores") ||
        !reply["scores"].is_array() || reply["scores"].size() != pairs.size()) {
      throw Error(ErrorCode::kProtocolViolation,
                  "scorer reply must carry one score per pair");
    }
    std::vector<double> scores;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& s = reply["scores"][i];
      if (!s.is_number() || !(s.get<double>() >= 0.0 && s.get<double>() <= 1.0)) {
        throw Error(ErrorCode::kProtocolViolation,
                    "score " + std::to_string(i) + " outside [0, 1]");
      }
      scores.push_back(s.get<double>());
    }
    return scores;
  }

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

/// Mean over examples of the best score against that example's golds. An
/// example without golds is scored against the empty string.
inline double Sas(std::span<const std::string> preds,
                  std::span<const std::vector<std::string>> golds,
                  const SemanticScorer& scorer) {
  if (preds.size() != golds.size()) {
    throw Error(ErrorCode::kAlignment,
                std::to_string(preds.size()) + " predictions for " +
                    std::to_string(golds.size()) + " gold lists");
  }
  if (preds.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no examples to score");
  }
  std::vector<ScorePair> pairs;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (golds[i].empty()) {
      pairs.push_back({preds[i], ""});
      owner.push_back(i);
    }
    for (const auto& g : golds[i]) {
      pairs.push_back({preds[i], g});
      owner.push_back(i);
    }
  }
  const auto scores = scorer.ScoreBatch(pairs);
  std::vector<double> best(preds.size(), 0.0);
  for (std::size_t j = 0; j < scores.size(); ++j) {
    best[owner[j]] = std::max(best[owner[j]], scores[j]);
  }
  double sum = 0.0;
  for (double b : best) sum += b;
  return sum / static_cast<double>(preds.size());
}

inline std::vector<std::string> GoldTexts(const squad::Example& ex) {
  std::vector<std::string> golds;
  for (const auto& a : ex.answers) golds.push_back(a.text);
  return golds;
}

/// Correct when an answerable example gets token F1 >= 0.5 against some
/// gold, or an unanswerable one gets a no_answer prediction.
inline bool AnswerCorrect(const Answer& pred, const squad::Example& ex) {
  if (ex.is_impossible) return pred.type == AnswerType::kNoAnswer;
  if (pred.type != AnswerType::kExtractive) return false;
  return std::any_of(ex.answers.begin(), ex.answers.end(),
                     [&](const squad::GoldAnswer& g) {
                       return TokenF1(pred.answer, g.text) >= 0.5;
                     });
}

inline double AnswerAccuracy(std::span<const Answer> preds,
                             std::span<const squad::Example> examples) {
  if (preds.size() != examples.size()) {
    throw Error(ErrorCode::kAlignment,
                std::to_string(preds.size()) + " predictions for " +
                    std::to_string(examples.size()) + " examples");
  }
  if (preds.empty()) throw Error(ErrorCode::kEmptyInput, "no examples");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (AnswerCorrect(preds[i], examples[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

// ---------------------------------------------------------------------------
// Evaluation run

struct RetrieverMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double mrr = 0.0;
};

struct ReaderMetrics {
  double em = 0.0;
  double accuracy = 0.0;
  double sas = 0.0;
};

struct EvalReport {
  std::string dataset;
  std::map<std::size_t, RetrieverMetrics> retriever;
  std::map<std::size_t, ReaderMetrics> reader;
  std::size_t questions = 0;
};

/// For each k: the pipeline runs with retriever_top_k = k and reader_top_k =
/// 1. The retrieved document list feeds the retriever metrics; the single
/// best answer feeds EM, accuracy and SAS.
inline EvalReport Evaluate(const Pipeline& pipeline,
                           const squad::Dataset& dataset,
                           const DocumentStore& store,
                           const std::vector<std::size_t>& ks,
                           const SemanticScorer& scorer) {
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "no k values");
  if (dataset.examples.empty()) {
    throw Error(ErrorCode::kEmptyInput, "dataset has no examples");
  }
  const auto qrels = squad::ToQrels(dataset, store);

  EvalReport report;
  const auto name = dataset.provenance.find("source");
  report.dataset = name == dataset.provenance.end() ? "dataset" : name->second;
  report.questions = dataset.examples.size();

  for (const auto k : std::set<std::size_t>(ks.begin(), ks.end())) {
    detail::RequireK(k);
    std::map<std::string, std::vector<std::string>> rankings;
    std::vector<Answer> best;
    std::vector<std::string> preds;
    std::vector<std::vector<std::string>> golds;
    double precision_sum = 0.0, recall_sum = 0.0;
    std::size_t recall_n = 0;
    double em_sum = 0.0;

    for (const auto& ex : dataset.examples) {
      PipelineState state;
      try {
        state = pipeline.Execute({ex.question, k, 1});
      } catch (const Error& e) {
        throw e.WithContext("question " + ex.id);
      }
      std::vector<std::string> ranked;
      for (const auto& d : state.documents) ranked.push_back(d.doc_id);
      const auto& relevant = qrels.at(ex.id);
      precision_sum += PrecisionAtK(ranked, relevant, k);
      if (const auto r = RecallAtK(ranked, relevant, k)) {
        recall_sum += *r;
        ++recall_n;
      }
      rankings[ex.id] = std::move(ranked);

      Answer top = state.answers.empty() ? NoAnswer() : state.answers.front();
      golds.push_back(GoldTexts(ex));
      preds.push_back(top.answer);
      em_sum += ExactMatch(top.answer, golds.back());
      best.push_back(std::move(top));
    }

    const double n = static_cast<double>(dataset.examples.size());
    RetrieverMetrics rm;
    rm.precision = precision_sum / n;
    rm.recall = recall_n ? recall_sum / static_cast<double>(recall_n) : 0.0;
    rm.mrr = MrrAtK(rankings, qrels, k).value_or(0.0);
    report.retriever[k] = rm;

    ReaderMetrics dm;
    dm.em = em_sum / n;
    dm.accuracy = AnswerAccuracy(best, dataset.examples);
    dm.sas = Sas(preds, golds, scorer);
    report.reader[k] = dm;
  }
  return report;
}

inline nlohmann::json ToJson(const EvalReport& report) {
  nlohmann::json j;
  j["dataset"] = report.dataset;
  j["questions"] = report.questions;
  j["retriever"] = nlohmann::json::object();
  for (const auto& [k, m] : report.retriever) {
    j["retriever"][std::to_string(k)] = {
        {"precision", m.precision}, {"recall", m.recall}, {"mrr", m.mrr}};
  }
  j["reader"] = nlohmann::json::object();
  for (const auto& [k, m] : report.reader) {
    j["reader"][std::to_string(k)] = {
        {"em", m.em}, {"accuracy", m.accuracy}, {"sas", m.sas}};
  }
  return j;
}

/// Plain-text table with one column per k.
inline std::string RenderTable(const EvalReport& report) {
  std::ostringstream out;
  auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%10.3f", v);
    return std::string(buf);
  };
  auto header = [&](const char* title) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%-12s", title);
    out << buf;
    for (const auto& [k, m] : report.retriever) {
      std::snprintf(buf, sizeof(buf), "%10s", ("@" + std::to_string(k)).c_str());
      out << buf;
    }
    out << "\n";
  };
  auto line = [&](const char* label, auto&& metrics, auto field) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "  %-10s", label);
    out << buf;
    for (const auto& [k, m] : metrics) out << cell(m.*field);
    out << "\n";
  };
  out << "Dataset: " << report.dataset << " (" << report.questions
      << " questions)\n";
  header("Retriever");
  line("precision", report.retriever, &RetrieverMetrics::precision);
  line("recall", report.retriever, &RetrieverMetrics::recall);
  line("mrr", report.retriever, &RetrieverMetrics::mrr);
  header("Reader");
  line("em", report.reader, &ReaderMetrics::em);
  line("accuracy", report.reader, &ReaderMetrics::accuracy);
  line("sas", report.reader, &ReaderMetrics::sas);
  return out.str();
}

}  // namespace sciqa::eval

#endif  // SCIQA_EVAL_HPP_
