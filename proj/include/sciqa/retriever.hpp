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

// TF-IDF passage index with cosine ranking.
//
//   tf(t, p)  = raw count of t in passage p
//   idf(t)    = ln((1 + N) / (1 + df(t))) + 1,  N = number of passages
//   weight    = tf * idf, L2-normalized per passage
//   score     = dot product of normalized query and passage vectors
//
// Documents are ranked by the best score among their passages.

#ifndef SCIQA_RETRIEVER_HPP_
#define SCIQA_RETRIEVER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sciqa/corpus.hpp"
#include "sciqa/error.hpp"
#include "sciqa/text.hpp"

namespace sciqa {

using TermId = std::uint32_t;

/// (term id, weight) pairs sorted by term id.
using SparseVector = std::vector<std::pair<TermId, double>>;

struct ScoredPassage {
  std::string passage_id;
  double score = 0.0;

  friend bool operator==(const ScoredPassage&, const ScoredPassage&) = default;
};

struct RetrievedDocument {
  std::string doc_id;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
  std::vector<ScoredPassage> best_passages;

  friend bool operator==(const RetrievedDocument&,
                         const RetrievedDocument&) = default;
};

inline double SmoothedIdf(std::size_t n_passages, std::size_t df) {
  return std::log((1.0 + static_cast<double>(n_passages)) /
                  (1.0 + static_cast<double>(df))) +
         1.0;
}

inline void L2Normalize(SparseVector& v) {
  double sum = 0.0;
  for (const auto& [id, w] : v) sum += w * w;
  if (sum <= 0.0) {
    v.clear();
    return;
  }
  const double norm = std::sqrt(sum);
  for (auto& [id, w] : v) w /= norm;
}

inline double Dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      s += a[i].second * b[j].second;
      ++i;
      ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

class TfIdfModel {
 public:
  struct TermStats {
    std::string term;
    std::size_t df = 0;
    double idf = 0.0;
  };

  TfIdfModel() = default;

  /// Term ids follow lexicographic term order; passages are indexed in
  /// passage_id order.
  static TfIdfModel Fit(std::span<const Passage> passages) {
    std::vector<const Passage*> ordered;
    ordered.reserve(passages.size());
    for (const auto& p : passages) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(),
              [](const Passage* a, const Passage* b) {
                return a->passage_id < b->passage_id;
              });

    std::vector<std::map<std::string, std::size_t>> counts;
    counts.reserve(ordered.size());
    std::map<std::string, std::size_t> df;
    for (const Passage* p : ordered) {
      auto& tf = counts.emplace_back();
      for (auto& term : Terms(p->text)) ++tf[std::move(term)];
      for (const auto& [term, n] : tf) ++df[term];
    }
    if (df.empty()) {
      throw Error(ErrorCode::kEmptyCorpus,
                  "cannot fit TF-IDF: no passage contains a token");
    }

    TfIdfModel model;
    model.n_passages_ = ordered.size();
    for (const auto& [term, count] : df) {
      const auto id = static_cast<TermId>(model.terms_.size());
      model.vocab_.emplace(term, id);
      model.terms_.push_back(
          {term, count, SmoothedIdf(model.n_passages_, count)});
    }
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      SparseVector v;
      v.reserve(counts[i].size());
      for (const auto& [term, tf] : counts[i]) {
        const TermId id = model.vocab_.at(term);
        v.emplace_back(id, static_cast<double>(tf) * model.terms_[id].idf);
      }
      L2Normalize(v);
      model.passage_ids_.push_back(ordered[i]->passage_id);
      model.vectors_.push_back(std::move(v));
    }
    model.BuildPostings();
    return model;
  }

  static TfIdfModel Fit(const DocumentStore& store) {
    std::vector<Passage> passages;
    passages.reserve(store.passage_count());
    for (const auto& [id, p] : store.passages()) passages.push_back(p);
    return Fit(passages);
  }

  /// Rebuilds a model from persisted parts. Term ids are positions in
  /// `terms`; vectors align with `passage_ids`.
  static TfIdfModel FromParts(std::vector<TermStats> terms,
                              std::size_t n_passages,
                              std::vector<std::string> passage_ids,
                              std::vector<SparseVector> vectors) {
    if (passage_ids.size() != vectors.size() ||
        passage_ids.size() != n_passages) {
      throw Error(ErrorCode::kIntegrity,
                  "index parts disagree on passage count");
    }
    if (terms.empty()) {
      throw Error(ErrorCode::kEmptyCorpus, "index has an empty vocabulary");
    }
    TfIdfModel model;
    model.n_passages_ = n_passages;
    model.terms_ = std::move(terms);
    for (std::size_t i = 0; i < model.terms_.size(); ++i) {
      if (!model.vocab_.emplace(model.terms_[i].term, static_cast<TermId>(i))
               .second) {
        throw Error(ErrorCode::kIntegrity,
                    "duplicate vocabulary term '" + model.terms_[i].term + "'");
      }
    }
    for (const auto& v : vectors) {
      for (const auto& [id, w] : v) {
        if (id >= model.terms_.size()) {
          throw Error(ErrorCode::kIntegrity,
                      "vector references unknown term id " +
                          std::to_string(id));
        }
      }
    }
    if (!std::is_sorted(passage_ids.begin(), passage_ids.end()) ||
        std::adjacent_find(passage_ids.begin(), passage_ids.end()) !=
            passage_ids.end()) {
      throw Error(ErrorCode::kIntegrity,
                  "passage ids must be unique and sorted");
    }
    model.passage_ids_ = std::move(passage_ids);
    model.vectors_ = std::move(vectors);
    model.BuildPostings();
    return model;
  }

  bool fitted() const { return n_passages_ > 0; }
  std::size_t n_passages() const { return n_passages_; }
  std::size_t vocabulary_size() const { return terms_.size(); }
  const std::vector<TermStats>& terms() const { return terms_; }
  const std::vector<std::string>& passage_ids() const { return passage_ids_; }
  const std::vector<SparseVector>& vectors() const { return vectors_; }

  std::optional<TermId> FindTerm(std::string_view term) const {
    const auto it = vocab_.find(std::string(term));
    if (it == vocab_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t Df(std::string_view term) const {
    const auto id = FindTerm(term);
    return id ? terms_[*id].df : 0;
  }

  /// idf of a term; unseen terms get the df = 0 value of the same formula.
  double Idf(std::string_view term) const {
    RequireFitted();
    const auto id = FindTerm(term);
    return id ? terms_[*id].idf : SmoothedIdf(n_passages_, 0);
  }

  const SparseVector& Vector(std::string_view passage_id) const {
    const auto it = std::lower_bound(passage_ids_.begin(), passage_ids_.end(),
                                     passage_id);
    if (it == passage_ids_.end() || *it != passage_id) {
      throw Error(ErrorCode::kNotFound,
                  "passage '" + std::string(passage_id) + "' not indexed");
    }
    return vectors_[static_cast<std::size_t>(it - passage_ids_.begin())];
  }

  /// Query vector; unknown terms are ignored, all-unknown text gives {}.
  SparseVector Transform(std::string_view text) const {
    RequireFitted();
    std::map<TermId, std::size_t> tf;
    for (const auto& token : Tokenize(text)) {
      if (const auto id = FindTerm(token.term)) ++tf[*id];
    }
    SparseVector v;
    v.reserve(tf.size());
    for (const auto& [id, count] : tf) {
      v.emplace_back(id, static_cast<double>(count) * terms_[id].idf);
    }
    L2Normalize(v);
    return v;
  }

  /// Top-k passages by cosine, zero scores excluded, ties by passage_id.
  std::vector<ScoredPassage> RetrievePassages(std::string_view query,
                                              std::size_t k) const {
    RequireK(k);
    auto all = ScoreAll(query);
    const auto n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<long>(n),
                      all.end(), Ranked);
    all.resize(n);
    return all;
  }

  /// Top-k documents, each scored by its best passage.
  std::vector<RetrievedDocument> RetrieveDocuments(const DocumentStore& store,
                                                   std::string_view query,
                                                   std::size_t k) const {
    RequireK(k);
    auto all = ScoreAll(query);
    std::sort(all.begin(), all.end(), Ranked);

    std::map<std::string, std::size_t> slot;
    std::vector<RetrievedDocument> docs;
    for (auto& sp : all) {
      const auto& doc_id = store.GetPassage(sp.passage_id).doc_id;
      auto [it, inserted] = slot.emplace(doc_id, docs.size());
      if (inserted) {
        // Passages arrive in rank order, so the first one seen is the best.
        docs.push_back({doc_id, sp.score, 0, {}});
      }
      docs[it->second].best_passages.push_back(std::move(sp));
    }
    std::stable_sort(docs.begin(), docs.end(),
                     [](const RetrievedDocument& a, const RetrievedDocument& b) {
                       if (a.score != b.score) return a.score > b.score;
                       return a.doc_id < b.doc_id;
                     });
    if (docs.size() > k) docs.resize(k);
    for (std::size_t i = 0; i < docs.size(); ++i) docs[i].rank = i + 1;
    return docs;
  }

 private:
  static bool Ranked(const ScoredPassage& a, const ScoredPassage& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.passage_id < b.passage_id;
  }

  static void RequireK(std::size_t k) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  }

  void RequireFitted() const {
    if (!fitted()) throw Error(ErrorCode::kNotFitted, "TF-IDF model not fitted");
  }

  std::vector<ScoredPassage> ScoreAll(std::string_view query) const {
    const SparseVector q = Transform(query);
    std::vector<double> acc(n_passages_, 0.0);
    for (const auto& [id, qw] : q) {
      for (const auto& [passage, w] : postings_[id]) acc[passage] += qw * w;
    }
    std::vector<ScoredPassage> out;
    for (std::size_t i = 0; i < acc.size(); ++i) {
      if (acc[i] > 0.0) out.push_back({passage_ids_[i], std::min(acc[i], 1.0)});
    }
    return out;
  }

  void BuildPostings() {
    postings_.assign(terms_.size(), {});
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
      for (const auto& [id, w] : vectors_[i]) postings_[id].emplace_back(i, w);
    }
  }

  std::size_t n_passages_ = 0;
  std::unordered_map<std::string, TermId> vocab_;
  std::vector<TermStats> terms_;
  std::vector<std::string> passage_ids_;  // sorted
  std::vector<SparseVector> vectors_;
  std::vector<std::vector<std::pair<std::size_t, double>>> postings_;
};

}  // namespace sciqa

#endif  // SCIQA_RETRIEVER_HPP_
