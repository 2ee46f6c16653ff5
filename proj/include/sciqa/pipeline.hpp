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

// Query pipeline: a validated DAG of named stages (retriever -> reader, with
// optional extra stages such as a re-ranker) producing result rows.

#ifndef SCIQA_PIPELINE_HPP_
#define SCIQA_PIPELINE_HPP_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sciqa/corpus.hpp"
#include "sciqa/error.hpp"
#include "sciqa/reader.hpp"
#include "sciqa/retriever.hpp"

namespace sciqa {

/// A document store with its fitted passage index.
struct Index {
  DocumentStore store;
  TfIdfModel model;
  SplitConfig split;
  std::string created_at;
};

inline std::shared_ptr<const Index> BuildIndex(DocumentStore store,
                                               SplitConfig split = {}) {
  auto index = std::make_shared<Index>();
  index->model = TfIdfModel::Fit(store);
  index->store = std::move(store);
  index->split = split;
  return index;
}

struct QueryRequest {
  std::string query;
  std::size_t retriever_top_k = 10;
  std::size_t reader_top_k = 5;

  void Validate() const {
    if (retriever_top_k < 1 || reader_top_k < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "retriever_top_k and reader_top_k must be >= 1");
    }
    if (CleanText(query).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "query is empty");
    }
  }
};

struct ResultRow {
  std::size_t index = 0;
  std::string answer;
  std::string type;
  double score = 0.0;
  std::string context;
  Meta meta;
  Offsets offsets_in_document;
  Offsets offsets_in_context;
  std::string doc_id;
  // Score of the source document at retrieval; used for tie-breaking only
  // and not part of the serialized row.
  double retriever_score = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline nlohmann::json ToJson(const Offsets& o) {
  return {{"start", o.start}, {"end", o.end}};
}

inline nlohmann::json ToJson(const ResultRow& row) {
  nlohmann::json j;
  j["index"] = row.index;
  j["answer"] = row.answer;
  j["type"] = row.type;
  j["score"] = row.score;
  j["context"] = row.context;
  j["meta"] = row.meta;
  j["offsets_in_document"] = ToJson(row.offsets_in_document);
  j["offsets_in_context"] = ToJson(row.offsets_in_context);
  j["doc_id"] = row.doc_id;
  return j;
}

inline nlohmann::json ToJson(const std::vector<ResultRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back(ToJson(r));
  return arr;
}

/// Checks a serialized row against the published schema; returns the list
/// of problems (empty when valid).
inline std::vector<std::string> ValidateRowJson(const nlohmann::json& j) {
  std::vector<std::string> problems;
  if (!j.is_object()) return {"row is not an object"};
  auto need = [&](const char* key, auto predicate, const char* kind) {
    if (!j.contains(key)) {
      problems.push_back(std::string("missing field '") + key + "'");
    } else if (!predicate(j[key])) {
      problems.push_back(std::string("field '") + key + "' is not " + kind);
    }
  };
  auto is_offsets = [](const nlohmann::json& o) {
    return o.is_object() && o.contains("start") && o.contains("end") &&
           o["start"].is_number_unsigned() && o["end"].is_number_unsigned() &&
           o["start"].get<std::size_t>() <= o["end"].get<std::size_t>();
  };
  auto is_meta = [](const nlohmann::json& m) {
    if (!m.is_object()) return false;
    return std::all_of(m.begin(), m.end(),
                       [](const nlohmann::json& v) { return v.is_string(); });
  };
  need("index", [](const auto& v) { return v.is_number_unsigned(); },
       "a non-negative integer");
  need("answer", [](const auto& v) { return v.is_string(); }, "a string");
  need("type",
       [](const auto& v) {
         return v.is_string() &&
                (v == "extractive" || v == "no_answer");
       },
       "'extractive' or 'no_answer'");
  need("score",
       [](const auto& v) {
         return v.is_number() && v.template get<double>() >= 0.0 &&
                v.template get<double>() <= 1.0;
       },
       "a number in [0, 1]");
  need("context", [](const auto& v) { return v.is_string(); }, "a string");
  need("meta", is_meta, "a string-valued object");
  need("offsets_in_document", is_offsets, "an ordered {start, end} object");
  need("offsets_in_context", is_offsets, "an ordered {start, end} object");
  need("doc_id", [](const auto& v) { return v.is_string(); }, "a string");
  return problems;
}

inline ResultRow RowFromAnswer(const Answer& a, double retriever_score) {
  ResultRow row;
  row.answer = a.answer;
  row.type = std::string(AnswerTypeName(a.type));
  row.score = a.score;
  row.context = a.context;
  row.meta = a.meta;
  row.offsets_in_document = a.offsets_in_document;
  row.offsets_in_context = a.offsets_in_context;
  row.doc_id = a.doc_id;
  row.retriever_score = retriever_score;
  return row;
}

/// Stable sort by score, then retriever document score, then doc_id; index
/// fields are rewritten to match positions.
inline std::vector<ResultRow> Rerank(std::vector<ResultRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.retriever_score != b.retriever_score) {
                       return a.retriever_score > b.retriever_score;
                     }
                     return a.doc_id < b.doc_id;
                   });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].index = i;
  return rows;
}

/// Everything a query run produces, stage by stage.
struct PipelineState {
  QueryRequest request;
  std::vector<RetrievedDocument> documents;
  std::vector<ReaderPassage> passages;
  std::vector<Answer> answers;
  std::vector<ResultRow> rows;
};

struct Node {
  std::string name;
  // Entry nodes take the query itself; all other nodes need an upstream edge.
  bool consumes_query = false;
  std::function<void(PipelineState&)> run;
};

class Pipeline {
 public:
  void AddNode(Node node) {
    if (node.name.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "node name is empty");
    }
    if (Find(node.name) != npos) {
      throw Error(ErrorCode::kDuplicateKey,
                  "node '" + node.name + "' already exists");
    }
    nodes_.push_back(std::move(node));
  }

  void AddEdge(const std::string& from, const std::string& to) {
    for (const auto& name : {from, to}) {
      if (Find(name) == npos) {
        throw Error(ErrorCode::kNotFound, "no node named '" + name + "'");
      }
    }
    edges_.emplace_back(from, to);
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const {
    return edges_;
  }

  /// Node names in execution order. Throws kCycle (listing the cycle) or
  /// kDanglingNode (naming the nodes) when the graph is not a single-entry,
  /// single-exit DAG.
  std::vector<std::string> Validate() const {
    if (nodes_.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "pipeline has no nodes");
    }
    const auto n = nodes_.size();
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::size_t> in_degree(n, 0);
    for (const auto& [from, to] : edges_) {
      out[Find(from)].push_back(Find(to));
      ++in_degree[Find(to)];
    }

    // Cycle search first so the message can show the loop.
    std::vector<int> color(n, 0);
    std::vector<std::size_t> stack;
    std::function<void(std::size_t)> visit = [&](std::size_t u) {
      color[u] = 1;
      stack.push_back(u);
      for (auto v : out[u]) {
        if (color[v] == 1) {
          std::string cycle;
          auto it = std::find(stack.begin(), stack.end(), v);
          for (; it != stack.end(); ++it) cycle += nodes_[*it].name + " -> ";
          cycle += nodes_[v].name;
          throw Error(ErrorCode::kCycle, "cycle " + cycle);
        }
        if (color[v] == 0) visit(v);
      }
      stack.pop_back();
      color[u] = 2;
    };
    for (std::size_t u = 0; u < n; ++u) {
      if (color[u] == 0) visit(u);
    }

    std::vector<std::string> missing_input, entries, exits;
    for (std::size_t u = 0; u < n; ++u) {
      if (in_degree[u] == 0) {
        if (nodes_[u].consumes_query) {
          entries.push_back(nodes_[u].name);
        } else {
          missing_input.push_back(nodes_[u].name);
        }
      }
      if (out[u].empty()) exits.push_back(nodes_[u].name);
    }
    auto join = [](const std::vector<std::string>& names) {
      std::string s;
      for (const auto& name : names) s += (s.empty() ? "" : ", ") + name;
      return s;
    };
    if (!missing_input.empty()) {
      throw Error(ErrorCode::kDanglingNode,
                  "unconnected required input on: " + join(missing_input));
    }
    if (entries.size() != 1) {
      throw Error(ErrorCode::kDanglingNode,
                  "pipeline needs exactly one entry node, found: " +
                      join(entries));
    }
    if (exits.size() != 1) {
      throw Error(ErrorCode::kDanglingNode,
                  "pipeline needs exactly one exit node, found: " +
                      join(exits));
    }

    // Kahn's order, ties by insertion order.
    std::vector<std::string> order;
    std::set<std::size_t> ready;
    for (std::size_t u = 0; u < n; ++u) {
      if (in_degree[u] == 0) ready.insert(u);
    }
    while (!ready.empty()) {
      const auto u = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(nodes_[u].name);
      for (auto v : out[u]) {
        if (--in_degree[v] == 0) ready.insert(v);
      }
    }
    return order;
  }

  PipelineState Execute(QueryRequest request) const {
    request.Validate();
    const auto order = Validate();
    PipelineState state;
    state.request = std::move(request);
    for (const auto& name : order) {
      const Node& node = nodes_[Find(name)];
      try {
        node.run(state);
      } catch (const Error& e) {
        throw e.WithContext("stage '" + name + "'");
      }
    }
    return state;
  }

  std::vector<ResultRow> Run(QueryRequest request) const {
    return Execute(std::move(request)).rows;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t Find(const std::string& name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].name == name) return i;
    }
    return npos;
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, std::string>> edges_;
};

// ---------------------------------------------------------------------------
// Stock nodes

/// Retrieves documents and selects the reader's passages: the retrieved
/// documents' scoring passages in score order, at most retriever_top_k.
inline Node RetrieverNode(std::shared_ptr<const Index> index,
                          std::string name = "Retriever") {
  return {std::move(name), true, [index](PipelineState& state) {
            if (index->store.empty() || !index->model.fitted()) {
              throw Error(ErrorCode::kEmptyIndex, "index holds no documents");
            }
            const auto k = state.request.retriever_top_k;
            state.documents = index->model.RetrieveDocuments(
                index->store, state.request.query, k);
            std::vector<ScoredPassage> pool;
            for (const auto& d : state.documents) {
              pool.insert(pool.end(), d.best_passages.begin(),
                          d.best_passages.end());
            }
            std::stable_sort(pool.begin(), pool.end(),
                             [](const ScoredPassage& a, const ScoredPassage& b) {
                               if (a.score != b.score) return a.score > b.score;
                               return a.passage_id < b.passage_id;
                             });
            if (pool.size() > k) pool.resize(k);
            state.passages.clear();
            for (const auto& sp : pool) {
              const auto& passage = index->store.GetPassage(sp.passage_id);
              state.passages.push_back(
                  {passage, index->store.GetDocument(passage.doc_id).meta});
            }
          }};
}

/// Reads the selected passages and assembles rows (sorted by score, stable
/// on the reader's own order), re-checking the substring law on each.
inline Node ReaderNode(std::shared_ptr<const Index> index,
                       std::shared_ptr<const Reader> reader,
                       std::string name = "Reader") {
  return {std::move(name), false, [index, reader](PipelineState& state) {
            if (state.passages.empty()) {
              state.answers = {NoAnswer(0.0)};
            } else {
              state.answers = reader->Read(state.request.query, state.passages,
                                           state.request.reader_top_k);
            }
            if (state.answers.size() > state.request.reader_top_k) {
              state.answers.resize(state.request.reader_top_k);
            }
            std::map<std::string, double> doc_scores;
            for (const auto& d : state.documents) doc_scores[d.doc_id] = d.score;
            state.rows.clear();
            for (const auto& a : state.answers) {
              if (a.type == AnswerType::kExtractive) {
                CheckSubstringLaw(a, index->store.GetDocument(a.doc_id).text);
              }
              const auto it = doc_scores.find(a.doc_id);
              state.rows.push_back(
                  RowFromAnswer(a, it == doc_scores.end() ? 0.0 : it->second));
            }
            std::stable_sort(state.rows.begin(), state.rows.end(),
                             [](const ResultRow& a, const ResultRow& b) {
                               return a.score > b.score;
                             });
            for (std::size_t i = 0; i < state.rows.size(); ++i) {
              state.rows[i].index = i;
            }
          }};
}

inline Node RerankNode(std::string name = "Reranker") {
  return {std::move(name), false,
          [](PipelineState& state) { state.rows = Rerank(std::move(state.rows)); }};
}

/// Retriever -> Reader.
inline Pipeline BuildDefaultPipeline(std::shared_ptr<const Index> index,
                                     std::shared_ptr<const Reader> reader) {
  if (!index || !reader) {
    throw Error(ErrorCode::kInvalidArgument, "pipeline components missing");
  }
  Pipeline p;
  p.AddNode(RetrieverNode(index));
  p.AddNode(ReaderNode(index, std::move(reader)));
  p.AddEdge("Retriever", "Reader");
  return p;
}

}  // namespace sciqa

#endif  // SCIQA_PIPELINE_HPP_
