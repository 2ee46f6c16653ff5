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

// SQuAD 2.0 datasets: parsing (nested or flat layout), validation,
// canonical serialization, seeded splits and relevance judgments.

#ifndef SCIQA_SQUAD_HPP_
#define SCIQA_SQUAD_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sciqa/corpus.hpp"
#include "sciqa/error.hpp"
#include "sciqa/text.hpp"

namespace sciqa::squad {

struct GoldAnswer {
  std::string text;
  std::size_t answer_start = 0;  // characters into the context

  friend bool operator==(const GoldAnswer&, const GoldAnswer&) = default;
};

struct Example {
  std::string id;
  std::string question;
  std::string context;
  std::vector<GoldAnswer> answers;
  bool is_impossible = false;
  std::optional<std::string> document_id;

  friend bool operator==(const Example&, const Example&) = default;
};

struct Dataset {
  std::string version = "v2.0";
  std::vector<Example> examples;
  std::map<std::string, std::string> provenance;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Violation {
  std::string id;
  std::string reason;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// question id -> relevant document ids
using Qrels = std::map<std::string, std::set<std::string>>;

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline const nlohmann::json& Require(const nlohmann::json& obj,
                                     const char* key, const std::string& path,
                                     bool (nlohmann::json::*is_kind)()
                                         const noexcept,
                                     const char* kind) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kField,
                path + ": missing required field '" + key + "'");
  }
  const auto& value = obj[key];
  if (!(value.*is_kind)()) {
    throw Error(ErrorCode::kField,
                path + "." + key + ": expected " + kind);
  }
  return value;
}

inline std::string Label(const nlohmann::json& qa, const std::string& path) {
  if (qa.is_object() && qa.contains("id") && qa["id"].is_string()) {
    return path + " (id " + qa["id"].get<std::string>() + ")";
  }
  return path;
}

inline Example ParseExample(const nlohmann::json& qa, const std::string& path,
                            const std::string* context,
                            const std::optional<std::string>& document_id) {
  const auto label = Label(qa, path);
  if (!qa.is_object()) {
    throw Error(ErrorCode::kField, path + ": expected an object");
  }
  Example ex;
  ex.id = Require(qa, "id", path, &nlohmann::json::is_string, "a string")
              .get<std::string>();
  ex.question = Require(qa, "question", label, &nlohmann::json::is_string,
                        "a string")
                    .get<std::string>();
  if (context) {
    ex.context = *context;
  } else {
    ex.context = Require(qa, "context", label, &nlohmann::json::is_string,
                         "a string")
                     .get<std::string>();
  }
  if (qa.contains("is_impossible")) {
    if (!qa["is_impossible"].is_boolean()) {
      throw Error(ErrorCode::kField, label + ".is_impossible: expected a bool");
    }
    ex.is_impossible = qa["is_impossible"].get<bool>();
  }
  if (qa.contains("answers") || !ex.is_impossible) {
    const auto& answers = Require(qa, "answers", label,
                                  &nlohmann::json::is_array, "an array");
    for (std::size_t i = 0; i < answers.size(); ++i) {
      const auto apath = label + ".answers[" + std::to_string(i) + "]";
      GoldAnswer a;
      a.text = Require(answers[i], "text", apath, &nlohmann::json::is_string,
                       "a string")
                   .get<std::string>();
      const auto& start = Require(answers[i], "answer_start", apath,
                                  &nlohmann::json::is_number_integer,
                                  "an integer");
      if (start.get<long long>() < 0) {
        throw Error(ErrorCode::kField,
                    apath + ".answer_start: must be non-negative");
      }
      a.answer_start = start.get<std::size_t>();
      ex.answers.push_back(std::move(a));
    }
  }
  ex.document_id = document_id;
  if (qa.contains("document_id")) {
    if (!qa["document_id"].is_string()) {
      throw Error(ErrorCode::kField, label + ".document_id: expected a string");
    }
    ex.document_id = qa["document_id"].get<std::string>();
  }
  return ex;
}

inline void ParseProvenance(const nlohmann::json& root, Dataset& ds) {
  if (!root.is_object() || !root.contains("provenance")) return;
  const auto& prov = root["provenance"];
  if (!prov.is_object()) {
    throw Error(ErrorCode::kField, "$.provenance: expected an object");
  }
  for (const auto& [key, value] : prov.items()) {
    if (!value.is_string()) {
      throw Error(ErrorCode::kField,
                  "$.provenance." + key + ": expected a string");
    }
    ds.provenance[key] = value.get<std::string>();
  }
}

}  // namespace detail

/// Accepts the nested layout (data -> paragraphs -> qas), or the flat layout
/// ({"examples": [...]} or a bare array). Does not validate answer spans.
inline Dataset Parse(std::string_view bytes) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("$: ") + e.what());
  }
  Dataset ds;
  if (root.is_object() && root.contains("version")) {
    if (!root["version"].is_string()) {
      throw Error(ErrorCode::kField, "$.version: expected a string");
    }
    ds.version = root["version"].get<std::string>();
  }
  detail::ParseProvenance(root, ds);

  if (root.is_object() && root.contains("data")) {
    const auto& data = root["data"];
    if (!data.is_array()) {
      throw Error(ErrorCode::kField, "$.data: expected an array");
    }
    for (std::size_t d = 0; d < data.size(); ++d) {
      const auto dpath = "$.data[" + std::to_string(d) + "]";
      const auto& paragraphs = detail::Require(
          data[d], "paragraphs", dpath, &nlohmann::json::is_array, "an array");
      for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        const auto ppath = dpath + ".paragraphs[" + std::to_string(p) + "]";
        const auto& para = paragraphs[p];
        const auto context =
            detail::Require(para, "context", ppath, &nlohmann::json::is_string,
                            "a string")
                .get<std::string>();
        std::optional<std::string> document_id;
        if (para.contains("document_id")) {
          if (!para["document_id"].is_string()) {
            throw Error(ErrorCode::kField,
                        ppath + ".document_id: expected a string");
          }
          document_id = para["document_id"].get<std::string>();
        }
        const auto& qas = detail::Require(para, "qas", ppath,
                                          &nlohmann::json::is_array, "an array");
        for (std::size_t q = 0; q < qas.size(); ++q) {
          ds.examples.push_back(detail::ParseExample(
              qas[q], ppath + ".qas[" + std::to_string(q) + "]", &context,
              document_id));
        }
      }
    }
    return ds;
  }

  const nlohmann::json* list = nullptr;
  std::string base = "$";
  if (root.is_array()) {
    list = &root;
  } else if (root.is_object() && root.contains("examples")) {
    list = &root["examples"];
    base = "$.examples";
    if (!list->is_array()) {
      throw Error(ErrorCode::kField, "$.examples: expected an array");
    }
  } else {
    throw Error(ErrorCode::kField,
                "$: expected 'data' (nested) or 'examples' (flat)");
  }
  for (std::size_t i = 0; i < list->size(); ++i) {
    ds.examples.push_back(detail::ParseExample(
        (*list)[i], base + "[" + std::to_string(i) + "]", nullptr,
        std::nullopt));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Validation and serialization

inline std::vector<Violation> Validate(const Dataset& ds) {
  std::vector<Violation> report;
  std::set<std::string> ids;
  for (const auto& ex : ds.examples) {
    if (ex.id.empty()) report.push_back({ex.id, "empty id"});
    if (!ids.insert(ex.id).second) {
      report.push_back({ex.id, "duplicate id " + ex.id});
    }
    if (ex.is_impossible) {
      if (!ex.answers.empty()) {
        report.push_back(
            {ex.id, "impossible example carries answers at id " + ex.id});
      }
      continue;
    }
    if (ex.answers.empty()) {
      report.push_back({ex.id, "answerable example without answers at id " +
                                   ex.id});
      continue;
    }
    const utf8::OffsetTable offsets(ex.context);
    for (const auto& a : ex.answers) {
      const auto length = utf8::Length(a.text);
      const auto end = a.answer_start + length;
      bool ok = end <= offsets.size();
      if (ok) {
        const auto b = offsets.ByteOffset(a.answer_start);
        const auto e = offsets.ByteOffset(end);
        ok = std::string_view(ex.context).substr(b, e - b) == a.text;
      }
      if (!ok) {
        report.push_back({ex.id, "answer text mismatch at id " + ex.id});
      }
    }
  }
  return report;
}

inline nlohmann::json ToJson(const Example& ex) {
  nlohmann::json j;
  j["id"] = ex.id;
  j["question"] = ex.question;
  j["context"] = ex.context;
  j["is_impossible"] = ex.is_impossible;
  j["answers"] = nlohmann::json::array();
  for (const auto& a : ex.answers) {
    j["answers"].push_back({{"text", a.text}, {"answer_start", a.answer_start}});
  }
  if (ex.document_id) j["document_id"] = *ex.document_id;
  return j;
}

/// Canonical flat form: sorted keys, two-space indent, trailing newline.
/// Refuses datasets that fail Validate.
inline std::string Serialize(const Dataset& ds) {
  const auto report = Validate(ds);
  if (!report.empty()) {
    throw Error(ErrorCode::kInvalidDataset, report.front().reason);
  }
  nlohmann::json root;
  root["version"] = ds.version;
  root["provenance"] = ds.provenance;
  root["examples"] = nlohmann::json::array();
  for (const auto& ex : ds.examples) root["examples"].push_back(ToJson(ex));
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Splitting

struct Ratios {
  double train = 70.0;
  double val = 15.0;
  double test = 15.0;
};

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Seeded shuffle, then sizes floor(n*train), floor(n*val) and the rest.
/// Ratios are normalized by their sum.
inline Splits Split(const Dataset& ds, Ratios ratios = {},
                    std::uint64_t seed = 42) {
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "split ratios must be positive");
  }
  const std::size_t n = ds.examples.size();
  if (n < 3) {
    throw Error(ErrorCode::kTooSmall,
                "need at least 3 examples to split, have " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Fisher-Yates with rejection sampling, so the permutation depends only on
  // the engine output and not on the standard library's distributions.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::uint64_t bound = i + 1;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(order[i], order[static_cast<std::size_t>(r % bound)]);
  }

  const double sum = ratios.train + ratios.val + ratios.test;
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * ratios.train / sum));
  const auto n_val = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * ratios.val / sum));

  Splits out;
  for (auto* part : {&out.train, &out.val, &out.test}) {
    part->version = ds.version;
    part->provenance = ds.provenance;
  }
  out.train.provenance["split"] = "train";
  out.val.provenance["split"] = "val";
  out.test.provenance["split"] = "test";
  for (std::size_t i = 0; i < n; ++i) {
    auto& target = i < n_train           ? out.train
                   : i < n_train + n_val ? out.val
                                         : out.test;
    target.examples.push_back(ds.examples[order[i]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Relevance judgments

/// One relevant document per question: the example's document_id, or else
/// the single stored document containing the context verbatim.
inline Qrels ToQrels(const Dataset& ds, const DocumentStore& store) {
  Qrels qrels;
  std::vector<std::string> unresolved;
  for (const auto& ex : ds.examples) {
    if (ex.document_id) {
      if (!store.FindDocument(*ex.document_id)) {
        unresolved.push_back(ex.id + " (unknown document " + *ex.document_id +
                             ")");
        continue;
      }
      qrels[ex.id] = {*ex.document_id};
      continue;
    }
    const std::string needle = CleanText(ex.context);
    std::vector<std::string> hits;
    if (!needle.empty()) {
      for (const auto& [id, doc] : store.documents()) {
        if (doc.text.find(needle) != std::string::npos) hits.push_back(id);
      }
    }
    if (hits.size() != 1) {
      unresolved.push_back(ex.id + " (context found in " +
                           std::to_string(hits.size()) + " documents)");
      continue;
    }
    qrels[ex.id] = {hits.front()};
  }
  if (!unresolved.empty()) {
    std::string list;
    for (const auto& u : unresolved) list += (list.empty() ? "" : "; ") + u;
    throw Error(ErrorCode::kAmbiguity,
                "cannot resolve relevant document for: " + list);
  }
  return qrels;
}

}  // namespace sciqa::squad

#endif  // SCIQA_SQUAD_HPP_
