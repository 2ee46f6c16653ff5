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

// Publication ingestion, text cleaning, passage splitting and the in-memory
// document store.

#ifndef SCIQA_CORPUS_HPP_
#define SCIQA_CORPUS_HPP_

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cstddef>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sciqa/error.hpp"
#include "sciqa/text.hpp"

namespace sciqa {

using Meta = std::map<std::string, std::string>;

struct RawArticle {
  std::string pmid;
  std::string title;
  std::vector<std::string> paragraphs;
  std::string url;
  std::string publication_date;  // ISO-8601
  std::vector<std::string> authors;
  std::string full_text;
  std::string language;  // empty when the source has no language column

  friend bool operator==(const RawArticle&, const RawArticle&) = default;
};

struct Document {
  std::string doc_id;
  std::string text;
  Meta meta;  // always carries "name" (the title)

  friend bool operator==(const Document&, const Document&) = default;
};

struct Passage {
  std::string passage_id;
  std::string doc_id;
  std::size_t index_in_doc = 0;
  std::size_t char_start = 0;  // into Document::text, half-open
  std::size_t char_end = 0;
  std::string text;

  friend bool operator==(const Passage&, const Passage&) = default;
};

struct SplitConfig {
  std::size_t max_tokens = 512;
  std::size_t stride = 512;

  void Validate() const {
    if (max_tokens < 1 || stride < 1 || stride > max_tokens) {
      throw Error(ErrorCode::kInvalidArgument,
                  "split config requires max_tokens >= 1 and "
                  "1 <= stride <= max_tokens (got max_tokens=" +
                      std::to_string(max_tokens) +
                      ", stride=" + std::to_string(stride) + ")");
    }
  }

  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

// ---------------------------------------------------------------------------
// Cleaning

/// NFC-normalizes, drops control and format characters (Cc, Cf; this
/// includes a BOM), collapses whitespace runs to one space and trims.
/// Nothing else is deleted, so answer spans stay exact substrings.
inline std::string CleanText(std::string_view raw) {
  std::string collapsed;
  collapsed.reserve(raw.size());
  bool pending_space = false;
  utf8::ForEachCodepoint(raw, [&](char32_t c, std::size_t, std::size_t) {
    if (IsWhitespace(c)) {
      pending_space = true;
      return;
    }
    const auto type = u_charType(static_cast<UChar32>(c));
    if (type == U_CONTROL_CHAR || type == U_FORMAT_CHAR) return;
    if (pending_space && !collapsed.empty()) collapsed.push_back(' ');
    pending_space = false;
    utf8::Append(collapsed, c);
  });

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kIo, std::string("ICU NFC unavailable: ") +
                                    u_errorName(status));
  }
  const auto source = icu::UnicodeString::fromUTF8(collapsed);
  if (nfc->isNormalized(source, status) && U_SUCCESS(status)) {
    return collapsed;
  }
  status = U_ZERO_ERROR;
  const icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kIo, std::string("NFC normalization failed: ") +
                                    u_errorName(status));
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion

/// Maps article fields to CSV header names.
struct ColumnMapping {
  std::string pmid = "PMID";
  std::string title = "title";
  std::string paragraphs = "paragraphs";
  std::string url = "URL";
  std::string publication_date = "publication date";
  std::string authors = "authors";
  std::string full_text;  // optional
  std::string language;   // optional

  /// Overrides one mapping by field name ("pmid", "title", ...).
  void Set(std::string_view field, std::string header) {
    if (field == "pmid") pmid = std::move(header);
    else if (field == "title") title = std::move(header);
    else if (field == "paragraphs") paragraphs = std::move(header);
    else if (field == "url") url = std::move(header);
    else if (field == "publication_date") publication_date = std::move(header);
    else if (field == "authors") authors = std::move(header);
    else if (field == "full_text") full_text = std::move(header);
    else if (field == "language") language = std::move(header);
    else
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown column field '" + std::string(field) + "'");
  }
};

struct RowIssue {
  std::size_t row = 0;  // 1-based record number, header is row 1
  std::string reason;
};

struct IngestResult {
  std::vector<RawArticle> articles;
  std::vector<RowIssue> rejected;
};

namespace csv {

/// RFC 4180 records: quoted fields, doubled quotes, CRLF or LF endings.
inline std::vector<std::vector<std::string>> ParseRecords(
    std::string_view data) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_open = false;
  std::size_t record_number = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    record_open = false;
    ++record_number;
  };

  if (data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);

  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw Error(ErrorCode::kParse,
                      "row " + std::to_string(record_number) +
                          ": unexpected quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        record_open = true;
        break;
      case ',':
        end_field();
        record_open = true;
        break;
      case '\r':
        if (i + 1 < data.size() && data[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        if (field_was_quoted) {
          throw Error(ErrorCode::kParse,
                      "row " + std::to_string(record_number) +
                          ": characters after closing quote");
        }
        field.push_back(c);
        record_open = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::kParse, "row " + std::to_string(record_number) +
                                       ": unterminated quoted field");
  }
  if (record_open || !field.empty()) end_record();
  return records;
}

}  // namespace csv

namespace detail {

// A JSON array of strings, or a single blob / separated list.
inline std::vector<std::string> ParseListCell(const std::string& cell,
                                              char separator) {
  std::vector<std::string> out;
  const auto first = cell.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && cell[first] == '[') {
    auto parsed = nlohmann::json::parse(cell, nullptr, false);
    if (parsed.is_array() &&
        std::all_of(parsed.begin(), parsed.end(),
                    [](const auto& v) { return v.is_string(); })) {
      for (const auto& v : parsed) out.push_back(v.template get<std::string>());
      return out;
    }
  }
  if (separator == '\0') {
    if (first != std::string::npos) out.push_back(cell);
    return out;
  }
  std::size_t start = 0;
  while (start <= cell.size()) {
    auto end = cell.find(separator, start);
    if (end == std::string::npos) end = cell.size();
    auto item = cell.substr(start, end - start);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    start = end + 1;
  }
  return out;
}

inline bool HasText(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") != std::string::npos;
}

}  // namespace detail

/// Reads publication records from UTF-8 CSV with a header row. Rows missing a
/// PMID or all text are returned in `rejected`; duplicate PMIDs throw.
inline IngestResult IngestCsv(std::string_view data,
                              const ColumnMapping& schema = {}) {
  const auto records = csv::ParseRecords(data);
  IngestResult result;
  if (records.empty()) return result;

  const auto& header = records.front();
  auto column = [&](const std::string& name,
                    bool required) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) {
        throw Error(ErrorCode::kParse,
                    "row 1: header is missing column '" + name + "'");
      }
      return std::nullopt;
    }
    return static_cast<std::size_t>(std::distance(header.begin(), it));
  };
  const auto pmid_col = column(schema.pmid, true);
  const auto title_col = column(schema.title, true);
  const auto paragraphs_col = column(schema.paragraphs, true);
  const auto url_col = column(schema.url, true);
  const auto date_col = column(schema.publication_date, true);
  const auto authors_col = column(schema.authors, true);
  const auto full_text_col = column(schema.full_text, false);
  const auto language_col = column(schema.language, false);

  std::map<std::string, std::vector<std::size_t>> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row = r + 1;
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::kParse,
                  "row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(rec.size()));
    }
    auto cell = [&](const std::optional<std::size_t>& col) -> std::string {
      return col ? rec[*col] : std::string();
    };

    RawArticle article;
    article.pmid = cell(pmid_col);
    const auto b = article.pmid.find_first_not_of(" \t");
    const auto e = article.pmid.find_last_not_of(" \t");
    article.pmid = b == std::string::npos ? "" : article.pmid.substr(b, e - b + 1);
    article.title = cell(title_col);
    article.paragraphs = detail::ParseListCell(cell(paragraphs_col), '\0');
    article.url = cell(url_col);
    article.publication_date = cell(date_col);
    article.authors = detail::ParseListCell(cell(authors_col), ';');
    article.full_text = cell(full_text_col);
    article.language = cell(language_col);

    if (article.pmid.empty()) {
      result.rejected.push_back({row, "missing PMID"});
      continue;
    }
    const bool has_text =
        std::any_of(article.paragraphs.begin(), article.paragraphs.end(),
                    detail::HasText) ||
        detail::HasText(article.full_text);
    if (!has_text) {
      result.rejected.push_back({row, "no text for PMID " + article.pmid});
      continue;
    }
    seen[article.pmid].push_back(row);
    result.articles.push_back(std::move(article));
  }

  std::string duplicates;
  for (const auto& [pmid, rows] : seen) {
    if (rows.size() < 2) continue;
    if (!duplicates.empty()) duplicates += "; ";
    duplicates += pmid + " (rows";
    for (auto row : rows) duplicates += " " + std::to_string(row);
    duplicates += ")";
  }
  if (!duplicates.empty()) {
    throw Error(ErrorCode::kDuplicateKey, "duplicate PMID: " + duplicates);
  }
  return result;
}

inline IngestResult IngestCsv(std::istream& in,
                              const ColumnMapping& schema = {}) {
  const std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return IngestCsv(std::string_view(data), schema);
}

/// Inclusion predicates applied after ingestion. Dates compare as ISO-8601
/// strings on their first ten characters; bounds are inclusive.
struct IngestFilters {
  std::optional<std::string> date_from;
  std::optional<std::string> date_to;
  std::optional<std::string> language;

  bool Accepts(const RawArticle& article) const {
    const std::string date = article.publication_date.substr(0, 10);
    if (date_from && (date.empty() || date < date_from->substr(0, 10))) {
      return false;
    }
    if (date_to && (date.empty() || date > date_to->substr(0, 10))) {
      return false;
    }
    if (language && article.language != *language) return false;
    return true;
  }

  std::vector<RawArticle> Apply(std::vector<RawArticle> articles) const {
    std::erase_if(articles, [&](const RawArticle& a) { return !Accepts(a); });
    return articles;
  }
};

// ---------------------------------------------------------------------------
// Passages and the store

/// Consecutive token windows of `max_tokens`, advancing by `stride`. The last
/// window ends at the final token.
inline std::vector<Passage> SplitPassages(const Document& doc,
                                          const SplitConfig& config = {}) {
  config.Validate();
  const auto tokens = Tokenize(doc.text);
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyDocument,
                "document '" + doc.doc_id + "' has no indexable text");
  }
  std::vector<Passage> passages;
  for (std::size_t start = 0;; start += config.stride) {
    const std::size_t end = std::min(start + config.max_tokens, tokens.size());
    const Token& first = tokens[start];
    const Token& last = tokens[end - 1];
    Passage p;
    p.index_in_doc = passages.size();
    p.doc_id = doc.doc_id;
    p.passage_id = doc.doc_id + "#" + std::to_string(p.index_in_doc);
    p.char_start = first.char_start;
    p.char_end = last.char_end;
    p.text = doc.text.substr(first.byte_start, last.byte_end - first.byte_start);
    passages.push_back(std::move(p));
    if (end == tokens.size()) break;
  }
  return passages;
}

inline Document MakeDocument(const RawArticle& article,
                             std::string_view source = "csv") {
  std::string joined;
  for (const auto& paragraph : article.paragraphs) {
    if (!joined.empty()) joined += "\n\n";
    joined += paragraph;
  }
  if (!detail::HasText(joined)) joined = article.full_text;

  Document doc;
  doc.doc_id = article.pmid;
  doc.text = CleanText(joined);
  if (doc.text.empty()) {
    throw Error(ErrorCode::kEmptyDocument,
                "article '" + article.pmid + "' is empty after cleaning");
  }
  doc.meta["name"] = CleanText(article.title);
  if (!article.url.empty()) doc.meta["url"] = article.url;
  if (!article.publication_date.empty()) {
    doc.meta["publication_date"] = article.publication_date;
  }
  if (!article.authors.empty()) {
    std::string authors;
    for (const auto& a : article.authors) {
      if (!authors.empty()) authors += "; ";
      authors += a;
    }
    doc.meta["authors"] = authors;
  }
  if (!source.empty()) doc.meta["source"] = std::string(source);
  return doc;
}

/// Documents and their passages keyed by stable ids. Value type: copies are
/// independent snapshots, and a completed store is only read.
class DocumentStore {
 public:
  const Document* FindDocument(std::string_view doc_id) const {
    const auto it = documents_.find(std::string(doc_id));
    return it == documents_.end() ? nullptr : &it->second;
  }

  const Document& GetDocument(std::string_view doc_id) const {
    if (const auto* doc = FindDocument(doc_id)) return *doc;
    throw Error(ErrorCode::kNotFound,
                "unknown document '" + std::string(doc_id) + "'");
  }

  const Passage& GetPassage(std::string_view passage_id) const {
    const auto it = passages_.find(std::string(passage_id));
    if (it == passages_.end()) {
      throw Error(ErrorCode::kNotFound,
                  "unknown passage '" + std::string(passage_id) + "'");
    }
    return it->second;
  }

  const std::vector<std::string>& PassageIds(std::string_view doc_id) const {
    const auto it = doc_passages_.find(std::string(doc_id));
    if (it == doc_passages_.end()) {
      throw Error(ErrorCode::kNotFound,
                  "unknown document '" + std::string(doc_id) + "'");
    }
    return it->second;
  }

  const std::map<std::string, Document>& documents() const {
    return documents_;
  }
  const std::map<std::string, Passage>& passages() const { return passages_; }

  std::size_t document_count() const { return documents_.size(); }
  std::size_t passage_count() const { return passages_.size(); }
  bool empty() const { return documents_.empty(); }

  /// Adds one document with its passages after checking the passage
  /// invariants against the document text.
  void Insert(Document doc, std::vector<Passage> passages) {
    if (documents_.count(doc.doc_id)) {
      throw Error(ErrorCode::kDuplicateKey,
                  "document '" + doc.doc_id + "' already stored");
    }
    if (passages.empty()) {
      throw Error(ErrorCode::kIntegrity,
                  "document '" + doc.doc_id + "' has no passages");
    }
    const utf8::OffsetTable offsets(doc.text);
    std::vector<std::string> ids;
    for (auto& p : passages) {
      if (p.doc_id != doc.doc_id || p.char_start > p.char_end ||
          p.char_end > offsets.size()) {
        throw Error(ErrorCode::kIntegrity,
                    "passage '" + p.passage_id + "' does not fit document '" +
                        doc.doc_id + "'");
      }
      const auto b = offsets.ByteOffset(p.char_start);
      const auto e = offsets.ByteOffset(p.char_end);
      if (std::string_view(doc.text).substr(b, e - b) != p.text) {
        throw Error(ErrorCode::kIntegrity,
                    "passage '" + p.passage_id + "' text differs from its "
                    "document slice");
      }
      if (passages_.count(p.passage_id)) {
        throw Error(ErrorCode::kDuplicateKey,
                    "passage '" + p.passage_id + "' already stored");
      }
      ids.push_back(p.passage_id);
    }
    for (auto& p : passages) {
      auto id = p.passage_id;
      passages_.emplace(std::move(id), std::move(p));
    }
    doc_passages_.emplace(doc.doc_id, std::move(ids));
    auto id = doc.doc_id;
    documents_.emplace(std::move(id), std::move(doc));
  }

  friend bool operator==(const DocumentStore&, const DocumentStore&) = default;

 private:
  std::map<std::string, Document> documents_;
  std::map<std::string, Passage> passages_;
  std::map<std::string, std::vector<std::string>> doc_passages_;
};

/// Returns a new store with the articles added; `store` is never modified,
/// so a failure leaves the caller's snapshot untouched.
inline DocumentStore AddDocuments(const DocumentStore& store,
                                  const std::vector<RawArticle>& articles,
                                  const SplitConfig& split = {}) {
  split.Validate();
  std::set<std::string> batch;
  for (const auto& a : articles) {
    if (a.pmid.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "article without PMID");
    }
    if (!batch.insert(a.pmid).second || store.FindDocument(a.pmid)) {
      throw Error(ErrorCode::kDuplicateKey,
                  "document '" + a.pmid + "' already exists");
    }
  }
  DocumentStore next = store;
  for (const auto& a : articles) {
    Document doc = MakeDocument(a);
    auto passages = SplitPassages(doc, split);
    next.Insert(std::move(doc), std::move(passages));
  }
  return next;
}

inline const Document& GetDocument(const DocumentStore& store,
                                   std::string_view doc_id) {
  return store.GetDocument(doc_id);
}

}  // namespace sciqa

#endif  // SCIQA_CORPUS_HPP_
