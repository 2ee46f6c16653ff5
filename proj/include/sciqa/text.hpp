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

// Word tokenization with character offsets and answer normalization.
//
// All character offsets in this library count Unicode scalar values and are
// half-open. Strings are held as UTF-8; invalid byte sequences decode to
// U+FFFD and count as one character.

#ifndef SCIQA_TEXT_HPP_
#define SCIQA_TEXT_HPP_

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sciqa/error.hpp"

namespace sciqa {

// ---------------------------------------------------------------------------
// UTF-8 helpers

namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Calls fn(codepoint, byte_start, byte_end) for each scalar value in order.
template <typename Fn>
void ForEachCodepoint(std::string_view text, Fn&& fn) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) c = kReplacement;
    fn(static_cast<char32_t>(c), static_cast<std::size_t>(start),
       static_cast<std::size_t>(i));
  }
}

inline void Append(std::string& out, char32_t c) {
  uint8_t buf[4];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, 4, static_cast<UChar32>(c), error);
  if (error) {
    n = 0;
    U8_APPEND_UNSAFE(buf, n, kReplacement);
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

inline std::u32string Decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  ForEachCodepoint(text, [&](char32_t c, std::size_t, std::size_t) {
    out.push_back(c);
  });
  return out;
}

inline std::string Encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) Append(out, c);
  return out;
}

inline std::size_t Length(std::string_view text) {
  std::size_t n = 0;
  ForEachCodepoint(text, [&](char32_t, std::size_t, std::size_t) { ++n; });
  return n;
}

/// Byte position of every character boundary: entry i is the byte offset of
/// character i, the last entry is text.size().
class OffsetTable {
 public:
  OffsetTable() = default;
  explicit OffsetTable(std::string_view text) {
    bytes_.clear();
    bytes_.reserve(text.size() + 1);
    ForEachCodepoint(text, [&](char32_t, std::size_t begin, std::size_t) {
      bytes_.push_back(begin);
    });
    bytes_.push_back(text.size());
  }

  std::size_t size() const { return bytes_.size() - 1; }

  std::size_t ByteOffset(std::size_t char_offset) const {
    if (char_offset >= bytes_.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "character offset " + std::to_string(char_offset) +
                      " beyond text of length " + std::to_string(size()));
    }
    return bytes_[char_offset];
  }

 private:
  std::vector<std::size_t> bytes_{0};
};

/// text[start:end) in characters. Throws on out-of-range or start > end.
inline std::string Slice(std::string_view text, std::size_t start,
                         std::size_t end) {
  if (start > end) {
    throw Error(ErrorCode::kInvalidArgument,
                "slice start " + std::to_string(start) + " > end " +
                    std::to_string(end));
  }
  std::size_t index = 0;
  std::size_t byte_start = std::string_view::npos;
  std::size_t byte_end = std::string_view::npos;
  ForEachCodepoint(text, [&](char32_t, std::size_t begin, std::size_t) {
    if (index == start) byte_start = begin;
    if (index == end) byte_end = begin;
    ++index;
  });
  if (start == index) byte_start = text.size();
  if (end == index) byte_end = text.size();
  if (byte_start == std::string_view::npos ||
      byte_end == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "slice [" + std::to_string(start) + ", " + std::to_string(end) +
                    ") out of range for text of length " +
                    std::to_string(index));
  }
  return std::string(text.substr(byte_start, byte_end - byte_start));
}

}  // namespace utf8

// ---------------------------------------------------------------------------
// Character classes

inline bool IsWordChar(char32_t c) {
  const auto uc = static_cast<UChar32>(c);
  if (u_isalnum(uc)) return true;
  const auto type = u_charType(uc);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

inline bool IsWhitespace(char32_t c) {
  return u_isUWhiteSpace(static_cast<UChar32>(c));
}

inline bool IsPunctuation(char32_t c) {
  // ASCII symbols such as $ + < = > ^ ` | ~ count as punctuation here, as
  // they do in the usual SQuAD answer normalization.
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  return u_ispunct(static_cast<UChar32>(c));
}

inline char32_t ToLower(char32_t c) {
  return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
}

// ---------------------------------------------------------------------------
// Tokenization

struct Token {
  std::string term;  // lowercased word
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Splits on whitespace and punctuation (hyphens included, so "covid-19"
/// yields "covid" and "19"). Offsets reference the original string.
inline std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  Token current;
  bool in_word = false;
  std::size_t index = 0;
  utf8::ForEachCodepoint(
      text, [&](char32_t c, std::size_t begin, std::size_t end) {
        if (IsWordChar(c)) {
          if (!in_word) {
            current = Token{};
            current.char_start = index;
            current.byte_start = begin;
            in_word = true;
          }
          utf8::Append(current.term, ToLower(c));
          current.char_end = index + 1;
          current.byte_end = end;
        } else if (in_word) {
          tokens.push_back(std::move(current));
          in_word = false;
        }
        ++index;
      });
  if (in_word) tokens.push_back(std::move(current));
  return tokens;
}

/// Terms only, in order.
inline std::vector<std::string> Terms(std::string_view text) {
  std::vector<std::string> terms;
  for (auto& token : Tokenize(text)) terms.push_back(std::move(token.term));
  return terms;
}

/// Fixed-length view of a sequence: keeps the prefix when too long, appends
/// `pad` when too short.
template <typename T>
std::vector<T> TruncateOrPad(std::span<const T> items, std::size_t target_len,
                             const T& pad) {
  if (target_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "target_len must be >= 1");
  }
  std::vector<T> out(items.begin(),
                     items.begin() + std::min(items.size(), target_len));
  out.resize(target_len, pad);
  return out;
}

template <typename T>
std::vector<T> Truncate(std::span<const T> items, std::size_t max_len) {
  return std::vector<T>(items.begin(),
                        items.begin() + std::min(items.size(), max_len));
}

// ---------------------------------------------------------------------------
// Answer normalization (lowercase, strip punctuation, drop a/an/the,
// collapse whitespace), the convention behind exact-match scoring.

inline std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  utf8::ForEachCodepoint(
      text, [&](char32_t c, std::size_t begin, std::size_t end) {
        if (IsWhitespace(c)) {
          if (!current.empty()) words.push_back(std::move(current));
          current.clear();
        } else {
          current.append(text.substr(begin, end - begin));
        }
      });
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

inline std::string NormalizeAnswer(std::string_view text) {
  std::string stripped;
  stripped.reserve(text.size());
  utf8::ForEachCodepoint(text, [&](char32_t c, std::size_t, std::size_t) {
    const char32_t lower = ToLower(c);
    if (!IsPunctuation(lower)) utf8::Append(stripped, lower);
  });
  std::string out;
  for (const auto& word : SplitWhitespace(stripped)) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

}  // namespace sciqa

#endif  // SCIQA_TEXT_HPP_
