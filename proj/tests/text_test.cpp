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

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sciqa/text.hpp"
#include "support.hpp"

namespace sciqa {
namespace {

using ::sciqa::testing::OracleTokens;
using ::sciqa::testing::RandomText;

std::vector<std::pair<std::size_t, std::size_t>> Spans(
    const std::vector<Token>& tokens) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& t : tokens) out.emplace_back(t.char_start, t.char_end);
  return out;
}

TEST(TokenizeTest, HyphenAndFullStopSplit) {
  const auto tokens = Tokenize("COVID-19 spreads.");
  EXPECT_EQ(Terms("COVID-19 spreads."),
            (std::vector<std::string>{"covid", "19", "spreads"}));
  EXPECT_EQ(Spans(tokens),
            (std::vector<std::pair<std::size_t, std::size_t>>{
                {0, 5}, {6, 8}, {9, 16}}));
}

TEST(TokenizeTest, EmptyAndSingleWord) {
  EXPECT_TRUE(Tokenize("").empty());
  const auto one = Tokenize("fever");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].term, "fever");
  EXPECT_EQ(one[0].char_start, 0u);
  EXPECT_EQ(one[0].char_end, 5u);
}

TEST(TokenizeTest, OffsetsCountScalarsNotBytes) {
  // "é" is two bytes but one character.
  const std::string text = "Café señor";
  const auto tokens = Tokenize(text);
  ASSERT_EQ(tokens.size(), 2u);
  EXPECT_EQ(tokens[0].term, "café");
  EXPECT_EQ(tokens[0].char_end, 4u);
  EXPECT_EQ(tokens[1].char_start, 5u);
  EXPECT_EQ(tokens[1].char_end, 10u);
  EXPECT_EQ(utf8::Slice(text, 5, 10), "señor");
  EXPECT_EQ(tokens[1].term, "señor");
}

TEST(TokenizeTest, SliceOfEveryTokenLowercasesToItsTerm) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 50; ++round) {
    const auto text = RandomText(rng, 40, 24);
    const auto tokens = Tokenize(text);
    const auto oracle = OracleTokens(text);
    ASSERT_EQ(tokens.size(), oracle.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      EXPECT_EQ(tokens[i].term, oracle[i].term);
      EXPECT_EQ(tokens[i].char_start, oracle[i].start);
      EXPECT_EQ(tokens[i].char_end, oracle[i].end);
    }
  }
}

TEST(Utf8Test, SliceRejectsBadRanges) {
  EXPECT_THROW(utf8::Slice("abc", 2, 1), Error);
  EXPECT_THROW(utf8::Slice("abc", 0, 4), Error);
  EXPECT_EQ(utf8::Slice("abc", 3, 3), "");
}

TEST(NormalizeAnswerTest, Rules) {
  EXPECT_EQ(NormalizeAnswer("fever"), "fever");
  EXPECT_EQ(NormalizeAnswer("The Fever."), "fever");
  EXPECT_EQ(NormalizeAnswer("an  apple a day"), "apple day");
  EXPECT_EQ(NormalizeAnswer(""), "");
}

TEST(NormalizeAnswerTest, Idempotent) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto text = RandomText(rng, 12, 24);
    const auto once = NormalizeAnswer(text);
    EXPECT_EQ(NormalizeAnswer(once), once);
  }
}

TEST(TruncateOrPadTest, Lengths) {
  std::vector<int> long_seq(120);
  for (int i = 0; i < 120; ++i) long_seq[i] = i;
  const auto cut = TruncateOrPad<int>(long_seq, 100, -1);
  ASSERT_EQ(cut.size(), 100u);
  EXPECT_EQ(cut.back(), 99);

  const std::vector<int> three{1, 2, 3};
  EXPECT_EQ(TruncateOrPad<int>(three, 5, -1),
            (std::vector<int>{1, 2, 3, -1, -1}));

  const std::vector<int> five{1, 2, 3, 4, 5};
  EXPECT_EQ(TruncateOrPad<int>(five, 5, -1), five);
  EXPECT_THROW(TruncateOrPad<int>(five, 0, -1), Error);
}

TEST(TruncateOrPadTest, AlwaysTargetLengthWithPrefixKept) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(0, 40), target(1, 40);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> seq(len(rng), 5);
    const auto t = target(rng);
    const auto out = TruncateOrPad<int>(seq, t, 0);
    ASSERT_EQ(out.size(), t);
    for (std::size_t j = 0; j < std::min(t, seq.size()); ++j) {
      EXPECT_EQ(out[j], 5);
    }
  }
}

}  // namespace
}  // namespace sciqa
