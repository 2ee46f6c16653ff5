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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sciqa/retriever.hpp"
#include "support.hpp"

namespace sciqa {
namespace {

using ::sciqa::testing::OracleTfIdf;
using ::sciqa::testing::PassagesFromTexts;
using ::sciqa::testing::RandomText;

const std::vector<std::string> kThree = {"covid vaccine", "covid symptoms cough",
                                         "vaccine trial"};

TfIdfModel FitThree() { return TfIdfModel::Fit(PassagesFromTexts(kThree)); }

double Norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [id, w] : v) s += w * w;
  return std::sqrt(s);
}

TEST(TfIdfFitTest, DocumentFrequencyAndIdf) {
  const auto m = FitThree();
  EXPECT_EQ(m.n_passages(), 3u);
  EXPECT_EQ(m.Df("covid"), 2u);
  EXPECT_EQ(m.Df("vaccine"), 2u);
  EXPECT_EQ(m.Df("trial"), 1u);
  EXPECT_NEAR(m.Idf("covid"), std::log(4.0 / 3.0) + 1.0, 1e-12);
  EXPECT_NEAR(m.Idf("covid"), 1.28768, 1e-5);
  EXPECT_NEAR(m.Idf("trial"), 1.69315, 1e-5);
}

TEST(TfIdfFitTest, SinglePassage) {
  const auto m = TfIdfModel::Fit(PassagesFromTexts({"a"}));
  EXPECT_EQ(m.vocabulary_size(), 1u);
  EXPECT_EQ(m.Df("a"), 1u);
  const auto& v = m.Vector("p0");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_DOUBLE_EQ(v[0].second, 1.0);
}

TEST(TfIdfFitTest, IdenticalPassagesGetIdenticalVectors) {
  const auto m = TfIdfModel::Fit(PassagesFromTexts({"fever cough", "fever cough"}));
  EXPECT_EQ(m.Vector("p0"), m.Vector("p1"));
}

TEST(TfIdfFitTest, EmptyCorpusFails) {
  try {
    TfIdfModel::Fit(std::vector<Passage>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
  }
}

TEST(TfIdfFitTest, UnfittedModelRefusesQueries) {
  TfIdfModel m;
  EXPECT_FALSE(m.fitted());
  try {
    m.RetrievePassages("x", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFitted);
  }
}

TEST(TfIdfTransformTest, Examples) {
  const auto m = FitThree();
  const auto v = m.Transform("vaccine");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_DOUBLE_EQ(v[0].second, 1.0);
  EXPECT_EQ(*m.FindTerm("vaccine"), v[0].first);

  EXPECT_TRUE(m.Transform("zzz").empty());

  const auto both = m.Transform("covid vaccine");
  ASSERT_EQ(both.size(), 2u);
  EXPECT_GT(both[0].second, 0.0);
  EXPECT_GT(both[1].second, 0.0);
  EXPECT_NEAR(Norm(both), 1.0, 1e-9);
}

TEST(TfIdfRetrieveTest, VaccineQuery) {
  const auto m = FitThree();
  const auto hits = m.RetrievePassages("vaccine", 3);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].passage_id, "p0");
  EXPECT_NEAR(hits[0].score, 0.70711, 1e-5);
  EXPECT_NEAR(hits[0].score, 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_EQ(hits[1].passage_id, "p2");
  EXPECT_NEAR(hits[1].score, 0.60535, 1e-5);
}

TEST(TfIdfRetrieveTest, KBeyondCorpusAndEmptyQuery) {
  const auto m = FitThree();
  EXPECT_EQ(m.RetrievePassages("covid vaccine trial", 50).size(), 3u);
  EXPECT_TRUE(m.RetrievePassages("zzz", 5).empty());
  EXPECT_TRUE(m.RetrievePassages("", 5).empty());
  EXPECT_THROW(m.RetrievePassages("covid", 0), Error);
}

TEST(TfIdfRetrieveTest, TiesBreakOnPassageId) {
  const auto m = TfIdfModel::Fit(PassagesFromTexts({"x y", "x y", "x y"}));
  const auto hits = m.RetrievePassages("x", 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].passage_id, "p0");
  EXPECT_EQ(hits[1].passage_id, "p1");
  EXPECT_EQ(hits[2].passage_id, "p2");
}

TEST(TfIdfRetrieveTest, MatchesBruteForceOnRandomCorpora) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> n_pass(1, 10), n_tok(1, 30),
      n_q(1, 6);
  for (int corpus = 0; corpus < 30; ++corpus) {
    std::vector<std::string> texts;
    const auto n = n_pass(rng);
    for (std::size_t i = 0; i < n; ++i) texts.push_back(RandomText(rng, n_tok(rng), 12));
    const auto model = TfIdfModel::Fit(PassagesFromTexts(texts));
    const OracleTfIdf oracle(texts);
    for (int q = 0; q < 10; ++q) {
      const auto query = RandomText(rng, n_q(rng), 16);
      const auto hits = model.RetrievePassages(query, 10);
      std::vector<double> got(n, 0.0);
      for (const auto& h : hits) got[std::stoul(h.passage_id.substr(1))] = h.score;
      for (std::size_t p = 0; p < n; ++p) {
        EXPECT_NEAR(got[p], oracle.Score(query, p), 1e-9) << query;
      }
      for (std::size_t i = 1; i < hits.size(); ++i) {
        EXPECT_GE(hits[i - 1].score, hits[i].score);
      }
    }
  }
}

TEST(TfIdfRetrieveTest, ScoresStayInUnitInterval) {
  std::mt19937_64 rng(4);
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back(RandomText(rng, 20, 8));
  const auto m = TfIdfModel::Fit(PassagesFromTexts(texts));
  for (const auto& t : texts) {
    for (const auto& h : m.RetrievePassages(t, 10)) {
      EXPECT_GT(h.score, 0.0);
      EXPECT_LE(h.score, 1.0);
    }
  }
}

TEST(TfIdfDocumentsTest, DocumentScoreIsBestPassage) {
  // Two windows of one document plus a second document.
  const auto store = testing::StoreFromTexts(
      {{"A", "fever cough rash fever cough renal"}, {"B", "ward onset"}},
      SplitConfig{3, 3});
  const auto m = TfIdfModel::Fit(store);
  const auto passage_hits = m.RetrievePassages("fever renal", 10);
  double best_a = 0.0;
  for (const auto& h : passage_hits) {
    if (h.passage_id.rfind("A#", 0) == 0) best_a = std::max(best_a, h.score);
  }
  const auto docs = m.RetrieveDocuments(store, "fever renal", 10);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].doc_id, "A");
  EXPECT_EQ(docs[0].rank, 1u);
  EXPECT_DOUBLE_EQ(docs[0].score, best_a);
  EXPECT_EQ(docs[0].best_passages.size(), 2u);
}

TEST(TfIdfDocumentsTest, ToyCorpusRareTerm) {
  const auto store = testing::LoadToyStore();
  const auto m = TfIdfModel::Fit(store);
  const auto docs = m.RetrieveDocuments(store, "bocavirus", 5);
  ASSERT_FALSE(docs.empty());
  EXPECT_EQ(docs[0].doc_id, "31001");
  std::size_t holders = 0;
  for (const auto& [id, doc] : store.documents()) {
    for (const auto& t : Terms(doc.text)) {
      if (t == "bocavirus") {
        ++holders;
        break;
      }
    }
  }
  EXPECT_EQ(docs.size(), holders);
}

TEST(TfIdfFromPartsTest, RejectsInconsistentParts) {
  const auto m = FitThree();
  auto ids = m.passage_ids();
  auto vectors = m.vectors();
  EXPECT_NO_THROW(TfIdfModel::FromParts(m.terms(), m.n_passages(), ids, vectors));
  vectors.pop_back();
  EXPECT_THROW(TfIdfModel::FromParts(m.terms(), m.n_passages(), ids, vectors),
               Error);
}

}  // namespace
}  // namespace sciqa
