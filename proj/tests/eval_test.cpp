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

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sciqa/eval.hpp"
#include "support.hpp"

namespace sciqa::eval {
namespace {

using ::sciqa::testing::DataDir;
using ::sciqa::testing::ReadText;
using ::sciqa::testing::ScopedServer;

using Ranked = std::vector<std::string>;

TEST(PrecisionTest, Examples) {
  const Ranked ranked = {"d1", "d5", "d2"};
  EXPECT_DOUBLE_EQ(PrecisionAtK(ranked, {"d1", "d2"}, 3), 2.0 / 3.0);
  EXPECT_EQ(PrecisionAtK(ranked, {}, 3), 0.0);
  EXPECT_EQ(PrecisionAtK(ranked, {"d1", "d5", "d2"}, 3), 1.0);
  // Short lists still divide by k.
  EXPECT_DOUBLE_EQ(PrecisionAtK(Ranked{"d1"}, {"d1"}, 4), 0.25);
  EXPECT_THROW(PrecisionAtK(ranked, {"d1"}, 0), Error);
}

TEST(RecallTest, Examples) {
  const Ranked ranked = {"d1", "d5", "d2"};
  EXPECT_EQ(RecallAtK(ranked, {"d1", "d2"}, 3), 1.0);
  EXPECT_EQ(RecallAtK(ranked, {"d1", "d2"}, 1), 0.5);
  EXPECT_FALSE(RecallAtK(ranked, {}, 3).has_value());
}

TEST(ReciprocalRankTest, Positions) {
  EXPECT_EQ(ReciprocalRankAtK(Ranked{"r", "x"}, {"r"}, 5), 1.0);
  EXPECT_EQ(ReciprocalRankAtK(Ranked{"x", "r"}, {"r"}, 5), 0.5);
  EXPECT_EQ(ReciprocalRankAtK(Ranked{"x", "y"}, {"r"}, 5), 0.0);
  EXPECT_EQ(ReciprocalRankAtK(Ranked{"x", "r"}, {"r"}, 1), 0.0);
}

TEST(MrrTest, WorkedExample) {
  const std::map<std::string, Ranked> rankings = {
      {"a", {"r1", "x"}}, {"b", {"x", "r2"}}, {"c", {"x", "y"}}};
  const squad::Qrels qrels = {{"a", {"r1"}}, {"b", {"r2"}}, {"c", {"r3"}}};
  EXPECT_EQ(MrrAtK(rankings, qrels, 10), 0.5);
  EXPECT_FALSE(MrrAtK(rankings, {}, 10).has_value());
}

TEST(RankMetricsProperty, MonotoneInK) {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 200; ++round) {
    Ranked ranked;
    std::set<std::string> relevant;
    for (int i = 0; i < 25; ++i) {
      ranked.push_back("d" + std::to_string(rng() % 40));
      if (rng() % 5 == 0) relevant.insert("d" + std::to_string(rng() % 40));
    }
    if (relevant.empty()) relevant.insert("d0");
    double prev_recall = 0.0, prev_rr = 0.0;
    for (std::size_t k = 1; k <= 25; ++k) {
      const double r = *RecallAtK(ranked, relevant, k);
      const double rr = ReciprocalRankAtK(ranked, relevant, k);
      EXPECT_GE(r, prev_recall);
      EXPECT_GE(rr, prev_rr);
      EXPECT_LE(r, 1.0);
      prev_recall = r;
      prev_rr = rr;
    }
  }
}

TEST(ExactMatchTest, Examples) {
  EXPECT_EQ(ExactMatch("fever", std::vector<std::string>{"fever"}), 1);
  EXPECT_EQ(ExactMatch("The Fever.", std::vector<std::string>{"fever"}), 1);
  EXPECT_EQ(ExactMatch("fever and cough", std::vector<std::string>{"fever"}), 0);
  EXPECT_EQ(ExactMatch("", std::vector<std::string>{}), 1);
  EXPECT_EQ(ExactMatch("x", std::vector<std::string>{"y", "X."}), 1);
}

TEST(TokenF1Test, Examples) {
  EXPECT_EQ(TokenF1("dry cough", "dry cough"), 1.0);
  EXPECT_EQ(TokenF1("fever", "cough"), 0.0);
  EXPECT_DOUBLE_EQ(TokenF1("fever and cough", "dry cough"), 0.4);
  EXPECT_EQ(TokenF1("", "the"), 1.0);
  EXPECT_EQ(TokenF1("", "cough"), 0.0);
}

TEST(TokenF1Test, SymmetricAndBounded) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::RandomText(rng, 1 + rng() % 6, 10);
    const auto b = testing::RandomText(rng, 1 + rng() % 6, 10);
    const double f = TokenF1(a, b);
    EXPECT_DOUBLE_EQ(f, TokenF1(b, a));
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_EQ(TokenF1(a, a), 1.0);
  }
}

class ConstantScorer : public SemanticScorer {
 public:
  explicit ConstantScorer(double v) : v_(v) {}
  double Score(std::string_view, std::string_view) const override { return v_; }

 private:
  double v_;
};

TEST(SasTest, Examples) {
  const std::vector<std::string> preds = {"fever", "fever and cough"};
  const std::vector<std::vector<std::string>> golds = {{"fever"}, {"dry cough"}};
  const TokenF1Scorer f1;
  EXPECT_DOUBLE_EQ(Sas(preds, golds, f1), 0.7);
  const std::vector<std::vector<std::string>> same = {{"fever"}, {"fever and cough"}};
  EXPECT_EQ(Sas(preds, same, f1), 1.0);
  EXPECT_EQ(Sas(preds, golds, ConstantScorer(0.0)), 0.0);
  const std::vector<std::vector<std::string>> one = {{"fever"}};
  EXPECT_THROW(Sas(preds, one, f1), Error);
}

TEST(SasTest, RemoteScorerProtocol) {
  nlohmann::json seen;
  const ScopedServer server([&seen](httplib::Server& s) {
    s.Post("/score", [&seen](const httplib::Request& req, httplib::Response& res) {
      seen = nlohmann::json::parse(req.body);
      nlohmann::json scores = nlohmann::json::array();
      for (const auto& p : seen["pairs"]) scores.push_back(p["pred"] == p["gold"] ? 1.0 : 0.25);
      res.set_content(nlohmann::json{{"scores", scores}}.dump(), "application/json");
    });
  });
  const RemoteScorer scorer(server.url());
  const std::vector<std::string> preds = {"a", "b"};
  const std::vector<std::vector<std::string>> golds = {{"a"}, {"c", "d"}};
  EXPECT_DOUBLE_EQ(Sas(preds, golds, scorer), (1.0 + 0.25) / 2.0);
  EXPECT_EQ(seen["pairs"].size(), 3u);
  EXPECT_EQ(seen["pairs"][1]["gold"], "c");
}

TEST(SasTest, RemoteScorerRejectsShortReply) {
  const ScopedServer server([](httplib::Server& s) {
    s.Post("/score", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"scores": []})", "application/json");
    });
  });
  try {
    RemoteScorer(server.url()).Score("a", "b");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocolViolation);
  }
}

squad::Example Ex(bool impossible, std::vector<std::string> golds) {
  squad::Example ex;
  ex.is_impossible = impossible;
  for (auto& g : golds) ex.answers.push_back({g, 0});
  return ex;
}

Answer Pred(const std::string& text) {
  Answer a;
  a.type = text.empty() ? AnswerType::kNoAnswer : AnswerType::kExtractive;
  a.answer = text;
  return a;
}

TEST(AccuracyTest, Rules) {
  const std::vector<squad::Example> exs = {Ex(false, {"fever"}), Ex(true, {})};
  EXPECT_EQ(AnswerAccuracy(std::vector<Answer>{Pred("fever"), Pred("")}, exs), 1.0);
  EXPECT_EQ(AnswerAccuracy(std::vector<Answer>{Pred("rash"), Pred("")}, exs), 0.5);
  EXPECT_EQ(AnswerAccuracy(std::vector<Answer>{Pred("rash"), Pred("x")}, exs), 0.0);
  EXPECT_THROW(AnswerAccuracy(std::vector<Answer>{Pred("x")}, exs), Error);
}

// ---------------------------------------------------------------------------
// Whole evaluation runs

/// Returns the gold answer when it occurs in a passage.
class GoldReader : public Reader {
 public:
  explicit GoldReader(std::map<std::string, std::string> gold)
      : gold_(std::move(gold)) {}

  std::vector<Answer> Read(std::string_view query,
                           std::span<const ReaderPassage> passages,
                           std::size_t) const override {
    const auto it = gold_.find(std::string(query));
    if (it == gold_.end()) return {NoAnswer()};
    for (const auto& rp : passages) {
      const auto at = rp.passage.text.find(it->second);
      if (at == std::string::npos) continue;
      Answer a;
      a.type = AnswerType::kExtractive;
      a.answer = it->second;
      a.score = 1.0;
      a.context = rp.passage.text;
      const auto start = utf8::Length(rp.passage.text.substr(0, at));
      const auto end = start + utf8::Length(it->second);
      a.offsets_in_context = {start, end};
      a.offsets_in_document = {rp.passage.char_start + start,
                               rp.passage.char_start + end};
      a.doc_id = rp.passage.doc_id;
      a.passage_id = rp.passage.passage_id;
      return {a};
    }
    return {NoAnswer()};
  }
  std::string name() const override { return "gold"; }

 private:
  std::map<std::string, std::string> gold_;
};

TEST(EvaluateTest, ToyRetrievalIsPerfect) {
  const auto index = BuildIndex(testing::LoadToyStore());
  const auto ds = squad::Parse(ReadText(DataDir() / "toy_squad.json"));
  const auto pipeline = BuildDefaultPipeline(
      index, std::make_shared<BaselineReader>(
                 std::shared_ptr<const TfIdfModel>(index, &index->model)));
  const auto report = Evaluate(pipeline, ds, index->store, {5, 10, 20}, TokenF1Scorer{});
  EXPECT_EQ(report.questions, 10u);
  EXPECT_EQ(report.dataset, "toy");
  for (std::size_t k : {5, 10, 20}) {
    EXPECT_EQ(report.retriever.at(k).recall, 1.0);
    EXPECT_EQ(report.retriever.at(k).mrr, 1.0);
    EXPECT_DOUBLE_EQ(report.retriever.at(k).precision, 1.0 / static_cast<double>(k));
  }
  const auto j = ToJson(report);
  for (const char* k : {"5", "10", "20"}) {
    EXPECT_TRUE(j["retriever"][k].contains("mrr"));
    EXPECT_TRUE(j["reader"][k].contains("sas"));
  }
  EXPECT_NE(RenderTable(report).find("@20"), std::string::npos);
}

TEST(EvaluateTest, GoldReaderScoresPerfectly) {
  const auto index = BuildIndex(testing::LoadToyStore());
  const auto ds = squad::Parse(ReadText(DataDir() / "toy_squad.json"));
  std::map<std::string, std::string> gold;
  for (const auto& ex : ds.examples) gold[ex.question] = ex.answers.at(0).text;
  const auto pipeline =
      BuildDefaultPipeline(index, std::make_shared<GoldReader>(gold));
  const auto report = Evaluate(pipeline, ds, index->store, {1, 3}, TokenF1Scorer{});
  ASSERT_EQ(report.reader.size(), 2u);
  for (const auto& [k, m] : report.reader) {
    EXPECT_EQ(m.em, 1.0) << k;
    EXPECT_EQ(m.sas, 1.0) << k;
    EXPECT_EQ(m.accuracy, 1.0) << k;
  }
}

}  // namespace
}  // namespace sciqa::eval
