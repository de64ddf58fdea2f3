#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "easte/error.hpp"
#include "easte/eval.hpp"
#include "oracles.hpp"

using namespace easte;

namespace {

GoldQuad g(const char* target, const char* e, const char* a, const char* s, std::size_t lo,
           std::size_t hi) {
  GoldQuad q;
  if (target) q.quad.target = target;
  q.quad.entity = e;
  q.quad.aspect = a;
  q.quad.sentiment = s;
  q.slot_range = {lo, hi};
  return q;
}

PredQuad p(const char* target, const char* e, const char* a, const char* s,
           std::vector<std::size_t> slots) {
  PredQuad q;
  if (target) q.quad.target = target;
  q.quad.entity = e;
  q.quad.aspect = a;
  q.quad.sentiment = s;
  q.slots = std::move(slots);
  return q;
}

} // namespace

TEST_CASE("overlap_correct implements the 50% rule") {
  // 2 of 4 slots hit: exactly half, counts
  CHECK(overlap_correct({1, 4}, {1, 2, 9}));
  // 0 of 1: miss
  CHECK(!overlap_correct({3, 3}, {1, 2}));
  // 1 of 3: below half
  CHECK(!overlap_correct({1, 3}, {2}));
  // 2 of 3: above half
  CHECK(overlap_correct({1, 3}, {2, 3}));
  // sentinel vs sentinel
  CHECK(overlap_correct({0, 0}, {0}));
}

TEST_CASE("overlap_correct boundary sweep over range lengths 1 through 6") {
  for (std::size_t len = 1; len <= 6; ++len) {
    std::pair<std::size_t, std::size_t> range{1, len};
    for (std::size_t hits = 0; hits <= len; ++hits) {
      std::vector<std::size_t> slots;
      for (std::size_t s = 1; s <= hits; ++s) slots.push_back(s);
      // pad with slots outside the range; they must not affect the rule
      slots.push_back(len + 5);
      bool expected = 2 * hits >= len;
      CHECK(overlap_correct(range, slots) == expected);
    }
  }
}

TEST_CASE("match_quads pairs compatible quads one-to-one") {
  std::vector<GoldQuad> gold = {
      g("food", "FOOD", "QUALITY", "negative", 2, 2),
      g(nullptr, "SERVICE", "GENERAL", "negative", 0, 0),
  };
  std::vector<PredQuad> pred = {
      p(nullptr, "SERVICE", "GENERAL", "negative", {0}),
      p("food", "FOOD", "QUALITY", "negative", {2}),
      p("soggy", "FOOD", "QUALITY", "negative", {11}),
  };

  for (MatchRegime regime : {MatchRegime::token, MatchRegime::generative}) {
    MatchResult r = match_quads(gold, pred, EvalMode::easte, regime);
    CHECK(r.matched.size() == 2);
    CHECK(r.unmatched_gold.empty());
    REQUIRE(r.unmatched_pred.size() == 1);
    CHECK(r.unmatched_pred[0] == 2);
  }
}

TEST_CASE("two identical implicit golds cannot share one prediction") {
  std::vector<GoldQuad> gold = {
      g(nullptr, "RESTAURANT", "GENERAL", "negative", 0, 0),
      g(nullptr, "RESTAURANT", "PRICES", "negative", 0, 0),
  };
  std::vector<PredQuad> pred = {p(nullptr, "RESTAURANT", "GENERAL", "negative", {0})};

  MatchResult r = match_quads(gold, pred, EvalMode::easte, MatchRegime::generative);
  CHECK(r.matched.size() == 1);

  // under element_entity both golds are compatible, still only one pairing
  r = match_quads(gold, pred, EvalMode::element_entity, MatchRegime::generative);
  CHECK(r.matched.size() == 1);
  CHECK(r.unmatched_gold.size() == 1);
}

TEST_CASE("matching finds the optimal assignment where greedy would not") {
  // gold0 matches both preds, gold1 matches only pred0: the optimal
  // assignment gives gold0 -> pred1 and gold1 -> pred0.
  std::vector<GoldQuad> gold = {
      g("a", "FOOD", "QUALITY", "positive", 1, 2),
      g("b", "FOOD", "QUALITY", "positive", 1, 1),
  };
  std::vector<PredQuad> pred = {
      p("x", "FOOD", "QUALITY", "positive", {1}),
      p("y", "FOOD", "QUALITY", "positive", {2}),
  };
  MatchResult r = match_quads(gold, pred, EvalMode::easte, MatchRegime::token);
  CHECK(r.matched.size() == 2);
}

TEST_CASE("greedy fallback engages only beyond ten quads per side") {
  std::vector<GoldQuad> gold(11, g("a", "FOOD", "QUALITY", "positive", 1, 1));
  std::vector<PredQuad> pred = {p("a", "FOOD", "QUALITY", "positive", {1})};
  bool fallback = false;
  match_quads(gold, pred, EvalMode::easte, MatchRegime::token, &fallback);
  CHECK(fallback);

  gold.resize(10);
  match_quads(gold, pred, EvalMode::easte, MatchRegime::token, &fallback);
  CHECK(!fallback);
}

TEST_CASE("generative matching folds case and surrounding whitespace") {
  std::vector<GoldQuad> gold = {g("Wine List", "DRINKS", "STYLE_OPTIONS", "positive", 0, 0)};
  std::vector<PredQuad> pred = {p(" wine list ", "DRINKS", "STYLE_OPTIONS", "positive", {})};
  MatchResult r = match_quads(gold, pred, EvalMode::easte, MatchRegime::generative);
  CHECK(r.matched.size() == 1);

  // a NULL prediction never matches an explicit gold target
  pred = {p(nullptr, "DRINKS", "STYLE_OPTIONS", "positive", {})};
  r = match_quads(gold, pred, EvalMode::easte, MatchRegime::generative);
  CHECK(r.matched.empty());
}

TEST_CASE("chain_tasd merges entity and aspect into one category") {
  Quad q{std::string("tent"), "AMBIENCE", "GENERAL", "positive"};
  ChainedQuad c = chain_tasd(q);
  CHECK(c.category == "AMBIENCE#GENERAL");
  CHECK(c.target == q.target);
  CHECK(c.sentiment == "positive");
}

TEST_CASE("tasd mode requires the chained category and sentiment") {
  std::vector<GoldQuad> gold = {g("a", "FOOD", "QUALITY", "positive", 0, 0)};
  std::vector<PredQuad> wrong_aspect = {p("a", "FOOD", "PRICES", "positive", {})};
  CHECK(match_quads(gold, wrong_aspect, EvalMode::tasd, MatchRegime::generative).matched.empty());
  std::vector<PredQuad> wrong_sent = {p("a", "FOOD", "QUALITY", "negative", {})};
  CHECK(match_quads(gold, wrong_sent, EvalMode::tasd, MatchRegime::generative).matched.empty());
  std::vector<PredQuad> right = {p("a", "FOOD", "QUALITY", "positive", {})};
  CHECK(match_quads(gold, right, EvalMode::tasd, MatchRegime::generative).matched.size() == 1);
}

TEST_CASE("score computes micro-averaged precision, recall and F1") {
  // one sentence, 3 gold, 2 predictions, both correct:
  // P = 2/2 = 1, R = 2/3, F1 = 0.8
  Corpus corpus;
  ReviewSentence s;
  s.id = "a";
  s.text = "alpha bravo charlie";
  Opinion o1;
  o1.target = TargetSpan{0, 5, "alpha"};
  o1.entity = "FOOD";
  o1.aspect = "QUALITY";
  o1.sentiment = "positive";
  Opinion o2;
  o2.target = TargetSpan{6, 11, "bravo"};
  o2.entity = "SERVICE";
  o2.aspect = "GENERAL";
  o2.sentiment = "negative";
  Opinion o3;
  o3.entity = "AMBIENCE";
  o3.aspect = "GENERAL";
  o3.sentiment = "neutral";
  s.opinions = {o1, o2, o3};
  corpus.sentences = {s};

  PredictionMap preds;
  preds["a"] = {p("alpha", "FOOD", "QUALITY", "positive", {1}),
                p("bravo", "SERVICE", "GENERAL", "negative", {2})};

  for (MatchRegime regime : {MatchRegime::token, MatchRegime::generative}) {
    EvalReport r = score(corpus, preds, EvalMode::easte, regime);
    CHECK(r.matched == 2);
    CHECK(r.precision == doctest::Approx(1.0));
    CHECK(r.recall == doctest::Approx(2.0 / 3.0));
    CHECK(r.f1 == doctest::Approx(0.8));
    REQUIRE(r.per_sentence.size() == 1);
    CHECK(r.per_sentence[0].matched == 2);
  }

  CHECK(report_summary_line(score(corpus, preds, EvalMode::easte, MatchRegime::generative)) ==
        "P=100.00 R=66.67 F1=80.00");
}

TEST_CASE("score edge rules for empty sides") {
  Corpus corpus;
  ReviewSentence s;
  s.id = "a";
  s.text = "alpha";
  corpus.sentences = {s};

  // no gold, no predictions: P = R = 1
  EvalReport r = score(corpus, {}, EvalMode::easte, MatchRegime::generative);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);

  // no gold, one prediction: P = 0, R = 1
  PredictionMap preds;
  preds["a"] = {p("alpha", "FOOD", "QUALITY", "positive", {1})};
  r = score(corpus, preds, EvalMode::easte, MatchRegime::generative);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 0.0);

  // gold but no predictions: P = 0 (nothing predicted, gold exists)
  Opinion op;
  op.entity = "FOOD";
  op.aspect = "QUALITY";
  op.sentiment = "positive";
  corpus.sentences[0].opinions = {op};
  r = score(corpus, {}, EvalMode::easte, MatchRegime::generative);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
}

TEST_CASE("score rejects predictions for unknown sentence ids") {
  Corpus corpus;
  ReviewSentence s;
  s.id = "a";
  s.text = "alpha";
  corpus.sentences = {s};
  PredictionMap preds;
  preds["ghost"] = {};
  CHECK_THROWS_AS(score(corpus, preds, EvalMode::easte, MatchRegime::generative), Error);
}

TEST_CASE("scorer agrees with the brute-force oracle on random corpora") {
  std::mt19937_64 seeds(20260823);
  for (int trial = 0; trial < 60; ++trial) {
    oracles::CorpusGenerator gen(seeds());
    auto sentences = gen.sentences(1 + trial % 5, 6);
    Corpus corpus = oracles::to_corpus(sentences);
    PredictionMap preds = oracles::to_prediction_map(sentences);

    for (EvalMode mode : {EvalMode::easte, EvalMode::tasd, EvalMode::element_entity,
                          EvalMode::element_aspect, EvalMode::element_sentiment}) {
      for (MatchRegime regime : {MatchRegime::token, MatchRegime::generative}) {
        EvalReport got = score(corpus, preds, mode, regime);
        oracles::OracleScores want = oracles::oracle_score(sentences, mode, regime);
        CHECK(got.matched == want.matched);
        CHECK(got.gold_total == want.gold_total);
        CHECK(got.pred_total == want.pred_total);
        CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
        CHECK(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
        CHECK(got.f1 == doctest::Approx(want.f1).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("matched counts are invariant under prediction order") {
  std::mt19937_64 seeds(17);
  for (int trial = 0; trial < 30; ++trial) {
    oracles::CorpusGenerator gen(seeds());
    auto sentences = gen.sentences(3, 6);
    Corpus corpus = oracles::to_corpus(sentences);
    PredictionMap preds = oracles::to_prediction_map(sentences);

    PredictionMap shuffled = preds;
    std::mt19937_64 shuffle_rng(trial);
    for (auto& [id, quads] : shuffled) std::shuffle(quads.begin(), quads.end(), shuffle_rng);

    for (MatchRegime regime : {MatchRegime::token, MatchRegime::generative}) {
      EvalReport a = score(corpus, preds, EvalMode::easte, regime);
      EvalReport b = score(corpus, shuffled, EvalMode::easte, regime);
      CHECK(a.matched == b.matched);
      CHECK(a.f1 == b.f1);
    }
  }
}

TEST_CASE("element modes match at least as much as the full easte mode") {
  std::mt19937_64 seeds(31);
  for (int trial = 0; trial < 30; ++trial) {
    oracles::CorpusGenerator gen(seeds());
    auto sentences = gen.sentences(4, 6);
    Corpus corpus = oracles::to_corpus(sentences);
    PredictionMap preds = oracles::to_prediction_map(sentences);

    for (MatchRegime regime : {MatchRegime::token, MatchRegime::generative}) {
      std::size_t full = score(corpus, preds, EvalMode::easte, regime).matched;
      for (EvalMode mode : {EvalMode::tasd, EvalMode::element_entity, EvalMode::element_aspect,
                            EvalMode::element_sentiment}) {
        CHECK(score(corpus, preds, mode, regime).matched >= full);
      }
    }
  }
}

TEST_CASE("reports serialize to JSON, CSV and a summary line") {
  EvalReport report;
  report.mode = EvalMode::tasd;
  report.regime = MatchRegime::token;
  report.precision = 0.5;
  report.recall = 0.25;
  report.f1 = 1.0 / 3.0;
  report.matched = 1;
  report.gold_total = 4;
  report.pred_total = 2;
  report.per_sentence = {{"a", 4, 2, 1}};

  CHECK(report_summary_line(report) == "P=50.00 R=25.00 F1=33.33");

  std::string csv = report_to_csv(report);
  CHECK(csv.find("mode,regime,precision,recall,f1,matched,gold_total,pred_total\n") == 0);
  CHECK(csv.find("tasd,token,50.00,25.00,33.33,1,4,2\n") != std::string::npos);

  std::string json = report_to_json(report);
  CHECK(json.find("\"mode\": \"tasd\"") != std::string::npos);
  CHECK(json.find("\"f1_pct\": \"33.33\"") != std::string::npos);
  CHECK(json.find("\"per_sentence\"") != std::string::npos);
}

TEST_CASE("mode and regime names round-trip through their parsers") {
  for (EvalMode mode : {EvalMode::easte, EvalMode::tasd, EvalMode::element_entity,
                        EvalMode::element_aspect, EvalMode::element_sentiment})
    CHECK(eval_mode_from_string(to_string(mode)) == mode);
  for (MatchRegime regime : {MatchRegime::token, MatchRegime::generative})
    CHECK(match_regime_from_string(to_string(regime)) == regime);
  CHECK_THROWS_AS(eval_mode_from_string("bogus"), ConfigError);
  CHECK_THROWS_AS(match_regime_from_string("bogus"), ConfigError);
}

TEST_CASE("gold_quads aligns explicit targets onto slot ranges") {
  ReviewSentence s;
  s.id = "x";
  s.text = "The wine list is long.";
  Opinion op;
  op.target = TargetSpan{4, 13, "wine list"};
  op.entity = "DRINKS";
  op.aspect = "STYLE_OPTIONS";
  op.sentiment = "positive";
  Opinion imp;
  imp.entity = "RESTAURANT";
  imp.aspect = "GENERAL";
  imp.sentiment = "positive";
  s.opinions = {op, imp};

  auto token_gold = gold_quads(s, MatchRegime::token);
  REQUIRE(token_gold.size() == 2);
  CHECK(token_gold[0].slot_range == std::pair<std::size_t, std::size_t>{2, 3});
  CHECK(token_gold[1].slot_range == std::pair<std::size_t, std::size_t>{0, 0});

  auto gen_gold = gold_quads(s, MatchRegime::generative);
  CHECK(gen_gold[0].quad.target == std::string("wine list"));
  CHECK(!gen_gold[1].quad.target.has_value());
}
