#include <doctest.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "easte/error.hpp"
#include "easte/labeling.hpp"

using namespace easte;

namespace {

// Offset oracle: every token's surface must equal the text slice it claims,
// tokens must be in order and non-overlapping, and dropping whitespace from
// the text must reproduce the token concatenation.
void check_token_invariants(const std::string& text, const std::vector<Token>& tokens) {
  std::size_t prev_end = 0;
  std::string joined;
  for (const auto& tok : tokens) {
    REQUIRE(tok.start < tok.end);
    REQUIRE(tok.end <= text.size());
    CHECK(tok.start >= prev_end);
    CHECK(text.substr(tok.start, tok.end - tok.start) == tok.surface);
    prev_end = tok.end;
    joined += tok.surface;
  }
  std::string no_ws;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) no_ws += c;
  CHECK(joined == no_ws);
}

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

struct PlannedOpinion {
  Opinion opinion;
  std::size_t first_slot = 0;
  std::size_t last_slot = 0;
};

// Sentence with non-overlapping targets and pairwise distinct label triples,
// so encoding is collision-free and runs never merge.
ReviewSentence random_clean_sentence(std::mt19937_64& rng, std::vector<Quad>* expected) {
  const LabelInventory& inv = LabelInventory::restaurant();
  static const std::vector<std::string> words = {"bread", "staff", "room", "beer",
                                                 "list",  "tuna",  "cake", "view"};
  ReviewSentence s;
  s.id = "clean";
  std::size_t n = 2 + rng() % 7;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t w = 0; w < n; ++w) {
    if (w > 0) s.text += ' ';
    std::size_t from = s.text.size();
    s.text += words[rng() % words.size()];
    spans.emplace_back(from, s.text.size());
  }

  std::set<std::array<std::size_t, 3>> used_triples;
  std::vector<bool> word_used(n, false);
  bool sentinel_used = false;
  std::size_t opinions = rng() % 4;
  for (std::size_t k = 0; k < opinions; ++k) {
    std::array<std::size_t, 3> pick{rng() % inv.entities().size(), rng() % inv.aspects().size(),
                                    rng() % inv.sentiments().size()};
    if (!used_triples.insert(pick).second) continue;
    Opinion op;
    op.entity = inv.entities()[pick[0]];
    op.aspect = inv.aspects()[pick[1]];
    op.sentiment = inv.sentiments()[pick[2]];

    if (!sentinel_used && rng() % 4 == 0) {
      sentinel_used = true;
      if (expected) expected->push_back({std::nullopt, op.entity, op.aspect, op.sentiment});
      s.opinions.push_back(std::move(op));
      continue;
    }
    std::size_t first = rng() % n;
    std::size_t last = std::min(n - 1, first + rng() % 2);
    bool free = true;
    for (std::size_t w = first; w <= last; ++w) free = free && !word_used[w];
    // also keep one free word on each side so adjacent runs cannot merge
    if (first > 0) free = free && !word_used[first - 1];
    if (last + 1 < n) free = free && !word_used[last + 1];
    if (!free) continue;
    for (std::size_t w = first; w <= last; ++w) word_used[w] = true;
    if (first > 0) word_used[first - 1] = true;
    if (last + 1 < n) word_used[last + 1] = true;

    std::string surface = s.text.substr(spans[first].first, spans[last].second - spans[first].first);
    op.target = TargetSpan{spans[first].first, spans[last].second, surface};
    if (expected) expected->push_back({surface, op.entity, op.aspect, op.sentiment});
    s.opinions.push_back(std::move(op));
  }
  if (expected) {
    std::sort(expected->begin(), expected->end());
    expected->erase(std::unique(expected->begin(), expected->end()), expected->end());
  }
  return s;
}

} // namespace

TEST_CASE("tokenize splits on whitespace and peels punctuation") {
  std::string text = "The food arrived 20 minutes after I called, cold and soggy.";
  auto tokens = tokenize(text);
  check_token_invariants(text, tokens);
  CHECK(surfaces(tokens) == std::vector<std::string>{"The", "food", "arrived", "20", "minutes",
                                                     "after", "I", "called", ",", "cold", "and",
                                                     "soggy", "."});
}

TEST_CASE("tokenize handles punctuation clusters and edge shapes") {
  auto t1 = tokenize("\"great!!\"");
  check_token_invariants("\"great!!\"", t1);
  CHECK(surfaces(t1) == std::vector<std::string>{"\"", "great", "!", "!", "\""});

  auto t2 = tokenize("(maybe 3 of each).");
  check_token_invariants("(maybe 3 of each).", t2);
  CHECK(surfaces(t2) == std::vector<std::string>{"(", "maybe", "3", "of", "each", ")", "."});

  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n").empty());

  // all-punctuation chunk becomes single-char tokens
  auto t3 = tokenize("...");
  CHECK(surfaces(t3) == std::vector<std::string>{".", ".", "."});

  // interior punctuation stays inside the core token
  auto t4 = tokenize("wasn't cheap-ish");
  CHECK(surfaces(t4) == std::vector<std::string>{"wasn't", "cheap-ish"});
}

TEST_CASE("tokenize invariants hold on random byte soup") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    std::size_t len = rng() % 40;
    for (std::size_t i = 0; i < len; ++i) text += static_cast<char>(' ' + rng() % 95);
    check_token_invariants(text, tokenize(text));
  }
}

TEST_CASE("align_target maps character spans to minimal token ranges") {
  std::string text = "The wine list is extensive.";
  auto tokens = tokenize(text);

  auto wine_list = align_target(tokens, 4, 13);
  CHECK(wine_list == std::pair<std::size_t, std::size_t>{1, 2});

  // span cutting into the middle of a token still claims that token
  auto partial = align_target(tokens, 5, 7);
  CHECK(partial == std::pair<std::size_t, std::size_t>{1, 1});

  // span covering only whitespace overlaps nothing
  CHECK_THROWS_AS(align_target(tokens, 3, 4), SpanError);
  CHECK_THROWS_AS(align_target(tokens, 100, 104), SpanError);
}

TEST_CASE("encode_labels places explicit and implicit opinions") {
  ReviewSentence s;
  s.id = "s1";
  s.text = "The food arrived 20 minutes after I called, cold and soggy.";
  Opinion implicit;
  implicit.entity = "SERVICE";
  implicit.aspect = "GENERAL";
  implicit.sentiment = "negative";
  Opinion food;
  food.target = TargetSpan{4, 8, "food"};
  food.entity = "FOOD";
  food.aspect = "QUALITY";
  food.sentiment = "negative";
  s.opinions = {implicit, food};

  TokenLabeling lab = encode_labels(s, LabelInventory::restaurant());
  REQUIRE(lab.labels.size() == lab.tokens.size() + 1);
  CHECK(lab.labels[0] == SlotTriple{"SERVICE", "GENERAL", "negative"});
  CHECK(lab.labels[2] == SlotTriple{"FOOD", "QUALITY", "negative"}); // token "food" is index 1
  std::size_t labeled = 0;
  for (const auto& t : lab.labels)
    if (!t.none()) ++labeled;
  CHECK(labeled == 2);

  auto quads = decode_labels(lab);
  REQUIRE(quads.size() == 2);
  CHECK(quads[0] == Quad{std::nullopt, "SERVICE", "GENERAL", "negative"});
  CHECK(quads[1] == Quad{std::string("food"), "FOOD", "QUALITY", "negative"});
}

TEST_CASE("collisions keep the earlier opinion and record the loser") {
  ReviewSentence s;
  s.id = "s2";
  s.text = "great food here";
  Opinion first;
  first.target = TargetSpan{6, 10, "food"};
  first.entity = "FOOD";
  first.aspect = "QUALITY";
  first.sentiment = "positive";
  Opinion second = first;
  second.sentiment = "negative";
  Opinion third; // implicit, collides with nothing
  third.entity = "RESTAURANT";
  third.aspect = "GENERAL";
  third.sentiment = "positive";
  s.opinions = {first, second, third};

  std::vector<Collision> collisions;
  TokenLabeling lab = encode_labels(s, LabelInventory::restaurant(), &collisions);
  CHECK(lab.labels[2].sentiment == "positive");
  REQUIRE(collisions.size() == 1);
  CHECK(collisions[0].sentence_id == "s2");
  CHECK(collisions[0].opinion_index == 1);
  CHECK(collisions[0].opinion == second);

  std::string jsonl = collisions_to_jsonl(collisions);
  CHECK(jsonl.find("\"sentence_id\":\"s2\"") != std::string::npos);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 1);
}

TEST_CASE("identical triples on overlapping slots are not collisions") {
  ReviewSentence s;
  s.id = "s3";
  s.text = "fish and chips";
  Opinion a;
  a.target = TargetSpan{0, 14, "fish and chips"};
  a.entity = "FOOD";
  a.aspect = "QUALITY";
  a.sentiment = "positive";
  Opinion b;
  b.target = TargetSpan{0, 4, "fish"};
  b.entity = "FOOD";
  b.aspect = "QUALITY";
  b.sentiment = "positive";
  s.opinions = {a, b};

  std::vector<Collision> collisions;
  encode_labels(s, LabelInventory::restaurant(), &collisions);
  CHECK(collisions.empty());
}

TEST_CASE("sentinel collisions are recorded too") {
  ReviewSentence s;
  s.id = "s4";
  s.text = "meh";
  Opinion a;
  a.entity = "RESTAURANT";
  a.aspect = "GENERAL";
  a.sentiment = "neutral";
  Opinion b = a;
  b.sentiment = "negative";
  s.opinions = {a, b};

  std::vector<Collision> collisions;
  TokenLabeling lab = encode_labels(s, LabelInventory::restaurant(), &collisions);
  CHECK(lab.labels[0].sentiment == "neutral");
  REQUIRE(collisions.size() == 1);
  CHECK(collisions[0].opinion_index == 1);
}

TEST_CASE("decode after encode recovers the quad set on collision-free sentences") {
  std::mt19937_64 rng(20260823);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Quad> expected;
    ReviewSentence s = random_clean_sentence(rng, &expected);
    std::vector<Collision> collisions;
    TokenLabeling lab = encode_labels(s, LabelInventory::restaurant(), &collisions);
    CHECK(collisions.empty());
    CHECK(lab.labels.size() == lab.tokens.size() + 1);
    CHECK(decode_labels(lab) == expected);
  }
}

TEST_CASE("every slot is fully NONE or fully labeled after encoding") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Quad> expected;
    ReviewSentence s = random_clean_sentence(rng, &expected);
    TokenLabeling lab = encode_labels(s, LabelInventory::restaurant());
    for (const auto& t : lab.labels) {
      bool all = !t.entity.empty() && !t.aspect.empty() && !t.sentiment.empty();
      CHECK((t.none() || all));
    }
  }
}
