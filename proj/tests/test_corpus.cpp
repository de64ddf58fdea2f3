#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "easte/corpus.hpp"
#include "easte/error.hpp"

using namespace easte;

namespace {

const char* kSampleXml = R"(<?xml version="1.0" encoding="UTF-8"?>
<Reviews>
  <Review rid="r1">
    <sentences>
      <sentence id="r1:0">
        <text>The food arrived 20 minutes after I called, cold and soggy.</text>
        <Opinions>
          <Opinion target="NULL" category="SERVICE#GENERAL" polarity="negative" from="0" to="0"/>
          <Opinion target="food" category="FOOD#QUALITY" polarity="negative" from="4" to="8"/>
        </Opinions>
      </sentence>
      <sentence id="r1:1">
        <text>We will be back!</text>
        <Opinions/>
      </sentence>
    </sentences>
  </Review>
</Reviews>
)";

Corpus random_corpus(std::mt19937_64& rng, std::size_t sentence_count) {
  const LabelInventory& inv = LabelInventory::restaurant();
  static const std::vector<std::string> words = {"pasta", "waiter", "decor", "wine",
                                                 "menu",  "table",  "chef",  "price"};
  Corpus corpus;
  for (std::size_t i = 0; i < sentence_count; ++i) {
    ReviewSentence s;
    s.id = "gen:" + std::to_string(i);
    std::size_t n = 1 + rng() % 6;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t w = 0; w < n; ++w) {
      if (w > 0) s.text += ' ';
      std::size_t from = s.text.size();
      s.text += words[rng() % words.size()];
      spans.emplace_back(from, s.text.size());
    }
    std::size_t opinions = rng() % 4;
    for (std::size_t k = 0; k < opinions; ++k) {
      Opinion op;
      op.entity = inv.entities()[rng() % inv.entities().size()];
      op.aspect = inv.aspects()[rng() % inv.aspects().size()];
      op.sentiment = inv.sentiments()[rng() % inv.sentiments().size()];
      if (rng() % 3 != 0) {
        auto [from, to] = spans[rng() % spans.size()];
        op.target = TargetSpan{from, to, s.text.substr(from, to - from)};
      }
      if (std::find(s.opinions.begin(), s.opinions.end(), op) == s.opinions.end())
        s.opinions.push_back(std::move(op));
    }
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

} // namespace

TEST_CASE("split_category round-trips every inventory pair") {
  const LabelInventory& inv = LabelInventory::restaurant();
  for (const auto& e : inv.entities()) {
    for (const auto& a : inv.aspects()) {
      auto [entity, aspect] = split_category(e + "#" + a);
      CHECK(entity == e);
      CHECK(aspect == a);
    }
  }
  // lower case input is normalized
  auto [e2, a2] = split_category("food#quality");
  CHECK(e2 == "FOOD");
  CHECK(a2 == "QUALITY");

  CHECK_THROWS_AS(split_category("FOODQUALITY"), FormatError);
  CHECK_THROWS_AS(split_category("FOOD#STYLE#OPTIONS"), FormatError);
}

TEST_CASE("xml parsing recovers spans, implicit targets and empty opinion lists") {
  Corpus corpus = parse_semeval_xml(kSampleXml, LabelInventory::restaurant());
  REQUIRE(corpus.sentences.size() == 2);

  const ReviewSentence& s0 = corpus.sentences[0];
  CHECK(s0.id == "r1:0");
  REQUIRE(s0.opinions.size() == 2);
  CHECK(s0.opinions[0].implicit());
  CHECK(s0.opinions[0].entity == "SERVICE");
  CHECK(s0.opinions[0].aspect == "GENERAL");
  CHECK(s0.opinions[0].sentiment == "negative");
  REQUIRE(s0.opinions[1].target.has_value());
  CHECK(s0.opinions[1].target->from == 4);
  CHECK(s0.opinions[1].target->to == 8);
  CHECK(s0.opinions[1].target->surface == "food");
  CHECK(s0.text.substr(4, 4) == "food");

  CHECK(corpus.sentences[1].opinions.empty());
}

TEST_CASE("xml parsing rejects labels outside the inventory") {
  std::string xml = R"(<Reviews><Review><sentences>
    <sentence id="x"><text>fresh fish</text><Opinions>
      <Opinion target="fish" category="FOOD#FRESHNESS" polarity="positive" from="6" to="10"/>
    </Opinions></sentence></sentences></Review></Reviews>)";
  CHECK_THROWS_AS(parse_semeval_xml(xml, LabelInventory::restaurant()), InventoryError);
}

TEST_CASE("xml parsing rejects spans that do not match the text") {
  std::string xml = R"(<Reviews><sentence id="x"><text>nice soup</text><Opinions>
      <Opinion target="soup" category="FOOD#QUALITY" polarity="positive" from="0" to="4"/>
    </Opinions></sentence></Reviews>)";
  CHECK_THROWS_AS(parse_semeval_xml(xml, LabelInventory::restaurant()), SpanError);
}

TEST_CASE("xml entities are decoded in text and spans still validate") {
  std::string xml = R"(<Reviews><sentence id="x"><text>fish &amp; chips</text><Opinions>
      <Opinion target="fish &amp; chips" category="FOOD#QUALITY" polarity="positive" from="0" to="12"/>
    </Opinions></sentence></Reviews>)";
  Corpus corpus = parse_semeval_xml(xml, LabelInventory::restaurant());
  REQUIRE(corpus.sentences.size() == 1);
  CHECK(corpus.sentences[0].text == "fish & chips");
  CHECK(corpus.sentences[0].opinions[0].target->surface == "fish & chips");
}

TEST_CASE("identical duplicate opinions collapse with a warning") {
  std::string xml = R"(<Reviews><sentence id="x"><text>nice soup</text><Opinions>
      <Opinion target="soup" category="FOOD#QUALITY" polarity="positive" from="5" to="9"/>
      <Opinion target="soup" category="FOOD#QUALITY" polarity="positive" from="5" to="9"/>
    </Opinions></sentence></Reviews>)";
  std::vector<std::string> warnings;
  Corpus corpus =
      parse_semeval_xml(xml, LabelInventory::restaurant(), Split::train, &warnings);
  CHECK(corpus.sentences[0].opinions.size() == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("malformed xml reports line numbers") {
  std::string xml = "<Reviews>\n<sentence id=\"a\">\n<text>hi</wrong>\n</sentence></Reviews>";
  try {
    parse_semeval_xml(xml, LabelInventory::restaurant());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("canonical serialization round-trips randomized corpora") {
  std::mt19937_64 rng(20260823);
  for (int trial = 0; trial < 25; ++trial) {
    Corpus corpus = random_corpus(rng, 1 + rng() % 12);
    std::string jsonl = write_canonical(corpus);
    Corpus back = parse_canonical(jsonl, LabelInventory::restaurant());
    CHECK(back.sentences == corpus.sentences);
    // serialization is stable
    CHECK(write_canonical(back) == jsonl);
  }
}

TEST_CASE("canonical parse reports the offending line") {
  std::string good = R"({"id":"a","text":"ok food","opinions":[]})";
  std::string bad = good + "\n{\"id\":\"b\",\"text\":";
  try {
    parse_canonical(bad, LabelInventory::restaurant());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("canonical parse applies the same validation as the xml path") {
  std::string bad_label =
      R"({"id":"a","text":"ok","opinions":[{"target":null,"from":0,"to":0,"entity":"CAR","aspect":"GENERAL","sentiment":"positive"}]})";
  CHECK_THROWS_AS(parse_canonical(bad_label, LabelInventory::restaurant()), InventoryError);

  std::string bad_span =
      R"({"id":"a","text":"ok","opinions":[{"target":"zz","from":0,"to":2,"entity":"FOOD","aspect":"QUALITY","sentiment":"positive"}]})";
  CHECK_THROWS_AS(parse_canonical(bad_span, LabelInventory::restaurant()), SpanError);

  std::string dup_id = R"({"id":"a","text":"ok","opinions":[]})"
                       "\n"
                       R"({"id":"a","text":"ok","opinions":[]})";
  CHECK_THROWS_AS(parse_canonical(dup_id, LabelInventory::restaurant()), ParseError);
}

TEST_CASE("stats counters are internally consistent") {
  std::mt19937_64 rng(7);
  Corpus corpus = random_corpus(rng, 40);
  StatsReport stats = corpus_stats(corpus);

  CHECK(stats.sentence_count == corpus.sentences.size());
  std::size_t opinions = 0, implicit = 0, multi = 0;
  for (const auto& s : corpus.sentences) {
    opinions += s.opinions.size();
    if (s.opinions.size() > 1) ++multi;
    for (const auto& op : s.opinions)
      if (op.implicit()) ++implicit;
  }
  CHECK(stats.opinion_count == opinions);
  CHECK(stats.implicit_count == implicit);
  CHECK(stats.multi_opinion_sentence_count == multi);

  auto total = [](const std::map<std::string, std::size_t>& m) {
    std::size_t t = 0;
    for (const auto& [k, v] : m) t += v;
    return t;
  };
  CHECK(total(stats.per_entity) == opinions);
  CHECK(total(stats.per_aspect) == opinions);
  CHECK(total(stats.per_sentiment) == opinions);
}
