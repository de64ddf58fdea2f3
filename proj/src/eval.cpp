#include "easte/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "easte/error.hpp"

namespace easte {

namespace {

constexpr std::size_t kExactMatchingLimit = 10;

std::string fold(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool labels_match(const Quad& gold, const Quad& pred, EvalMode mode) {
  switch (mode) {
    case EvalMode::easte:
      return gold.entity == pred.entity && gold.aspect == pred.aspect &&
             gold.sentiment == pred.sentiment;
    case EvalMode::tasd:
      // entity#aspect chained into one element, plus sentiment
      return chain_tasd(gold).category == chain_tasd(pred).category &&
             gold.sentiment == pred.sentiment;
    case EvalMode::element_entity: return gold.entity == pred.entity;
    case EvalMode::element_aspect: return gold.aspect == pred.aspect;
    case EvalMode::element_sentiment: return gold.sentiment == pred.sentiment;
  }
  return false;
}

bool target_match(const GoldQuad& gold, const PredQuad& pred, MatchRegime regime) {
  if (regime == MatchRegime::generative) {
    bool gold_null = !gold.quad.target.has_value();
    bool pred_null = !pred.quad.target.has_value();
    if (gold_null || pred_null) return gold_null && pred_null;
    return fold(*gold.quad.target) == fold(*pred.quad.target);
  }
  return overlap_correct(gold.slot_range, pred.slots);
}

bool compatible(const GoldQuad& gold, const PredQuad& pred, EvalMode mode, MatchRegime regime) {
  return labels_match(gold.quad, pred.quad, mode) && target_match(gold, pred, regime);
}

// Maximum-cardinality bipartite matching via augmenting paths.
class Matcher {
public:
  Matcher(std::size_t gold_count, std::vector<std::vector<std::size_t>> adj)
      : adj_(std::move(adj)), pred_owner_(gold_count, npos) {
    std::size_t max_pred = 0;
    for (const auto& row : adj_)
      for (std::size_t p : row) max_pred = std::max(max_pred, p + 1);
    match_of_pred_.assign(max_pred, npos);
  }

  std::vector<std::size_t> solve() { // pred index per gold, npos if unmatched
    std::vector<std::size_t> match_of_gold(adj_.size(), npos);
    for (std::size_t g = 0; g < adj_.size(); ++g) {
      std::vector<bool> visited(match_of_pred_.size(), false);
      try_augment(g, visited, match_of_gold);
    }
    return match_of_gold;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  bool try_augment(std::size_t g, std::vector<bool>& visited,
                   std::vector<std::size_t>& match_of_gold) {
    for (std::size_t p : adj_[g]) {
      if (visited[p]) continue;
      visited[p] = true;
      if (match_of_pred_[p] == npos || try_augment(match_of_pred_[p], visited, match_of_gold)) {
        match_of_pred_[p] = g;
        match_of_gold[g] = p;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> pred_owner_;
  std::vector<std::size_t> match_of_pred_;
};

} // namespace

EvalMode eval_mode_from_string(const std::string& name) {
  if (name == "easte") return EvalMode::easte;
  if (name == "tasd") return EvalMode::tasd;
  if (name == "entity") return EvalMode::element_entity;
  if (name == "aspect") return EvalMode::element_aspect;
  if (name == "sentiment") return EvalMode::element_sentiment;
  throw ConfigError("unknown mode '" + name + "' (expected easte|tasd|entity|aspect|sentiment)");
}

MatchRegime match_regime_from_string(const std::string& name) {
  if (name == "token") return MatchRegime::token;
  if (name == "generative") return MatchRegime::generative;
  throw ConfigError("unknown regime '" + name + "' (expected token|generative)");
}

std::string to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::easte: return "easte";
    case EvalMode::tasd: return "tasd";
    case EvalMode::element_entity: return "entity";
    case EvalMode::element_aspect: return "aspect";
    case EvalMode::element_sentiment: return "sentiment";
  }
  return "?";
}

std::string to_string(MatchRegime regime) {
  return regime == MatchRegime::token ? "token" : "generative";
}

bool overlap_correct(std::pair<std::size_t, std::size_t> gold_range,
                     const std::vector<std::size_t>& predicted_slots) {
  std::size_t range_len = gold_range.second - gold_range.first + 1;
  std::size_t hits = 0;
  for (std::size_t s = gold_range.first; s <= gold_range.second; ++s)
    if (std::find(predicted_slots.begin(), predicted_slots.end(), s) != predicted_slots.end())
      ++hits;
  return 2 * hits >= range_len; // >= 50% of the gold range
}

MatchResult match_quads(const std::vector<GoldQuad>& gold, const std::vector<PredQuad>& pred,
                        EvalMode mode, MatchRegime regime, bool* greedy_fallback) {
  MatchResult result;
  std::vector<bool> pred_taken(pred.size(), false);
  std::vector<bool> gold_taken(gold.size(), false);

  if (gold.size() <= kExactMatchingLimit && pred.size() <= kExactMatchingLimit) {
    if (greedy_fallback) *greedy_fallback = false;
    std::vector<std::vector<std::size_t>> adj(gold.size());
    for (std::size_t g = 0; g < gold.size(); ++g)
      for (std::size_t p = 0; p < pred.size(); ++p)
        if (compatible(gold[g], pred[p], mode, regime)) adj[g].push_back(p);
    Matcher matcher(gold.size(), std::move(adj));
    std::vector<std::size_t> match_of_gold = matcher.solve();
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (match_of_gold[g] != Matcher::npos) {
        result.matched.emplace_back(g, match_of_gold[g]);
        gold_taken[g] = true;
        pred_taken[match_of_gold[g]] = true;
      }
    }
  } else {
    // adversarially large sentences: greedy in gold order
    if (greedy_fallback) *greedy_fallback = true;
    for (std::size_t g = 0; g < gold.size(); ++g) {
      for (std::size_t p = 0; p < pred.size(); ++p) {
        if (pred_taken[p]) continue;
        if (compatible(gold[g], pred[p], mode, regime)) {
          result.matched.emplace_back(g, p);
          gold_taken[g] = true;
          pred_taken[p] = true;
          break;
        }
      }
    }
  }

  for (std::size_t g = 0; g < gold.size(); ++g)
    if (!gold_taken[g]) result.unmatched_gold.push_back(g);
  for (std::size_t p = 0; p < pred.size(); ++p)
    if (!pred_taken[p]) result.unmatched_pred.push_back(p);
  return result;
}

std::vector<GoldQuad> gold_quads(const ReviewSentence& sentence, MatchRegime regime) {
  std::vector<GoldQuad> out;
  std::vector<Token> tokens;
  if (regime == MatchRegime::token) tokens = tokenize(sentence.text);
  for (const auto& op : sentence.opinions) {
    GoldQuad g;
    g.quad.entity = op.entity;
    g.quad.aspect = op.aspect;
    g.quad.sentiment = op.sentiment;
    if (op.target) g.quad.target = op.target->surface;
    if (regime == MatchRegime::token) {
      if (op.implicit()) {
        g.slot_range = {0, 0};
      } else {
        auto [f, l] = align_target(tokens, op.target->from, op.target->to);
        g.slot_range = {f + 1, l + 1};
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

EvalReport score(const Corpus& gold_corpus, const PredictionMap& predictions, EvalMode mode,
                 MatchRegime regime) {
  EvalReport report;
  report.mode = mode;
  report.regime = regime;

  for (const auto& [id, quads] : predictions) {
    bool known = std::any_of(gold_corpus.sentences.begin(), gold_corpus.sentences.end(),
                             [&](const ReviewSentence& s) { return s.id == id; });
    if (!known) throw Error("prediction for unknown sentence id '" + id + "'");
  }

  static const std::vector<PredQuad> kNoPredictions;
  for (const auto& sentence : gold_corpus.sentences) {
    auto it = predictions.find(sentence.id);
    const std::vector<PredQuad>& pred = it == predictions.end() ? kNoPredictions : it->second;
    std::vector<GoldQuad> gold = gold_quads(sentence, regime);
    MatchResult match = match_quads(gold, pred, mode, regime);

    report.matched += match.matched.size();
    report.gold_total += gold.size();
    report.pred_total += pred.size();
    report.per_sentence.push_back(
        {sentence.id, gold.size(), pred.size(), match.matched.size()});
  }

  double m = static_cast<double>(report.matched);
  if (report.pred_total > 0)
    report.precision = m / static_cast<double>(report.pred_total);
  else
    report.precision = report.gold_total == 0 ? 1.0 : 0.0;
  if (report.gold_total > 0)
    report.recall = m / static_cast<double>(report.gold_total);
  else
    report.recall = 1.0;
  double pr = report.precision + report.recall;
  report.f1 = pr > 0.0 ? 2.0 * report.precision * report.recall / pr : 0.0;
  return report;
}

ChainedQuad chain_tasd(const Quad& quad) {
  return ChainedQuad{quad.target, quad.entity + "#" + quad.aspect, quad.sentiment};
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
  return buf;
}

} // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(report.mode);
  j["regime"] = to_string(report.regime);
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["precision_pct"] = pct(report.precision);
  j["recall_pct"] = pct(report.recall);
  j["f1_pct"] = pct(report.f1);
  j["matched"] = report.matched;
  j["gold_total"] = report.gold_total;
  j["pred_total"] = report.pred_total;
  auto& per = j["per_sentence"] = nlohmann::ordered_json::array();
  for (const auto& d : report.per_sentence) {
    nlohmann::ordered_json s;
    s["id"] = d.sentence_id;
    s["gold"] = d.gold_total;
    s["pred"] = d.pred_total;
    s["matched"] = d.matched;
    per.push_back(std::move(s));
  }
  return j.dump(2);
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "mode,regime,precision,recall,f1,matched,gold_total,pred_total\n";
  out += to_string(report.mode) + "," + to_string(report.regime) + "," + pct(report.precision) +
         "," + pct(report.recall) + "," + pct(report.f1) + "," + std::to_string(report.matched) +
         "," + std::to_string(report.gold_total) + "," + std::to_string(report.pred_total) + "\n";
  return out;
}

std::string report_summary_line(const EvalReport& report) {
  return "P=" + pct(report.precision) + " R=" + pct(report.recall) + " F1=" + pct(report.f1);
}

} // namespace easte
