#ifndef EASTE_EVAL_HPP
#define EASTE_EVAL_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "easte/corpus.hpp"
#include "easte/labeling.hpp"

namespace easte {

enum class EvalMode { easte, tasd, element_entity, element_aspect, element_sentiment };
enum class MatchRegime { token, generative };

EvalMode eval_mode_from_string(const std::string& name);       // throws ConfigError
MatchRegime match_regime_from_string(const std::string& name); // throws ConfigError
std::string to_string(EvalMode mode);
std::string to_string(MatchRegime regime);

/// Gold quad with its slot range (inclusive) in the token regime;
/// the sentinel slot is 0, token i occupies slot i + 1.
struct GoldQuad {
  Quad quad;
  std::pair<std::size_t, std::size_t> slot_range{0, 0};
};

/// Predicted quad with the slots of its run (token regime).
struct PredQuad {
  Quad quad;
  std::vector<std::size_t> slots;
};

/// True iff at least 50% of the gold range's slots appear in the
/// prediction's slot set.
bool overlap_correct(std::pair<std::size_t, std::size_t> gold_range,
                     const std::vector<std::size_t>& predicted_slots);

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> matched; // (gold idx, pred idx)
  std::vector<std::size_t> unmatched_gold;
  std::vector<std::size_t> unmatched_pred;
};

/// One-to-one matching of gold vs predicted quads under the given mode and
/// regime. Maximum-cardinality matching for up to 10 quads per side;
/// greedy gold-order beyond, with `*greedy_fallback` set when given.
MatchResult match_quads(const std::vector<GoldQuad>& gold, const std::vector<PredQuad>& pred,
                        EvalMode mode, MatchRegime regime, bool* greedy_fallback = nullptr);

/// Gold quads of one sentence in evaluation form. Token regime tokenizes
/// the sentence and aligns each explicit target; implicit opinions sit on
/// the sentinel slot.
std::vector<GoldQuad> gold_quads(const ReviewSentence& sentence, MatchRegime regime);

struct SentenceDiagnostic {
  std::string sentence_id;
  std::size_t gold_total = 0;
  std::size_t pred_total = 0;
  std::size_t matched = 0;
};

struct EvalReport {
  EvalMode mode = EvalMode::easte;
  MatchRegime regime = MatchRegime::generative;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t gold_total = 0;
  std::size_t pred_total = 0;
  std::vector<SentenceDiagnostic> per_sentence;
};

using PredictionMap = std::map<std::string, std::vector<PredQuad>>;

/// Micro-averaged precision/recall/F1 over the corpus. Sentences without
/// predictions count as empty; a prediction for an unknown sentence id is
/// an input error.
EvalReport score(const Corpus& gold_corpus, const PredictionMap& predictions,
                 EvalMode mode, MatchRegime regime);

/// A quad with entity and aspect chained into one "ENTITY#ASPECT" category.
struct ChainedQuad {
  std::optional<std::string> target;
  std::string category;
  std::string sentiment;

  bool operator==(const ChainedQuad&) const = default;
};

ChainedQuad chain_tasd(const Quad& quad);

std::string report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);
/// "P=xx.xx R=xx.xx F1=xx.xx" scaled by 100 with 2 decimals.
std::string report_summary_line(const EvalReport& report);

} // namespace easte

#endif // EASTE_EVAL_HPP
