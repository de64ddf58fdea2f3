#ifndef EASTE_CORPUS_HPP
#define EASTE_CORPUS_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "easte/inventory.hpp"

namespace easte {

/// Character span of an explicit target term inside a sentence.
struct TargetSpan {
  std::size_t from = 0;
  std::size_t to = 0;
  std::string surface;

  bool operator==(const TargetSpan&) const = default;
};

/// One annotated opinion: an optional target span plus the
/// (entity, aspect, sentiment) triple. Absent target means implicit.
struct Opinion {
  std::optional<TargetSpan> target;
  std::string entity;
  std::string aspect;
  std::string sentiment;

  bool implicit() const { return !target.has_value(); }
  bool operator==(const Opinion&) const = default;
};

struct ReviewSentence {
  std::string id;
  std::string text;
  std::vector<Opinion> opinions;

  bool operator==(const ReviewSentence&) const = default;
};

enum class Split { train, test };

struct Corpus {
  Split split = Split::train;
  std::vector<ReviewSentence> sentences;
  const LabelInventory* inventory = &LabelInventory::restaurant();

  bool operator==(const Corpus& o) const {
    return split == o.split && sentences == o.sentences;
  }
};

/// Split a combined "ENTITY#ASPECT" category into its two elements,
/// upper-cased. Throws FormatError unless exactly one '#' is present.
std::pair<std::string, std::string> split_category(const std::string& category);

/// Parse a SemEval-2016 ABSA restaurant XML document. Duplicate identical
/// opinions on one sentence are collapsed; a warning per duplicate is
/// appended to `warnings` when given.
Corpus parse_semeval_xml(const std::string& xml, const LabelInventory& inventory,
                         Split split = Split::train,
                         std::vector<std::string>* warnings = nullptr);

/// Serialize a corpus as canonical JSON lines, one sentence per line.
std::string write_canonical(const Corpus& corpus);

/// Inverse of write_canonical, with the same validation as the XML parser.
Corpus parse_canonical(const std::string& jsonl, const LabelInventory& inventory,
                       Split split = Split::train);

struct StatsReport {
  std::size_t sentence_count = 0;
  std::size_t opinion_count = 0;
  std::size_t implicit_count = 0;
  std::size_t multi_opinion_sentence_count = 0;
  std::map<std::string, std::size_t> per_entity;
  std::map<std::string, std::size_t> per_aspect;
  std::map<std::string, std::size_t> per_sentiment;
};

StatsReport corpus_stats(const Corpus& corpus);

/// Stats as a JSON document.
std::string stats_to_json(const StatsReport& stats);

} // namespace easte

#endif // EASTE_CORPUS_HPP
