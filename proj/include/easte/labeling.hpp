#ifndef EASTE_LABELING_HPP
#define EASTE_LABELING_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "easte/corpus.hpp"

namespace easte {

struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

/// Whitespace tokenizer that peels leading/trailing punctuation into
/// separate tokens. Offsets index into the source text.
std::vector<Token> tokenize(const std::string& text);

/// One (entity, aspect, sentiment) triple on a label slot. Empty strings
/// mean the NONE class; a slot is either fully NONE or fully labeled.
struct SlotTriple {
  std::string entity;
  std::string aspect;
  std::string sentiment;

  bool none() const { return entity.empty() && aspect.empty() && sentiment.empty(); }
  bool operator==(const SlotTriple&) const = default;
};

/// Token sequence plus one label triple per slot. Slot 0 is the
/// sentence-level sentinel carrying implicit opinions; slot i+1 labels
/// tokens[i].
struct TokenLabeling {
  std::vector<Token> tokens;
  std::vector<SlotTriple> labels; // size == tokens.size() + 1

  std::size_t slot_count() const { return labels.size(); }
};

/// A (target, entity, aspect, sentiment) quadruple; absent target means
/// the opinion is implicit.
struct Quad {
  std::optional<std::string> target;
  std::string entity;
  std::string aspect;
  std::string sentiment;

  bool operator==(const Quad&) const = default;
  bool operator<(const Quad& o) const {
    return std::tie(target, entity, aspect, sentiment) <
           std::tie(o.target, o.entity, o.aspect, o.sentiment);
  }
};

/// An opinion that lost its slot(s) to an earlier one.
struct Collision {
  std::string sentence_id;
  std::size_t opinion_index = 0; // annotation-order index of the loser
  Opinion opinion;
};

/// Serialize collision reports as JSON lines.
std::string collisions_to_jsonl(const std::vector<Collision>& collisions);

/// Map a character span onto the minimal contiguous token range covering
/// every overlapped token. Returns inclusive [first, last] indices.
/// Throws SpanError if no token overlaps the span.
std::pair<std::size_t, std::size_t> align_target(const std::vector<Token>& tokens,
                                                 std::size_t from, std::size_t to);

/// Write each opinion's triple onto its aligned slots; implicit opinions
/// go to the sentinel. On collision the earlier opinion wins and the loser
/// is recorded.
TokenLabeling encode_labels(const ReviewSentence& sentence, const LabelInventory& inventory,
                            std::vector<Collision>* collisions = nullptr);

/// Maximal runs of identical non-NONE triples become quads; the sentinel
/// becomes a target-less quad. Output is deduplicated and sorted.
std::vector<Quad> decode_labels(const TokenLabeling& labeling);

} // namespace easte

#endif // EASTE_LABELING_HPP
