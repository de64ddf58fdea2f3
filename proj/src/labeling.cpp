#include "easte/labeling.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "easte/error.hpp"

namespace easte {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

// Split one whitespace-delimited chunk [start, end) into leading punctuation
// tokens, the core, and trailing punctuation tokens.
void split_chunk(const std::string& text, std::size_t start, std::size_t end,
                 std::vector<Token>& out) {
  std::size_t lo = start;
  std::size_t hi = end;
  while (lo < hi && is_punct(text[lo])) {
    out.push_back({text.substr(lo, 1), lo, lo + 1});
    ++lo;
  }
  // collect trailing punctuation, emitted after the core in text order
  std::size_t core_end = hi;
  while (core_end > lo && is_punct(text[core_end - 1])) --core_end;
  if (core_end > lo) out.push_back({text.substr(lo, core_end - lo), lo, core_end});
  for (std::size_t i = core_end; i < hi; ++i) out.push_back({text.substr(i, 1), i, i + 1});
}

} // namespace

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    split_chunk(text, i, j, tokens);
    i = j;
  }
  return tokens;
}

std::pair<std::size_t, std::size_t> align_target(const std::vector<Token>& tokens,
                                                 std::size_t from, std::size_t to) {
  std::size_t first = tokens.size();
  std::size_t last = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    bool overlaps = tokens[i].start < to && tokens[i].end > from;
    if (overlaps) {
      if (first == tokens.size()) first = i;
      last = i;
    }
  }
  if (first == tokens.size())
    throw SpanError("span " + std::to_string(from) + ".." + std::to_string(to) +
                    " overlaps no token");
  return {first, last};
}

TokenLabeling encode_labels(const ReviewSentence& sentence, const LabelInventory& inventory,
                            std::vector<Collision>* collisions) {
  TokenLabeling labeling;
  labeling.tokens = tokenize(sentence.text);
  labeling.labels.assign(labeling.tokens.size() + 1, SlotTriple{});

  for (std::size_t oi = 0; oi < sentence.opinions.size(); ++oi) {
    const Opinion& op = sentence.opinions[oi];
    if (!inventory.has_entity(op.entity) || !inventory.has_aspect(op.aspect) ||
        !inventory.has_sentiment(op.sentiment))
      throw InventoryError("opinion labels outside inventory in sentence " + sentence.id);

    SlotTriple triple{op.entity, op.aspect, op.sentiment};
    std::size_t first_slot, last_slot;
    if (op.implicit()) {
      first_slot = last_slot = 0;
    } else {
      auto [f, l] = align_target(labeling.tokens, op.target->from, op.target->to);
      first_slot = f + 1;
      last_slot = l + 1;
    }

    bool collided = false;
    for (std::size_t s = first_slot; s <= last_slot; ++s) {
      if (!labeling.labels[s].none() && labeling.labels[s] != triple) {
        collided = true;
        break;
      }
    }
    if (collided) {
      if (collisions) collisions->push_back({sentence.id, oi, op});
      continue; // first opinion in annotation order keeps the slots
    }
    for (std::size_t s = first_slot; s <= last_slot; ++s) labeling.labels[s] = triple;
  }
  return labeling;
}

std::vector<Quad> decode_labels(const TokenLabeling& labeling) {
  std::set<Quad> quads;
  if (labeling.labels.empty()) return {};

  if (!labeling.labels[0].none()) {
    const SlotTriple& t = labeling.labels[0];
    quads.insert(Quad{std::nullopt, t.entity, t.aspect, t.sentiment});
  }

  std::size_t i = 1;
  while (i < labeling.labels.size()) {
    if (labeling.labels[i].none()) {
      ++i;
      continue;
    }
    std::size_t run_start = i;
    while (i + 1 < labeling.labels.size() && labeling.labels[i + 1] == labeling.labels[run_start])
      ++i;
    std::string target;
    for (std::size_t s = run_start; s <= i; ++s) {
      if (s > run_start) target += ' ';
      target += labeling.tokens[s - 1].surface;
    }
    const SlotTriple& t = labeling.labels[run_start];
    quads.insert(Quad{target, t.entity, t.aspect, t.sentiment});
    ++i;
  }
  return {quads.begin(), quads.end()};
}

std::string collisions_to_jsonl(const std::vector<Collision>& collisions) {
  std::string out;
  for (const auto& c : collisions) {
    nlohmann::ordered_json j;
    j["sentence_id"] = c.sentence_id;
    j["opinion_index"] = c.opinion_index;
    if (c.opinion.target)
      j["target"] = c.opinion.target->surface;
    else
      j["target"] = nullptr;
    j["entity"] = c.opinion.entity;
    j["aspect"] = c.opinion.aspect;
    j["sentiment"] = c.opinion.sentiment;
    out += j.dump();
    out += '\n';
  }
  return out;
}

} // namespace easte
