#include "easte/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "easte/error.hpp"

namespace easte {

namespace {

std::string to_upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// ---------------------------------------------------------------------------
// Minimal XML reader for the SemEval ABSA distribution: elements, attributes,
// character data, comments, the <?xml?> declaration and the five predefined
// entities. Reports 1-based line/column on errors.

struct XmlNode {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<XmlNode> children;
  std::string text; // concatenated character data of direct children
  std::size_t line = 0;

  const std::string* attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
};

class XmlReader {
public:
  explicit XmlReader(const std::string& input) : in_(input) {}

  XmlNode parse_document() {
    skip_prolog();
    XmlNode root = parse_element();
    skip_misc();
    if (pos_ != in_.size()) fail("trailing content after document element");
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  bool eof() const { return pos_ >= in_.size(); }
  char peek() const { return eof() ? '\0' : in_[pos_]; }

  char get() {
    if (eof()) fail("unexpected end of input");
    char c = in_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  bool consume(const std::string& lit) {
    if (in_.compare(pos_, lit.size(), lit) != 0) return false;
    for (std::size_t i = 0; i < lit.size(); ++i) get();
    return true;
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
  }

  void skip_prolog() {
    skip_ws();
    if (consume("<?xml")) {
      while (!consume("?>")) get();
    }
    skip_misc();
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (consume("<!--")) {
        while (!consume("-->")) get();
      } else {
        return;
      }
    }
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':';
  }

  std::string parse_name() {
    std::string name;
    while (!eof() && name_char(peek())) name += get();
    if (name.empty()) fail("expected a name");
    return name;
  }

  std::string decode_entity() {
    // '&' already consumed
    std::string ent;
    while (peek() != ';') {
      ent += get();
      if (ent.size() > 8) fail("unterminated entity reference");
    }
    get(); // ';'
    if (ent == "lt") return "<";
    if (ent == "gt") return ">";
    if (ent == "amp") return "&";
    if (ent == "quot") return "\"";
    if (ent == "apos") return "'";
    if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = (ent[1] == 'x' || ent[1] == 'X') ? std::stoul(ent.substr(2), nullptr, 16)
                                              : std::stoul(ent.substr(1));
      } catch (const std::exception&) {
        fail("bad character reference &" + ent + ";");
      }
      return encode_utf8(cp);
    }
    fail("unknown entity &" + ent + ";");
  }

  static std::string encode_utf8(unsigned long cp) {
    std::string out;
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
  }

  std::string parse_attr_value() {
    char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    get();
    std::string value;
    while (peek() != quote) {
      char c = get();
      if (c == '&')
        value += decode_entity();
      else
        value += c;
    }
    get();
    return value;
  }

  XmlNode parse_element() {
    expect('<');
    XmlNode node;
    node.line = line_;
    node.name = parse_name();
    for (;;) {
      skip_ws();
      if (consume("/>")) return node;
      if (peek() == '>') {
        get();
        break;
      }
      std::string key = parse_name();
      skip_ws();
      expect('=');
      skip_ws();
      node.attrs.emplace_back(std::move(key), parse_attr_value());
    }
    // content
    for (;;) {
      if (eof()) fail("unterminated element <" + node.name + ">");
      if (peek() == '<') {
        if (consume("<!--")) {
          while (!consume("-->")) get();
          continue;
        }
        if (in_.compare(pos_, 2, "</") == 0) {
          consume("</");
          std::string close = parse_name();
          if (close != node.name)
            fail("mismatched closing tag </" + close + "> for <" + node.name + ">");
          skip_ws();
          expect('>');
          return node;
        }
        node.children.push_back(parse_element());
      } else {
        char c = get();
        if (c == '&')
          node.text += decode_entity();
        else
          node.text += c;
      }
    }
  }

  const std::string& in_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

void collect_elements(const XmlNode& node, const std::string& name, std::vector<const XmlNode*>& out) {
  if (node.name == name) out.push_back(&node);
  for (const auto& child : node.children) collect_elements(child, name, out);
}

// ---------------------------------------------------------------------------

void check_labels(const std::string& entity, const std::string& aspect,
                  const std::string& sentiment, const LabelInventory& inventory,
                  const std::string& sentence_id) {
  if (!inventory.has_entity(entity))
    throw InventoryError("unknown entity '" + entity + "' in sentence " + sentence_id);
  if (!inventory.has_aspect(aspect))
    throw InventoryError("unknown aspect '" + aspect + "' in sentence " + sentence_id);
  if (!inventory.has_sentiment(sentiment))
    throw InventoryError("unknown sentiment '" + sentiment + "' in sentence " + sentence_id);
}

void check_span(const Opinion& op, const std::string& text, const std::string& sentence_id) {
  if (!op.target) return;
  const TargetSpan& sp = *op.target;
  if (sp.from >= sp.to || sp.to > text.size())
    throw SpanError("target span " + std::to_string(sp.from) + ".." + std::to_string(sp.to) +
                    " out of range in sentence " + sentence_id);
  if (text.compare(sp.from, sp.to - sp.from, sp.surface) != 0)
    throw SpanError("target surface '" + sp.surface + "' does not match text slice in sentence " +
                    sentence_id);
}

void append_opinion(ReviewSentence& sentence, Opinion op,
                    std::vector<std::string>* warnings) {
  // EASTE(S) is a set: identical duplicates collapse.
  if (std::find(sentence.opinions.begin(), sentence.opinions.end(), op) !=
      sentence.opinions.end()) {
    if (warnings)
      warnings->push_back("sentence " + sentence.id + ": duplicate opinion (" +
                          (op.target ? op.target->surface : "NULL") + ", " + op.entity + ", " +
                          op.aspect + ", " + op.sentiment + ") collapsed");
    return;
  }
  sentence.opinions.push_back(std::move(op));
}

} // namespace

std::pair<std::string, std::string> split_category(const std::string& category) {
  auto first = category.find('#');
  if (first == std::string::npos)
    throw FormatError("category '" + category + "' has no '#' separator");
  if (category.find('#', first + 1) != std::string::npos)
    throw FormatError("category '" + category + "' has more than one '#'");
  return {to_upper(category.substr(0, first)), to_upper(category.substr(first + 1))};
}

Corpus parse_semeval_xml(const std::string& xml, const LabelInventory& inventory, Split split,
                         std::vector<std::string>* warnings) {
  XmlReader reader(xml);
  XmlNode root = reader.parse_document();

  Corpus corpus;
  corpus.split = split;
  corpus.inventory = &inventory;

  std::vector<const XmlNode*> sentence_nodes;
  collect_elements(root, "sentence", sentence_nodes);

  std::unordered_set<std::string> seen_ids;
  for (const XmlNode* snode : sentence_nodes) {
    ReviewSentence sentence;
    if (const std::string* id = snode->attr("id"))
      sentence.id = *id;
    else
      throw ParseError("sentence element without id attribute", snode->line);
    if (!seen_ids.insert(sentence.id).second)
      throw ParseError("duplicate sentence id " + sentence.id, snode->line);

    for (const auto& child : snode->children) {
      if (child.name == "text") sentence.text = child.text;
    }
    if (sentence.text.empty())
      throw ParseError("sentence " + sentence.id + " has empty text", snode->line);

    for (const auto& child : snode->children) {
      if (child.name != "Opinions") continue;
      for (const auto& onode : child.children) {
        if (onode.name != "Opinion") continue;
        const std::string* target = onode.attr("target");
        const std::string* category = onode.attr("category");
        const std::string* polarity = onode.attr("polarity");
        if (!category || !polarity)
          throw ParseError("Opinion without category/polarity in sentence " + sentence.id,
                           onode.line);

        Opinion op;
        auto [entity, aspect] = split_category(*category);
        op.entity = entity;
        op.aspect = aspect;
        op.sentiment = to_lower(*polarity);
        check_labels(op.entity, op.aspect, op.sentiment, inventory, sentence.id);

        std::size_t from = 0, to = 0;
        if (const std::string* f = onode.attr("from")) from = std::stoul(*f);
        if (const std::string* t = onode.attr("to")) to = std::stoul(*t);
        bool implicit = !target || *target == "NULL" || (from == 0 && to == 0 && target->empty());
        if (!implicit) {
          op.target = TargetSpan{from, to, *target};
          check_span(op, sentence.text, sentence.id);
        }
        append_opinion(sentence, std::move(op), warnings);
      }
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

std::string write_canonical(const Corpus& corpus) {
  std::string out;
  for (const auto& sentence : corpus.sentences) {
    nlohmann::ordered_json line;
    line["id"] = sentence.id;
    line["text"] = sentence.text;
    auto& ops = line["opinions"] = nlohmann::ordered_json::array();
    for (const auto& op : sentence.opinions) {
      nlohmann::ordered_json o;
      if (op.target) {
        o["target"] = op.target->surface;
        o["from"] = op.target->from;
        o["to"] = op.target->to;
      } else {
        o["target"] = nullptr;
        o["from"] = 0;
        o["to"] = 0;
      }
      o["entity"] = op.entity;
      o["aspect"] = op.aspect;
      o["sentiment"] = op.sentiment;
      ops.push_back(std::move(o));
    }
    out += line.dump();
    out += '\n';
  }
  return out;
}

Corpus parse_canonical(const std::string& jsonl, const LabelInventory& inventory, Split split) {
  Corpus corpus;
  corpus.split = split;
  corpus.inventory = &inventory;

  std::istringstream in(jsonl);
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad canonical JSON: ") + e.what(), lineno);
    }
    ReviewSentence sentence;
    try {
      sentence.id = j.at("id").get<std::string>();
      sentence.text = j.at("text").get<std::string>();
      for (const auto& o : j.at("opinions")) {
        Opinion op;
        op.entity = o.at("entity").get<std::string>();
        op.aspect = o.at("aspect").get<std::string>();
        op.sentiment = o.at("sentiment").get<std::string>();
        if (!o.at("target").is_null()) {
          op.target = TargetSpan{o.at("from").get<std::size_t>(), o.at("to").get<std::size_t>(),
                                 o.at("target").get<std::string>()};
        }
        check_labels(op.entity, op.aspect, op.sentiment, inventory, sentence.id);
        check_span(op, sentence.text, sentence.id);
        sentence.opinions.push_back(std::move(op));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad canonical record: ") + e.what(), lineno);
    }
    if (sentence.text.empty()) throw ParseError("empty sentence text", lineno);
    if (!seen_ids.insert(sentence.id).second)
      throw ParseError("duplicate sentence id " + sentence.id, lineno);
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

StatsReport corpus_stats(const Corpus& corpus) {
  StatsReport stats;
  stats.sentence_count = corpus.sentences.size();
  for (const auto& sentence : corpus.sentences) {
    stats.opinion_count += sentence.opinions.size();
    if (sentence.opinions.size() > 1) ++stats.multi_opinion_sentence_count;
    for (const auto& op : sentence.opinions) {
      if (op.implicit()) ++stats.implicit_count;
      ++stats.per_entity[op.entity];
      ++stats.per_aspect[op.aspect];
      ++stats.per_sentiment[op.sentiment];
    }
  }
  return stats;
}

std::string stats_to_json(const StatsReport& stats) {
  nlohmann::ordered_json j;
  j["sentence_count"] = stats.sentence_count;
  j["opinion_count"] = stats.opinion_count;
  j["implicit_count"] = stats.implicit_count;
  j["multi_opinion_sentence_count"] = stats.multi_opinion_sentence_count;
  j["per_entity"] = stats.per_entity;
  j["per_aspect"] = stats.per_aspect;
  j["per_sentiment"] = stats.per_sentiment;
  return j.dump(2);
}

} // namespace easte
