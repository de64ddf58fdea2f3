#include "easte/prompting.hpp"

#include <algorithm>
#include <cctype>

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

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// ---------------------------------------------------------------------------
// Template texts. Whitespace is significant throughout, including trailing
// spaces on several lines; the unit tests hold the golden transcriptions.

#include "prompt_texts.inc"

Quad quad(const char* target, const char* e, const char* a, const char* s) {
  Quad q;
  if (target) q.target = target;
  q.entity = e;
  q.aspect = a;
  q.sentiment = s;
  return q;
}

std::string exemplar_json_triplet(const Quad& q) {
  nlohmann::ordered_json j;
  j["triplet"]["entity"] = q.entity;
  j["triplet"]["attribute"] = q.aspect;
  j["triplet"]["sentiment"] = q.sentiment;
  return j.dump();
}

} // namespace

TemplateId template_id_from_string(const std::string& name) {
  if (name == "flan") return TemplateId::flan;
  if (name == "llama2") return TemplateId::llama2;
  if (name == "llama3") return TemplateId::llama3;
  if (name == "mixtral") return TemplateId::mixtral;
  throw ConfigError("unknown template '" + name + "' (expected flan|llama2|llama3|mixtral)");
}

std::string to_string(TemplateId id) {
  switch (id) {
    case TemplateId::flan: return "flan";
    case TemplateId::llama2: return "llama2";
    case TemplateId::llama3: return "llama3";
    case TemplateId::mixtral: return "mixtral";
  }
  return "?";
}

const std::vector<Exemplar>& default_exemplar_pool() {
  static const std::vector<Exemplar> pool = {
      {"great food, great wine list, great service in a great neighborhood...",
       {quad("food", "FOOD", "QUALITY", "positive"),
        quad("wine list", "DRINKS", "STYLE_OPTIONS", "positive"),
        quad("service", "SERVICE", "GENERAL", "positive"),
        quad("neighborhood", "LOCATION", "GENERAL", "positive")}},
      {"Rather than preparing vegetarian dish, the chef presented me with a plate of steamed "
       "vegetables (minus sauce, seasoning, or any form or aesthetic presentation).",
       {quad("vegetarian dish", "FOOD", "QUALITY", "negative"),
        quad("vegetarian dish", "FOOD", "STYLE_OPTIONS", "negative"),
        quad("chef", "SERVICE", "GENERAL", "negative")}},
      {"The chicken lollipop is my favorite, most of the dishes (I have to agree with a previous "
       "reviewer) are quite oily and very spicy, especially the Chilli Chicken.",
       {quad("chicken lollipop", "FOOD", "QUALITY", "positive"),
        quad("dishes", "FOOD", "QUALITY", "negative"),
        quad("Chilli Chicken", "FOOD", "QUALITY", "negative")}},
      {"Also, they do not take credit card so come with cash!",
       {quad(nullptr, "RESTAURANT", "MISCELLANEOUS", "neutral")}},
      {"The appetizers we ordered were served quickly - an order of fried oysters and clams were "
       "delicious but a tiny portion (maybe 3 of each). ",
       {quad("fried oysters and clams", "FOOD", "QUALITY", "positive"),
        quad("fried oysters and clams", "FOOD", "STYLE_OPTIONS", "negative"),
        quad(nullptr, "SERVICE", "GENERAL", "positive")}},
      {"The service was spectacular as the waiter knew everything about the menu and his "
       "recommendations were amazing!",
       {quad("service", "SERVICE", "GENERAL", "positive"),
        quad("waiter", "SERVICE", "GENERAL", "positive")}},
      {"I book a gorgeous white organza tent which included a four course prix fix menu which we "
       "enjoyed a lot.",
       {quad("white organza tent", "AMBIENCE", "GENERAL", "positive"),
        quad("four course prix fix menu", "FOOD", "QUALITY", "positive")}},
      {"The place is beautiful!", {quad("place", "AMBIENCE", "GENERAL", "positive")}},
      {"MY husbands birthday and my sons was not as it was intended... and we drove two hours to "
       "spend too much money to be treated terribly!",
       {quad(nullptr, "RESTAURANT", "GENERAL", "negative"),
        quad(nullptr, "RESTAURANT", "PRICES", "negative"),
        quad(nullptr, "SERVICE", "GENERAL", "negative")}},
  };
  return pool;
}

std::string render_gold(const std::vector<Quad>& quads) {
  std::string out;
  for (std::size_t i = 0; i < quads.size(); ++i) {
    if (i > 0) out += ", ";
    out += quads[i].target ? *quads[i].target : "NULL";
    out += ':' + to_lower(quads[i].entity);
    out += ':' + to_lower(quads[i].aspect);
    out += ':' + quads[i].sentiment;
  }
  return out;
}

namespace {
// scaffold with the "{sentence}" placeholder kept for all templates
std::string scaffold_text(const PromptTemplate& tpl) {
  if (tpl.shots > 40) throw ConfigError("shot count above 40 is not supported");
  if (tpl.shots > tpl.pool.size())
    throw ConfigError("shots (" + std::to_string(tpl.shots) + ") exceed exemplar pool size (" +
                      std::to_string(tpl.pool.size()) + ")");

  const bool stock_pool = !tpl.pool.empty() &&
                          std::equal(tpl.pool.begin(), tpl.pool.end(),
                                     default_exemplar_pool().begin(), default_exemplar_pool().end(),
                                     [](const Exemplar& a, const Exemplar& b) {
                                       return a.input == b.input && a.quads == b.quads;
                                     });

  if (tpl.id == TemplateId::flan) {
    std::string out = kFlanDefinition;
    for (std::size_t k = 0; k < tpl.shots; ++k) {
      out += "  \n";
      if (stock_pool && k < 9)
        out += kFlanHeaders[k];
      else
        out += "Example " + std::to_string(k + 1) + "- ";
      out += '\n';
      out += "Input: " + tpl.pool[k].input + '\n';
      out += "Output: " + render_gold(tpl.pool[k].quads) + '\n';
    }
    out += kFlanScaffoldTail;
    return out;
  }

  std::string scaffold;
  switch (tpl.id) {
    case TemplateId::llama2: scaffold = kLlama2Scaffold; break;
    case TemplateId::llama3: scaffold = kLlama3Scaffold; break;
    case TemplateId::mixtral: scaffold = kMixtralScaffold; break;
    default: break;
  }
  std::string examples;
  for (std::size_t k = 0; k < tpl.shots; ++k) {
    // Chat templates demand exactly one triplet, so each worked example
    // shows the first gold quad in the JSON output shape.
    examples += "Example " + std::to_string(k + 1) + "-\n";
    examples += "Sentence: " + tpl.pool[k].input + '\n';
    examples += "Output: " + exemplar_json_triplet(tpl.pool[k].quads.at(0)) + "\n\n";
  }
  replace_all(scaffold, "{examples}", examples);
  return scaffold;
}

} // namespace

std::string template_text(const PromptTemplate& tpl) {
  std::string out = scaffold_text(tpl);
  // the appendix flan text carries the literal placeholder; the chat
  // templates end at their Sentence line
  if (tpl.id != TemplateId::flan) replace_all(out, "{sentence}", "");
  return out;
}

std::string render_prompt(const PromptTemplate& tpl, const std::string& sentence) {
  std::string out = scaffold_text(tpl);
  switch (tpl.id) {
    case TemplateId::flan:
      replace_all(out, "{sentence}", sentence);
      break;
    case TemplateId::llama2:
      replace_all(out, "{sentence}", " " + sentence);
      break;
    case TemplateId::llama3:
      replace_all(out, "{sentence}", sentence + " ");
      break;
    case TemplateId::mixtral:
      replace_all(out, "{sentence}", sentence);
      break;
  }
  return out;
}

std::string normalize_label(const std::string& raw, LabelHead head,
                            const LabelInventory& inventory) {
  std::string s = trim(raw);
  while (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                           (s.front() == '"' && s.back() == '"')))
    s = trim(s.substr(1, s.size() - 2));
  replace_all(s, "\\_", "_");
  switch (head) {
    case LabelHead::entity:
      s = to_upper(s);
      if (!inventory.has_entity(s)) throw InventoryError("'" + s + "' is not a known entity");
      break;
    case LabelHead::aspect:
      s = to_upper(s);
      if (!inventory.has_aspect(s)) throw InventoryError("'" + s + "' is not a known aspect");
      break;
    case LabelHead::sentiment:
      s = to_lower(s);
      if (!inventory.has_sentiment(s)) throw InventoryError("'" + s + "' is not a known sentiment");
      break;
  }
  return s;
}

ParseOutcome parse_colon_format(const std::string& raw, const LabelInventory& inventory) {
  ParseOutcome outcome;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t comma = raw.find(',', start);
    std::size_t end = comma == std::string::npos ? raw.size() : comma;
    std::string fragment = trim(raw.substr(start, end - start));
    std::size_t frag_pos = start;

    if (!fragment.empty()) {
      // last three ':'-separated fields are the labels; everything to the
      // left (which may contain ':' or spaces) is the target term
      std::size_t c3 = fragment.rfind(':');
      std::size_t c2 = c3 == std::string::npos ? std::string::npos : fragment.rfind(':', c3 - 1);
      std::size_t c1 = (c2 == std::string::npos || c2 == 0) ? std::string::npos
                                                            : fragment.rfind(':', c2 - 1);
      if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos) {
        outcome.diagnostics.push_back(
            {frag_pos, "fragment '" + fragment + "' has fewer than three ':' separators"});
      } else {
        try {
          Quad q;
          std::string term = trim(fragment.substr(0, c1));
          if (term != "NULL") q.target = term;
          q.entity = normalize_label(fragment.substr(c1 + 1, c2 - c1 - 1), LabelHead::entity,
                                     inventory);
          q.aspect = normalize_label(fragment.substr(c2 + 1, c3 - c2 - 1), LabelHead::aspect,
                                     inventory);
          q.sentiment = normalize_label(fragment.substr(c3 + 1), LabelHead::sentiment, inventory);
          outcome.quads.push_back(std::move(q));
        } catch (const InventoryError& e) {
          outcome.diagnostics.push_back({frag_pos, e.what()});
        }
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return outcome;
}

ParseOutcome parse_json_triplet(const std::string& raw, const LabelInventory& inventory) {
  ParseOutcome outcome;

  // scan for balanced top-level objects, skipping string contents
  std::size_t pos = 0;
  bool found_object = false;
  while ((pos = raw.find('{', pos)) != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t i = pos;
    std::size_t close = std::string::npos;
    for (; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_string) {
        if (escaped)
          escaped = false;
        else if (c == '\\')
          escaped = true;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"')
        in_string = true;
      else if (c == '{')
        ++depth;
      else if (c == '}') {
        --depth;
        if (depth == 0) {
          close = i;
          break;
        }
      }
    }
    if (close == std::string::npos) break; // no balanced close for this '{'

    std::string candidate = raw.substr(pos, close - pos + 1);
    nlohmann::json j = nlohmann::json::parse(candidate, nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
      found_object = true;
      if (!j.contains("triplet")) {
        outcome.diagnostics.push_back({pos, "object has no 'triplet' key"});
      } else {
        const auto& t = j["triplet"];
        const char* keys[3] = {"entity", "attribute", "sentiment"};
        LabelHead heads[3] = {LabelHead::entity, LabelHead::aspect, LabelHead::sentiment};
        Quad q;
        bool ok = true;
        std::string* fields[3] = {&q.entity, &q.aspect, &q.sentiment};
        for (int k = 0; k < 3 && ok; ++k) {
          if (!t.is_object() || !t.contains(keys[k]) || !t[keys[k]].is_string()) {
            outcome.diagnostics.push_back({pos, std::string("missing ") + keys[k]});
            ok = false;
            break;
          }
          try {
            *fields[k] = normalize_label(t[keys[k]].get<std::string>(), heads[k], inventory);
          } catch (const InventoryError& e) {
            outcome.diagnostics.push_back({pos, e.what()});
            ok = false;
          }
        }
        if (ok) {
          outcome.quads.push_back(std::move(q)); // target absent by schema
          return outcome;
        }
      }
    }
    pos = pos + 1;
  }

  if (!found_object && outcome.quads.empty())
    outcome.diagnostics.push_back({0, "no balanced JSON object found"});
  return outcome;
}

} // namespace easte
