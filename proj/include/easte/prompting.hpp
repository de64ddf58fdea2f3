#ifndef EASTE_PROMPTING_HPP
#define EASTE_PROMPTING_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "easte/inventory.hpp"
#include "easte/labeling.hpp"

namespace easte {

enum class TemplateId { flan, llama2, llama3, mixtral };

TemplateId template_id_from_string(const std::string& name); // throws ConfigError
std::string to_string(TemplateId id);

/// One worked example: an input sentence and its gold quads.
struct Exemplar {
  std::string input;
  std::vector<Quad> quads;
};

/// The nine worked examples shipped with the flan template, in order.
const std::vector<Exemplar>& default_exemplar_pool();

struct PromptTemplate {
  TemplateId id = TemplateId::flan;
  std::size_t shots = 0; // <= 40
  std::vector<Exemplar> pool = default_exemplar_pool();
};

/// The prompt scaffold without an input sentence attached. For the flan
/// template this keeps the literal "{sentence}" placeholder.
std::string template_text(const PromptTemplate& tpl);

/// Scaffold with the review sentence inserted at the template's input slot.
std::string render_prompt(const PromptTemplate& tpl, const std::string& sentence);

/// Join quads in the colon output style: "term:entity:aspect:sentiment, ...".
/// Entity/aspect lower-cased, implicit targets written as NULL.
std::string render_gold(const std::vector<Quad>& quads);

struct ParseDiagnostic {
  std::size_t position = 0;
  std::string message;
};

struct ParseOutcome {
  std::vector<Quad> quads;
  std::vector<ParseDiagnostic> diagnostics;
};

/// Parse "term:entity:aspect:sentiment" fragments separated by commas.
/// Fields are taken right-to-left so targets may contain ':' or spaces.
ParseOutcome parse_colon_format(const std::string& raw, const LabelInventory& inventory);

/// Find the first balanced JSON object holding a "triplet" key and extract
/// its entity/attribute/sentiment. Never throws on malformed input.
ParseOutcome parse_json_triplet(const std::string& raw, const LabelInventory& inventory);

enum class LabelHead { entity, aspect, sentiment };

/// Trim, unquote, fix the "\_" escape, and case-normalize a raw label.
/// Throws InventoryError if the result is not an inventory member.
std::string normalize_label(const std::string& raw, LabelHead head,
                            const LabelInventory& inventory);

} // namespace easte

#endif // EASTE_PROMPTING_HPP
