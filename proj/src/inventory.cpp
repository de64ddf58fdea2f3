#include "easte/inventory.hpp"

#include <algorithm>
#include <unordered_set>

#include "easte/error.hpp"

namespace easte {

namespace {

void check_unique(const std::vector<std::string>& xs, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& x : xs) {
    if (!seen.insert(x).second)
      throw ConfigError(std::string("duplicate ") + what + " label: " + x);
  }
}

std::optional<std::size_t> find_index(const std::vector<std::string>& xs, const std::string& x) {
  auto it = std::find(xs.begin(), xs.end(), x);
  if (it == xs.end()) return std::nullopt;
  return static_cast<std::size_t>(it - xs.begin());
}

} // namespace

LabelInventory::LabelInventory(std::vector<std::string> entities,
                               std::vector<std::string> aspects,
                               std::vector<std::string> sentiments)
    : entities_(std::move(entities)), aspects_(std::move(aspects)),
      sentiments_(std::move(sentiments)) {
  check_unique(entities_, "entity");
  check_unique(aspects_, "aspect");
  check_unique(sentiments_, "sentiment");
}

const LabelInventory& LabelInventory::restaurant() {
  static const LabelInventory inv(
      {"FOOD", "RESTAURANT", "SERVICE", "AMBIENCE", "DRINKS", "LOCATION"},
      {"QUALITY", "STYLE_OPTIONS", "GENERAL", "PRICES", "MISCELLANEOUS"},
      {"positive", "negative", "neutral"});
  return inv;
}

bool LabelInventory::has_entity(const std::string& e) const { return entity_index(e).has_value(); }
bool LabelInventory::has_aspect(const std::string& a) const { return aspect_index(a).has_value(); }
bool LabelInventory::has_sentiment(const std::string& s) const {
  return sentiment_index(s).has_value();
}

std::optional<std::size_t> LabelInventory::entity_index(const std::string& e) const {
  return find_index(entities_, e);
}
std::optional<std::size_t> LabelInventory::aspect_index(const std::string& a) const {
  return find_index(aspects_, a);
}
std::optional<std::size_t> LabelInventory::sentiment_index(const std::string& s) const {
  return find_index(sentiments_, s);
}

} // namespace easte
