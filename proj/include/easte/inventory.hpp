#ifndef EASTE_INVENTORY_HPP
#define EASTE_INVENTORY_HPP

#include <optional>
#include <string>
#include <vector>

namespace easte {

/// The closed label sets an annotated corpus draws from: entities and
/// aspects (upper case) and sentiment polarities (lower case). Immutable
/// after construction.
class LabelInventory {
public:
  LabelInventory(std::vector<std::string> entities,
                 std::vector<std::string> aspects,
                 std::vector<std::string> sentiments);

  /// The SemEval-2016 restaurant inventory: 6 entities, 5 aspects,
  /// 3 sentiment polarities.
  static const LabelInventory& restaurant();

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& aspects() const { return aspects_; }
  const std::vector<std::string>& sentiments() const { return sentiments_; }

  bool has_entity(const std::string& e) const;
  bool has_aspect(const std::string& a) const;
  bool has_sentiment(const std::string& s) const;

  /// Position within the owning set, if a member.
  std::optional<std::size_t> entity_index(const std::string& e) const;
  std::optional<std::size_t> aspect_index(const std::string& a) const;
  std::optional<std::size_t> sentiment_index(const std::string& s) const;

private:
  std::vector<std::string> entities_;
  std::vector<std::string> aspects_;
  std::vector<std::string> sentiments_;
};

} // namespace easte

#endif // EASTE_INVENTORY_HPP
