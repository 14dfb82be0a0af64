#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace descadapt {

/// The fifteen attributes that together define a retrieval domain,
/// in canonical order: seven query-side, seven document-side, one relevance.
enum class AttributeKey : std::size_t {
  query_topic,
  query_linguistic_features,
  query_language,
  query_structure,
  query_modality,
  query_format,
  query_context,
  document_topic,
  document_linguistic_features,
  document_language,
  document_structure,
  document_modality,
  document_format,
  document_source,
  relevance_notion,
};

inline constexpr std::size_t kNumAttributes = 15;

enum class AttributeSide { query, document, relevance };

const std::array<AttributeKey, kNumAttributes>& all_attribute_keys();

/// "query_topic"
std::string_view snake_name(AttributeKey key);
/// "query topic"
std::string_view display_name(AttributeKey key);
AttributeSide side_of(AttributeKey key);

/// Accepts case, space and underscore variants ("Query Topic", "query_topic").
std::optional<AttributeKey> lookup_attribute_key(std::string_view name);

/// Either a normalized (trimmed, lowercase, single-spaced, non-empty) text or NA.
class AttributeValue {
 public:
  AttributeValue() = default;

  /// Normalizes; empty input and the literal "na" both produce NA.
  static AttributeValue from_text(std::string_view text);
  static AttributeValue na() { return {}; }

  bool is_na() const noexcept { return !text_.has_value(); }
  bool is_specified() const noexcept { return text_.has_value(); }
  const std::string& text() const;
  /// The value as it is rendered and scored: the text, or "NA".
  std::string render() const;

  friend bool operator==(const AttributeValue&, const AttributeValue&) = default;

 private:
  std::optional<std::string> text_;
};

/// Total mapping from every AttributeKey to a value.
class DomainAttributes {
 public:
  DomainAttributes() = default;

  const AttributeValue& operator[](AttributeKey key) const {
    return values_[static_cast<std::size_t>(key)];
  }
  void set(AttributeKey key, AttributeValue value) {
    values_[static_cast<std::size_t>(key)] = std::move(value);
  }
  void set(AttributeKey key, std::string_view text) { set(key, AttributeValue::from_text(text)); }

  std::size_t size() const noexcept { return values_.size(); }

  /// Copy with every key outside `side` set to NA.
  DomainAttributes restricted_to(AttributeSide side) const;

  friend bool operator==(const DomainAttributes&, const DomainAttributes&) = default;

 private:
  std::array<AttributeValue, kNumAttributes> values_{};
};

struct ParsedAttributes {
  DomainAttributes attributes;
  /// Unrecognized keys, as written in the input.
  std::vector<std::string> warnings;
};

/// Parses "key: value" segments separated by newlines or the black-square
/// separator. Never fails; absent keys stay NA.
ParsedAttributes parse_attributes(std::string_view text);

/// One "key: value" line per attribute in canonical order, NA rendered as "NA".
std::string serialize_attributes(const DomainAttributes& attrs);

/// Keys whose values differ; empty means no domain shift.
std::vector<AttributeKey> diff_domains(const DomainAttributes& a, const DomainAttributes& b);

void to_json(nlohmann::json& j, const DomainAttributes& attrs);
void from_json(const nlohmann::json& j, DomainAttributes& attrs);

}  // namespace descadapt
