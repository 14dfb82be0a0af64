#include "descadapt/taxonomy.hpp"

#include <algorithm>
#include <stdexcept>

#include "descadapt/error.hpp"
#include "descadapt/text.hpp"

namespace descadapt {

namespace {

struct KeyInfo {
  AttributeKey key;
  std::string_view snake;
  std::string_view display;
  AttributeSide side;
};

constexpr std::array<KeyInfo, kNumAttributes> kKeys{{
    {AttributeKey::query_topic, "query_topic", "query topic", AttributeSide::query},
    {AttributeKey::query_linguistic_features, "query_linguistic_features", "query linguistic features", AttributeSide::query},
    {AttributeKey::query_language, "query_language", "query language", AttributeSide::query},
    {AttributeKey::query_structure, "query_structure", "query structure", AttributeSide::query},
    {AttributeKey::query_modality, "query_modality", "query modality", AttributeSide::query},
    {AttributeKey::query_format, "query_format", "query format", AttributeSide::query},
    {AttributeKey::query_context, "query_context", "query context", AttributeSide::query},
    {AttributeKey::document_topic, "document_topic", "document topic", AttributeSide::document},
    {AttributeKey::document_linguistic_features, "document_linguistic_features", "document linguistic features", AttributeSide::document},
    {AttributeKey::document_language, "document_language", "document language", AttributeSide::document},
    {AttributeKey::document_structure, "document_structure", "document structure", AttributeSide::document},
    {AttributeKey::document_modality, "document_modality", "document modality", AttributeSide::document},
    {AttributeKey::document_format, "document_format", "document format", AttributeSide::document},
    {AttributeKey::document_source, "document_source", "document source", AttributeSide::document},
    {AttributeKey::relevance_notion, "relevance_notion", "relevance notion", AttributeSide::relevance},
}};

const KeyInfo& info(AttributeKey key) { return kKeys[static_cast<std::size_t>(key)]; }

// "Query_Topic " -> "query topic"
std::string canonical_key_text(std::string_view name) {
  std::string spaced(name);
  std::replace(spaced.begin(), spaced.end(), '_', ' ');
  std::replace(spaced.begin(), spaced.end(), '-', ' ');
  return normalize_whitespace_lower(spaced);
}

constexpr std::string_view kBlackSquare = "\xE2\x96\xA0";

}  // namespace

const std::array<AttributeKey, kNumAttributes>& all_attribute_keys() {
  static const std::array<AttributeKey, kNumAttributes> keys = [] {
    std::array<AttributeKey, kNumAttributes> out{};
    for (std::size_t i = 0; i < kNumAttributes; ++i) out[i] = kKeys[i].key;
    return out;
  }();
  return keys;
}

std::string_view snake_name(AttributeKey key) { return info(key).snake; }
std::string_view display_name(AttributeKey key) { return info(key).display; }
AttributeSide side_of(AttributeKey key) { return info(key).side; }

std::optional<AttributeKey> lookup_attribute_key(std::string_view name) {
  auto canon = canonical_key_text(name);
  for (const auto& k : kKeys) {
    if (canon == k.display) return k.key;
  }
  // The taxonomy table spells the topic rows in the plural.
  if (canon == "query topics") return AttributeKey::query_topic;
  if (canon == "document topics") return AttributeKey::document_topic;
  return std::nullopt;
}

AttributeValue AttributeValue::from_text(std::string_view text) {
  AttributeValue v;
  auto norm = normalize_whitespace_lower(text);
  if (!norm.empty() && norm != "na") v.text_ = std::move(norm);
  return v;
}

const std::string& AttributeValue::text() const {
  if (!text_) throw std::logic_error("AttributeValue::text() on NA");
  return *text_;
}

std::string AttributeValue::render() const { return text_ ? *text_ : std::string("NA"); }

DomainAttributes DomainAttributes::restricted_to(AttributeSide side) const {
  DomainAttributes out;
  for (auto key : all_attribute_keys()) {
    if (side_of(key) == side) out.set(key, (*this)[key]);
  }
  return out;
}

ParsedAttributes parse_attributes(std::string_view text) {
  ParsedAttributes result;
  for (auto line : split(text, "\n")) {
    for (auto segment : split(line, kBlackSquare)) {
      auto seg = trim(segment);
      auto colon = seg.find(':');
      if (seg.empty() || colon == std::string_view::npos) continue;
      auto raw_key = trim(seg.substr(0, colon));
      auto key = lookup_attribute_key(raw_key);
      if (!key) {
        result.warnings.emplace_back(raw_key);
        continue;
      }
      result.attributes.set(*key, seg.substr(colon + 1));
    }
  }
  return result;
}

std::string serialize_attributes(const DomainAttributes& attrs) {
  std::string out;
  for (auto key : all_attribute_keys()) {
    out += display_name(key);
    out += ": ";
    out += attrs[key].render();
    out += '\n';
  }
  return out;
}

std::vector<AttributeKey> diff_domains(const DomainAttributes& a, const DomainAttributes& b) {
  std::vector<AttributeKey> changed;
  for (auto key : all_attribute_keys()) {
    if (a[key] != b[key]) changed.push_back(key);
  }
  return changed;
}

void to_json(nlohmann::json& j, const DomainAttributes& attrs) {
  j = nlohmann::json::object();
  for (auto key : all_attribute_keys()) {
    const auto& v = attrs[key];
    j[std::string(snake_name(key))] = v.is_na() ? nlohmann::json(nullptr) : nlohmann::json(v.text());
  }
}

void from_json(const nlohmann::json& j, DomainAttributes& attrs) {
  if (!j.is_object()) throw ArgumentError("attributes JSON must be an object");
  attrs = DomainAttributes{};
  for (const auto& [name, value] : j.items()) {
    auto key = lookup_attribute_key(name);
    if (!key) throw ArgumentError("unknown attribute key in JSON: " + name);
    if (value.is_null()) {
      attrs.set(*key, AttributeValue::na());
    } else if (value.is_string()) {
      attrs.set(*key, value.get<std::string>());
    } else {
      throw ArgumentError("attribute value must be a string or null: " + name);
    }
  }
}

}  // namespace descadapt
