#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace descadapt {

/// Lowercase, split on every non-alphanumeric ASCII byte, drop empties.
/// Bytes >= 0x80 are kept as token characters so UTF-8 words survive intact.
/// No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);

/// Lowercase, trim and collapse runs of whitespace to one space.
std::string normalize_whitespace_lower(std::string_view text);

/// Splits on a separator string; empty pieces are kept.
std::vector<std::string_view> split(std::string_view text, std::string_view sep);

}  // namespace descadapt
