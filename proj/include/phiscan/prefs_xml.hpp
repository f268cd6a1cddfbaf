#pragma once

// Android SharedPreferences documents: a <map> root holding typed entries.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace phiscan::prefs {

struct Entry {
    std::string type;   // string, boolean, int, long, float, set
    std::string key;    // the name attribute
    std::string value;  // text content or value attribute; set members joined by '\n'
    std::size_t index = 0;  // position among the document's entries
};

/// Throws Error(MalformedXml) on parse failure or a non-<map> root.
std::vector<Entry> parse(std::span<const std::uint8_t> xml);

/// Trims ASCII whitespace from both ends.
std::string trim(std::string_view text);

}  // namespace phiscan::prefs
