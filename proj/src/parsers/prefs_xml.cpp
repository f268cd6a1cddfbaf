#include "phiscan/prefs_xml.hpp"

#include "phiscan/error.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <sstream>

namespace phiscan::prefs {

namespace pt = boost::property_tree;

std::string trim(std::string_view text) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    std::size_t b = 0, e = text.size();
    while (b < e && ws(text[b])) ++b;
    while (e > b && ws(text[e - 1])) --e;
    return std::string(text.substr(b, e - b));
}

std::vector<Entry> parse(std::span<const std::uint8_t> xml) {
    std::istringstream in(std::string(xml.begin(), xml.end()));
    pt::ptree doc;
    try {
        pt::read_xml(in, doc);
    } catch (const pt::xml_parser_error& e) {
        throw Error(ErrorCode::MalformedXml, e.message() + " at line " + std::to_string(e.line()));
    }

    const pt::ptree* root = nullptr;
    for (const auto& [tag, node] : doc) {
        if (tag == "<xmlcomment>") continue;
        if (tag != "map" || root) throw Error(ErrorCode::MalformedXml, "root element must be a single <map>");
        root = &node;
    }
    if (!root) throw Error(ErrorCode::MalformedXml, "no <map> root element");

    std::vector<Entry> entries;
    for (const auto& [tag, node] : *root) {
        if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
        Entry e;
        e.type = tag;
        e.index = entries.size();
        e.key = node.get<std::string>("<xmlattr>.name", "");
        if (e.key.empty()) throw Error(ErrorCode::MalformedXml, "<" + tag + "> without a name attribute");
        if (tag == "string") {
            e.value = trim(node.data());
        } else if (tag == "set") {
            for (const auto& [member_tag, member] : node) {
                if (member_tag != "string") continue;
                if (!e.value.empty()) e.value.push_back('\n');
                e.value += trim(member.data());
            }
        } else {
            auto value = node.get_optional<std::string>("<xmlattr>.value");
            if (!value) throw Error(ErrorCode::MalformedXml, "<" + tag + " name=\"" + e.key + "\"> without value");
            e.value = *value;
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace phiscan::prefs
