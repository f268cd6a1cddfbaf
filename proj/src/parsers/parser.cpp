#include "phiscan/parser.hpp"

#include "phiscan/error.hpp"
#include "phiscan/glucosmart.hpp"
#include "phiscan/healthmate.hpp"
#include "phiscan/myvitals.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace phiscan {

void ParseResult::merge(ParseResult&& other) {
    records.insert(records.end(), std::make_move_iterator(other.records.begin()),
                   std::make_move_iterator(other.records.end()));
    warnings.insert(warnings.end(), std::make_move_iterator(other.warnings.begin()),
                    std::make_move_iterator(other.warnings.end()));
    malformed_rows += other.malformed_rows;
}

MeasureCodeMap MeasureCodeMap::defaults() {
    MeasureCodeMap m;
    m.codes_ = {{1, MeasureKind::Weight},     {4, MeasureKind::Systolic},   {5, MeasureKind::Diastolic},
                {6, MeasureKind::BodyFat},    {8, MeasureKind::BodyWater},  {11, MeasureKind::Pulse},
                {76, MeasureKind::MuscleMass}, {88, MeasureKind::BoneMass}, {170, MeasureKind::Bmi}};
    return m;
}

MeasureCodeMap MeasureCodeMap::parse(std::string_view text) {
    MeasureCodeMap m;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string body = prefs::trim(line);
        if (body.empty()) continue;
        auto eq = body.find('=');
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::InvalidConfig, "code map line " + std::to_string(line_no) + ": " + why);
        };
        if (eq == std::string::npos) fail("expected `<code> = <kind>`");
        std::string code_text = prefs::trim(body.substr(0, eq));
        std::string kind_text = prefs::trim(body.substr(eq + 1));
        std::int64_t code = 0;
        auto [ptr, ec] = std::from_chars(code_text.data(), code_text.data() + code_text.size(), code);
        if (ec != std::errc{} || ptr != code_text.data() + code_text.size()) fail("bad code `" + code_text + "`");
        auto kind = measure_kind_from_string(kind_text);
        if (!kind) fail("unknown kind `" + kind_text + "`");
        if (!m.codes_.emplace(code, *kind).second) fail("duplicate code " + code_text);
    }
    return m;
}

std::optional<MeasureKind> MeasureCodeMap::lookup(std::int64_t code) const {
    auto it = codes_.find(code);
    if (it == codes_.end()) return std::nullopt;
    return it->second;
}

ParserRegistry ParserRegistry::builtin() {
    ParserRegistry r;
    r.add(std::make_unique<myvitals::Parser>());
    r.add(std::make_unique<glucosmart::Parser>());
    r.add(std::make_unique<healthmate::Parser>());
    return r;
}

void ParserRegistry::add(std::unique_ptr<AppParser> parser) { parsers_.push_back(std::move(parser)); }

const AppParser* ParserRegistry::find(std::string_view id) const {
    for (const auto& p : parsers_)
        if (p->id() == id) return p.get();
    return nullptr;
}

std::vector<AppDataRoot> enumerate_app_roots(const EvidenceSource& source, const ParserRegistry& registry) {
    std::set<std::string> top;
    for (const auto& path : source.root_listing()) {
        auto slash = path.find('/');
        if (slash != std::string::npos) top.insert(path.substr(0, slash));
    }
    std::vector<AppDataRoot> roots;
    for (const auto& name : top) {
        AppDataRoot root{name, name, std::nullopt};
        std::vector<std::string_view> accepted;
        for (const auto& p : registry.parsers())
            if (p->detect(root, source)) accepted.push_back(p->id());
        if (accepted.size() == 1) root.matched_parser = std::string(accepted.front());
        roots.push_back(std::move(root));
    }
    return roots;  // std::set iteration already yields lexicographic order
}

std::vector<std::string> files_under(const AppDataRoot& root, const EvidenceSource& source) {
    std::string prefix = root.relative_path + "/";
    std::vector<std::string> out;
    for (auto it = source.root_listing().lower_bound(prefix);
         it != source.root_listing().end() && it->compare(0, prefix.size(), prefix) == 0; ++it)
        out.push_back(*it);
    return out;
}

std::string_view file_name(std::string_view relative_path) noexcept {
    auto slash = relative_path.rfind('/');
    return slash == std::string_view::npos ? relative_path : relative_path.substr(slash + 1);
}

}  // namespace phiscan
