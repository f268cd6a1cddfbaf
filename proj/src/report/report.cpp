#include "phiscan/report.hpp"

#include "phiscan/error.hpp"

#include <json.hpp>

#include <algorithm>

namespace phiscan {

using nlohmann::json;

bool ComplianceReport::has_violations() const {
    for (const auto& [app, list] : violations)
        for (const auto& v : list)
            if (v.severity == Severity::Violation) return true;
    return false;
}

namespace {

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::InvalidConfig, "report json: " + why); }

template <typename T, typename Parse>
T enum_field(const json& j, const char* key, Parse parse) {
    auto text = j.at(key).get<std::string>();
    auto v = parse(text);
    if (!v) bad(std::string("unknown ") + key + " `" + text + "`");
    return *v;
}

json locator_json(const SourceLocator& l) {
    return {{"package", l.package_name},
            {"path", l.relative_path},
            {"container", std::string(to_string(l.container))},
            {"detail", l.detail}};
}

SourceLocator locator_from(const json& j) {
    return SourceLocator{j.at("package").get<std::string>(), j.at("path").get<std::string>(),
                         enum_field<ContainerType>(j, "container", container_type_from_string),
                         j.at("detail").get<std::string>()};
}

json optional_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> optional_from(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<std::string>();
}

std::optional<CellState> cell_from_string(std::string_view s) {
    if (s == "recovered") return CellState::Recovered;
    if (s == "not-recovered") return CellState::NotRecovered;
    return std::nullopt;
}

json to_json(const ComplianceReport& r) {
    json j = json::object();
    j["schema_version"] = r.schema_version;
    j["scan_id"] = r.scan_id;
    j["tool_version"] = r.tool_version;
    j["evidence_origin"] = r.evidence_origin;
    j["generated_at"] = r.generated_at;
    j["redacted"] = r.redacted;

    j["file_digests"] = json::array();
    for (const auto& d : r.file_digests)
        j["file_digests"].push_back(
            {{"path", d.relative_path}, {"algorithm", d.algorithm}, {"digest", d.hex_digest}, {"bytes", d.byte_length}});

    j["apps"] = json::array();
    for (const auto& a : r.apps)
        j["apps"].push_back({{"app_name", a.app_name},
                             {"package", a.package_name},
                             {"parser_id", a.parser_id},
                             {"record_count", a.record_count}});

    j["databases"] = json::array();
    for (const auto& d : r.databases)
        j["databases"].push_back({{"path", d.relative_path},
                                  {"status", std::string(to_string(d.status))},
                                  {"header_magic_present", d.header_magic_present},
                                  {"entropy_bits_per_byte", d.entropy_bits_per_byte},
                                  {"note", optional_json(d.note)}});

    j["matrix"] = json::array();
    for (const auto& row : r.matrix) {
        json cells = json::object();
        for (const auto& [c, state] : row.cells)
            cells[std::string(to_string(c))] = state == CellState::Recovered ? "recovered" : "not-recovered";
        j["matrix"].push_back({{"app_name", row.app_name}, {"cells", cells}});
    }

    j["violations"] = json::object();
    for (const auto& [app, list] : r.violations) {
        json arr = json::array();
        for (const auto& v : list) {
            json ev = json::array();
            for (const auto& l : v.evidence) ev.push_back(locator_json(l));
            arr.push_back({{"kind", std::string(to_string(v.kind))},
                           {"severity", std::string(to_string(v.severity))},
                           {"description", v.description},
                           {"evidence", ev},
                           {"subject", optional_json(v.subject)},
                           {"excerpt", optional_json(v.excerpt)}});
        }
        j["violations"][app] = arr;
    }

    j["findings"] = json::array();
    for (const auto& f : r.findings)
        j["findings"].push_back({{"app", f.app},
                                 {"category", std::string(to_string(f.category))},
                                 {"rule_id", f.rule_id},
                                 {"excerpt", f.value_excerpt},
                                 {"locator", locator_json(f.locator)}});

    j["records"] = json::array();
    for (const auto& e : r.records)
        j["records"].push_back(
            {{"app", e.app}, {"kind", std::string(to_string(e.kind))}, {"locator", locator_json(e.locator)}});

    j["warnings"] = r.warnings;
    return j;
}

ComplianceReport from_json(const json& j) {
    ComplianceReport r;
    r.schema_version = j.at("schema_version").get<std::string>();
    if (r.schema_version != kReportSchemaVersion) bad("unsupported schema_version " + r.schema_version);
    r.scan_id = j.at("scan_id").get<std::string>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.evidence_origin = j.at("evidence_origin").get<std::string>();
    r.generated_at = j.at("generated_at").get<std::string>();
    r.redacted = j.at("redacted").get<bool>();

    for (const auto& d : j.at("file_digests"))
        r.file_digests.push_back(FileDigest{d.at("path").get<std::string>(), d.at("algorithm").get<std::string>(),
                                            d.at("digest").get<std::string>(), d.at("bytes").get<std::uint64_t>()});
    for (const auto& a : j.at("apps"))
        r.apps.push_back(AppSummary{a.at("app_name").get<std::string>(), a.at("package").get<std::string>(),
                                    a.at("parser_id").get<std::string>(), a.at("record_count").get<std::size_t>()});
    for (const auto& d : j.at("databases")) {
        DatabaseStatus s;
        s.relative_path = d.at("path").get<std::string>();
        s.status = enum_field<DbStatus>(d, "status", db_status_from_string);
        s.header_magic_present = d.at("header_magic_present").get<bool>();
        s.entropy_bits_per_byte = d.at("entropy_bits_per_byte").get<double>();
        s.note = optional_from(d, "note");
        r.databases.push_back(std::move(s));
    }
    for (const auto& row : j.at("matrix")) {
        PhiMatrixRow m;
        m.app_name = row.at("app_name").get<std::string>();
        for (const auto& [key, value] : row.at("cells").items()) {
            auto c = phi_category_from_string(key);
            auto state = cell_from_string(value.get<std::string>());
            if (!c || !state) bad("bad matrix cell " + key);
            m.cells[*c] = *state;
        }
        if (m.cells.size() != kAllCategories.size()) bad("matrix row for " + m.app_name + " lacks categories");
        r.matrix.push_back(std::move(m));
    }
    for (const auto& [app, list] : j.at("violations").items()) {
        auto& out = r.violations[app];
        for (const auto& v : list) {
            SecurityViolation s;
            s.kind = enum_field<ViolationKind>(v, "kind", violation_kind_from_string);
            s.severity = enum_field<Severity>(v, "severity", severity_from_string);
            s.description = v.at("description").get<std::string>();
            for (const auto& l : v.at("evidence")) s.evidence.push_back(locator_from(l));
            s.subject = optional_from(v, "subject");
            s.excerpt = optional_from(v, "excerpt");
            out.push_back(std::move(s));
        }
    }
    for (const auto& f : j.at("findings"))
        r.findings.push_back(PhiFinding{f.at("app").get<std::string>(),
                                        enum_field<PhiCategory>(f, "category", phi_category_from_string),
                                        f.at("excerpt").get<std::string>(), locator_from(f.at("locator")),
                                        f.at("rule_id").get<std::string>()});
    for (const auto& e : j.at("records"))
        r.records.push_back(RecordEntry{e.at("app").get<std::string>(),
                                        enum_field<ArtifactKind>(e, "kind", artifact_kind_from_string),
                                        locator_from(e.at("locator"))});
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

// Display width in terminal columns, counting each code point as one.
std::size_t columns(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xc0) != 0x80) ++n;
    return n;
}

std::string pad(std::string_view s, std::size_t width) {
    std::string out(s);
    for (auto w = columns(s); w < width; ++w) out.push_back(' ');
    return out;
}

std::string locator_text(const SourceLocator& l) {
    return l.relative_path + " [" + std::string(to_string(l.container)) + "] " + l.detail;
}

std::string render_text(const ComplianceReport& r) {
    std::string out;
    auto line = [&](const std::string& s = {}) {
        out += s;
        out.push_back('\n');
    };

    line("PHI compliance report");
    line("  scan id:       " + r.scan_id);
    line("  evidence:      " + r.evidence_origin);
    line("  generated at:  " + r.generated_at);
    line("  tool version:  " + r.tool_version);
    line(std::string("  excerpts:      ") + (r.redacted ? "redacted" : "unredacted"));
    line();

    line("HIPAA PHI stored in evaluated applications");
    std::size_t label_width = 0;
    for (auto c : kAllCategories) label_width = std::max(label_width, columns(category_label(c)));
    std::string header = pad("", label_width);
    std::vector<std::size_t> widths;
    for (const auto& row : r.matrix) {
        widths.push_back(std::max<std::size_t>(columns(row.app_name), 1));
        header += "  " + pad(row.app_name, widths.back());
    }
    line(header);
    for (auto c : kAllCategories) {
        std::string s = pad(category_label(c), label_width);
        for (std::size_t i = 0; i < r.matrix.size(); ++i) {
            auto it = r.matrix[i].cells.find(c);
            bool got = it != r.matrix[i].cells.end() && it->second == CellState::Recovered;
            s += "  " + pad(got ? "✓" : "X", widths[i]);
        }
        while (!s.empty() && s.back() == ' ') s.pop_back();
        line(s);
    }
    line(std::string(kMatrixKey));
    line();

    line("Security Rule");
    if (r.violations.empty()) line("  (no applications)");
    for (const auto& [app, list] : r.violations) {
        line("  " + app);
        if (list.empty()) line("    no issues");
        for (const auto& v : list) {
            std::string head = "    [" + std::string(to_string(v.severity)) + "] " + std::string(to_string(v.kind)) +
                               ": " + v.description;
            line(head);
            if (v.subject) line("      account:  " + *v.subject);
            if (v.excerpt) line("      excerpt:  " + *v.excerpt);
            for (const auto& e : v.evidence) line("      evidence: " + locator_text(e));
        }
    }
    line();

    line("Findings (" + std::to_string(r.findings.size()) + ")");
    for (const auto& f : r.findings)
        line("  " + f.app + " | " + std::string(to_string(f.category)) + " | " + f.rule_id + " | " + f.value_excerpt +
             " | " + locator_text(f.locator));
    line();

    line("Databases (" + std::to_string(r.databases.size()) + ")");
    for (const auto& d : r.databases) {
        std::string s = "  " + d.relative_path + " " + std::string(to_string(d.status)) +
                        " entropy=" + format_decimal(d.entropy_bits_per_byte);
        if (d.note) s += " (" + *d.note + ")";
        line(s);
    }
    line();

    line("Warnings (" + std::to_string(r.warnings.size()) + ")");
    for (const auto& w : r.warnings) line("  " + w);
    line();

    line("File digests (" + std::to_string(r.file_digests.size()) + ")");
    for (const auto& d : r.file_digests)
        line("  " + d.algorithm + ":" + d.hex_digest + "  " + std::to_string(d.byte_length) + "  " + d.relative_path);
    return out;
}

}  // namespace

std::string render_report(const ComplianceReport& report, OutputFormat format) {
    if (format == OutputFormat::Text) return render_text(report);
    return to_json(report).dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

ComplianceReport parse_report_json(std::string_view text) {
    try {
        return from_json(json::parse(text));
    } catch (const json::exception& e) {
        bad(e.what());
    }
}

}  // namespace phiscan
