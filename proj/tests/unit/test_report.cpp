#include "support.hpp"

#include "phiscan/error.hpp"
#include "phiscan/parser.hpp"
#include "phiscan/report.hpp"
#include "phiscan/scan.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace phiscan;
using phiscan::testing::ScratchDir;

namespace {

ScanResult scan_random(std::uint64_t seed, ScratchDir& dir, bool redact = true) {
    auto spec = testing::random_spec(seed);
    auto out = dir / (spec.output_kind == forge::OutputKind::Zip ? "t.zip" : "t");
    forge::generate_fixture(spec, out);
    ScanOptions o;
    o.redact = redact;
    o.fixed_clock = parse_utc_instant("2021-06-01T12:00:00Z");
    return run_scan(EvidenceSource::open(out), ParserRegistry::builtin(), o);
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("json round-trips through the parser") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        ScratchDir dir;
        auto scan = scan_random(seed, dir, seed % 2);
        auto text = render_report(scan.report, OutputFormat::Json);
        auto back = parse_report_json(text);
        CHECK(back == scan.report);
        CHECK(render_report(back, OutputFormat::Json) == text);
    }
}

TEST_CASE("json is canonical") {
    ScratchDir dir;
    auto scan = scan_random(3, dir);
    auto text = render_report(scan.report, OutputFormat::Json);
    REQUIRE(!text.empty());
    CHECK(text.back() == '\n');
    CHECK(text.find('\r') == std::string::npos);
    auto j = nlohmann::json::parse(text);
    CHECK(j.at("schema_version") == "1");
    CHECK(j.at("generated_at") == "2021-06-01T12:00:00Z");
    CHECK(j.at("scan_id").get<std::string>().rfind("scan-", 0) == 0);
    CHECK(j.at("scan_id").get<std::string>().size() == 5 + 32);
    // Re-dumping with sorted keys reproduces the bytes exactly.
    CHECK(j.dump(2) + "\n" == text);
}

TEST_CASE("schema mismatches are rejected") {
    auto bad = [](std::string_view t) {
        try {
            parse_report_json(t);
        } catch (const Error& e) {
            return e.code() == ErrorCode::InvalidConfig;
        }
        return false;
    };
    CHECK(bad("{}"));
    CHECK(bad("not json"));
    ScratchDir dir;
    auto j = nlohmann::json::parse(render_report(scan_random(4, dir).report, OutputFormat::Json));
    j["schema_version"] = "99";
    CHECK(bad(j.dump()));
}

TEST_CASE("text view carries the matrix, key and sections") {
    ScratchDir dir;
    auto scan = scan_random(5, dir);
    auto text = render_report(scan.report, OutputFormat::Text);
    CHECK(text.find(kMatrixKey) != std::string::npos);
    for (auto c : kAllCategories) CHECK(text.find(std::string(category_label(c))) != std::string::npos);
    for (const auto* section : {"Security Rule", "Findings", "Databases", "File digests"})
        CHECK(text.find(section) != std::string::npos);
    for (const auto& row : scan.report.matrix) CHECK(text.find(row.app_name) != std::string::npos);
}

TEST_CASE("redaction hides recovered values") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ScratchDir a, b;
        auto clear = scan_random(seed, a, false);
        auto masked = scan_random(seed, b, true);
        REQUIRE(clear.report.findings.size() == masked.report.findings.size());
        for (std::size_t i = 0; i < clear.report.findings.size(); ++i)
            CHECK(masked.report.findings[i].value_excerpt == redact(clear.report.findings[i].value_excerpt));
        auto text = render_report(masked.report, OutputFormat::Json);
        for (const auto& [app, list] : clear.report.violations)
            for (const auto& v : list)
                if (v.excerpt && v.excerpt->size() > 4) CHECK(text.find("\"" + *v.excerpt + "\"") == std::string::npos);
    }
}

TEST_CASE("informational notes alone are not violations") {
    ComplianceReport r;
    CHECK_FALSE(r.has_violations());
    SecurityViolation note;
    note.kind = ViolationKind::WeakSafeguardNote;
    note.severity = Severity::Informational;
    r.violations["x"].push_back(note);
    CHECK_FALSE(r.has_violations());
    SecurityViolation real;
    real.kind = ViolationKind::PlaintextCredential;
    real.severity = Severity::Violation;
    r.violations["y"].push_back(real);
    CHECK(r.has_violations());
}

}
