#include "phiscan/scan.hpp"

#include "phiscan/digest.hpp"
#include "phiscan/error.hpp"

#include <algorithm>
#include <future>
#include <tuple>

#ifndef PHISCAN_VERSION
#define PHISCAN_VERSION "0.0.0"
#endif

namespace phiscan {

std::string_view tool_version() noexcept { return PHISCAN_VERSION; }

std::optional<std::chrono::system_clock::time_point> parse_utc_instant(std::string_view text) {
    // YYYY-MM-DDThh:mm:ssZ
    if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' || text[19] != 'Z')
        return std::nullopt;
    auto date = parse_calendar_date(text.substr(0, 10));
    if (!date) return std::nullopt;
    auto two = [&](std::size_t at) -> int {
        if (!std::isdigit(static_cast<unsigned char>(text[at])) || !std::isdigit(static_cast<unsigned char>(text[at + 1])))
            return -1;
        return (text[at] - '0') * 10 + (text[at + 1] - '0');
    };
    int h = two(11), m = two(14), s = two(17);
    if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59) return std::nullopt;
    using namespace std::chrono;
    sys_days day = year{date->year} / month{date->month} / std::chrono::day{date->day};
    return time_point_cast<system_clock::duration>(day + hours{h} + minutes{m} + seconds{s});
}

namespace {

struct AppWork {
    AppDataRoot root;
    const AppParser* parser = nullptr;
    AppScan scan;
    std::vector<std::string> errors;
};

std::string leftover_text(const prefs::Entry& e) { return e.key + "\n" + e.value; }

// Structured parse followed by the raw sweep of whatever the parser left alone.
void process_app(AppWork& work, const EvidenceSource& source, const ScanContext& ctx) {
    try {
        work.scan = work.parser->parse(work.root, source, ctx);
    } catch (const Error& e) {
        work.errors.push_back(work.root.package_name + ": " + e.what());
        work.scan.package_name = work.root.package_name;
        work.scan.parser_id = std::string(work.parser->id());
        work.scan.app_name = std::string(work.parser->app_name());
    }
    for (const auto& path : files_under(work.root, source)) {
        if (work.scan.consumed.contains(path)) continue;
        SourceLocator base{work.root.package_name, path, ContainerType::RawBytes, ""};
        auto hits = scan_raw(source.read_file(path), base);
        work.scan.records.insert(work.scan.records.end(), hits.begin(), hits.end());
    }
    for (const auto& left : work.scan.leftovers) {
        for (const auto& entry : left.entries) {
            SourceLocator base{work.root.package_name, left.relative_path, ContainerType::XmlFile,
                               "entry[" + std::to_string(entry.index) + "]"};
            auto text = leftover_text(entry);
            auto hits = scan_raw(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), base);
            work.scan.records.insert(work.scan.records.end(), hits.begin(), hits.end());
        }
    }
    for (auto& r : work.scan.records) r.recovered_at = ctx.recovered_at;
}

std::string scan_identifier(const std::vector<FileDigest>& digests) {
    std::string manifest;
    for (const auto& d : digests) manifest += d.relative_path + '\0' + d.hex_digest + '\n';
    auto hex = sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(manifest.data()), manifest.size()));
    return "scan-" + hex.substr(0, 32);
}

}  // namespace

ScanResult run_scan(const EvidenceSource& source, const ParserRegistry& registry, const ScanOptions& options) {
    auto now = options.fixed_clock.value_or(std::chrono::system_clock::now());
    ScanContext ctx{options.code_map, now};

    ComplianceReport report;
    report.tool_version = std::string(tool_version());
    report.evidence_origin = source.display_name();
    report.generated_at =
        format_utc_seconds(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
    report.redacted = options.redact;

    for (const auto& path : source.root_listing()) report.file_digests.push_back(source.hash_file(path));
    report.scan_id = scan_identifier(report.file_digests);

    for (const auto& rejected : source.rejected_entries())
        report.warnings.push_back("skipped evidence entry: " + rejected);

    std::vector<AppWork> work;
    for (auto& root : enumerate_app_roots(source, registry)) {
        if (!root.matched_parser) {
            report.warnings.push_back(root.package_name + ": no registered parser recognizes this folder");
            continue;
        }
        const AppParser* parser = registry.find(*root.matched_parser);
        work.push_back(AppWork{std::move(root), parser, {}, {}});
    }

    if (options.parallel && work.size() > 1) {
        std::vector<std::future<void>> pending;
        for (auto& w : work)
            pending.push_back(std::async(std::launch::async, [&w, &source, &ctx] { process_app(w, source, ctx); }));
        for (auto& f : pending) f.get();
    } else {
        for (auto& w : work) process_app(w, source, ctx);
    }

    // Deterministic fold in app-name order, independent of completion order.
    std::sort(work.begin(), work.end(), [](const AppWork& a, const AppWork& b) {
        return std::tie(a.scan.app_name, a.root.package_name) < std::tie(b.scan.app_name, b.root.package_name);
    });

    ScanResult result;
    for (auto& w : work) {
        const auto& app = w.scan.app_name;
        std::vector<PhiFinding> findings;
        for (const auto& r : w.scan.records) {
            auto f = classify_record(r, app, options.rules);
            findings.insert(findings.end(), f.begin(), f.end());
        }
        report.matrix.push_back(evaluate_privacy_rule(app, findings));
        report.violations[app] = evaluate_security_rule(app, w.scan.records, findings, w.scan.databases);
        report.findings.insert(report.findings.end(), findings.begin(), findings.end());
        report.databases.insert(report.databases.end(), w.scan.databases.begin(), w.scan.databases.end());
        report.apps.push_back(AppSummary{app, w.root.package_name, w.scan.parser_id, w.scan.records.size()});
        for (const auto& r : w.scan.records) report.records.push_back(RecordEntry{app, r.kind(), r.locator});
        report.warnings.insert(report.warnings.end(), w.errors.begin(), w.errors.end());
        report.warnings.insert(report.warnings.end(), w.scan.warnings.begin(), w.scan.warnings.end());
        result.records.insert(result.records.end(), w.scan.records.begin(), w.scan.records.end());
    }

    std::sort(report.findings.begin(), report.findings.end(), finding_less);
    std::sort(report.records.begin(), report.records.end(), [](const RecordEntry& a, const RecordEntry& b) {
        return std::tie(a.app, a.locator, a.kind) < std::tie(b.app, b.locator, b.kind);
    });
    std::sort(report.databases.begin(), report.databases.end(),
              [](const DatabaseStatus& a, const DatabaseStatus& b) { return a.relative_path < b.relative_path; });

    if (options.redact) {
        for (auto& f : report.findings) f.value_excerpt = redact(f.value_excerpt);
        for (auto& [app, list] : report.violations)
            for (auto& v : list) {
                if (v.subject) v.subject = redact(*v.subject);
                if (v.excerpt) v.excerpt = redact(*v.excerpt);
            }
    }

    result.report = std::move(report);
    return result;
}

}  // namespace phiscan
