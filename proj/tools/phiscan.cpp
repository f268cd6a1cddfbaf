// phiscan: forensic PHI scanner for Android health-app data roots.
//
// Exit codes: 0 scan completed clean, 2 violations found, 1 error.
// Reports and listings go to stdout (or -o); diagnostics go to stderr.

#include "phiscan/error.hpp"
#include "phiscan/evidence.hpp"
#include "phiscan/fixture.hpp"
#include "phiscan/parser.hpp"
#include "phiscan/report.hpp"
#include "phiscan/scan.hpp"
#include "phiscan/timeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace phiscan;

constexpr int kExitClean = 0;
constexpr int kExitError = 1;
constexpr int kExitViolations = 2;

struct CliConfig {
    std::string evidence_path;
    std::string format = "json";
    bool no_redact = false;
    std::string fixed_clock;
    std::string code_map_path;
    std::string rules_path;
    std::string out_path;
    bool serial = false;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + out_path);
}

OutputFormat format_of(const std::string& name) { return name == "text" ? OutputFormat::Text : OutputFormat::Json; }

ScanOptions options_from(const CliConfig& cfg) {
    ScanOptions opt;
    opt.redact = !cfg.no_redact;
    opt.parallel = !cfg.serial;
    if (!cfg.fixed_clock.empty()) {
        auto at = parse_utc_instant(cfg.fixed_clock);
        if (!at) throw Error(ErrorCode::InvalidConfig, "--fixed-clock expects YYYY-MM-DDThh:mm:ssZ, got " + cfg.fixed_clock);
        opt.fixed_clock = *at;
    }
    if (!cfg.code_map_path.empty()) opt.code_map = MeasureCodeMap::parse(slurp(cfg.code_map_path));
    if (!cfg.rules_path.empty()) opt.rules = RuleTable::parse(slurp(cfg.rules_path));
    return opt;
}

int cmd_scan(const CliConfig& cfg) {
    auto options = options_from(cfg);
    auto source = EvidenceSource::open(cfg.evidence_path);
    auto result = run_scan(source, ParserRegistry::builtin(), options);
    for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << "\n";
    emit(render_report(result.report, format_of(cfg.format)), cfg.out_path);
    return result.report.has_violations() ? kExitViolations : kExitClean;
}

int cmd_timeline(const CliConfig& cfg) {
    auto options = options_from(cfg);
    auto source = EvidenceSource::open(cfg.evidence_path);
    auto result = run_scan(source, ParserRegistry::builtin(), options);
    auto timeline = build_timeline(result.records);
    if (timeline.excluded)
        std::cerr << "timeline: " << timeline.excluded << " records without a timestamp were excluded\n";
    emit(render_timeline(timeline, format_of(cfg.format)), cfg.out_path);
    return kExitClean;
}

int cmd_fixtures(const std::string& spec_path, const std::string& out, std::string manifest_path) {
    forge::FixtureSpec spec;
    try {
        spec = forge::parse_fixture_spec(slurp(spec_path));
    } catch (const Error& e) {
        throw Error(e.code(), spec_path + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
    }
    if (out.ends_with(".zip")) spec.output_kind = forge::OutputKind::Zip;
    auto manifest = forge::generate_fixture(spec, out);
    if (manifest_path.empty()) {
        std::string base = out;
        while (base.size() > 1 && base.back() == '/') base.pop_back();
        manifest_path = base + ".manifest.json";
    }
    emit(forge::manifest_to_json(manifest), manifest_path);
    std::cerr << "fixtures: wrote " << manifest.files.size() << " files to " << out << " ("
              << forge::to_string(spec.output_kind) << "), " << manifest.records.size()
              << " planted records; manifest " << manifest_path << "\n";
    return kExitClean;
}

int cmd_list_parsers(const std::string& format) {
    const auto registry = ParserRegistry::builtin();
    if (format == "json") {
        auto list = nlohmann::json::array();
        for (const auto& p : registry.parsers())
            list.push_back({{"id", std::string(p->id())},
                            {"app_name", std::string(p->app_name())},
                            {"folder_signature", std::string(p->folder_signature())},
                            {"artifact_signature", std::string(p->artifact_signature())}});
        std::cout << list.dump(2) << "\n";
        return kExitClean;
    }
    std::vector<std::array<std::string, 4>> rows{{"ID", "APPLICATION", "FOLDER", "REQUIRED ARTIFACT"}};
    for (const auto& p : registry.parsers()) {
        std::string artifact(p->artifact_signature());
        rows.push_back({std::string(p->id()), std::string(p->app_name()), std::string(p->folder_signature()),
                        artifact.empty() ? "-" : artifact});
    }
    std::array<std::size_t, 4> width{};
    for (const auto& r : rows)
        for (std::size_t i = 0; i < 4; ++i) width[i] = std::max(width[i], r[i].size());
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t i = 0; i < 4; ++i) {
            std::string cell = r[i];
            if (i + 1 < 4) cell.resize(width[i] + 2, ' ');
            line += cell;
        }
        std::cout << line << "\n";
    }
    return kExitClean;
}

void add_scan_options(CLI::App* cmd, CliConfig& cfg) {
    cmd->add_option("path", cfg.evidence_path, "Evidence directory or .zip archive")->required();
    cmd->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    cmd->add_flag("--no-redact", cfg.no_redact, "Print recovered values in full");
    cmd->add_option("--fixed-clock", cfg.fixed_clock, "Pin generated_at, e.g. 2020-01-01T00:00:00Z");
    cmd->add_option("--code-map", cfg.code_map_path, "Health Mate measure code map");
    cmd->add_option("--rules", cfg.rules_path, "PHI rule table");
    cmd->add_option("-o,--output", cfg.out_path, "Write to this file instead of stdout");
    cmd->add_flag("--serial", cfg.serial, "Parse applications one at a time");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forensic PHI scanner for Android medical-device companion apps"};
    app.set_version_flag("--version", std::string(phiscan::tool_version()));
    app.require_subcommand(1);

    CliConfig scan_cfg, timeline_cfg;
    auto* scan = app.add_subcommand("scan", "Scan evidence and print the compliance report");
    add_scan_options(scan, scan_cfg);
    auto* timeline = app.add_subcommand("timeline", "Print every timestamped record in UTC order");
    add_scan_options(timeline, timeline_cfg);

    std::string spec_path, fixture_out, manifest_path;
    auto* fixtures = app.add_subcommand("fixtures", "Generate a synthetic evidence tree from a spec");
    fixtures->add_option("spec", spec_path, "Fixture spec (YAML)")->required();
    fixtures->add_option("-o,--output", fixture_out, "Output directory, or a .zip file")->required();
    fixtures->add_option("--manifest", manifest_path, "Manifest path (default <output>.manifest.json)");

    std::string list_format = "text";
    auto* list = app.add_subcommand("list-parsers", "Show the registered application parsers");
    list->add_option("--format", list_format, "Output format")->check(CLI::IsMember({"json", "text"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitClean : kExitError;
    }

    try {
        if (*scan) return cmd_scan(scan_cfg);
        if (*timeline) return cmd_timeline(timeline_cfg);
        if (*fixtures) return cmd_fixtures(spec_path, fixture_out, manifest_path);
        if (*list) return cmd_list_parsers(list_format);
    } catch (const phiscan::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
