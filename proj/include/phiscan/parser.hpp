#pragma once

// Per-application parser interface and the registry that binds parsers to
// top-level folders of the evidence tree.

#include "phiscan/artifact.hpp"
#include "phiscan/db_status.hpp"
#include "phiscan/evidence.hpp"
#include "phiscan/prefs_xml.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace phiscan {

struct AppDataRoot {
    std::string package_name;
    std::string relative_path;
    std::optional<std::string> matched_parser;
};

/// Where a byte buffer came from; used to stamp locators on parsed records.
struct Origin {
    std::string package_name;
    std::string relative_path;
    std::chrono::system_clock::time_point recovered_at{};
};

/// Output of one table or document parse. Row-level problems are tallied
/// here instead of aborting.
struct ParseResult {
    std::vector<ArtifactRecord> records;
    std::vector<std::string> warnings;
    std::size_t malformed_rows = 0;

    void merge(ParseResult&& other);
};

/// XML entries a structured parser did not interpret; swept for raw hits.
struct LeftoverEntries {
    std::string relative_path;
    std::vector<prefs::Entry> entries;
};

/// integer type code -> measurement kind, for the Health Mate `measure` table.
class MeasureCodeMap {
public:
    static MeasureCodeMap defaults();
    /// Lines of `<code> = <kind>`; `#` starts a comment. Throws Error(InvalidConfig).
    static MeasureCodeMap parse(std::string_view text);

    std::optional<MeasureKind> lookup(std::int64_t code) const;
    const std::map<std::int64_t, MeasureKind>& entries() const noexcept { return codes_; }

private:
    std::map<std::int64_t, MeasureKind> codes_;
};

struct ScanContext {
    MeasureCodeMap code_map = MeasureCodeMap::defaults();
    std::chrono::system_clock::time_point recovered_at{};
};

struct AppScan {
    std::string package_name;
    std::string parser_id;
    std::string app_name;
    std::vector<ArtifactRecord> records;
    std::vector<DatabaseStatus> databases;
    std::vector<std::string> warnings;
    std::vector<LeftoverEntries> leftovers;
    std::set<std::string> consumed;  // files handled by a structured parser
};

class AppParser {
public:
    virtual ~AppParser() = default;

    virtual std::string_view id() const = 0;
    /// Application label used in reports.
    virtual std::string_view app_name() const = 0;
    virtual std::string_view folder_signature() const = 0;
    /// Artifact that must exist below the folder, empty if the folder alone suffices.
    virtual std::string_view artifact_signature() const = 0;

    virtual bool detect(const AppDataRoot& root, const EvidenceSource& source) const = 0;
    virtual AppScan parse(const AppDataRoot& root, const EvidenceSource& source,
                          const ScanContext& ctx) const = 0;
};

class ParserRegistry {
public:
    /// Registry holding the MyVitals, Gluco-Smart and Health Mate parsers.
    static ParserRegistry builtin();

    void add(std::unique_ptr<AppParser> parser);
    const std::vector<std::unique_ptr<AppParser>>& parsers() const noexcept { return parsers_; }
    const AppParser* find(std::string_view id) const;

private:
    std::vector<std::unique_ptr<AppParser>> parsers_;
};

/// One root per top-level directory, sorted by package name. matched_parser
/// is set only when exactly one parser's detect accepts the root.
std::vector<AppDataRoot> enumerate_app_roots(const EvidenceSource& source,
                                             const ParserRegistry& registry);

/// Files below `root` (full relative paths), in listing order.
std::vector<std::string> files_under(const AppDataRoot& root, const EvidenceSource& source);

/// Final path segment.
std::string_view file_name(std::string_view relative_path) noexcept;

}  // namespace phiscan
