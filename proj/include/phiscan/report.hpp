#pragma once

// Compliance report assembled from a scan, with canonical JSON and a
// plain-text rendering of the PHI matrix.

#include "phiscan/artifact.hpp"
#include "phiscan/db_status.hpp"
#include "phiscan/evidence.hpp"
#include "phiscan/phi.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phiscan {

enum class OutputFormat { Json, Text };

inline constexpr std::string_view kReportSchemaVersion = "1";

/// One application root a parser claimed.
struct AppSummary {
    std::string app_name;
    std::string package_name;
    std::string parser_id;
    std::size_t record_count = 0;

    friend bool operator==(const AppSummary&, const AppSummary&) = default;
};

/// Inventory line for a recovered record; values live in the findings.
struct RecordEntry {
    std::string app;
    ArtifactKind kind = ArtifactKind::RawHit;
    SourceLocator locator;

    friend bool operator==(const RecordEntry&, const RecordEntry&) = default;
};

struct ComplianceReport {
    std::string schema_version{kReportSchemaVersion};
    std::string scan_id;
    std::string tool_version;
    std::string evidence_origin;
    std::string generated_at;  // YYYY-MM-DDThh:mm:ssZ
    bool redacted = true;
    std::vector<FileDigest> file_digests;
    std::vector<AppSummary> apps;
    std::vector<DatabaseStatus> databases;
    std::vector<PhiMatrixRow> matrix;  // sorted by app_name
    std::map<std::string, std::vector<SecurityViolation>> violations;
    std::vector<PhiFinding> findings;  // sorted by finding_less
    std::vector<RecordEntry> records;
    std::vector<std::string> warnings;

    /// True when any app carries a non-informational violation.
    bool has_violations() const;

    friend bool operator==(const ComplianceReport&, const ComplianceReport&) = default;
};

/// Canonical JSON (sorted keys, two-space indent, trailing LF) or the text view.
std::string render_report(const ComplianceReport& report, OutputFormat format);

/// Inverse of the JSON rendering. Throws Error(InvalidConfig) on schema mismatch.
ComplianceReport parse_report_json(std::string_view json);

/// Key line printed under the text matrix.
inline constexpr std::string_view kMatrixKey =
    "Key: ✓ = Recovered from Application; X = Not Recovered from Application";

}  // namespace phiscan
