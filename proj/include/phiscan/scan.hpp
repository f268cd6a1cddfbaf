#pragma once

// End-to-end scan: open evidence, run parsers, sweep leftovers, classify,
// evaluate both HIPAA rules and assemble the report.

#include "phiscan/evidence.hpp"
#include "phiscan/parser.hpp"
#include "phiscan/phi.hpp"
#include "phiscan/report.hpp"

#include <chrono>
#include <optional>
#include <string_view>
#include <vector>

namespace phiscan {

std::string_view tool_version() noexcept;

struct ScanOptions {
    bool redact = true;
    /// Pins generated_at and recovered_at; wall clock otherwise.
    std::optional<std::chrono::system_clock::time_point> fixed_clock;
    MeasureCodeMap code_map = MeasureCodeMap::defaults();
    RuleTable rules = RuleTable::defaults();
    bool parallel = true;
};

struct ScanResult {
    ComplianceReport report;
    /// Every recovered record, raw hits included, in inventory order.
    std::vector<ArtifactRecord> records;
};

ScanResult run_scan(const EvidenceSource& source, const ParserRegistry& registry, const ScanOptions& options);

/// Parses YYYY-MM-DDThh:mm:ssZ. Returns nullopt when malformed.
std::optional<std::chrono::system_clock::time_point> parse_utc_instant(std::string_view text);

}  // namespace phiscan
