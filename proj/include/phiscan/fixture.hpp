#pragma once

// Synthetic evidence trees built from a declarative FixtureSpec, plus the
// manifest that predicts what a scan of the tree must report.

#include "phiscan/artifact.hpp"
#include "phiscan/evidence.hpp"
#include "phiscan/phi.hpp"
#include "phiscan/report.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace phiscan::forge {

inline constexpr int kSpecFormat = 1;

enum class OutputKind { Directory, Zip };

std::string_view to_string(OutputKind kind) noexcept;

/// One explicit table cell; monostate is SQL NULL.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;
/// Column name -> value. Columns left out are written as NULL.
using Row = std::map<std::string, Cell>;

/// Explicit rows are written first; `count` further rows are drawn at random.
struct TableSpec {
    std::size_t count = 0;
    std::vector<Row> rows;

    friend bool operator==(const TableSpec&, const TableSpec&) = default;
};

struct CredentialSpec {
    std::string account;
    std::optional<std::string> password;
    std::optional<std::string> refresh_token;
    std::optional<std::string> access_token;
    std::optional<std::string> region_host;
    std::optional<bool> is_online;
    std::optional<std::int64_t> region_flag;

    friend bool operator==(const CredentialSpec&, const CredentialSpec&) = default;
};

struct MyVitalsSpec {
    TableSpec bp;
    TableSpec spo2;
    TableSpec weight;
    TableSpec environment;
    TableSpec users;
    std::size_t malformed_bp = 0;    // rows planted with systolic <= diastolic
    std::size_t malformed_spo2 = 0;  // rows planted with Result = 0
    std::optional<CredentialSpec> credential;

    friend bool operator==(const MyVitalsSpec&, const MyVitalsSpec&) = default;
};

struct GlucoSpec {
    std::size_t encrypted_dbs = 0;
    std::size_t encrypted_db_bytes = 8192;
    std::optional<std::string> user_name;  // user_info.xml is written when either field is set
    std::optional<std::string> device_id;

    friend bool operator==(const GlucoSpec&, const GlucoSpec&) = default;
};

struct HealthMateSpec {
    TableSpec devices;
    TableSpec measures;
    TableSpec users;

    friend bool operator==(const HealthMateSpec&, const HealthMateSpec&) = default;
};

struct SqliteOptions {
    int page_size = 4096;
    bool vacuum = false;
    bool shuffle_inserts = false;  // insertion order permuted, rowids unchanged

    friend bool operator==(const SqliteOptions&, const SqliteOptions&) = default;
};

struct FixtureSpec {
    std::uint64_t seed = 0;
    OutputKind output_kind = OutputKind::Directory;
    SqliteOptions sqlite;
    std::optional<MyVitalsSpec> myvitals;
    std::optional<GlucoSpec> glucosmart;
    std::optional<HealthMateSpec> healthmate;

    friend bool operator==(const FixtureSpec&, const FixtureSpec&) = default;
};

/// Parses the YAML spec document. Throws Error(InvalidSpec) with a line number.
FixtureSpec parse_fixture_spec(std::string_view text);
/// Canonical YAML for a spec; parse_fixture_spec(emit_fixture_spec(s)) == s.
std::string emit_fixture_spec(const FixtureSpec& spec);

struct ExpectedFinding {
    PhiCategory category = PhiCategory::Name;
    std::string rule_id;
    std::string excerpt;  // unredacted

    friend bool operator==(const ExpectedFinding&, const ExpectedFinding&) = default;
};

struct PlantedRecord {
    std::string app;
    ArtifactKind kind = ArtifactKind::RawHit;
    SourceLocator locator;
    std::string expected;  // parsed form as compact JSON
    std::vector<ExpectedFinding> findings;

    friend bool operator==(const PlantedRecord&, const PlantedRecord&) = default;
};

struct ExpectedViolation {
    ViolationKind kind = ViolationKind::WeakSafeguardNote;
    Severity severity = Severity::Informational;
    std::optional<std::string> subject;
    std::optional<std::string> excerpt;

    friend bool operator==(const ExpectedViolation&, const ExpectedViolation&) = default;
};

struct ExpectedApp {
    std::string app_name;
    std::string package_name;
    std::string parser_id;
    PhiMatrixRow matrix;
    std::vector<ExpectedViolation> violations;

    friend bool operator==(const ExpectedApp&, const ExpectedApp&) = default;
};

struct ExpectedDatabase {
    std::string relative_path;
    DbStatus status = DbStatus::Empty;

    friend bool operator==(const ExpectedDatabase&, const ExpectedDatabase&) = default;
};

struct FixtureManifest {
    std::string spec;  // canonical YAML echo
    std::uint64_t seed = 0;
    std::vector<std::string> files;
    std::vector<ExpectedApp> apps;  // sorted by app_name
    std::vector<PlantedRecord> records;
    std::vector<SourceLocator> malformed;
    std::vector<ExpectedDatabase> databases;

    friend bool operator==(const FixtureManifest&, const FixtureManifest&) = default;
};

std::string manifest_to_json(const FixtureManifest& manifest);
/// Throws Error(InvalidSpec) on malformed manifest documents.
FixtureManifest manifest_from_json(std::string_view json);

/// Relative path -> file bytes.
using Tree = std::map<std::string, Bytes>;

struct Fixture {
    Tree tree;
    FixtureManifest manifest;
};

/// Builds the tree and manifest in memory. Deterministic in the spec.
/// Throws Error(InvalidSpec) for explicit rows that reference unknown columns.
Fixture build_fixture(const FixtureSpec& spec);

/// Deterministic zip of a tree: `.db` members stored, the rest deflated.
Bytes zip_tree(const Tree& tree);

/// Writes the tree as a directory (which must be absent or empty) or a zip
/// file, per spec.output_kind. Throws Error(IoFailure).
FixtureManifest generate_fixture(const FixtureSpec& spec, const std::filesystem::path& out);

struct Verification {
    std::vector<std::string> mismatches;
    bool passed() const noexcept { return mismatches.empty(); }
};

Verification verify_scan_against_manifest(const FixtureManifest& manifest, const ComplianceReport& report);

/// Also compares every recovered payload with the planted value.
Verification verify_scan_against_manifest(const FixtureManifest& manifest, const ComplianceReport& report,
                                          std::span<const ArtifactRecord> records);

/// A record's payload in the shape planted records use for `expected`.
std::string payload_json(const ArtifactRecord& record);

}  // namespace phiscan::forge
