#pragma once

// HIPAA PHI classification of recovered records, the generic raw-byte sweep,
// and Privacy/Security Rule evaluation.

#include "phiscan/artifact.hpp"
#include "phiscan/db_status.hpp"

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phiscan {

// Order is the published matrix row order.
enum class PhiCategory { HealthCondition, ProvisionOfHealthcare, Payment, Name, Address, Ssn, DateOfBirth };

inline constexpr std::array<PhiCategory, 7> kAllCategories{
    PhiCategory::HealthCondition, PhiCategory::ProvisionOfHealthcare, PhiCategory::Payment, PhiCategory::Name,
    PhiCategory::Address,         PhiCategory::Ssn,                   PhiCategory::DateOfBirth};

std::string_view to_string(PhiCategory category) noexcept;
std::optional<PhiCategory> phi_category_from_string(std::string_view text) noexcept;
/// Human label used in the text matrix.
std::string_view category_label(PhiCategory category) noexcept;

struct PhiFinding {
    std::string app;
    PhiCategory category = PhiCategory::Name;
    std::string value_excerpt;
    SourceLocator locator;
    std::string rule_id;

    friend bool operator==(const PhiFinding&, const PhiFinding&) = default;
};

/// (app, locator, category, rule_id, excerpt) ordering used by reports.
bool finding_less(const PhiFinding& a, const PhiFinding& b);

struct PhiRule {
    std::string rule_id;
    std::string predicate;
    PhiCategory category = PhiCategory::Name;
};

/// Versioned rule table: `phi-rules 1` header, then `<rule_id> <predicate> <category>` lines.
class RuleTable {
public:
    static RuleTable defaults();
    /// Throws Error(InvalidConfig) on unknown predicates/categories or a bad header.
    static RuleTable parse(std::string_view text);
    static std::string_view default_text() noexcept;
    /// Names accepted in the predicate column.
    static std::vector<std::string_view> predicate_names();

    const std::vector<PhiRule>& rules() const noexcept { return rules_; }
    const PhiRule* find(std::string_view rule_id) const;
    int version() const noexcept { return version_; }

private:
    int version_ = 1;
    std::vector<PhiRule> rules_;
};

/// Applies every rule whose predicate fires on the record. A record may yield
/// several findings; unrecognized records yield none.
std::vector<PhiFinding> classify_record(const ArtifactRecord& record, std::string_view app,
                                        const RuleTable& rules = RuleTable::defaults());

/// Pattern sweep over printable runs: emails, MAC addresses, date tokens,
/// password/token key names, SSNs and Luhn-valid card numbers. Hit locators
/// carry the byte offset in their detail.
std::vector<ArtifactRecord> scan_raw(std::span<const std::uint8_t> bytes, const SourceLocator& base);

bool looks_like_ssn(std::string_view text) noexcept;
bool luhn_valid(std::string_view digits) noexcept;

enum class CellState { Recovered, NotRecovered };

struct PhiMatrixRow {
    std::string app_name;
    std::map<PhiCategory, CellState> cells;

    friend bool operator==(const PhiMatrixRow&, const PhiMatrixRow&) = default;
};

/// cell = recovered iff at least one finding carries that category.
PhiMatrixRow evaluate_privacy_rule(std::string_view app, std::span<const PhiFinding> findings);

enum class ViolationKind { PlaintextEphiAtRest, PlaintextCredential, WeakSafeguardNote };
enum class Severity { Violation, Informational };

std::string_view to_string(ViolationKind kind) noexcept;
std::optional<ViolationKind> violation_kind_from_string(std::string_view text) noexcept;
std::string_view to_string(Severity severity) noexcept;
std::optional<Severity> severity_from_string(std::string_view text) noexcept;

struct SecurityViolation {
    ViolationKind kind = ViolationKind::WeakSafeguardNote;
    Severity severity = Severity::Informational;
    std::vector<SourceLocator> evidence;
    std::string description;
    std::optional<std::string> subject;  // account the violation concerns
    std::optional<std::string> excerpt;  // e.g. the recovered password

    friend bool operator==(const SecurityViolation&, const SecurityViolation&) = default;
};

/// plaintext-ephi-at-rest when a health-condition finding came from a
/// plaintext SQLite table or an XML file; plaintext-credential when a
/// password was recovered; otherwise an informational note if any PHI was found.
std::vector<SecurityViolation> evaluate_security_rule(std::string_view app,
                                                      std::span<const ArtifactRecord> records,
                                                      std::span<const PhiFinding> findings,
                                                      std::span<const DatabaseStatus> db_statuses);

/// First two and last two characters with a fixed mask between; short values
/// are masked completely. Works on UTF-8 code points.
std::string redact(std::string_view value);

}  // namespace phiscan
