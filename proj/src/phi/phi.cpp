#include "phiscan/phi.hpp"

#include "phiscan/error.hpp"
#include "phiscan/prefs_xml.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

namespace phiscan {

namespace {

constexpr std::array<std::string_view, 7> kCategoryNames{
    "health-condition", "provision-of-healthcare", "payment", "name", "address", "ssn", "date-of-birth"};
constexpr std::array<std::string_view, 7> kCategoryLabels{
    "Physical or mental health condition",
    "Provision of healthcare",
    "Payment for healthcare",
    "Patient name",
    "Patient address",
    "Social security number",
    "Date of birth"};

}  // namespace

std::string_view to_string(PhiCategory category) noexcept {
    return kCategoryNames[static_cast<std::size_t>(category)];
}
std::optional<PhiCategory> phi_category_from_string(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
        if (kCategoryNames[i] == text) return static_cast<PhiCategory>(i);
    return std::nullopt;
}
std::string_view category_label(PhiCategory category) noexcept {
    return kCategoryLabels[static_cast<std::size_t>(category)];
}

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
        case ViolationKind::PlaintextEphiAtRest: return "plaintext-ephi-at-rest";
        case ViolationKind::PlaintextCredential: return "plaintext-credential";
        case ViolationKind::WeakSafeguardNote: return "weak-safeguard-note";
    }
    return "weak-safeguard-note";
}
std::optional<ViolationKind> violation_kind_from_string(std::string_view text) noexcept {
    for (auto k : {ViolationKind::PlaintextEphiAtRest, ViolationKind::PlaintextCredential,
                   ViolationKind::WeakSafeguardNote})
        if (to_string(k) == text) return k;
    return std::nullopt;
}
std::string_view to_string(Severity severity) noexcept {
    return severity == Severity::Violation ? "violation" : "informational";
}
std::optional<Severity> severity_from_string(std::string_view text) noexcept {
    if (text == "violation") return Severity::Violation;
    if (text == "informational") return Severity::Informational;
    return std::nullopt;
}

bool finding_less(const PhiFinding& a, const PhiFinding& b) {
    return std::tie(a.app, a.locator, a.category, a.rule_id, a.value_excerpt) <
           std::tie(b.app, b.locator, b.category, b.rule_id, b.value_excerpt);
}

// ---------------------------------------------------------------------------
// Pattern matchers shared by the raw sweep and the text-field predicates.

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_hex(char c) { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }
bool is_alnum(char c) { return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_local_char(char c) { return is_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-'; }
bool is_domain_char(char c) { return is_alnum(c) || c == '.' || c == '-'; }
bool is_word_char(char c) { return is_alnum(c) || c == '_' || c == '.' || c == '@' || c == '-'; }

struct Match {
    RawPattern pattern;
    std::size_t offset;
    std::string text;
};

void match_emails(std::string_view s, std::vector<Match>& out) {
    std::size_t resume = 0;
    for (std::size_t at = s.find('@'); at != std::string_view::npos; at = s.find('@', at + 1)) {
        if (at < resume) continue;
        std::size_t b = at;
        while (b > resume && is_local_char(s[b - 1])) --b;
        while (b < at && s[b] == '.') ++b;
        std::size_t e = at + 1;
        while (e < s.size() && is_domain_char(s[e])) ++e;
        while (e > at + 1 && (s[e - 1] == '.' || s[e - 1] == '-')) --e;
        auto candidate = s.substr(b, e - b);
        if (b < at && is_email_address(candidate)) {
            out.push_back({RawPattern::Email, b, std::string(candidate)});
            resume = e;
        }
    }
}

void match_macs(std::string_view s, std::vector<Match>& out) {
    for (std::size_t i = 0; i + 17 <= s.size(); ++i) {
        if (i > 0 && (is_hex(s[i - 1]) || s[i - 1] == ':')) continue;
        bool ok = true;
        for (std::size_t k = 0; k < 17 && ok; ++k) ok = (k % 3 == 2) ? s[i + k] == ':' : is_hex(s[i + k]);
        if (!ok) continue;
        if (i + 17 < s.size() && (is_hex(s[i + 17]) || s[i + 17] == ':')) continue;
        out.push_back({RawPattern::MacAddress, i, std::string(s.substr(i, 17))});
        i += 16;
    }
}

void match_ssns(std::string_view s, std::vector<Match>& out) {
    for (std::size_t i = 0; i + 11 <= s.size(); ++i) {
        if (i > 0 && (is_digit(s[i - 1]) || s[i - 1] == '-')) continue;
        if (!looks_like_ssn(s.substr(i, 11))) continue;
        if (i + 11 < s.size() && (is_digit(s[i + 11]) || s[i + 11] == '-')) continue;
        out.push_back({RawPattern::Ssn, i, std::string(s.substr(i, 11))});
        i += 10;
    }
}

// Bounded digit runs: epoch-like (10 or 13 digits) and card-like (15-19, Luhn).
void match_digit_runs(std::string_view s, std::vector<Match>& out) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_digit(s[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && is_digit(s[j])) ++j;
        bool bounded = (i == 0 || (s[i - 1] != '-' && s[i - 1] != '.')) &&
                       (j == s.size() || (s[j] != '-' && s[j] != '.'));
        auto run = s.substr(i, j - i);
        if (bounded && (run.size() == 10 || run.size() == 13) && run.front() == '1')
            out.push_back({RawPattern::DateToken, i, std::string(run)});
        if (bounded && run.size() >= 15 && run.size() <= 19 && run.front() >= '3' && run.front() <= '6' &&
            luhn_valid(run))
            out.push_back({RawPattern::PaymentCard, i, std::string(run)});
        i = j;
    }
}

void match_iso_dates(std::string_view s, std::vector<Match>& out) {
    for (std::size_t i = 0; i + 10 <= s.size(); ++i) {
        if (i > 0 && (is_digit(s[i - 1]) || s[i - 1] == '-')) continue;
        auto cand = s.substr(i, 10);
        if (!parse_calendar_date(cand)) continue;
        if (i + 10 < s.size() && (is_digit(s[i + 10]) || s[i + 10] == '-')) continue;
        out.push_back({RawPattern::DateToken, i, std::string(cand)});
        i += 9;
    }
}

void match_secret_keys(std::string_view s, std::vector<Match>& out) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_word_char(s[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && is_word_char(s[j])) ++j;
        std::string lower(s.substr(i, j - i));
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower.find("password") != std::string::npos || lower.find("token") != std::string::npos)
            out.push_back({RawPattern::SecretKeyName, i, std::string(s.substr(i, j - i))});
        i = j;
    }
}

std::vector<Match> match_all(std::string_view s) {
    std::vector<Match> out;
    match_emails(s, out);
    match_macs(s, out);
    match_ssns(s, out);
    match_digit_runs(s, out);
    match_iso_dates(s, out);
    match_secret_keys(s, out);
    return out;
}

bool is_printable(std::uint8_t b) { return (b >= 0x20 && b <= 0x7e) || b == '\t'; }

constexpr std::size_t kMinRun = 4;

}  // namespace

bool looks_like_ssn(std::string_view t) noexcept {
    if (t.size() != 11 || t[3] != '-' || t[6] != '-') return false;
    for (std::size_t i : {0, 1, 2, 4, 5, 7, 8, 9, 10})
        if (!is_digit(t[i])) return false;
    return true;
}

bool luhn_valid(std::string_view digits) noexcept {
    if (digits.empty()) return false;
    int sum = 0;
    bool twice = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (!is_digit(*it)) return false;
        int d = *it - '0';
        if (twice) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        twice = !twice;
    }
    return sum % 10 == 0;
}

std::vector<ArtifactRecord> scan_raw(std::span<const std::uint8_t> bytes, const SourceLocator& base) {
    std::vector<std::pair<std::size_t, Match>> hits;
    std::size_t i = 0;
    while (i < bytes.size()) {
        if (!is_printable(bytes[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < bytes.size() && is_printable(bytes[j])) ++j;
        if (j - i >= kMinRun) {
            std::string_view run(reinterpret_cast<const char*>(bytes.data() + i), j - i);
            for (auto& m : match_all(run)) hits.emplace_back(i + m.offset, std::move(m));
        }
        i = j;
    }
    std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first, a.second.pattern) < std::tie(b.first, b.second.pattern);
    });

    std::vector<ArtifactRecord> out;
    out.reserve(hits.size());
    for (auto& [offset, m] : hits) {
        SourceLocator loc = base;
        std::string where = "offset:" + std::to_string(offset) + ":" + std::string(to_string(m.pattern));
        loc.detail = base.container == ContainerType::RawBytes ? where : base.detail + "#" + where;
        out.push_back(ArtifactRecord{RawHit{m.pattern, std::move(m.text)}, std::move(loc), {}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rule predicates.

namespace {

using Excerpts = std::vector<std::string>;
using Predicate = std::function<Excerpts(const ArtifactRecord&)>;

std::string linkage(const std::string& device, const EpochInstant& at) {
    return device.empty() ? "at=" + at.utc : "device=" + device + " at=" + at.utc;
}

// Free-text fields that a user or app could have stuffed an identifier into.
std::vector<std::string> text_fields(const ArtifactRecord& r) {
    std::vector<std::string> out;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BloodPressureReading>) {
                if (p.note) out.push_back(*p.note);
                out.push_back(p.device_id);
                out.push_back(p.account);
            } else if constexpr (std::is_same_v<T, OximetryReading>) {
                out.push_back(p.phone_data_id);
                out.push_back(p.machine_device_id);
            } else if constexpr (std::is_same_v<T, WeightReading>) {
                out.push_back(p.account);
            } else if constexpr (std::is_same_v<T, MyVitalsProfile>) {
                out.push_back(p.name);
                out.push_back(p.timezone_location);
            } else if constexpr (std::is_same_v<T, GlucoProfile>) {
                out.push_back(p.username);
                out.push_back(p.device_identifier);
            } else if constexpr (std::is_same_v<T, HealthMateUser>) {
                out.push_back(p.name);
                out.push_back(p.gender);
            } else if constexpr (std::is_same_v<T, DeviceRegistration>) {
                if (p.timezone) out.push_back(*p.timezone);
            }
        },
        r.payload);
    return out;
}

Excerpts pattern_in_fields(const ArtifactRecord& r, RawPattern pattern) {
    Excerpts out;
    if (auto* hit = std::get_if<RawHit>(&r.payload)) {
        if (hit->pattern == pattern) out.push_back(hit->text);
        return out;
    }
    for (const auto& field : text_fields(r)) {
        std::vector<Match> ms;
        if (pattern == RawPattern::Ssn) match_ssns(field, ms);
        else match_digit_runs(field, ms);
        for (auto& m : ms)
            if (m.pattern == pattern) out.push_back(std::move(m.text));
    }
    return out;
}

const std::map<std::string, Predicate, std::less<>>& predicates() {
    static const std::map<std::string, Predicate, std::less<>> table{
        {"physiological_reading",
         [](const ArtifactRecord& r) -> Excerpts {
             if (auto* p = std::get_if<BloodPressureReading>(&r.payload))
                 return {"sys=" + std::to_string(p->systolic) + " dia=" + std::to_string(p->diastolic) +
                         " pulse=" + std::to_string(p->pulse)};
             if (auto* p = std::get_if<OximetryReading>(&r.payload))
                 return {"spo2=" + std::to_string(p->result_spo2) + " pr=" + std::to_string(p->pulse_rate) +
                         " pi=" + format_decimal(p->perfusion_index)};
             if (auto* p = std::get_if<WeightReading>(&r.payload))
                 return {"weight=" + format_decimal(p->weight) + " bmi=" + format_decimal(p->bmi) +
                         " fat=" + format_decimal(p->body_fat_pct) + " water=" + format_decimal(p->body_water_pct) +
                         " muscle=" + format_decimal(p->muscle_mass) +
                         " kcal=" + format_decimal(p->daily_calorie_intake) + " bone=" + format_decimal(p->bone_mass)};
             if (auto* p = std::get_if<GlucoseStatus>(&r.payload)) return {"glucose=" + format_decimal(p->level)};
             if (auto* p = std::get_if<HealthMateMeasurement>(&r.payload))
                 return {std::string(to_string(p->kind)) + "=" + format_decimal(p->value)};
             return {};
         }},
        {"reading_device_or_time_link",
         [](const ArtifactRecord& r) -> Excerpts {
             if (auto* p = std::get_if<BloodPressureReading>(&r.payload)) return {linkage(p->device_id, p->measured_at)};
             if (auto* p = std::get_if<OximetryReading>(&r.payload)) {
                 std::string device = p->machine_type;
                 if (!p->machine_device_id.empty()) device += (device.empty() ? "" : "/") + p->machine_device_id;
                 return {linkage(device, p->measured_at)};
             }
             if (auto* p = std::get_if<WeightReading>(&r.payload)) return {linkage("", p->measured_at)};
             if (auto* p = std::get_if<EnvironmentReading>(&r.payload)) return {linkage("", p->measured_at)};
             if (auto* p = std::get_if<GlucoseStatus>(&r.payload)) return {linkage("", p->measured_at)};
             if (auto* p = std::get_if<HealthMateMeasurement>(&r.payload))
                 return {linkage(p->device_ref ? std::to_string(*p->device_ref) : "", p->measured_at)};
             return {};
         }},
        {"device_registration",
         [](const ArtifactRecord& r) -> Excerpts {
             if (auto* p = std::get_if<DeviceRegistration>(&r.payload))
                 return {"mac=" + p->mac_address + " type=" + std::to_string(p->device_type) +
                         " model=" + std::to_string(p->device_model)};
             return {};
         }},
        {"profile_name",
         [](const ArtifactRecord& r) -> Excerpts {
             if (auto* p = std::get_if<MyVitalsProfile>(&r.payload); p && !p->name.empty()) return {p->name};
             if (auto* p = std::get_if<GlucoProfile>(&r.payload); p && !p->username.empty()) return {p->username};
             if (auto* p = std::get_if<HealthMateUser>(&r.payload); p && !p->name.empty()) return {p->name};
             return {};
         }},
        {"profile_birth_date",
         [](const ArtifactRecord& r) -> Excerpts {
             if (auto* p = std::get_if<MyVitalsProfile>(&r.payload)) return {p->date_of_birth.to_string()};
             if (auto* p = std::get_if<HealthMateUser>(&r.payload)) return {p->birthday.to_string()};
             return {};
         }},
        {"profile_timezone_location",
         [](const ArtifactRecord& r) -> Excerpts {
             if (auto* p = std::get_if<MyVitalsProfile>(&r.payload); p && !p->timezone_location.empty())
                 return {p->timezone_location};
             return {};
         }},
        {"raw_email",
         [](const ArtifactRecord& r) -> Excerpts {
             if (auto* hit = std::get_if<RawHit>(&r.payload); hit && hit->pattern == RawPattern::Email)
                 return {hit->text};
             return {};
         }},
        {"ssn_value", [](const ArtifactRecord& r) { return pattern_in_fields(r, RawPattern::Ssn); }},
        {"payment_value", [](const ArtifactRecord& r) { return pattern_in_fields(r, RawPattern::PaymentCard); }},
    };
    return table;
}

constexpr std::string_view kDefaultRules = R"(phi-rules 1
# rule_id                      predicate                     category
physiological-reading          physiological_reading         health-condition
device-registration            device_registration           provision-of-healthcare
reading-device-time-linkage    reading_device_or_time_link   provision-of-healthcare
profile-name                   profile_name                  name
profile-birth-date             profile_birth_date            date-of-birth
proxy-location:timezone        profile_timezone_location     address
raw-email-identifier           raw_email                     name
ssn-pattern                    ssn_value                     ssn
payment-card-pattern           payment_value                 payment
)";

}  // namespace

std::string_view RuleTable::default_text() noexcept { return kDefaultRules; }

std::vector<std::string_view> RuleTable::predicate_names() {
    std::vector<std::string_view> out;
    for (const auto& [name, fn] : predicates()) out.push_back(name);
    return out;
}

RuleTable RuleTable::defaults() {
    static const RuleTable table = parse(kDefaultRules);
    return table;
}

RuleTable RuleTable::parse(std::string_view text) {
    RuleTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool header = false;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::vector<std::string> cols;
        for (std::string f; fields >> f;) cols.push_back(f);
        if (cols.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::InvalidConfig, "rule table line " + std::to_string(line_no) + ": " + why);
        };
        if (!header) {
            if (cols.size() != 2 || cols[0] != "phi-rules") fail("expected `phi-rules <version>` header");
            if (cols[1] != "1") fail("unsupported rule table version " + cols[1]);
            table.version_ = 1;
            header = true;
            continue;
        }
        if (cols.size() != 3) fail("expected `<rule_id> <predicate> <category>`");
        if (!predicates().contains(cols[1])) fail("unknown predicate `" + cols[1] + "`");
        auto category = phi_category_from_string(cols[2]);
        if (!category) fail("unknown category `" + cols[2] + "`");
        if (!ids.insert(cols[0]).second) fail("duplicate rule id `" + cols[0] + "`");
        table.rules_.push_back(PhiRule{cols[0], cols[1], *category});
    }
    if (!header) throw Error(ErrorCode::InvalidConfig, "rule table is empty");
    return table;
}

const PhiRule* RuleTable::find(std::string_view rule_id) const {
    for (const auto& r : rules_)
        if (r.rule_id == rule_id) return &r;
    return nullptr;
}

std::vector<PhiFinding> classify_record(const ArtifactRecord& record, std::string_view app, const RuleTable& rules) {
    std::vector<PhiFinding> out;
    for (const auto& rule : rules.rules()) {
        auto it = predicates().find(rule.predicate);
        for (auto& excerpt : it->second(record))
            out.push_back(PhiFinding{std::string(app), rule.category, std::move(excerpt), record.locator, rule.rule_id});
    }
    return out;
}

PhiMatrixRow evaluate_privacy_rule(std::string_view app, std::span<const PhiFinding> findings) {
    PhiMatrixRow row;
    row.app_name = std::string(app);
    for (auto c : kAllCategories) row.cells[c] = CellState::NotRecovered;
    for (const auto& f : findings) row.cells[f.category] = CellState::Recovered;
    return row;
}

std::vector<SecurityViolation> evaluate_security_rule(std::string_view, std::span<const ArtifactRecord> records,
                                                      std::span<const PhiFinding> findings,
                                                      std::span<const DatabaseStatus> db_statuses) {
    std::vector<SecurityViolation> out;

    auto plaintext_db = [&](const std::string& path) {
        for (const auto& s : db_statuses)
            if (s.relative_path == path) return s.status == DbStatus::PlaintextSqlite;
        return false;
    };

    std::set<SourceLocator> ephi;
    for (const auto& f : findings) {
        if (f.category != PhiCategory::HealthCondition) continue;
        SourceLocator where = f.locator;
        if (where.container == ContainerType::SqliteTable && plaintext_db(where.relative_path)) {
            where.detail = where.detail.substr(0, where.detail.find(':'));
            ephi.insert(where);
        } else if (where.container == ContainerType::XmlFile) {
            ephi.insert(where);
        }
    }
    if (!ephi.empty()) {
        SecurityViolation v;
        v.kind = ViolationKind::PlaintextEphiAtRest;
        v.severity = Severity::Violation;
        v.evidence.assign(ephi.begin(), ephi.end());
        v.description = "health-condition data stored unencrypted at rest in " + std::to_string(ephi.size()) +
                        (ephi.size() == 1 ? " location" : " locations");
        out.push_back(std::move(v));
    }

    for (const auto& r : records) {
        auto* cred = std::get_if<CredentialSet>(&r.payload);
        if (!cred || !cred->password_plaintext) continue;
        SecurityViolation v;
        v.kind = ViolationKind::PlaintextCredential;
        v.severity = Severity::Violation;
        v.evidence.push_back(r.locator);
        v.description = "account password stored in plaintext";
        v.subject = cred->account;
        v.excerpt = *cred->password_plaintext;
        out.push_back(std::move(v));
    }

    if (out.empty() && !findings.empty()) {
        std::set<SourceLocator> where;
        for (const auto& f : findings) where.insert(f.locator);
        SecurityViolation v;
        v.kind = ViolationKind::WeakSafeguardNote;
        v.severity = Severity::Informational;
        v.evidence.assign(where.begin(), where.end());
        v.description = "identifying PHI recoverable from unencrypted storage; no health data exposed";
        out.push_back(std::move(v));
    }
    return out;
}

std::string redact(std::string_view value) {
    std::vector<std::string_view> points;
    for (std::size_t i = 0; i < value.size();) {
        auto lead = static_cast<unsigned char>(value[i]);
        std::size_t len = lead < 0x80 ? 1 : lead >= 0xf0 ? 4 : lead >= 0xe0 ? 3 : lead >= 0xc0 ? 2 : 1;
        len = std::min(len, value.size() - i);
        points.push_back(value.substr(i, len));
        i += len;
    }
    if (points.size() <= 4) return "****";
    std::string out;
    out.append(points[0]).append(points[1]).append("***");
    out.append(points[points.size() - 2]).append(points[points.size() - 1]);
    return out;
}

}  // namespace phiscan
