#include "phiscan/fixture.hpp"

#include "phiscan/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace phiscan::forge {

namespace {

using nlohmann::json;

json locator_json(const SourceLocator& l) {
    return {{"package", l.package_name},
            {"path", l.relative_path},
            {"container", std::string(to_string(l.container))},
            {"detail", l.detail}};
}

SourceLocator locator_from(const json& j) {
    auto container = container_type_from_string(j.at("container").get<std::string>());
    if (!container) throw Error(ErrorCode::InvalidSpec, "manifest: unknown container");
    return {j.at("package").get<std::string>(), j.at("path").get<std::string>(), *container,
            j.at("detail").get<std::string>()};
}

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
std::optional<std::string> opt_from(const json& j) {
    return j.is_null() ? std::nullopt : std::optional<std::string>(j.get<std::string>());
}

template <typename E, typename F>
E must(std::optional<E> v, F&& what) {
    if (!v) throw Error(ErrorCode::InvalidSpec, "manifest: unknown " + std::string(what));
    return *v;
}

json stamp(const EpochInstant& t) {
    return {{"raw", t.raw_value}, {"unit", std::string(to_string(t.unit))}, {"utc", t.utc}};
}

struct PayloadJson {
    json operator()(const BloodPressureReading& r) const {
        return {{"systolic", r.systolic}, {"diastolic", r.diastolic}, {"pulse", r.pulse},
                {"measured_at", stamp(r.measured_at)}, {"device_id", r.device_id}, {"note", opt(r.note)},
                {"account", r.account}};
    }
    json operator()(const OximetryReading& r) const {
        return {{"result_spo2", r.result_spo2}, {"pulse_rate", r.pulse_rate}, {"perfusion_index", r.perfusion_index},
                {"measured_at", stamp(r.measured_at)}, {"last_change_at", stamp(r.last_change_at)},
                {"phone_created_at", stamp(r.phone_created_at)}, {"health_id", r.health_id},
                {"machine_type", r.machine_type}, {"machine_device_id", r.machine_device_id},
                {"used_user_id", r.used_user_id}, {"phone_data_id", r.phone_data_id}};
    }
    json operator()(const WeightReading& r) const {
        return {{"weight", r.weight}, {"bmi", r.bmi}, {"body_fat_pct", r.body_fat_pct},
                {"body_water_pct", r.body_water_pct}, {"muscle_mass", r.muscle_mass},
                {"daily_calorie_intake", r.daily_calorie_intake}, {"bone_mass", r.bone_mass},
                {"measured_at", stamp(r.measured_at)}, {"account", r.account}};
    }
    json operator()(const EnvironmentReading& r) const {
        return {{"humidity", r.humidity}, {"temperature", r.temperature}, {"lighting_level", r.lighting_level},
                {"measured_at", stamp(r.measured_at)}};
    }
    json operator()(const GlucoseStatus& r) const { return {{"level", r.level}, {"measured_at", stamp(r.measured_at)}}; }
    json operator()(const MyVitalsProfile& r) const {
        return {{"name", r.name}, {"date_of_birth", r.date_of_birth.to_string()},
                {"timezone_location", r.timezone_location}, {"email", r.email}};
    }
    json operator()(const GlucoProfile& r) const {
        return {{"username", r.username}, {"device_identifier", r.device_identifier}};
    }
    json operator()(const HealthMateUser& r) const {
        return {{"name", r.name}, {"gender", r.gender}, {"birthday", r.birthday.to_string()}, {"email", r.email}};
    }
    json operator()(const CredentialSet& r) const {
        return {{"account", r.account}, {"password_plaintext", opt(r.password_plaintext)},
                {"refresh_token", opt(r.refresh_token)}, {"access_token", opt(r.access_token)},
                {"region_host", opt(r.region_host)},
                {"is_online_flag", r.is_online_flag ? json(*r.is_online_flag) : json(nullptr)}};
    }
    json operator()(const DeviceRegistration& r) const {
        return {{"id", r.id}, {"association_date", stamp(r.association_date)},
                {"last_use_date", stamp(r.last_use_date)}, {"modified_date", stamp(r.modified_date)},
                {"mac_address", r.mac_address}, {"firmware", r.firmware}, {"timezone", opt(r.timezone)},
                {"battery_pct", r.battery_pct}, {"device_type", r.device_type}, {"device_model", r.device_model}};
    }
    json operator()(const HealthMateMeasurement& r) const {
        return {{"kind", std::string(to_string(r.kind))}, {"value", r.value}, {"measured_at", stamp(r.measured_at)},
                {"device_ref", r.device_ref ? json(*r.device_ref) : json(nullptr)}};
    }
    json operator()(const RawHit& r) const {
        return {{"pattern", std::string(to_string(r.pattern))}, {"text", r.text}};
    }
};

std::string loc_text(const SourceLocator& l) {
    return l.package_name + ":" + l.relative_path + "[" + std::string(to_string(l.container)) + "]" + l.detail;
}

}  // namespace

std::string payload_json(const ArtifactRecord& record) { return std::visit(PayloadJson{}, record.payload).dump(); }

std::string manifest_to_json(const FixtureManifest& m) {
    json j;
    j["format"] = kSpecFormat;
    j["spec"] = m.spec;
    j["seed"] = m.seed;
    j["files"] = m.files;
    j["apps"] = json::array();
    for (const auto& a : m.apps) {
        json cells = json::object();
        for (const auto& [c, s] : a.matrix.cells)
            cells[std::string(to_string(c))] = s == CellState::Recovered ? "recovered" : "not-recovered";
        json violations = json::array();
        for (const auto& v : a.violations)
            violations.push_back({{"kind", std::string(to_string(v.kind))},
                                  {"severity", std::string(to_string(v.severity))},
                                  {"subject", opt(v.subject)},
                                  {"excerpt", opt(v.excerpt)}});
        j["apps"].push_back({{"app_name", a.app_name},
                             {"package", a.package_name},
                             {"parser_id", a.parser_id},
                             {"matrix", cells},
                             {"violations", violations}});
    }
    j["records"] = json::array();
    for (const auto& r : m.records) {
        json findings = json::array();
        for (const auto& f : r.findings)
            findings.push_back(
                {{"category", std::string(to_string(f.category))}, {"rule_id", f.rule_id}, {"excerpt", f.excerpt}});
        j["records"].push_back({{"app", r.app},
                                {"kind", std::string(to_string(r.kind))},
                                {"locator", locator_json(r.locator)},
                                {"expected", json::parse(r.expected)},
                                {"findings", findings}});
    }
    j["malformed"] = json::array();
    for (const auto& l : m.malformed) j["malformed"].push_back(locator_json(l));
    j["databases"] = json::array();
    for (const auto& d : m.databases)
        j["databases"].push_back({{"path", d.relative_path}, {"status", std::string(to_string(d.status))}});
    j["planted_record_count"] = m.records.size();
    return j.dump(2) + "\n";
}

FixtureManifest manifest_from_json(std::string_view text) {
    try {
        auto j = json::parse(text);
        if (j.at("format").get<int>() != kSpecFormat) throw Error(ErrorCode::InvalidSpec, "manifest: unsupported format");
        FixtureManifest m;
        m.spec = j.at("spec").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.files = j.at("files").get<std::vector<std::string>>();
        for (const auto& a : j.at("apps")) {
            ExpectedApp e;
            e.app_name = a.at("app_name").get<std::string>();
            e.package_name = a.at("package").get<std::string>();
            e.parser_id = a.at("parser_id").get<std::string>();
            e.matrix.app_name = e.app_name;
            for (const auto& [k, v] : a.at("matrix").items())
                e.matrix.cells[must(phi_category_from_string(k), "category")] =
                    v.get<std::string>() == "recovered" ? CellState::Recovered : CellState::NotRecovered;
            for (const auto& v : a.at("violations"))
                e.violations.push_back(
                    {must(violation_kind_from_string(v.at("kind").get<std::string>()), "violation kind"),
                     must(severity_from_string(v.at("severity").get<std::string>()), "severity"),
                     opt_from(v.at("subject")), opt_from(v.at("excerpt"))});
            m.apps.push_back(std::move(e));
        }
        for (const auto& r : j.at("records")) {
            PlantedRecord p;
            p.app = r.at("app").get<std::string>();
            p.kind = must(artifact_kind_from_string(r.at("kind").get<std::string>()), "record kind");
            p.locator = locator_from(r.at("locator"));
            p.expected = r.at("expected").dump();
            for (const auto& f : r.at("findings"))
                p.findings.push_back({must(phi_category_from_string(f.at("category").get<std::string>()), "category"),
                                      f.at("rule_id").get<std::string>(), f.at("excerpt").get<std::string>()});
            m.records.push_back(std::move(p));
        }
        for (const auto& l : j.at("malformed")) m.malformed.push_back(locator_from(l));
        for (const auto& d : j.at("databases"))
            m.databases.push_back({d.at("path").get<std::string>(),
                                   must(db_status_from_string(d.at("status").get<std::string>()), "db status")});
        if (j.at("planted_record_count").get<std::size_t>() != m.records.size())
            throw Error(ErrorCode::InvalidSpec, "manifest: planted_record_count disagrees with records");
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("manifest: ") + e.what());
    }
}

Verification verify_scan_against_manifest(const FixtureManifest& manifest, const ComplianceReport& report) {
    Verification out;
    auto miss = [&](std::string s) { out.mismatches.push_back(std::move(s)); };
    auto shown = [&](const std::string& v) { return report.redacted ? redact(v) : v; };

    // Records: planted and scanned inventories must coincide.
    using RecordKey = std::tuple<std::string, ArtifactKind, SourceLocator>;
    std::multiset<RecordKey> scanned;
    for (const auto& r : report.records) scanned.insert({r.app, r.kind, r.locator});
    std::multiset<RecordKey> planted;
    for (const auto& r : manifest.records) planted.insert({r.app, r.kind, r.locator});
    for (const auto& k : planted)
        if (!scanned.contains(k))
            miss("missing record " + std::string(to_string(std::get<1>(k))) + " at " + loc_text(std::get<2>(k)));
    for (const auto& k : scanned)
        if (!planted.contains(k))
            miss("unexpected record " + std::string(to_string(std::get<1>(k))) + " at " + loc_text(std::get<2>(k)));

    // Findings, with values compared through the report's redaction policy.
    using FindingKey = std::tuple<std::string, SourceLocator, PhiCategory, std::string, std::string>;
    std::multiset<FindingKey> expected, actual;
    for (const auto& r : manifest.records)
        for (const auto& f : r.findings) expected.insert({r.app, r.locator, f.category, f.rule_id, shown(f.excerpt)});
    for (const auto& f : report.findings) actual.insert({f.app, f.locator, f.category, f.rule_id, f.value_excerpt});
    for (const auto& k : expected)
        if (actual.count(k) < expected.count(k))
            miss("missing finding " + std::string(to_string(std::get<2>(k))) + " (" + std::get<3>(k) + ") at " +
                 loc_text(std::get<1>(k)) + ": expected `" + std::get<4>(k) + "`");
    for (const auto& k : actual)
        if (expected.count(k) < actual.count(k))
            miss("unexpected finding " + std::string(to_string(std::get<2>(k))) + " (" + std::get<3>(k) + ") at " +
                 loc_text(std::get<1>(k)) + ": `" + std::get<4>(k) + "`");

    // Malformed rows surface as tallied warnings.
    for (const auto& l : manifest.malformed) {
        std::string needle = l.relative_path + " " + l.detail + ": MalformedRow";
        bool found = std::any_of(report.warnings.begin(), report.warnings.end(),
                                 [&](const std::string& w) { return w.find(needle) != std::string::npos; });
        if (!found) miss("malformed row not reported: " + loc_text(l));
    }

    // Apps, matrix and violations.
    std::set<std::string> expected_apps;
    for (const auto& a : manifest.apps) {
        expected_apps.insert(a.app_name);
        auto app = std::find_if(report.apps.begin(), report.apps.end(),
                                [&](const AppSummary& s) { return s.app_name == a.app_name; });
        if (app == report.apps.end()) {
            miss("app not detected: " + a.app_name);
            continue;
        }
        if (app->package_name != a.package_name || app->parser_id != a.parser_id)
            miss("app " + a.app_name + " bound to " + app->package_name + " via " + app->parser_id);
        auto row = std::find_if(report.matrix.begin(), report.matrix.end(),
                                [&](const PhiMatrixRow& r) { return r.app_name == a.app_name; });
        if (row == report.matrix.end()) miss("matrix row missing for " + a.app_name);
        else
            for (auto c : kAllCategories) {
                auto want = a.matrix.cells.at(c);
                auto got = row->cells.contains(c) ? row->cells.at(c) : CellState::NotRecovered;
                if (want != got)
                    miss("matrix " + a.app_name + " / " + std::string(to_string(c)) + ": expected " +
                         (want == CellState::Recovered ? "recovered" : "not-recovered"));
            }

        using ViolationKey = std::tuple<ViolationKind, Severity, std::optional<std::string>, std::optional<std::string>>;
        std::multiset<ViolationKey> want, got;
        for (const auto& v : a.violations)
            want.insert({v.kind, v.severity, v.subject ? std::optional(shown(*v.subject)) : std::nullopt,
                         v.excerpt ? std::optional(shown(*v.excerpt)) : std::nullopt});
        if (auto it = report.violations.find(a.app_name); it != report.violations.end())
            for (const auto& v : it->second) {
                got.insert({v.kind, v.severity, v.subject, v.excerpt});
                if (v.evidence.empty()) miss("violation without evidence for " + a.app_name);
            }
        if (want != got) {
            std::string text = "violations for " + a.app_name + " differ: expected {";
            for (const auto& v : want) text += std::string(to_string(std::get<0>(v))) + " ";
            text += "} got {";
            for (const auto& v : got) text += std::string(to_string(std::get<0>(v))) + " ";
            miss(text + "}");
        }
    }
    for (const auto& row : report.matrix)
        if (!expected_apps.contains(row.app_name)) miss("unexpected matrix row " + row.app_name);

    // Database classification.
    std::set<std::pair<std::string, DbStatus>> want_db, got_db;
    for (const auto& d : manifest.databases) want_db.insert({d.relative_path, d.status});
    for (const auto& d : report.databases) got_db.insert({d.relative_path, d.status});
    for (const auto& d : want_db)
        if (!got_db.contains(d)) miss("database " + d.first + " not classified " + std::string(to_string(d.second)));
    for (const auto& d : got_db)
        if (!want_db.contains(d)) miss("unexpected database status " + d.first + " " + std::string(to_string(d.second)));

    return out;
}

Verification verify_scan_against_manifest(const FixtureManifest& manifest, const ComplianceReport& report,
                                          std::span<const ArtifactRecord> records) {
    auto out = verify_scan_against_manifest(manifest, report);
    std::map<std::pair<ArtifactKind, SourceLocator>, const PlantedRecord*> planted;
    for (const auto& p : manifest.records) planted[{p.kind, p.locator}] = &p;
    for (const auto& r : records) {
        auto it = planted.find({r.kind(), r.locator});
        if (it == planted.end()) continue;  // already reported as unexpected
        if (json::parse(it->second->expected) != json::parse(payload_json(r)))
            out.mismatches.push_back("payload differs at " + loc_text(r.locator) + ": expected " +
                                     it->second->expected + " got " + payload_json(r));
    }
    return out;
}

}  // namespace phiscan::forge
