#include "phiscan/healthmate.hpp"

#include "table_rows.hpp"

#include <cctype>
#include <map>

namespace phiscan::healthmate {

using detail::collect_rows;
using detail::need_instant;
using detail::need_int;
using detail::need_real;
using detail::need_text;
using detail::opt_text;
using detail::require;
using detail::TableRows;

bool detect(const AppDataRoot& root, const EvidenceSource& source) {
    if (root.package_name != kPackage) return false;
    for (const auto& path : files_under(root, source))
        if (file_name(path) == kDatabaseName) return true;
    return false;
}

std::optional<std::string> normalize_mac(std::string_view text) {
    if (text.size() != 17) return std::nullopt;
    std::string out(text);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i % 3 == 2) {
            if (out[i] != ':') return std::nullopt;
            continue;
        }
        auto c = static_cast<unsigned char>(out[i]);
        if (!std::isxdigit(c)) return std::nullopt;
        out[i] = static_cast<char>(std::tolower(c));
    }
    return out;
}

ParseResult parse_devices(std::span<const std::uint8_t> db, const Origin& origin) {
    sqlite::Database database(db);
    TableRows t(database, "devices",
                {"id", "associationDate", "lastUseDate", "modifiedDate", "macAddress", "firmware", "timezone",
                 "battery", "type", "model"});
    return collect_rows(t, origin, [&](const sqlite::Row& row) {
        DeviceRegistration d;
        d.id = need_int(t.at(row, 0), "id");
        d.association_date = need_instant(t.at(row, 1), "associationDate");
        d.last_use_date = need_instant(t.at(row, 2), "lastUseDate");
        d.modified_date = need_instant(t.at(row, 3), "modifiedDate");
        auto mac = normalize_mac(need_text(t.at(row, 4), "macAddress"));
        require(mac.has_value(), "macAddress is not colon-hex");
        d.mac_address = *mac;
        d.firmware = need_int(t.at(row, 5), "firmware");
        d.timezone = opt_text(t.at(row, 6));
        d.battery_pct = need_int(t.at(row, 7), "battery");
        require(d.battery_pct >= 0 && d.battery_pct <= 100, "battery outside [0, 100]");
        d.device_type = need_int(t.at(row, 8), "type");
        d.device_model = need_int(t.at(row, 9), "model");
        return d;
    });
}

ParseResult parse_measures(std::span<const std::uint8_t> db, const Origin& origin, const MeasureCodeMap& codes) {
    sqlite::Database database(db);
    TableRows t(database, "measure", {"type", "value", "date", "deviceId"});
    auto out = collect_rows(t, origin, [&](const sqlite::Row& row) -> Payload {
        std::int64_t code = need_int(t.at(row, 0), "type");
        double value = need_real(t.at(row, 1), "value");
        auto kind = codes.lookup(code);
        if (!kind) return RawHit{RawPattern::UnmappedMeasure, "type=" + std::to_string(code) + " value=" + format_decimal(value)};
        HealthMateMeasurement m;
        m.kind = *kind;
        m.value = value;
        require(value > 0, "value must be positive");
        m.measured_at = need_instant(t.at(row, 2), "date");
        if (const auto& ref = t.at(row, 3); !detail::is_null(ref)) m.device_ref = need_int(ref, "deviceId");
        return m;
    });

    // A blood-pressure session stores systolic and diastolic as separate rows
    // sharing one timestamp; the pair must be ordered.
    std::map<std::int64_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> sessions;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        auto* m = std::get_if<HealthMateMeasurement>(&out.records[i].payload);
        if (!m) continue;
        if (m->kind == MeasureKind::Systolic) sessions[m->measured_at.raw_value].first.push_back(i);
        if (m->kind == MeasureKind::Diastolic) sessions[m->measured_at.raw_value].second.push_back(i);
    }
    std::vector<bool> drop(out.records.size(), false);
    for (const auto& [at, pair] : sessions) {
        for (auto s : pair.first)
            for (auto d : pair.second)
                if (std::get<HealthMateMeasurement>(out.records[s].payload).value <=
                    std::get<HealthMateMeasurement>(out.records[d].payload).value)
                    drop[s] = drop[d] = true;
    }
    ParseResult kept;
    kept.warnings = std::move(out.warnings);
    kept.malformed_rows = out.malformed_rows;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        if (!drop[i]) {
            kept.records.push_back(std::move(out.records[i]));
            continue;
        }
        ++kept.malformed_rows;
        kept.warnings.push_back(origin.relative_path + " " + out.records[i].locator.detail +
                                ": MalformedRow: systolic does not exceed diastolic in the same session");
    }
    return kept;
}

ParseResult parse_users(std::span<const std::uint8_t> db, const Origin& origin) {
    sqlite::Database database(db);
    TableRows t(database, "users", {"name", "gender", "birthday", "email"});
    return collect_rows(t, origin, [&](const sqlite::Row& row) {
        HealthMateUser u;
        u.name = need_text(t.at(row, 0), "name");
        u.gender = opt_text(t.at(row, 1)).value_or("");
        auto date = parse_calendar_date(need_text(t.at(row, 2), "birthday"));
        require(date.has_value(), "birthday is not a YYYY-MM-DD date");
        u.birthday = *date;
        u.email = need_text(t.at(row, 3), "email");
        require(is_email_address(u.email), "email is not an email address");
        return u;
    });
}

AppScan Parser::parse(const AppDataRoot& root, const EvidenceSource& source, const ScanContext& ctx) const {
    AppScan scan;
    scan.package_name = root.package_name;
    scan.parser_id = std::string(id());
    scan.app_name = std::string(app_name());

    for (const auto& path : files_under(root, source)) {
        if (file_name(path) != kDatabaseName) continue;
        scan.consumed.insert(path);
        Bytes db = source.read_file(path);
        scan.databases.push_back(classify_database_bytes(path, db));
        Origin origin{root.package_name, path, ctx.recovered_at};

        auto run = [&](std::string_view table, auto&& fn) {
            try {
                ParseResult r = fn();
                scan.records.insert(scan.records.end(), r.records.begin(), r.records.end());
                scan.warnings.insert(scan.warnings.end(), r.warnings.begin(), r.warnings.end());
            } catch (const Error& e) {
                scan.warnings.push_back(path + " " + std::string(table) + ": " + e.what());
            }
        };
        run("devices", [&] { return parse_devices(db, origin); });
        run("measure", [&] { return parse_measures(db, origin, ctx.code_map); });
        run("users", [&] { return parse_users(db, origin); });
    }
    return scan;
}

}  // namespace phiscan::healthmate
