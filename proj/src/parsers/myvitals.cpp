#include "phiscan/myvitals.hpp"

#include "table_rows.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace phiscan::myvitals {

using detail::collect_rows;
using detail::need_instant;
using detail::need_int;
using detail::need_real;
using detail::need_text;
using detail::opt_text;
using detail::require;
using detail::TableRows;

bool detect(const AppDataRoot& root, const EvidenceSource& source) {
    return root.package_name == kPackage &&
           source.contains(root.relative_path + "/" + std::string(kDatabasePath));
}

ParseResult parse_bp_results(std::span<const std::uint8_t> db, const Origin& origin) {
    sqlite::Database database(db);
    TableRows t(database, kBpTable, {"Sys", "Dia", "Pulse", "MeasureTime", "DeviceID", "Note", "Account"});
    return collect_rows(t, origin, [&](const sqlite::Row& row) {
        BloodPressureReading r;
        r.systolic = need_int(t.at(row, 0), "Sys");
        r.diastolic = need_int(t.at(row, 1), "Dia");
        r.pulse = need_int(t.at(row, 2), "Pulse");
        require(r.diastolic > 0 && r.systolic > r.diastolic, "systolic must exceed diastolic > 0");
        require(r.pulse > 0, "pulse must be positive");
        r.measured_at = need_instant(t.at(row, 3), "MeasureTime");
        r.device_id = opt_text(t.at(row, 4)).value_or("");
        r.note = opt_text(t.at(row, 5));
        r.account = opt_text(t.at(row, 6)).value_or("");
        return r;
    });
}

ParseResult parse_spo2_results(std::span<const std::uint8_t> db, const Origin& origin) {
    sqlite::Database database(db);
    TableRows t(database, kSpo2Table,
                {"UsedUserID", "PhoneDataID", "iHealthID", "MachineType", "MachineDeviceID", "MeasureTime",
                 "LastChangeTime", "PhoneCreateTime", "Result", "PR", "PI"});
    auto out = collect_rows(t, origin, [&](const sqlite::Row& row) {
        OximetryReading r;
        r.used_user_id = need_int(t.at(row, 0), "UsedUserID");
        r.phone_data_id = opt_text(t.at(row, 1)).value_or("");
        r.health_id = need_text(t.at(row, 2), "iHealthID");
        r.machine_type = opt_text(t.at(row, 3)).value_or("");
        r.machine_device_id = opt_text(t.at(row, 4)).value_or("");
        r.measured_at = need_instant(t.at(row, 5), "MeasureTime");
        r.last_change_at = need_instant(t.at(row, 6), "LastChangeTime");
        r.phone_created_at = need_instant(t.at(row, 7), "PhoneCreateTime");
        r.result_spo2 = need_int(t.at(row, 8), "Result");
        r.pulse_rate = need_int(t.at(row, 9), "PR");
        r.perfusion_index = need_real(t.at(row, 10), "PI");
        require(r.result_spo2 > 0 && r.result_spo2 <= 100, "Result outside (0, 100]");
        require(r.pulse_rate > 0, "PR must be positive");
        require(r.perfusion_index >= 0, "PI must be non-negative");
        return r;
    });
    std::stable_sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
        return std::get<OximetryReading>(a.payload).measured_at.raw_value <
               std::get<OximetryReading>(b.payload).measured_at.raw_value;
    });
    return out;
}

ParseResult parse_weight_results(std::span<const std::uint8_t> db, const Origin& origin) {
    sqlite::Database database(db);
    TableRows t(database, kWeightTable,
                {"Weight", "BMI", "BodyFat", "BodyWater", "MuscleMass", "DailyCalorie", "BoneMass",
                 "MeasureTime", "Account"});
    return collect_rows(t, origin, [&](const sqlite::Row& row) {
        WeightReading r;
        r.weight = need_real(t.at(row, 0), "Weight");
        r.bmi = need_real(t.at(row, 1), "BMI");
        r.body_fat_pct = need_real(t.at(row, 2), "BodyFat");
        r.body_water_pct = need_real(t.at(row, 3), "BodyWater");
        r.muscle_mass = need_real(t.at(row, 4), "MuscleMass");
        r.daily_calorie_intake = need_real(t.at(row, 5), "DailyCalorie");
        r.bone_mass = need_real(t.at(row, 6), "BoneMass");
        r.measured_at = need_instant(t.at(row, 7), "MeasureTime");
        r.account = opt_text(t.at(row, 8)).value_or("");
        require(r.weight > 0, "Weight must be positive");
        require(r.body_fat_pct >= 0 && r.body_fat_pct <= 100, "BodyFat outside [0, 100]");
        require(r.body_water_pct >= 0 && r.body_water_pct <= 100, "BodyWater outside [0, 100]");
        return r;
    });
}

ParseResult parse_environment(std::span<const std::uint8_t> db, const Origin& origin) {
    sqlite::Database database(db);
    TableRows t(database, kEnvironmentTable, {"Humidity", "Temperature", "Lighting", "MeasureTime"});
    return collect_rows(t, origin, [&](const sqlite::Row& row) {
        EnvironmentReading r;
        r.humidity = need_real(t.at(row, 0), "Humidity");
        r.temperature = need_real(t.at(row, 1), "Temperature");
        r.lighting_level = need_real(t.at(row, 2), "Lighting");
        r.measured_at = need_instant(t.at(row, 3), "MeasureTime");
        require(r.humidity >= 0 && r.humidity <= 100, "Humidity outside [0, 100]");
        return r;
    });
}

ParseResult parse_user_info(std::span<const std::uint8_t> db, const Origin& origin) {
    sqlite::Database database(db);
    TableRows t(database, kUserTable, {"Name", "Birthday", "TimeZone", "Email"});
    return collect_rows(t, origin, [&](const sqlite::Row& row) {
        MyVitalsProfile p;
        p.name = need_text(t.at(row, 0), "Name");
        auto birthday = need_text(t.at(row, 1), "Birthday");
        auto date = parse_calendar_date(birthday);
        require(date.has_value(), "Birthday is not a YYYY-MM-DD date");
        p.date_of_birth = *date;
        p.timezone_location = opt_text(t.at(row, 2)).value_or("");
        p.email = need_text(t.at(row, 3), "Email");
        require(is_email_address(p.email), "Email is not an email address");
        return p;
    });
}

namespace {

enum class CredentialField { Password, RefreshToken, AccessToken, RegionHost, IsOnline };

constexpr std::array<std::pair<std::string_view, CredentialField>, 5> kSuffixes{{
    {"_user_password", CredentialField::Password},
    {"_user_refresh_token", CredentialField::RefreshToken},
    {"_user_access_token", CredentialField::AccessToken},
    {"_user_region_host_info", CredentialField::RegionHost},
    {"_user_is_online", CredentialField::IsOnline},
}};

}  // namespace

CredentialParse parse_region_host_xml(std::span<const std::uint8_t> xml, const Origin& origin) {
    auto entries = prefs::parse(xml);

    CredentialParse out;
    std::vector<std::string> order;
    std::map<std::string, CredentialSet> sets;
    for (auto& e : entries) {
        bool bound = false;
        for (const auto& [suffix, field] : kSuffixes) {
            if (e.key.size() <= suffix.size() || !e.key.ends_with(suffix)) continue;
            std::string account = e.key.substr(0, e.key.size() - suffix.size());
            if (!is_email_address(account)) continue;
            auto [it, fresh] = sets.try_emplace(account);
            if (fresh) {
                order.push_back(account);
                it->second.account = account;
            }
            auto& set = it->second;
            switch (field) {
                case CredentialField::Password: set.password_plaintext = e.value; break;
                case CredentialField::RefreshToken: set.refresh_token = e.value; break;
                case CredentialField::AccessToken: set.access_token = e.value; break;
                case CredentialField::RegionHost: set.region_host = e.value; break;
                case CredentialField::IsOnline: set.is_online_flag = e.value == "true"; break;
            }
            bound = true;
            break;
        }
        if (!bound) out.leftovers.push_back(std::move(e));
    }
    if (order.empty()) throw Error(ErrorCode::NoCredentialKeys, origin.relative_path);

    out.inconsistent_prefix = order.size() > 1;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.credentials.push_back(ArtifactRecord{
            std::move(sets[order[i]]),
            SourceLocator{origin.package_name, origin.relative_path, ContainerType::XmlFile,
                          "credential[" + std::to_string(i) + "]"},
            origin.recovered_at});
    }
    return out;
}

AppScan Parser::parse(const AppDataRoot& root, const EvidenceSource& source, const ScanContext& ctx) const {
    AppScan scan;
    scan.package_name = root.package_name;
    scan.parser_id = std::string(id());
    scan.app_name = std::string(app_name());

    std::string db_path = root.relative_path + "/" + std::string(kDatabasePath);
    Bytes db = source.read_file(db_path);
    scan.consumed.insert(db_path);
    scan.databases.push_back(classify_database_bytes(db_path, db));

    Origin origin{root.package_name, db_path, ctx.recovered_at};
    using TableParser = ParseResult (*)(std::span<const std::uint8_t>, const Origin&);
    constexpr std::array<std::pair<std::string_view, TableParser>, 5> tables{{
        {kBpTable, &parse_bp_results},
        {kSpo2Table, &parse_spo2_results},
        {kWeightTable, &parse_weight_results},
        {kEnvironmentTable, &parse_environment},
        {kUserTable, &parse_user_info},
    }};
    for (const auto& [name, fn] : tables) {
        try {
            auto result = fn(db, origin);
            scan.records.insert(scan.records.end(), result.records.begin(), result.records.end());
            scan.warnings.insert(scan.warnings.end(), result.warnings.begin(), result.warnings.end());
        } catch (const Error& e) {
            scan.warnings.push_back(db_path + " " + std::string(name) + ": " + e.what());
        }
    }

    for (const auto& path : files_under(root, source)) {
        if (file_name(path) != kCredentialXml) continue;
        scan.consumed.insert(path);
        Origin xml_origin{root.package_name, path, ctx.recovered_at};
        try {
            auto creds = parse_region_host_xml(source.read_file(path), xml_origin);
            if (creds.inconsistent_prefix)
                scan.warnings.push_back(path + ": InconsistentPrefix: credential keys name " +
                                        std::to_string(creds.credentials.size()) + " different accounts");
            scan.records.insert(scan.records.end(), creds.credentials.begin(), creds.credentials.end());
            if (!creds.leftovers.empty()) scan.leftovers.push_back({path, std::move(creds.leftovers)});
        } catch (const Error& e) {
            scan.warnings.push_back(path + ": " + e.what());
            if (e.code() == ErrorCode::NoCredentialKeys)
                scan.leftovers.push_back({path, prefs::parse(source.read_file(path))});
        }
    }
    return scan;
}

}  // namespace phiscan::myvitals
