#include "support.hpp"

#include "phiscan/error.hpp"
#include "phiscan/glucosmart.hpp"
#include "phiscan/healthmate.hpp"
#include "phiscan/myvitals.hpp"
#include "phiscan/parser.hpp"

#include <doctest.h>

#include <functional>

using namespace phiscan;
using phiscan::testing::ScratchDir;

namespace {

const Origin kMyVitals{"iHealthMyVitals.V2", "iHealthMyVitals.V2/Databases/androidNin.db", {}};
const Origin kHealthMate{"com.withings.wiscale2", "com.withings.wiscale2/databases/withings-wiscale.db", {}};

constexpr std::string_view kSpo2Create =
    "CREATE TABLE TB_SPO2Result(UsedUserID INTEGER, PhoneDataID TEXT, iHealthID TEXT, MachineType TEXT, "
    "MachineDeviceID TEXT, MeasureTime INTEGER, LastChangeTime INTEGER, PhoneCreateTime INTEGER, Result INTEGER, "
    "PR INTEGER, PI REAL)";

std::string spo2_row(std::int64_t t, int spo2, int pr, double pi) {
    auto s = std::to_string(t);
    return "INSERT INTO TB_SPO2Result VALUES(0, 'P" + s + "', 'medicaldevices2018exper@gmail.com', 'PO3M', "
           "'5CF821DED2ED', " + s + ", " + std::to_string(t + 40) + ", " + s + ", " + std::to_string(spo2) + ", " +
           std::to_string(pr) + ", " + std::to_string(pi) + ")";
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoFailure;
}

}  // namespace

TEST_SUITE("parsers") {

TEST_CASE("oximetry rows come back in measurement order with seconds inferred") {
    // Inserted out of order; the parser orders by measurement time.
    auto db = testing::sqlite_image({std::string(kSpo2Create), spo2_row(1530884863, 96, 77, 8.3),
                                     spo2_row(1530829549, 97, 89, 9.7), spo2_row(1531090846, 97, 90, 4.9)});
    auto out = myvitals::parse_spo2_results(db, kMyVitals);
    REQUIRE(out.records.size() == 3);
    CHECK(out.malformed_rows == 0);
    const auto& first = std::get<OximetryReading>(out.records[0].payload);
    CHECK(first.result_spo2 == 97);
    CHECK(first.pulse_rate == 89);
    CHECK(first.perfusion_index == doctest::Approx(9.7));
    CHECK(first.measured_at.raw_value == 1530829549);
    CHECK(first.measured_at.unit == EpochUnit::Seconds);
    CHECK(first.health_id == "medicaldevices2018exper@gmail.com");
    CHECK(out.records[0].locator.detail == "TB_SPO2Result:2");
    CHECK(out.records[0].locator.container == ContainerType::SqliteTable);
    CHECK(std::get<OximetryReading>(out.records[2].payload).measured_at.raw_value == 1531090846);
}

TEST_CASE("bad rows are tallied, not fatal") {
    auto db = testing::sqlite_image(
        {"CREATE TABLE TB_BPResult(Sys INTEGER, Dia INTEGER, Pulse INTEGER, MeasureTime INTEGER, DeviceID TEXT, "
         "Note TEXT, Account TEXT)",
         "INSERT INTO TB_BPResult VALUES(121, 79, 72, 1530830102, 'D1', NULL, 'a@b.com')",
         "INSERT INTO TB_BPResult VALUES(70, 80, 72, 1530830102, 'D1', NULL, 'a@b.com')",
         "INSERT INTO TB_BPResult VALUES(120, 80, 72, 500000000000, 'D1', NULL, 'a@b.com')",
         "INSERT INTO TB_BPResult VALUES(NULL, 80, 72, 1530830102, 'D1', NULL, 'a@b.com')"});
    auto out = myvitals::parse_bp_results(db, kMyVitals);
    CHECK(out.records.size() == 1);
    CHECK(out.malformed_rows == 3);
    CHECK(out.warnings.size() == 3);
    for (const auto& w : out.warnings) CHECK(w.find("MalformedRow") != std::string::npos);
}

TEST_CASE("missing table or column") {
    auto db = testing::sqlite_image({"CREATE TABLE other(x)"});
    CHECK(code_of([&] { myvitals::parse_bp_results(db, kMyVitals); }) == ErrorCode::MissingTable);
    auto partial = testing::sqlite_image({"CREATE TABLE TB_BPResult(Sys, Dia)"});
    CHECK(code_of([&] { myvitals::parse_bp_results(partial, kMyVitals); }) == ErrorCode::MissingTable);
    CHECK(code_of([&] { myvitals::parse_bp_results(testing::to_bytes("junk"), kMyVitals); }) == ErrorCode::NotSqlite);
}

TEST_CASE("user profile needs a real birthday") {
    auto db = testing::sqlite_image(
        {"CREATE TABLE TB_Userinfo(Name TEXT, Birthday TEXT, TimeZone TEXT, Email TEXT)",
         "INSERT INTO TB_Userinfo VALUES('Alex Tester', '1985-03-14', 'America/Chicago', 'a@b.com')",
         "INSERT INTO TB_Userinfo VALUES('Bad Date', '1985-02-30', 'UTC', 'c@d.com')"});
    auto out = myvitals::parse_user_info(db, kMyVitals);
    REQUIRE(out.records.size() == 1);
    CHECK(out.malformed_rows == 1);
    const auto& p = std::get<MyVitalsProfile>(out.records[0].payload);
    CHECK(p.name == "Alex Tester");
    CHECK(p.date_of_birth.to_string() == "1985-03-14");
    CHECK(p.timezone_location == "America/Chicago");
}

TEST_CASE("stored credential XML") {
    auto xml = testing::to_bytes(R"(<map>
  <boolean name="medicaldevices2018exper@gmail.com_user_is_online" value="false" />
  <string name="medicaldevices2018exper@gmail.com_user_refresh_token">
    D2PXXZMSfnfbwDALTvmp-
    zTYf6ier3jyPQ
  </string>
  <string name="medicaldevices2018exper@gmail.com_user_access_token">YgQLYRcdlyAWpL7c</string>
  <string name="medicaldevices2018exper@gmail.com_user_password">MedExp2018</string>
  <string name="medicaldevices2018exper@gmail.com_user_region_host_info">http://ap2.1hoad
  </string>
  <int name="medicaldevices2018exper@gmail.com_user_region_flag" value="1" />
</map>)");
    Origin origin{"iHealthMyVitals.V2", "iHealthMyVitals.V2/shared_prefs/sp_user_region_host_info.xml", {}};
    auto out = myvitals::parse_region_host_xml(xml, origin);
    REQUIRE(out.credentials.size() == 1);
    CHECK_FALSE(out.inconsistent_prefix);
    const auto& c = std::get<CredentialSet>(out.credentials[0].payload);
    CHECK(c.account == "medicaldevices2018exper@gmail.com");
    CHECK(c.password_plaintext == "MedExp2018");
    CHECK(c.access_token == "YgQLYRcdlyAWpL7c");
    CHECK(c.region_host == "http://ap2.1hoad");
    CHECK(c.is_online_flag == false);
    REQUIRE(c.refresh_token);
    CHECK(c.refresh_token->find("MSfnfb") != std::string::npos);
    CHECK(out.credentials[0].locator.container == ContainerType::XmlFile);
    CHECK(out.credentials[0].locator.detail.find('@') == std::string::npos);
    REQUIRE(out.leftovers.size() == 1);
    CHECK(out.leftovers[0].key.ends_with("_user_region_flag"));

    auto none = testing::to_bytes("<map><int name=\"unrelated\" value=\"3\" /></map>");
    CHECK(code_of([&] { myvitals::parse_region_host_xml(none, origin); }) == ErrorCode::NoCredentialKeys);
}

TEST_CASE("glucose profile XML") {
    Origin origin{"jiuana-androidBg.start", "jiuana-androidBg.start/shared_prefs/user_info.xml", {}};
    auto full = glucosmart::parse_user_info_xml(
        testing::to_bytes("<map><string name=\"UserName\">pat@example.com</string>"
                          "<string name=\"DeviceID\">BG5-0012AB</string><int name=\"x\" value=\"1\"/></map>"),
        origin);
    const auto& p = std::get<GlucoProfile>(full.profile.payload);
    CHECK(p.username == "pat@example.com");
    CHECK(p.device_identifier == "BG5-0012AB");
    CHECK(full.leftovers.size() == 1);

    try {
        glucosmart::parse_user_info_xml(testing::to_bytes("<map><string name=\"UserName\">pat@example.com</string></map>"),
                                        origin);
        FAIL("partial profile accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingFields);
        std::string msg = e.what();
        CHECK(msg.find("UserName=present") != std::string::npos);
        CHECK(msg.find("DeviceID=absent") != std::string::npos);
        CHECK(msg.find("pat@example.com") == std::string::npos);
    }
}

TEST_CASE("paired devices with millisecond dates") {
    auto db = testing::sqlite_image(
        {"CREATE TABLE devices(id INTEGER PRIMARY KEY, associationDate INTEGER, lastUseDate INTEGER, "
         "modifiedDate INTEGER, macAddress TEXT, firmware INTEGER, timezone TEXT, battery INTEGER, type INTEGER, "
         "model INTEGER)",
         "INSERT INTO devices VALUES(5595648, 1541806236000, 1542127729662, 1542127635000, '00:24:E4:5A:EE:6C', "
         "431, NULL, 77, 4, 43)",
         "INSERT INTO devices VALUES(5402710, 1541806407000, 1542070868000, 1542093243000, '00:24:e4:57:12:c4', "
         "1751, 'America/Chicago', 78, 1, 6)",
         "INSERT INTO devices VALUES(1, 1541806407000, 1542070868000, 1542093243000, 'not-a-mac', 1, NULL, 5, 1, 1)"});
    auto out = healthmate::parse_devices(db, kHealthMate);
    CHECK(out.malformed_rows == 1);
    REQUIRE(out.records.size() == 2);
    std::map<std::int64_t, DeviceRegistration> by_id;
    for (const auto& r : out.records) {
        auto d = std::get<DeviceRegistration>(r.payload);
        by_id[d.id] = d;
    }
    const auto& a = by_id.at(5595648);
    CHECK(a.mac_address == "00:24:e4:5a:ee:6c");
    CHECK(a.battery_pct == 77);
    CHECK_FALSE(a.timezone);
    CHECK(a.last_use_date.unit == EpochUnit::Milliseconds);
    CHECK(a.last_use_date.subsecond_millis == 662);
    const auto& b = by_id.at(5402710);
    CHECK(b.timezone == "America/Chicago");
    CHECK(b.device_type == 1);
    CHECK(b.device_model == 6);
}

TEST_CASE("measure codes: mapped kinds and preserved unknowns") {
    auto db = testing::sqlite_image(
        {"CREATE TABLE measure(id INTEGER PRIMARY KEY, type INTEGER, value REAL, date INTEGER, deviceId INTEGER)",
         "INSERT INTO measure VALUES(1, 1, 80.5, 1542127729662, 5595648)",
         "INSERT INTO measure VALUES(2, 999, 12.0, 1542127729662, NULL)",
         "INSERT INTO measure VALUES(3, 170, 24.9, 1542127729662, NULL)"});
    auto out = healthmate::parse_measures(db, kHealthMate, MeasureCodeMap::defaults());
    REQUIRE(out.records.size() == 3);
    const auto& w = std::get<HealthMateMeasurement>(out.records[0].payload);
    CHECK(w.kind == MeasureKind::Weight);
    CHECK(w.value == doctest::Approx(80.5));
    CHECK(w.device_ref == 5595648);
    const auto& raw = std::get<RawHit>(out.records[1].payload);
    CHECK(raw.pattern == RawPattern::UnmappedMeasure);
    CHECK(raw.text.find("999") != std::string::npos);
    CHECK(std::get<HealthMateMeasurement>(out.records[2].payload).kind == MeasureKind::Bmi);

    auto empty = testing::sqlite_image(
        {"CREATE TABLE measure(id INTEGER PRIMARY KEY, type INTEGER, value REAL, date INTEGER, deviceId INTEGER)"});
    CHECK(healthmate::parse_measures(empty, kHealthMate, MeasureCodeMap::defaults()).records.empty());
}

TEST_CASE("mac normalization") {
    CHECK(healthmate::normalize_mac("00:24:E4:5A:EE:6C") == "00:24:e4:5a:ee:6c");
    CHECK_FALSE(healthmate::normalize_mac("00-24-e4-5a-ee-6c"));
    CHECK_FALSE(healthmate::normalize_mac("00:24:e4:5a:ee"));
    CHECK_FALSE(healthmate::normalize_mac("00:24:e4:5a:ee:6g"));
}

TEST_CASE("code map configuration") {
    auto text = testing::read_file(testing::repo_root() / "config" / "measure_codes.txt");
    auto shipped = MeasureCodeMap::parse(std::string(text.begin(), text.end()));
    CHECK(shipped.entries() == MeasureCodeMap::defaults().entries());
    CHECK(shipped.entries().size() == 9);
    auto custom = MeasureCodeMap::parse("# comment\n 12 = pulse \n");
    CHECK(custom.lookup(12) == MeasureKind::Pulse);
    CHECK_FALSE(custom.lookup(1));
    try {
        MeasureCodeMap::parse("1 = weight\n2 = shoe-size\n");
        FAIL("unknown kind accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("registry binds roots to parsers") {
    ScratchDir dir;
    testing::write_file(dir / "tree/iHealthMyVitals.V2/Databases/androidNin.db", "x");
    testing::write_file(dir / "tree/jiuana-androidBg.start/databases/a.db", "x");
    testing::write_file(dir / "tree/com.withings.wiscale2/databases/withings-wiscale.db", "x");
    testing::write_file(dir / "tree/com.unrelated/file", "x");
    testing::write_file(dir / "tree/iHealthMyVitals.V2.bak/Databases/androidNin.db", "x");
    auto src = EvidenceSource::open(dir / "tree");
    auto registry = ParserRegistry::builtin();
    CHECK(registry.parsers().size() == 3);
    std::map<std::string, std::optional<std::string>> bound;
    for (const auto& r : enumerate_app_roots(src, registry)) bound[r.package_name] = r.matched_parser;
    CHECK(bound.at("iHealthMyVitals.V2") == "ihealth-myvitals");
    CHECK(bound.at("jiuana-androidBg.start") == "ihealth-gluco-smart");
    CHECK(bound.at("com.withings.wiscale2") == "withings-health-mate");
    CHECK_FALSE(bound.at("com.unrelated"));
    CHECK_FALSE(bound.at("iHealthMyVitals.V2.bak"));
}

}
