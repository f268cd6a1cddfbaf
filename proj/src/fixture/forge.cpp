#include "phiscan/fixture.hpp"

#include "phiscan/error.hpp"
#include "phiscan/zip_archive.hpp"
#include "schema.hpp"

#include <json.hpp>
#include <sqlite3.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <regex>
#include <set>

// The forge is the oracle for scan results, so everything it predicts
// (unit inference, UTC rendering, validity, excerpts) is computed here
// independently of the scanner's own code paths.

namespace phiscan::forge {

namespace {

using detail::Affinity;
using detail::TableSchema;
using nlohmann::json;

constexpr std::string_view kMyVitals = "iHealthMyVitals.V2";
constexpr std::string_view kGluco = "jiuana-androidBg.start";
constexpr std::string_view kHealthMate = "com.withings.wiscale2";

struct AppIdentity {
    std::string_view package;
    std::string_view app_name;
    std::string_view parser_id;
};
constexpr AppIdentity kMyVitalsApp{kMyVitals, "iHealth MyVitals", "ihealth-myvitals"};
constexpr AppIdentity kGlucoApp{kGluco, "Gluco-Smart", "ihealth-gluco-smart"};
constexpr AppIdentity kHealthMateApp{kHealthMate, "Health Mate", "withings-health-mate"};

// Default Health Mate measure vocabulary.
const std::map<std::int64_t, std::string_view>& measure_codes() {
    static const std::map<std::int64_t, std::string_view> codes{
        {1, "weight"},  {4, "systolic"},     {5, "diastolic"},  {6, "body-fat"}, {8, "body-water"},
        {11, "pulse"},  {76, "muscle-mass"}, {88, "bone-mass"}, {170, "bmi"}};
    return codes;
}
constexpr std::array<std::int64_t, 2> kUnmappedCodes{54, 999};

// --- independent conversions ------------------------------------------------

struct Stamp {
    std::int64_t raw;
    std::string unit;
    std::string utc;
    int millis;
};

std::string two(unsigned v) { return std::string{static_cast<char>('0' + v / 10), static_cast<char>('0' + v % 10)}; }

// Days since 1970-01-01 to a proleptic Gregorian date.
void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    if (m <= 2) ++y;
}

std::string utc_text(std::int64_t seconds) {
    std::int64_t days = seconds / 86400, rem = seconds % 86400;
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    std::string year = std::to_string(y);
    while (year.size() < 4) year.insert(year.begin(), '0');
    return year + "-" + two(m) + "-" + two(d) + "T" + two(static_cast<unsigned>(rem / 3600)) + ":" +
           two(static_cast<unsigned>(rem / 60 % 60)) + ":" + two(static_cast<unsigned>(rem % 60)) + "Z";
}

std::optional<Stamp> stamp(std::int64_t raw) {
    if (raw <= 0) return std::nullopt;
    if (raw < 100'000'000'000) return Stamp{raw, "seconds", utc_text(raw), 0};
    if (raw < 1'000'000'000'000 || raw >= 253'402'300'800'000) return std::nullopt;
    return Stamp{raw, "milliseconds", utc_text(raw / 1000), static_cast<int>(raw % 1000)};
}

bool valid_date(const std::string& s) {
    static const std::regex shape(R"(^(\d{4})-(\d{2})-(\d{2})$)");
    std::smatch m;
    if (!std::regex_match(s, m, shape)) return false;
    int y = std::stoi(m[1]), mo = std::stoi(m[2]), d = std::stoi(m[3]);
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (mo < 1 || mo > 12 || d < 1) return false;
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return d <= kDays[mo - 1] + (mo == 2 && leap ? 1 : 0);
}

bool valid_email(const std::string& s) {
    static const std::regex shape(
        R"(^[A-Za-z0-9_%+-]([A-Za-z0-9._%+-]*[A-Za-z0-9_%+-])?@([A-Za-z0-9]([A-Za-z0-9-]*[A-Za-z0-9])?\.)+[A-Za-z]{2,}$)");
    return std::regex_match(s, shape);
}

std::optional<std::string> colon_hex_lower(const std::string& s) {
    static const std::regex shape(R"(^([0-9A-Fa-f]{2}:){5}[0-9A-Fa-f]{2}$)");
    if (!std::regex_match(s, shape)) return std::nullopt;
    std::string out = s;
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string decimal(double v) {
    if (v == 0) return "0";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

// --- cell access ----------------------------------------------------------------

std::optional<std::int64_t> int_cell(const Row& row, std::string_view col) {
    auto it = row.find(std::string(col));
    if (it == row.end()) return std::nullopt;
    if (auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    return std::nullopt;
}

std::optional<double> real_cell(const Row& row, std::string_view col) {
    auto it = row.find(std::string(col));
    if (it == row.end()) return std::nullopt;
    if (auto* v = std::get_if<double>(&it->second)) return *v;
    if (auto* v = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*v);
    return std::nullopt;
}

std::optional<std::string> text_cell(const Row& row, std::string_view col) {
    auto it = row.find(std::string(col));
    if (it == row.end()) return std::nullopt;
    if (auto* v = std::get_if<std::string>(&it->second)) return *v;
    return std::nullopt;
}

json stamp_json(const Stamp& s) { return {{"raw", s.raw}, {"unit", s.unit}, {"utc", s.utc}}; }

std::string at_excerpt(const std::string& device, const Stamp& s) {
    return device.empty() ? "at=" + s.utc : "device=" + device + " at=" + s.utc;
}

// --- randomness -------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Inclusive range; modulo reduction keeps streams identical across standard libraries.
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }
    /// A value with one decimal place in [lo, hi].
    double tenths(double lo, double hi) {
        return static_cast<double>(between(static_cast<std::int64_t>(lo * 10), static_cast<std::int64_t>(hi * 10))) / 10;
    }
    bool chance(int percent) { return between(1, 100) <= percent; }
    template <typename C>
    const auto& pick(const C& c) {
        return c[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(std::size(c)) - 1))];
    }
    std::uint8_t byte() { return static_cast<std::uint8_t>(engine_() & 0xff); }
    std::string chars(std::string_view alphabet, std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s.push_back(pick(alphabet));
        return s;
    }
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(i) - 1))]);
    }

private:
    std::mt19937_64 engine_;
};

constexpr std::array<std::string_view, 10> kFirstNames{"Avery", "Jordan", "Riley", "Morgan", "Casey",
                                                       "Quinn", "Harper", "Rowan", "Emerson", "Sage"};
constexpr std::array<std::string_view, 10> kLastNames{"Nguyen", "Okafor", "Silva",   "Kowalski", "Haddad",
                                                      "Larsen", "Moreau", "Tanaka", "Brennan",  "Ibarra"};
constexpr std::array<std::string_view, 5> kTimezones{"America/Chicago", "America/New_York", "Europe/London",
                                                     "Asia/Tokyo", "Australia/Sydney"};
constexpr std::array<std::string_view, 4> kNotes{"after run", "morning", "felt dizzy", "post meal"};
constexpr std::string_view kHexUpper = "0123456789ABCDEF";
constexpr std::string_view kHexLower = "0123456789abcdef";
constexpr std::string_view kLetters = "ABCDEF";
constexpr std::string_view kTokenAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789*-";

// 2018-01-01 .. 2019-12-31, the period the evaluated devices were in use.
constexpr std::int64_t kEpochLo = 1514764800;
constexpr std::int64_t kEpochHi = 1577836799;

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string random_email(Rng& rng) {
    return lower(rng.pick(kFirstNames)) + "." + lower(rng.pick(kLastNames)) + std::to_string(rng.between(10, 99)) +
           "@example.org";
}

std::string random_name(Rng& rng) { return std::string(rng.pick(kFirstNames)) + " " + std::string(rng.pick(kLastNames)); }

std::string random_birthday(Rng& rng) {
    return std::to_string(rng.between(1940, 2005)) + "-" + two(static_cast<unsigned>(rng.between(1, 12))) + "-" +
           two(static_cast<unsigned>(rng.between(1, 28)));
}

// Hex identifiers with a letter every sixth place so no long digit run can
// masquerade as a card number.
std::string random_hex_id(Rng& rng, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(i % 6 == 5 ? rng.pick(kLetters) : rng.pick(kHexUpper));
    return s;
}

// --- SQLite writing ---------------------------------------------------------------

class MemoryDb {
public:
    explicit MemoryDb(int page_size) {
        if (sqlite3_open(":memory:", &db_) != SQLITE_OK) throw Error(ErrorCode::IoFailure, "sqlite3_open failed");
        exec("PRAGMA page_size=" + std::to_string(page_size));
    }
    ~MemoryDb() { sqlite3_close(db_); }
    MemoryDb(const MemoryDb&) = delete;
    MemoryDb& operator=(const MemoryDb&) = delete;

    void exec(const std::string& sql) {
        char* msg = nullptr;
        if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &msg) != SQLITE_OK) {
            std::string why = msg ? msg : "unknown";
            sqlite3_free(msg);
            throw Error(ErrorCode::IoFailure, "sqlite: " + why);
        }
    }

    void create(const TableSchema& t) {
        std::string sql = "CREATE TABLE " + std::string(t.name) + " (";
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            const auto& c = t.columns[i];
            if (i) sql += ", ";
            sql += std::string(c.name) + (c.type == Affinity::Integer ? " INTEGER" : c.type == Affinity::Real ? " REAL" : " TEXT");
            if (i == 0 && t.id_is_rowid) sql += " PRIMARY KEY";
        }
        exec(sql + ")");
    }

    void insert(const TableSchema& t, std::int64_t rowid, const Row& row) {
        // Slot 0 carries the rowid: the implicit one, or the INTEGER PRIMARY KEY column.
        std::vector<std::string> names;
        std::vector<const Cell*> cells;
        if (!t.id_is_rowid) {
            names.push_back("rowid");
            cells.push_back(nullptr);
        }
        for (const auto& c : t.columns) {
            names.emplace_back(c.name);
            auto it = row.find(std::string(c.name));
            cells.push_back(it == row.end() ? nullptr : &it->second);
        }
        std::string sql = "INSERT INTO " + std::string(t.name) + " (";
        std::string values;
        for (std::size_t i = 0; i < names.size(); ++i) {
            sql += (i ? ", " : "") + names[i];
            values += i ? ", ?" : "?";
        }
        sql += ") VALUES (" + values + ")";

        sqlite3_stmt* stmt = nullptr;
        if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
            throw Error(ErrorCode::IoFailure, std::string("sqlite prepare: ") + sqlite3_errmsg(db_));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            int slot = static_cast<int>(i) + 1;
            const Cell* c = cells[i];
            if (i == 0) sqlite3_bind_int64(stmt, slot, rowid);
            else if (!c || std::holds_alternative<std::monostate>(*c)) sqlite3_bind_null(stmt, slot);
            else if (auto* v = std::get_if<std::int64_t>(c)) sqlite3_bind_int64(stmt, slot, *v);
            else if (auto* d = std::get_if<double>(c)) sqlite3_bind_double(stmt, slot, *d);
            else {
                const auto& text = std::get<std::string>(*c);
                sqlite3_bind_text(stmt, slot, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT);
            }
        }
        int rc = sqlite3_step(stmt);
        sqlite3_finalize(stmt);
        if (rc != SQLITE_DONE) throw Error(ErrorCode::IoFailure, std::string("sqlite insert: ") + sqlite3_errmsg(db_));
    }

    Bytes serialize() {
        sqlite3_int64 size = 0;
        unsigned char* data = sqlite3_serialize(db_, "main", &size, 0);
        if (!data) throw Error(ErrorCode::IoFailure, "sqlite3_serialize failed");
        Bytes out(data, data + size);
        sqlite3_free(data);
        return out;
    }

private:
    sqlite3* db_ = nullptr;
};

struct PendingRow {
    std::int64_t rowid;
    Row row;
};

Bytes write_database(const SqliteOptions& opt, Rng& rng,
                     const std::vector<std::pair<const TableSchema*, std::vector<PendingRow>>>& tables) {
    MemoryDb db(opt.page_size);
    for (const auto& [schema, rows] : tables) db.create(*schema);
    db.exec("BEGIN");
    for (const auto& [schema, rows] : tables) {
        std::vector<std::size_t> order(rows.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (opt.shuffle_inserts) rng.shuffle(order);
        for (auto i : order) db.insert(*schema, rows[i].rowid, rows[i].row);
    }
    db.exec("COMMIT");
    if (opt.vacuum) db.exec("VACUUM");
    return db.serialize();
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

// --- the builder ---------------------------------------------------------------------

struct XmlEntry {
    std::string type, key, value;
};

std::string prefs_document(const std::vector<XmlEntry>& entries) {
    std::string doc = "<?xml version='1.0' encoding='utf-8' standalone='yes' ?>\n<map>\n";
    for (const auto& e : entries) {
        if (e.type == "string")
            doc += "    <string name=\"" + xml_escape(e.key) + "\">" + xml_escape(e.value) + "</string>\n";
        else
            doc += "    <" + e.type + " name=\"" + xml_escape(e.key) + "\" value=\"" + xml_escape(e.value) + "\" />\n";
    }
    return doc + "</map>\n";
}

class Builder {
public:
    explicit Builder(const FixtureSpec& spec) : spec_(spec), rng_(spec.seed) {}

    Fixture build() {
        if (spec_.myvitals) myvitals(*spec_.myvitals);
        if (spec_.glucosmart) gluco(*spec_.glucosmart);
        if (spec_.healthmate) healthmate(*spec_.healthmate);

        auto& m = fixture_.manifest;
        m.spec = emit_fixture_spec(spec_);
        m.seed = spec_.seed;
        for (const auto& [path, bytes] : fixture_.tree) m.files.push_back(path);
        std::sort(m.apps.begin(), m.apps.end(),
                  [](const ExpectedApp& a, const ExpectedApp& b) { return a.app_name < b.app_name; });
        std::sort(m.records.begin(), m.records.end(), [](const PlantedRecord& a, const PlantedRecord& b) {
            return std::tie(a.app, a.locator, a.kind) < std::tie(b.app, b.locator, b.kind);
        });
        std::sort(m.malformed.begin(), m.malformed.end());
        std::sort(m.databases.begin(), m.databases.end(),
                  [](const ExpectedDatabase& a, const ExpectedDatabase& b) { return a.relative_path < b.relative_path; });
        return std::move(fixture_);
    }

private:
    // Per-app accumulation of what the scan must conclude.
    struct AppState {
        AppIdentity id;
        std::vector<PlantedRecord> records;
        bool plaintext_health = false;
        std::vector<ExpectedViolation> credentials;
    };

    PlantedRecord& plant(AppState& app, ArtifactKind kind, SourceLocator loc, const json& expected) {
        app.records.push_back(PlantedRecord{std::string(app.id.app_name), kind, std::move(loc), expected.dump(), {}});
        return app.records.back();
    }

    static void find(PlantedRecord& r, PhiCategory c, std::string rule, std::string excerpt) {
        r.findings.push_back(ExpectedFinding{c, std::move(rule), std::move(excerpt)});
    }

    void finish(AppState& app) {
        ExpectedApp e;
        e.app_name = std::string(app.id.app_name);
        e.package_name = std::string(app.id.package);
        e.parser_id = std::string(app.id.parser_id);
        e.matrix.app_name = e.app_name;
        for (auto c : kAllCategories) e.matrix.cells[c] = CellState::NotRecovered;
        bool any = false;
        for (const auto& r : app.records)
            for (const auto& f : r.findings) {
                e.matrix.cells[f.category] = CellState::Recovered;
                any = true;
            }
        if (app.plaintext_health)
            e.violations.push_back({ViolationKind::PlaintextEphiAtRest, Severity::Violation, std::nullopt, std::nullopt});
        e.violations.insert(e.violations.end(), app.credentials.begin(), app.credentials.end());
        if (e.violations.empty() && any)
            e.violations.push_back({ViolationKind::WeakSafeguardNote, Severity::Informational, std::nullopt, std::nullopt});
        fixture_.manifest.apps.push_back(std::move(e));
        auto& all = fixture_.manifest.records;
        all.insert(all.end(), app.records.begin(), app.records.end());
    }

    SourceLocator table_locator(const AppState& app, const std::string& path, std::string_view table, std::int64_t rowid) {
        return SourceLocator{std::string(app.id.package), path, ContainerType::SqliteTable,
                             std::string(table) + ":" + std::to_string(rowid)};
    }

    void malformed(const AppState& app, const std::string& path, std::string_view table, std::int64_t rowid) {
        fixture_.manifest.malformed.push_back(table_locator(app, path, table, rowid));
    }

    // Explicit rows first, then `count` random ones; rowids follow that order.
    template <typename Gen>
    std::vector<PendingRow> rows_for(const TableSpec& t, Gen&& gen, std::int64_t first_rowid = 1) {
        std::vector<PendingRow> out;
        std::int64_t rowid = first_rowid;
        for (const auto& r : t.rows) out.push_back({rowid++, r});
        for (std::size_t i = 0; i < t.count; ++i) out.push_back({rowid++, gen()});
        return out;
    }

    // ---- iHealth MyVitals ----

    void myvitals(const MyVitalsSpec& s) {
        AppState app{kMyVitalsApp, {}, false, {}};
        const std::string root(kMyVitals);
        const std::string db_path = root + "/Databases/androidNin.db";
        const std::string account = s.credential ? s.credential->account : random_email(rng_);
        const std::string monitor_id = random_hex_id(rng_, 12);

        auto bp = rows_for(s.bp, [&] {
            std::int64_t sys = rng_.between(95, 160);
            Row r{{"Sys", sys},
                  {"Dia", rng_.between(60, std::min<std::int64_t>(sys - 10, 100))},
                  {"Pulse", rng_.between(50, 110)},
                  {"MeasureTime", rng_.between(kEpochLo, kEpochHi)},
                  {"DeviceID", monitor_id},
                  {"Account", account}};
            if (rng_.chance(50)) r["Note"] = std::string(rng_.pick(kNotes));
            return r;
        });
        for (std::size_t i = 0; i < s.malformed_bp; ++i) {
            std::int64_t dia = rng_.between(70, 100);
            bp.push_back({static_cast<std::int64_t>(bp.size()) + 1,
                          Row{{"Sys", dia - rng_.between(0, 10)}, {"Dia", dia}, {"Pulse", rng_.between(50, 110)},
                              {"MeasureTime", rng_.between(kEpochLo, kEpochHi)}, {"DeviceID", monitor_id},
                              {"Account", account}}});
        }

        const std::string phone_id = random_hex_id(rng_, 32);
        const std::string oximeter_id = random_hex_id(rng_, 12);
        auto spo2_row = [&](std::int64_t result) {
            std::int64_t t = rng_.between(kEpochLo, kEpochHi);
            return Row{{"UsedUserID", std::int64_t{0}}, {"PhoneDataID", phone_id}, {"iHealthID", account},
                       {"MachineType", std::string("PO3M")}, {"MachineDeviceID", oximeter_id}, {"MeasureTime", t},
                       {"LastChangeTime", t + rng_.between(5, 60)}, {"PhoneCreateTime", t}, {"Result", result},
                       {"PR", rng_.between(50, 120)}, {"PI", rng_.tenths(0.2, 20.0)}};
        };
        auto spo2 = rows_for(s.spo2, [&] { return spo2_row(rng_.between(90, 100)); });
        for (std::size_t i = 0; i < s.malformed_spo2; ++i)
            spo2.push_back({static_cast<std::int64_t>(spo2.size()) + 1, spo2_row(0)});

        auto weight = rows_for(s.weight, [&] {
            return Row{{"Weight", rng_.tenths(45, 120)},      {"BMI", rng_.tenths(17, 35)},
                       {"BodyFat", rng_.tenths(8, 40)},       {"BodyWater", rng_.tenths(45, 65)},
                       {"MuscleMass", rng_.tenths(30, 80)},   {"DailyCalorie", static_cast<double>(rng_.between(1500, 3200))},
                       {"BoneMass", rng_.tenths(2, 4)},       {"MeasureTime", rng_.between(kEpochLo, kEpochHi)},
                       {"Account", account}};
        });
        auto env = rows_for(s.environment, [&] {
            return Row{{"Humidity", rng_.tenths(20, 80)},
                       {"Temperature", rng_.tenths(15, 30)},
                       {"Lighting", static_cast<double>(rng_.between(0, 1000))},
                       {"MeasureTime", rng_.between(kEpochLo, kEpochHi)}};
        });
        bool first_user = true;
        auto users = rows_for(s.users, [&] {
            Row r{{"Name", random_name(rng_)}, {"Birthday", random_birthday(rng_)},
                  {"Email", first_user ? account : random_email(rng_)}};
            first_user = false;
            if (rng_.chance(80)) r["TimeZone"] = std::string(rng_.pick(kTimezones));
            return r;
        });

        fixture_.tree[db_path] = write_database(spec_.sqlite, rng_,
                                                {{&detail::kBpTable, bp},
                                                 {&detail::kSpo2Table, spo2},
                                                 {&detail::kWeightTable, weight},
                                                 {&detail::kEnvTable, env},
                                                 {&detail::kUserInfoTable, users}});
        fixture_.manifest.databases.push_back({db_path, DbStatus::PlaintextSqlite});

        for (const auto& p : bp) expect_bp(app, db_path, p);
        for (const auto& p : spo2) expect_spo2(app, db_path, p);
        for (const auto& p : weight) expect_weight(app, db_path, p);
        for (const auto& p : env) expect_env(app, db_path, p);
        for (const auto& p : users) expect_myvitals_user(app, db_path, p);

        if (s.credential) credential_xml(app, root + "/shared_prefs/sp_user_region_host_info.xml", *s.credential);
        finish(app);
    }

    void expect_bp(AppState& app, const std::string& path, const PendingRow& p) {
        auto sys = int_cell(p.row, "Sys"), dia = int_cell(p.row, "Dia"), pulse = int_cell(p.row, "Pulse");
        auto t = int_cell(p.row, "MeasureTime");
        auto at = t ? stamp(*t) : std::nullopt;
        if (!sys || !dia || !pulse || !(*dia > 0 && *sys > *dia) || *pulse <= 0 || !at)
            return malformed(app, path, "TB_BPResult", p.rowid);
        auto device = text_cell(p.row, "DeviceID").value_or("");
        auto note = text_cell(p.row, "Note");
        auto& r = plant(app, ArtifactKind::BloodPressure, table_locator(app, path, "TB_BPResult", p.rowid),
                        {{"systolic", *sys}, {"diastolic", *dia}, {"pulse", *pulse}, {"measured_at", stamp_json(*at)},
                         {"device_id", device}, {"note", note ? json(*note) : json(nullptr)},
                         {"account", text_cell(p.row, "Account").value_or("")}});
        find(r, PhiCategory::HealthCondition, "physiological-reading",
             "sys=" + std::to_string(*sys) + " dia=" + std::to_string(*dia) + " pulse=" + std::to_string(*pulse));
        find(r, PhiCategory::ProvisionOfHealthcare, "reading-device-time-linkage", at_excerpt(device, *at));
        app.plaintext_health = true;
    }

    void expect_spo2(AppState& app, const std::string& path, const PendingRow& p) {
        auto user = int_cell(p.row, "UsedUserID");
        auto hid = text_cell(p.row, "iHealthID");
        auto t1 = int_cell(p.row, "MeasureTime"), t2 = int_cell(p.row, "LastChangeTime"),
             t3 = int_cell(p.row, "PhoneCreateTime");
        auto a1 = t1 ? stamp(*t1) : std::nullopt, a2 = t2 ? stamp(*t2) : std::nullopt,
             a3 = t3 ? stamp(*t3) : std::nullopt;
        auto result = int_cell(p.row, "Result"), pr = int_cell(p.row, "PR");
        auto pi = real_cell(p.row, "PI");
        if (!user || !hid || !a1 || !a2 || !a3 || !result || !pr || !pi || *result <= 0 || *result > 100 ||
            *pr <= 0 || *pi < 0)
            return malformed(app, path, "TB_SPO2Result", p.rowid);
        auto type = text_cell(p.row, "MachineType").value_or("");
        auto mid = text_cell(p.row, "MachineDeviceID").value_or("");
        auto& r = plant(app, ArtifactKind::Oximetry, table_locator(app, path, "TB_SPO2Result", p.rowid),
                        {{"result_spo2", *result}, {"pulse_rate", *pr}, {"perfusion_index", *pi},
                         {"measured_at", stamp_json(*a1)}, {"last_change_at", stamp_json(*a2)},
                         {"phone_created_at", stamp_json(*a3)}, {"health_id", *hid}, {"machine_type", type},
                         {"machine_device_id", mid}, {"used_user_id", *user},
                         {"phone_data_id", text_cell(p.row, "PhoneDataID").value_or("")}});
        find(r, PhiCategory::HealthCondition, "physiological-reading",
             "spo2=" + std::to_string(*result) + " pr=" + std::to_string(*pr) + " pi=" + decimal(*pi));
        std::string device = type.empty() ? mid : mid.empty() ? type : type + "/" + mid;
        find(r, PhiCategory::ProvisionOfHealthcare, "reading-device-time-linkage", at_excerpt(device, *a1));
        app.plaintext_health = true;
    }

    void expect_weight(AppState& app, const std::string& path, const PendingRow& p) {
        static constexpr std::array<std::string_view, 7> cols{"Weight",     "BMI",          "BodyFat", "BodyWater",
                                                              "MuscleMass", "DailyCalorie", "BoneMass"};
        std::array<double, 7> v{};
        for (std::size_t i = 0; i < cols.size(); ++i) {
            auto x = real_cell(p.row, cols[i]);
            if (!x) return malformed(app, path, "TB_WeightOnlineResult", p.rowid);
            v[i] = *x;
        }
        auto t = int_cell(p.row, "MeasureTime");
        auto at = t ? stamp(*t) : std::nullopt;
        if (!at || v[0] <= 0 || v[2] < 0 || v[2] > 100 || v[3] < 0 || v[3] > 100)
            return malformed(app, path, "TB_WeightOnlineResult", p.rowid);
        auto& r = plant(app, ArtifactKind::Weight, table_locator(app, path, "TB_WeightOnlineResult", p.rowid),
                        {{"weight", v[0]}, {"bmi", v[1]}, {"body_fat_pct", v[2]}, {"body_water_pct", v[3]},
                         {"muscle_mass", v[4]}, {"daily_calorie_intake", v[5]}, {"bone_mass", v[6]},
                         {"measured_at", stamp_json(*at)}, {"account", text_cell(p.row, "Account").value_or("")}});
        find(r, PhiCategory::HealthCondition, "physiological-reading",
             "weight=" + decimal(v[0]) + " bmi=" + decimal(v[1]) + " fat=" + decimal(v[2]) + " water=" + decimal(v[3]) +
                 " muscle=" + decimal(v[4]) + " kcal=" + decimal(v[5]) + " bone=" + decimal(v[6]));
        find(r, PhiCategory::ProvisionOfHealthcare, "reading-device-time-linkage", at_excerpt("", *at));
        app.plaintext_health = true;
    }

    void expect_env(AppState& app, const std::string& path, const PendingRow& p) {
        auto h = real_cell(p.row, "Humidity"), temp = real_cell(p.row, "Temperature"),
             light = real_cell(p.row, "Lighting");
        auto t = int_cell(p.row, "MeasureTime");
        auto at = t ? stamp(*t) : std::nullopt;
        if (!h || !temp || !light || !at || *h < 0 || *h > 100)
            return malformed(app, path, "TB_TemperatureHumidity", p.rowid);
        auto& r = plant(app, ArtifactKind::Environment, table_locator(app, path, "TB_TemperatureHumidity", p.rowid),
                        {{"humidity", *h}, {"temperature", *temp}, {"lighting_level", *light},
                         {"measured_at", stamp_json(*at)}});
        find(r, PhiCategory::ProvisionOfHealthcare, "reading-device-time-linkage", at_excerpt("", *at));
    }

    void expect_myvitals_user(AppState& app, const std::string& path, const PendingRow& p) {
        auto name = text_cell(p.row, "Name"), birthday = text_cell(p.row, "Birthday"),
             email = text_cell(p.row, "Email");
        if (!name || !birthday || !valid_date(*birthday) || !email || !valid_email(*email))
            return malformed(app, path, "TB_Userinfo", p.rowid);
        auto tz = text_cell(p.row, "TimeZone").value_or("");
        auto& r = plant(app, ArtifactKind::UserProfile, table_locator(app, path, "TB_Userinfo", p.rowid),
                        {{"name", *name}, {"date_of_birth", *birthday}, {"timezone_location", tz}, {"email", *email}});
        if (!name->empty()) find(r, PhiCategory::Name, "profile-name", *name);
        find(r, PhiCategory::DateOfBirth, "profile-birth-date", *birthday);
        if (!tz.empty()) find(r, PhiCategory::Address, "proxy-location:timezone", tz);
    }

    void credential_xml(AppState& app, const std::string& path, const CredentialSpec& c) {
        std::vector<XmlEntry> entries;
        const auto& a = c.account;
        if (c.is_online) entries.push_back({"boolean", a + "_user_is_online", *c.is_online ? "true" : "false"});
        if (c.refresh_token) entries.push_back({"string", a + "_user_refresh_token", *c.refresh_token});
        if (c.access_token) entries.push_back({"string", a + "_user_access_token", *c.access_token});
        if (c.password) entries.push_back({"string", a + "_user_password", *c.password});
        if (c.region_host) entries.push_back({"string", a + "_user_region_host_info", *c.region_host});
        bool bound = !entries.empty();
        std::size_t flag_index = entries.size();
        if (c.region_flag) entries.push_back({"int", a + "_user_region_flag", std::to_string(*c.region_flag)});
        fixture_.tree[path] = to_bytes(prefs_document(entries));

        const std::string package(app.id.package);
        if (bound) {
            auto& r = plant(app, ArtifactKind::Credential,
                            SourceLocator{package, path, ContainerType::XmlFile, "credential[0]"},
                            {{"account", a},
                             {"password_plaintext", c.password ? json(*c.password) : json(nullptr)},
                             {"refresh_token", c.refresh_token ? json(*c.refresh_token) : json(nullptr)},
                             {"access_token", c.access_token ? json(*c.access_token) : json(nullptr)},
                             {"region_host", c.region_host ? json(*c.region_host) : json(nullptr)},
                             {"is_online_flag", c.is_online ? json(*c.is_online) : json(nullptr)}});
            (void)r;
            if (c.password)
                app.credentials.push_back({ViolationKind::PlaintextCredential, Severity::Violation, a, *c.password});
        }
        // The flag entry is never bound to the credential; its key still
        // leads with the account address, which the raw sweep picks up.
        if (c.region_flag) {
            auto& r = plant(app, ArtifactKind::RawHit,
                            SourceLocator{package, path, ContainerType::XmlFile,
                                          "entry[" + std::to_string(flag_index) + "]#offset:0:email"},
                            {{"pattern", "email"}, {"text", a}});
            find(r, PhiCategory::Name, "raw-email-identifier", a);
        }
    }

    // ---- iHealth Gluco-Smart ----

    void gluco(const GlucoSpec& s) {
        AppState app{kGlucoApp, {}, false, {}};
        const std::string root(kGluco);
        for (std::size_t i = 0; i < s.encrypted_dbs; ++i) {
            std::string path = root + "/databases/jiuana_bg_" + std::to_string(i) + ".db";
            Bytes bytes(s.encrypted_db_bytes);
            // Ciphertext stand-in. '@' is remapped so the sweep cannot find an
            // address in noise; entropy stays near 8 bits per byte.
            for (auto& b : bytes) {
                b = rng_.byte();
                if (b == '@') b = static_cast<std::uint8_t>('@' | 0x80);
            }
            fixture_.manifest.databases.push_back(
                {path, bytes.empty() ? DbStatus::Empty : DbStatus::EncryptedOrOpaque});
            fixture_.tree[path] = std::move(bytes);
        }

        bool has_name = s.user_name && !s.user_name->empty();
        bool has_device = s.device_id && !s.device_id->empty();
        if (s.user_name || s.device_id) {
            std::string path = root + "/shared_prefs/user_info.xml";
            std::vector<XmlEntry> entries;
            if (s.user_name) entries.push_back({"string", "UserName", *s.user_name});
            if (s.device_id) entries.push_back({"string", "DeviceID", *s.device_id});
            fixture_.tree[path] = to_bytes(prefs_document(entries));
            const std::string package(app.id.package);
            if (has_name && has_device) {
                auto& r = plant(app, ArtifactKind::UserProfile,
                                SourceLocator{package, path, ContainerType::XmlFile, "UserName"},
                                {{"username", *s.user_name}, {"device_identifier", *s.device_id}});
                find(r, PhiCategory::Name, "profile-name", *s.user_name);
            } else if (has_name && valid_email(*s.user_name)) {
                // Partial profile: entries fall through to the raw sweep.
                auto& r = plant(app, ArtifactKind::RawHit,
                                SourceLocator{package, path, ContainerType::XmlFile,
                                              "entry[0]#offset:" + std::to_string(std::string("UserName").size() + 1) +
                                                  ":email"},
                                {{"pattern", "email"}, {"text", *s.user_name}});
                find(r, PhiCategory::Name, "raw-email-identifier", *s.user_name);
            }
        }

        bool any_file = false;
        for (const auto& [path, bytes] : fixture_.tree) any_file = any_file || path.starts_with(root + "/");
        if (any_file) finish(app);
    }

    // ---- Withings Health Mate ----

    void healthmate(const HealthMateSpec& s) {
        AppState app{kHealthMateApp, {}, false, {}};
        const std::string db_path = std::string(kHealthMate) + "/databases/withings-wiscale.db";

        std::set<std::int64_t> ids;
        for (const auto& r : s.devices.rows)
            if (auto id = int_cell(r, "id")) ids.insert(*id);
        std::vector<std::int64_t> device_ids;
        std::vector<Row> device_rows = s.devices.rows;
        for (std::size_t i = 0; i < s.devices.count; ++i) {
            std::int64_t id;
            do id = rng_.between(1'000'000, 9'999'999);
            while (!ids.insert(id).second);
            std::int64_t assoc = rng_.between(kEpochLo, kEpochHi - 86400 * 30) * 1000;
            std::int64_t last = assoc + rng_.between(60'000, 86'400'000LL * 30);
            std::string mac = "00:24:e4";
            for (int k = 0; k < 3; ++k) mac += ":" + rng_.chars(kHexLower, 2);
            if (rng_.chance(25))
                for (auto& ch : mac) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            Row r{{"id", id},
                  {"associationDate", assoc},
                  {"lastUseDate", last},
                  {"modifiedDate", assoc + rng_.between(0, last - assoc)},
                  {"macAddress", mac},
                  {"firmware", rng_.between(100, 2000)},
                  {"battery", rng_.between(0, 100)},
                  {"type", rng_.between(1, 16)},
                  {"model", rng_.between(1, 99)}};
            if (rng_.chance(50)) r["timezone"] = std::string(rng_.pick(kTimezones));
            device_rows.push_back(std::move(r));
        }
        for (const auto& r : device_rows)
            if (auto id = int_cell(r, "id")) device_ids.push_back(*id);

        std::vector<PendingRow> devices;
        for (auto& r : device_rows) {
            auto id = int_cell(r, "id");
            if (!id) throw Error(ErrorCode::InvalidSpec, "healthmate.devices rows need an integer id");
            devices.push_back({*id, r});
        }

        std::vector<PendingRow> measures;
        std::set<std::int64_t> used_times;
        std::int64_t next_id = 1;
        for (const auto& r : s.measures.rows) {
            auto id = int_cell(r, "id").value_or(next_id);
            next_id = std::max(next_id, id + 1);
            measures.push_back({id, r});
            if (auto d = int_cell(r, "date")) used_times.insert(*d);
        }
        auto fresh_time = [&] {
            std::int64_t t;
            do t = rng_.between(kEpochLo, kEpochHi) * 1000 + rng_.between(0, 999);
            while (!used_times.insert(t).second);
            return t;
        };
        auto device_ref = [&]() -> Cell {
            if (device_ids.empty() || rng_.chance(20)) return std::monostate{};
            return rng_.pick(device_ids);
        };
        static constexpr std::array<std::int64_t, 7> kSingles{1, 6, 8, 11, 76, 88, 170};
        for (std::size_t left = s.measures.count; left > 0;) {
            std::int64_t t = fresh_time();
            Cell dev = device_ref();
            if (left >= 2 && rng_.chance(25)) {
                std::int64_t sys = rng_.between(95, 160);
                measures.push_back({next_id++, Row{{"type", std::int64_t{4}}, {"value", static_cast<double>(sys)}, {"date", t}, {"deviceId", dev}}});
                measures.push_back({next_id++, Row{{"type", std::int64_t{5}},
                                                   {"value", static_cast<double>(rng_.between(60, std::min<std::int64_t>(sys - 10, 100)))},
                                                   {"date", t}, {"deviceId", dev}}});
                left -= 2;
                continue;
            }
            std::int64_t code = rng_.chance(10) ? rng_.pick(kUnmappedCodes) : rng_.pick(kSingles);
            double value = 0;
            switch (code) {
                case 1: value = rng_.tenths(45, 120); break;
                case 6: value = rng_.tenths(8, 40); break;
                case 8: value = rng_.tenths(45, 65); break;
                case 11: value = static_cast<double>(rng_.between(50, 110)); break;
                case 76: value = rng_.tenths(30, 80); break;
                case 88: value = rng_.tenths(2, 4); break;
                case 170: value = rng_.tenths(17, 35); break;
                default: value = rng_.tenths(1, 500); break;
            }
            measures.push_back({next_id++, Row{{"type", code}, {"value", value}, {"date", t}, {"deviceId", dev}}});
            --left;
        }

        auto users = rows_for(s.users, [&] {
            Row r{{"name", random_name(rng_)}, {"birthday", random_birthday(rng_)}, {"email", random_email(rng_)}};
            r["gender"] = std::string(rng_.chance(50) ? "female" : "male");
            return r;
        });

        fixture_.tree[db_path] = write_database(
            spec_.sqlite, rng_, {{&detail::kDevicesTable, devices}, {&detail::kMeasureTable, measures}, {&detail::kHmUsersTable, users}});
        fixture_.manifest.databases.push_back({db_path, DbStatus::PlaintextSqlite});

        for (const auto& p : devices) expect_device(app, db_path, p);
        expect_measures(app, db_path, measures);
        for (const auto& p : users) expect_hm_user(app, db_path, p);
        finish(app);
    }

    void expect_device(AppState& app, const std::string& path, const PendingRow& p) {
        auto t1 = int_cell(p.row, "associationDate"), t2 = int_cell(p.row, "lastUseDate"),
             t3 = int_cell(p.row, "modifiedDate");
        auto a1 = t1 ? stamp(*t1) : std::nullopt, a2 = t2 ? stamp(*t2) : std::nullopt,
             a3 = t3 ? stamp(*t3) : std::nullopt;
        auto mac_text = text_cell(p.row, "macAddress");
        auto mac = mac_text ? colon_hex_lower(*mac_text) : std::nullopt;
        auto fw = int_cell(p.row, "firmware"), battery = int_cell(p.row, "battery"), type = int_cell(p.row, "type"),
             model = int_cell(p.row, "model");
        if (!a1 || !a2 || !a3 || !mac || !fw || !battery || *battery < 0 || *battery > 100 || !type || !model)
            return malformed(app, path, "devices", p.rowid);
        auto tz = text_cell(p.row, "timezone");
        auto& r = plant(app, ArtifactKind::DeviceRegistration, table_locator(app, path, "devices", p.rowid),
                        {{"id", p.rowid}, {"association_date", stamp_json(*a1)}, {"last_use_date", stamp_json(*a2)},
                         {"modified_date", stamp_json(*a3)}, {"mac_address", *mac}, {"firmware", *fw},
                         {"timezone", tz ? json(*tz) : json(nullptr)}, {"battery_pct", *battery},
                         {"device_type", *type}, {"device_model", *model}});
        find(r, PhiCategory::ProvisionOfHealthcare, "device-registration",
             "mac=" + *mac + " type=" + std::to_string(*type) + " model=" + std::to_string(*model));
    }

    void expect_measures(AppState& app, const std::string& path, const std::vector<PendingRow>& rows) {
        struct Typed {
            const PendingRow* row;
            std::string kind;
            double value;
            Stamp at;
            std::optional<std::int64_t> device;
        };
        std::vector<Typed> typed;
        for (const auto& p : rows) {
            auto code = int_cell(p.row, "type");
            auto value = real_cell(p.row, "value");
            if (!code || !value) {
                malformed(app, path, "measure", p.rowid);
                continue;
            }
            auto known = measure_codes().find(*code);
            if (known == measure_codes().end()) {
                plant(app, ArtifactKind::RawHit, table_locator(app, path, "measure", p.rowid),
                      {{"pattern", "unmapped-measure"},
                       {"text", "type=" + std::to_string(*code) + " value=" + decimal(*value)}});
                continue;
            }
            auto t = int_cell(p.row, "date");
            auto at = t ? stamp(*t) : std::nullopt;
            auto dev_it = p.row.find("deviceId");
            bool dev_null = dev_it == p.row.end() || std::holds_alternative<std::monostate>(dev_it->second);
            auto dev = int_cell(p.row, "deviceId");
            if (*value <= 0 || !at || (!dev_null && !dev)) {
                malformed(app, path, "measure", p.rowid);
                continue;
            }
            typed.push_back({&p, std::string(known->second), *value, *at, dev});
        }
        // A systolic/diastolic pair sharing an instant must be ordered.
        std::vector<bool> drop(typed.size(), false);
        for (std::size_t i = 0; i < typed.size(); ++i)
            for (std::size_t j = 0; j < typed.size(); ++j)
                if (typed[i].kind == "systolic" && typed[j].kind == "diastolic" && typed[i].at.raw == typed[j].at.raw &&
                    typed[i].value <= typed[j].value)
                    drop[i] = drop[j] = true;
        for (std::size_t i = 0; i < typed.size(); ++i) {
            const auto& m = typed[i];
            if (drop[i]) {
                malformed(app, path, "measure", m.row->rowid);
                continue;
            }
            auto& r = plant(app, ArtifactKind::Measurement, table_locator(app, path, "measure", m.row->rowid),
                            {{"kind", m.kind}, {"value", m.value}, {"measured_at", stamp_json(m.at)},
                             {"device_ref", m.device ? json(*m.device) : json(nullptr)}});
            find(r, PhiCategory::HealthCondition, "physiological-reading", m.kind + "=" + decimal(m.value));
            find(r, PhiCategory::ProvisionOfHealthcare, "reading-device-time-linkage",
                 at_excerpt(m.device ? std::to_string(*m.device) : "", m.at));
            app.plaintext_health = true;
        }
    }

    void expect_hm_user(AppState& app, const std::string& path, const PendingRow& p) {
        auto name = text_cell(p.row, "name"), birthday = text_cell(p.row, "birthday"), email = text_cell(p.row, "email");
        if (!name || !birthday || !valid_date(*birthday) || !email || !valid_email(*email))
            return malformed(app, path, "users", p.rowid);
        auto& r = plant(app, ArtifactKind::UserProfile, table_locator(app, path, "users", p.rowid),
                        {{"name", *name}, {"gender", text_cell(p.row, "gender").value_or("")},
                         {"birthday", *birthday}, {"email", *email}});
        if (!name->empty()) find(r, PhiCategory::Name, "profile-name", *name);
        find(r, PhiCategory::DateOfBirth, "profile-birth-date", *birthday);
    }

    const FixtureSpec& spec_;
    Rng rng_;
    Fixture fixture_;
};

}  // namespace

Fixture build_fixture(const FixtureSpec& spec) { return Builder(spec).build(); }

Bytes zip_tree(const Tree& tree) {
    zip::Writer writer;
    for (const auto& [path, bytes] : tree)
        writer.add(path, bytes, path.ends_with(".db") ? zip::Method::Stored : zip::Method::Deflate);
    return writer.finish();
}

FixtureManifest generate_fixture(const FixtureSpec& spec, const std::filesystem::path& out) {
    namespace fs = std::filesystem;
    auto fixture = build_fixture(spec);
    auto write_file = [](const fs::path& path, std::span<const std::uint8_t> bytes) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    };
    std::error_code ec;
    if (spec.output_kind == OutputKind::Zip) {
        if (out.has_parent_path()) fs::create_directories(out.parent_path(), ec);
        write_file(out, zip_tree(fixture.tree));
    } else {
        if (fs::exists(out) && (!fs::is_directory(out) || !fs::is_empty(out)))
            throw Error(ErrorCode::IoFailure, out.string() + " exists and is not an empty directory");
        for (const auto& [path, bytes] : fixture.tree) {
            fs::path target = out / fs::path(path);
            fs::create_directories(target.parent_path(), ec);
            if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + target.parent_path().string());
            write_file(target, bytes);
        }
        fs::create_directories(out, ec);
    }
    return std::move(fixture.manifest);
}

}  // namespace phiscan::forge
