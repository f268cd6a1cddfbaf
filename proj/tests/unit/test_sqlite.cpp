#include "support.hpp"

#include "phiscan/error.hpp"
#include "phiscan/sqlite_reader.hpp"

#include <doctest.h>

#include <functional>

#include <cstdio>
#include <random>

using namespace phiscan;
using sqlite::Value;

namespace {

std::string literal(const Value& v) {
    if (std::holds_alternative<std::monostate>(v)) return "NULL";
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&v)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17e", *d);
        return buf;
    }
    if (auto* s = std::get_if<std::string>(&v)) {
        std::string out = "'";
        for (char c : *s) out += c == '\'' ? std::string("''") : std::string(1, c);
        return out + "'";
    }
    std::string hex = "X'";
    char buf[3];
    for (auto b : std::get<sqlite::Blob>(v).bytes) std::snprintf(buf, sizeof buf, "%02X", b), hex += buf;
    return hex + "'";
}

// Values spanning every record serial type.
Value random_value(std::mt19937_64& g) {
    switch (g() % 9) {
        case 0: return std::monostate{};
        case 1: return std::int64_t(g() % 2);  // serial types 8 and 9
        case 2: return static_cast<std::int64_t>(static_cast<std::int8_t>(g()));
        case 3: return static_cast<std::int64_t>(static_cast<std::int32_t>(g()));
        case 4: return static_cast<std::int64_t>(g() >> (g() % 40));
        case 5: return -static_cast<std::int64_t>(g() >> 1);
        case 6: return static_cast<double>(static_cast<std::int64_t>(g() % 2000000) - 1000000) / 64.0 + 0.5;
        case 7: {
            std::string s;
            std::size_t n = g() % 40 == 0 ? 3000 + g() % 9000 : g() % 30;
            for (std::size_t i = 0; i < n; ++i) s += static_cast<char>(' ' + g() % 95);
            return s;
        }
        default: {
            sqlite::Blob b;
            b.bytes.resize(g() % 64);
            for (auto& c : b.bytes) c = static_cast<std::uint8_t>(g());
            return b;
        }
    }
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

TEST_SUITE("sqlite") {

TEST_CASE("create table parsing") {
    auto t = sqlite::parse_create_table(
        "CREATE TABLE \"devices\" (id INTEGER PRIMARY KEY, `macAddress` TEXT NOT NULL, [battery] INT, "
        "model INTEGER DEFAULT (0), CONSTRAINT u UNIQUE (macAddress))");
    CHECK(t.columns == std::vector<std::string>{"id", "macAddress", "battery", "model"});
    REQUIRE(t.rowid_alias);
    CHECK(*t.rowid_alias == 0);
    CHECK(t.column_index("MACADDRESS") == 1u);
    CHECK_FALSE(t.column_index("missing"));

    auto u = sqlite::parse_create_table("CREATE TABLE m(a, b TEXT, PRIMARY KEY(a))");
    CHECK(u.columns == std::vector<std::string>{"a", "b"});
    CHECK_FALSE(u.rowid_alias);
    CHECK(sqlite::parse_create_table("CREATE TABLE w(k TEXT PRIMARY KEY, v) WITHOUT ROWID").without_rowid);
}

TEST_CASE("random tables read back exactly as libsqlite3 wrote them") {
    std::mt19937_64 g(11);
    for (int round = 0; round < 30; ++round) {
        const int page = 512 << (g() % 5);
        const std::size_t cols = 1 + g() % 6, rows = g() % 400;
        std::string create = "CREATE TABLE t(id INTEGER PRIMARY KEY";
        for (std::size_t c = 0; c < cols; ++c) create += ", c" + std::to_string(c);
        std::vector<std::string> sql{create + ")", "BEGIN"};
        std::vector<std::vector<Value>> expected;
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<Value> row{std::int64_t(r + 1)};
            std::string insert = "INSERT INTO t VALUES(" + std::to_string(r + 1);
            for (std::size_t c = 0; c < cols; ++c) {
                row.push_back(random_value(g));
                insert += ", " + literal(row.back());
            }
            sql.push_back(insert + ")");
            expected.push_back(std::move(row));
        }
        sql.push_back("COMMIT");
        auto image = testing::sqlite_image(sql, page);
        sqlite::Database db(image);
        CHECK(db.page_size() == static_cast<std::uint32_t>(page));
        auto got = db.read_table("t");
        REQUIRE(got.size() == rows);
        for (std::size_t r = 0; r < rows; ++r) {
            CHECK(got[r].rowid == static_cast<std::int64_t>(r + 1));
            REQUIRE(got[r].values == expected[r]);
        }
    }
}

TEST_CASE("deleted rows and freed pages are not resurrected") {
    std::vector<std::string> sql{"CREATE TABLE t(v)", "BEGIN"};
    for (int i = 1; i <= 3000; ++i) sql.push_back("INSERT INTO t VALUES('row " + std::to_string(i) + "')");
    sql.push_back("COMMIT");
    sql.push_back("DELETE FROM t WHERE rowid % 3 != 0");
    sql.push_back("CREATE TABLE later(x)");
    sql.push_back("INSERT INTO later VALUES(1)");
    auto image = testing::sqlite_image(sql, 1024);
    sqlite::Database db(image);
    auto rows = db.read_table("t");
    REQUIRE(rows.size() == 1000);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].rowid == static_cast<std::int64_t>(3 * (i + 1)));
        CHECK(std::get<std::string>(rows[i].values[0]) == "row " + std::to_string(3 * (i + 1)));
    }
    CHECK(db.read_table("LATER").size() == 1);
    CHECK(code_of([&] { db.read_table("absent"); }) == ErrorCode::MissingTable);
}

TEST_CASE("UTF-16 databases decode to UTF-8") {
    auto image = testing::sqlite_image(
        {"PRAGMA encoding='UTF-16le'", "CREATE TABLE t(name)", "INSERT INTO t VALUES('Zoë Łukasz ✓')"});
    sqlite::Database db(image);
    CHECK(std::get<std::string>(db.read_table("t").at(0).values.at(0)) == "Zoë Łukasz ✓");
}

TEST_CASE("non-sqlite and damaged input") {
    CHECK(code_of([] { sqlite::Database db(testing::to_bytes("definitely not a database")); }) ==
          ErrorCode::NotSqlite);
    auto image = testing::sqlite_image({"CREATE TABLE t(v)", "INSERT INTO t VALUES(1)"});
    CHECK(sqlite::has_magic(image));
    Bytes truncated(image.begin(), image.begin() + 100);
    CHECK(code_of([&] { sqlite::Database db(truncated); db.read_table("t"); }) == ErrorCode::CorruptDatabase);
}

TEST_CASE("mutated images fail with a typed error or parse") {
    std::vector<std::string> sql{"CREATE TABLE t(a, b)", "BEGIN"};
    for (int i = 0; i < 500; ++i)
        sql.push_back("INSERT INTO t VALUES(" + std::to_string(i * 7919) + ", '" + std::string(i % 50, 'x') + "')");
    sql.push_back("COMMIT");
    auto image = testing::sqlite_image(sql, 512);
    std::mt19937_64 g(12);
    int survived = 0;
    for (int round = 0; round < 400; ++round) {
        auto bytes = image;
        for (int k = 0; k < 1 + static_cast<int>(g() % 8); ++k) bytes[16 + g() % (bytes.size() - 16)] = static_cast<std::uint8_t>(g());
        try {
            sqlite::Database db(bytes);
            for (const auto& t : db.tables()) db.read_table(t.name);
        } catch (const Error&) {
        }
        ++survived;  // any other exception type escapes and fails the case
    }
    CHECK(survived == 400);
}

}
