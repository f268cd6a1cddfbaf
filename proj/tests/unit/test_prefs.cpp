#include "support.hpp"

#include "phiscan/db_status.hpp"
#include "phiscan/error.hpp"
#include "phiscan/prefs_xml.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace phiscan;

namespace {

// Oracle entropy: count, then sum -p log2 p in a single plain loop.
double entropy_oracle(const Bytes& b) {
    if (b.empty()) return 0;
    std::map<int, double> counts;
    for (auto c : b) counts[c] += 1;
    double h = 0;
    for (const auto& [k, n] : counts) h -= (n / b.size()) * std::log2(n / b.size());
    return h;
}

}  // namespace

TEST_SUITE("prefs") {

TEST_CASE("typed entries in document order") {
    auto xml = testing::to_bytes(R"(<?xml version='1.0' encoding='utf-8' standalone='yes' ?>
<map>
  <boolean name="flag" value="false" />
  <string name="text">  padded value
  </string>
  <int name="n" value="42" />
  <long name="big" value="1542127729662" />
  <float name="f" value="9.7" />
  <set name="s"><string>a</string><string>b</string></set>
  <string name="amp">a &amp; b</string>
</map>)");
    auto entries = prefs::parse(xml);
    REQUIRE(entries.size() == 7);
    CHECK(entries[0].type == "boolean");
    CHECK(entries[0].value == "false");
    CHECK(entries[1].key == "text");
    CHECK(prefs::trim(entries[1].value) == "padded value");
    CHECK(entries[3].value == "1542127729662");
    CHECK(entries[5].value == "a\nb");
    CHECK(entries[6].value == "a & b");
    for (std::size_t i = 0; i < entries.size(); ++i) CHECK(entries[i].index == i);
}

TEST_CASE("malformed documents") {
    auto bad = [](std::string_view text) {
        try {
            prefs::parse(testing::to_bytes(text));
        } catch (const Error& e) {
            return e.code() == ErrorCode::MalformedXml;
        }
        return false;
    };
    CHECK(bad("<map><string name=\"x\">unterminated</map>"));
    CHECK(bad("<root><string name=\"x\">v</string></root>"));
    CHECK(bad("<map><string>no name</string></map>"));
    CHECK(bad("<map><int name=\"n\" /></map>"));
    CHECK(bad(""));
    CHECK(prefs::parse(testing::to_bytes("<map/>")).empty());
}

TEST_CASE("trim") {
    CHECK(prefs::trim("  a b \n\t") == "a b");
    CHECK(prefs::trim("") == "");
    CHECK(prefs::trim(" \n ") == "");
}

TEST_CASE("entropy matches the oracle") {
    std::mt19937_64 g(21);
    CHECK(shannon_entropy({}) == 0);
    for (int round = 0; round < 50; ++round) {
        Bytes b(1 + g() % 5000);
        int alphabet = 1 + static_cast<int>(g() % 256);
        for (auto& c : b) c = static_cast<std::uint8_t>(g() % alphabet);
        CHECK(shannon_entropy(b) == doctest::Approx(entropy_oracle(b)).epsilon(1e-12));
    }
    Bytes uniform(4096);
    for (std::size_t i = 0; i < uniform.size(); ++i) uniform[i] = static_cast<std::uint8_t>(i);
    CHECK(shannon_entropy(uniform) == doctest::Approx(8.0));
}

TEST_CASE("database classification") {
    auto plain = testing::sqlite_image({"CREATE TABLE t(v)", "INSERT INTO t VALUES('x')"});
    auto p = classify_database_bytes("a/plain.db", plain);
    CHECK(p.status == DbStatus::PlaintextSqlite);
    CHECK(p.header_magic_present);
    CHECK_FALSE(p.high_entropy());

    std::mt19937_64 g(22);
    Bytes noise(8192);
    for (auto& c : noise) c = static_cast<std::uint8_t>(g());
    auto n = classify_database_bytes("a/opaque.db", noise);
    CHECK(n.status == DbStatus::EncryptedOrOpaque);
    CHECK_FALSE(n.header_magic_present);
    CHECK(n.high_entropy());
    Bytes window(noise.begin(), noise.begin() + kEntropyWindow);
    CHECK(n.entropy_bits_per_byte == doctest::Approx(entropy_oracle(window)));

    // Opaque but not random: still not plaintext, just low entropy.
    auto z = classify_database_bytes("a/zeros.db", Bytes(4096, 0));
    CHECK(z.status == DbStatus::EncryptedOrOpaque);
    CHECK_FALSE(z.high_entropy());

    CHECK(classify_database_bytes("a/empty.db", {}).status == DbStatus::Empty);
    CHECK(db_status_from_string(to_string(DbStatus::EncryptedOrOpaque)) == DbStatus::EncryptedOrOpaque);
}

}
