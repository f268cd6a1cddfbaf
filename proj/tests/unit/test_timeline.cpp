#include "support.hpp"

#include "phiscan/parser.hpp"
#include "phiscan/scan.hpp"
#include "phiscan/timeline.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace phiscan;

namespace {

ArtifactRecord measurement(std::int64_t raw, std::string pkg, std::string detail, MeasureKind kind = MeasureKind::Pulse) {
    HealthMateMeasurement m;
    m.kind = kind;
    m.value = 70;
    m.measured_at = normalize_timestamp(raw);
    return {m, SourceLocator{pkg, pkg + "/db", ContainerType::SqliteTable, std::move(detail)}, {}};
}

}  // namespace

TEST_SUITE("timeline") {

TEST_CASE("seconds and milliseconds land on one axis") {
    std::vector<ArtifactRecord> records{measurement(1542127729662, "b", "m:1"), measurement(1530829549, "a", "m:2"),
                                        measurement(1530829549000, "a", "m:1"), measurement(1542127729, "b", "m:3")};
    auto t = build_timeline(records);
    REQUIRE(t.events.size() == 4);
    CHECK(t.events[0].locator.detail == "m:1");  // same instant, detail breaks the tie
    CHECK(t.events[1].locator.detail == "m:2");
    CHECK(t.events[2].at.raw_value == 1542127729);
    CHECK(t.events[3].at.raw_value == 1542127729662);
    CHECK(t.excluded == 0);
}

TEST_CASE("records without a time are counted, not placed") {
    std::vector<ArtifactRecord> records{measurement(1530829549, "a", "m:1"),
                                        {GlucoProfile{"u", "d"}, SourceLocator{"g", "g/x", ContainerType::XmlFile, "UserName"}, {}},
                                        {RawHit{RawPattern::Email, "a@b.com"}, SourceLocator{"g", "g/y", ContainerType::RawBytes, "offset:0:email"}, {}}};
    auto t = build_timeline(records);
    CHECK(t.events.size() == 1);
    CHECK(t.excluded == 2);
}

TEST_CASE("order is a total order independent of input order") {
    std::mt19937_64 g(51);
    for (int round = 0; round < 50; ++round) {
        std::vector<ArtifactRecord> records;
        for (int i = 0; i < 30; ++i)
            records.push_back(measurement(1530829549 + static_cast<std::int64_t>(g() % 3), g() % 2 ? "a" : "b",
                                          "m:" + std::to_string(g() % 5), static_cast<MeasureKind>(g() % 9)));
        auto base = build_timeline(records);
        CHECK(std::is_sorted(base.events.begin(), base.events.end(), event_less));
        for (std::size_t i = 0; i + 1 < base.events.size(); ++i)
            CHECK_FALSE(event_less(base.events[i + 1], base.events[i]));
        for (int k = 0; k < 20; ++k) {
            std::shuffle(records.begin(), records.end(), g);
            REQUIRE(build_timeline(records).events == base.events);
        }
    }
}

TEST_CASE("summaries never carry identifiers") {
    testing::ScratchDir dir;
    auto text = testing::read_file(testing::repo_root() / "fixtures" / "reference-handset.spec");
    forge::generate_fixture(forge::parse_fixture_spec(std::string(text.begin(), text.end())), dir / "t");
    ScanOptions o;
    o.redact = false;
    auto scan = run_scan(EvidenceSource::open(dir / "t"), ParserRegistry::builtin(), o);
    auto t = build_timeline(scan.records);
    CHECK(t.events.size() == 18);
    for (const auto& e : t.events) {
        CHECK(e.summary.find('@') == std::string::npos);
        CHECK(e.summary.find("00:24:e4") == std::string::npos);
    }
    auto json = nlohmann::json::parse(render_timeline(t, OutputFormat::Json));
    REQUIRE(json.size() == t.events.size());
    CHECK(json[0].at("utc") == "2018-07-05T22:25:49Z");
    CHECK(json[0].at("raw") == 1530829549);
    CHECK(json[0].at("unit") == "seconds");
    auto lines = render_timeline(t, OutputFormat::Text);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == static_cast<long>(t.events.size()));
    CHECK(lines.rfind("2018-07-05T22:25:49.000Z", 0) == 0);
}

}
