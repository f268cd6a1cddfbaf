#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

using phiscan::testing::ScratchDir;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run cli(const std::string& args) {
    Run r;
    r.out = phiscan::testing::run_command(std::string(PHISCAN_CLI) + " " + args + " 2>/dev/null", r.status);
    return r;
}

std::string spec_path() { return (phiscan::testing::repo_root() / "fixtures" / "reference-handset.spec").string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fixtures then scan: exit 2 on violations, stable output") {
    ScratchDir dir;
    auto tree = (dir / "case").string();
    REQUIRE(cli("fixtures " + spec_path() + " -o " + tree).status == 0);
    CHECK(std::filesystem::exists(tree + ".manifest.json"));
    auto a = cli("scan " + tree + " --fixed-clock 2020-01-01T00:00:00Z");
    auto b = cli("scan " + tree + " --fixed-clock 2020-01-01T00:00:00Z");
    CHECK(a.status == 2);
    CHECK(a.out == b.out);
    auto report = nlohmann::json::parse(a.out);
    CHECK(report.at("redacted") == true);
    CHECK(a.out.find("MedExp2018") == std::string::npos);
    auto clear = cli("scan " + tree + " --no-redact --fixed-clock 2020-01-01T00:00:00Z");
    CHECK(clear.out.find("MedExp2018") != std::string::npos);

    REQUIRE(cli("fixtures " + spec_path() + " -o " + (dir / "case.zip").string()).status == 0);
    auto z = cli("scan " + (dir / "case.zip").string() + " --fixed-clock 2020-01-01T00:00:00Z");
    CHECK(z.status == 2);
    CHECK(z.out == a.out);

    auto out = dir / "report.txt";
    CHECK(cli("scan " + tree + " --format text -o " + out.string()).status == 2);
    auto text = phiscan::testing::read_file(out);
    CHECK(std::string(text.begin(), text.end()).find("Key: ✓ = Recovered from Application") != std::string::npos);
}

TEST_CASE("clean trees exit 0") {
    ScratchDir dir;
    phiscan::testing::write_file(dir / "spec.yaml", "format: 1\nseed: 4\nglucosmart:\n  encrypted_dbs: 2\n");
    auto tree = (dir / "t").string();
    REQUIRE(cli("fixtures " + (dir / "spec.yaml").string() + " -o " + tree).status == 0);
    CHECK(cli("scan " + tree).status == 0);
}

TEST_CASE("timeline") {
    ScratchDir dir;
    auto tree = (dir / "t").string();
    REQUIRE(cli("fixtures " + spec_path() + " -o " + tree).status == 0);
    auto r = cli("timeline " + tree);
    CHECK(r.status == 0);
    auto events = nlohmann::json::parse(r.out);
    CHECK(events.size() == 18);
    CHECK(events[0].at("utc") == "2018-07-05T22:25:49Z");
}

TEST_CASE("errors exit 1") {
    ScratchDir dir;
    CHECK(cli("scan " + (dir / "missing").string()).status == 1);
    CHECK(cli("scan").status == 1);
    CHECK(cli("").status == 1);
    CHECK(cli("scan . --format xml").status == 1);
    CHECK(cli("scan . --fixed-clock yesterday").status == 1);
    phiscan::testing::write_file(dir / "bad.yaml", "format: 1\nmyvitals:\n  bp: -1\n");
    int status = 0;
    auto err = phiscan::testing::run_command(std::string(PHISCAN_CLI) + " fixtures " + (dir / "bad.yaml").string() +
                                                 " -o " + (dir / "o").string() + " 2>&1",
                                             status);
    CHECK(status == 1);
    CHECK(err.find("line 3") != std::string::npos);
    phiscan::testing::write_file(dir / "rules.txt", "phi-rules 1\nx nonsense name\n");
    CHECK(cli("scan " + dir.path().string() + " --rules " + (dir / "rules.txt").string()).status == 1);
}

TEST_CASE("help, version and parser listing") {
    CHECK(cli("--help").status == 0);
    auto v = cli("--version");
    CHECK(v.status == 0);
    CHECK(v.out.find("1.0.0") != std::string::npos);
    auto list = cli("list-parsers --format json");
    CHECK(list.status == 0);
    auto parsers = nlohmann::json::parse(list.out);
    REQUIRE(parsers.size() == 3);
    CHECK(parsers[0].at("folder_signature") == "iHealthMyVitals.V2");
    CHECK(cli("list-parsers").out.find("com.withings.wiscale2") != std::string::npos);
}

}
