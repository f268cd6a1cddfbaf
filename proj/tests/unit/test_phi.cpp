#include "support.hpp"

#include "phiscan/error.hpp"
#include "phiscan/phi.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace phiscan;

namespace {

ArtifactRecord record(Payload p, std::string detail = "T:1",
                      ContainerType container = ContainerType::SqliteTable) {
    return {std::move(p), SourceLocator{"pkg", "pkg/db", container, std::move(detail)}, {}};
}

std::multiset<std::pair<PhiCategory, std::string>> categories(const std::vector<PhiFinding>& f) {
    std::multiset<std::pair<PhiCategory, std::string>> out;
    for (const auto& x : f) out.insert({x.category, x.rule_id});
    return out;
}

std::vector<std::string> hit_details(std::string_view text) {
    std::vector<std::string> out;
    auto bytes = testing::to_bytes(text);
    for (const auto& r : scan_raw(bytes, SourceLocator{"pkg", "pkg/f", ContainerType::RawBytes, "x"}))
        out.push_back(r.locator.detail + "=" + std::get<RawHit>(r.payload).text);
    return out;
}

// Oracle Luhn over a digit string: double every second digit from the right.
bool luhn_oracle(const std::string& d) {
    int sum = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        int v = d[d.size() - 1 - i] - '0';
        if (i % 2) v = v * 2 > 9 ? v * 2 - 9 : v * 2;
        sum += v;
    }
    return sum % 10 == 0;
}

}  // namespace

TEST_SUITE("phi") {

TEST_CASE("oximetry reading is health data linked to a device") {
    OximetryReading r;
    r.result_spo2 = 97;
    r.pulse_rate = 89;
    r.perfusion_index = 9.7;
    r.measured_at = normalize_timestamp(1530829549);
    r.machine_type = "PO3M";
    r.machine_device_id = "5CF821DED2ED";
    auto f = classify_record(record(r), "iHealth MyVitals");
    using C = PhiCategory;
    CHECK(categories(f) == std::multiset<std::pair<C, std::string>>{
                               {C::HealthCondition, "physiological-reading"},
                               {C::ProvisionOfHealthcare, "reading-device-time-linkage"}});
    for (const auto& x : f) {
        CHECK(x.app == "iHealth MyVitals");
        if (x.category == C::HealthCondition) CHECK(x.value_excerpt == "spo2=97 pr=89 pi=9.7");
        else CHECK(x.value_excerpt == "device=PO3M/5CF821DED2ED at=2018-07-05T22:25:49Z");
    }
}

TEST_CASE("profiles yield name, birth date and location") {
    MyVitalsProfile p{"Alex Tester", {1985, 3, 14}, "America/Chicago", "a@b.com"};
    using C = PhiCategory;
    CHECK(categories(classify_record(record(p), "app")) ==
          std::multiset<std::pair<C, std::string>>{{C::Name, "profile-name"},
                                                   {C::DateOfBirth, "profile-birth-date"},
                                                   {C::Address, "proxy-location:timezone"}});
    p.timezone_location.clear();
    CHECK(categories(classify_record(record(p), "app")).size() == 2);

    HealthMateUser u{"Alex Tester", "male", {1985, 3, 14}, "a@b.com"};
    CHECK(categories(classify_record(record(u), "app")) ==
          std::multiset<std::pair<C, std::string>>{{C::Name, "profile-name"}, {C::DateOfBirth, "profile-birth-date"}});
    GlucoProfile g{"pat@example.com", "BG5-1"};
    CHECK(categories(classify_record(record(g), "app")) ==
          std::multiset<std::pair<C, std::string>>{{C::Name, "profile-name"}});
}

TEST_CASE("device registrations are provision of care only") {
    DeviceRegistration d;
    d.mac_address = "00:24:e4:57:12:c4";
    d.timezone = "America/Chicago";
    d.device_type = 1;
    d.device_model = 6;
    auto f = classify_record(record(d), "app");
    REQUIRE(f.size() == 1);
    CHECK(f[0].category == PhiCategory::ProvisionOfHealthcare);
    CHECK(f[0].value_excerpt == "mac=00:24:e4:57:12:c4 type=1 model=6");
}

TEST_CASE("credentials and unmapped measures carry no PHI category") {
    CredentialSet c;
    c.account = "a@b.com";
    c.password_plaintext = "secret";
    CHECK(classify_record(record(c), "app").empty());
    CHECK(classify_record(record(RawHit{RawPattern::UnmappedMeasure, "type=999 value=1"}), "app").empty());
}

TEST_CASE("raw hits map by pattern") {
    auto one = [](RawPattern p, std::string text) {
        auto f = classify_record(record(RawHit{p, std::move(text)}, "offset:0:x", ContainerType::RawBytes), "app");
        return f.size() == 1 ? f[0].category : PhiCategory::Payment;
    };
    CHECK(one(RawPattern::Email, "a@b.com") == PhiCategory::Name);
    CHECK(one(RawPattern::Ssn, "123-45-6789") == PhiCategory::Ssn);
    CHECK(one(RawPattern::PaymentCard, "4111111111111111") == PhiCategory::Payment);
    CHECK(classify_record(record(RawHit{RawPattern::MacAddress, "00:24:e4:57:12:c4"}), "app").empty());
}

TEST_CASE("ssn and card patterns inside recovered text fields") {
    BloodPressureReading bp;
    bp.systolic = 120;
    bp.diastolic = 80;
    bp.pulse = 70;
    bp.measured_at = normalize_timestamp(1530830102);
    bp.note = "ssn 123-45-6789 card 4111 1111 1111 1111 or 4111111111111111";
    std::set<PhiCategory> seen;
    for (const auto& f : classify_record(record(bp), "app")) seen.insert(f.category);
    CHECK(seen.contains(PhiCategory::Ssn));
    CHECK(seen.contains(PhiCategory::Payment));
}

TEST_CASE("raw sweep finds patterns at their byte offsets") {
    std::string blob = std::string("\x01\x02\x03", 3) + "user: pat@example.org;" + std::string(4, '\0') +
                       "mac 00:24:E4:5A:EE:6C t=1530829549 password=x";
    auto hits = hit_details(blob);
    std::set<std::string> got(hits.begin(), hits.end());
    CHECK(got.contains("offset:9:email=pat@example.org"));
    CHECK(got.contains("offset:33:mac-address=00:24:E4:5A:EE:6C"));
    CHECK(got.contains("offset:53:date-token=1530829549"));
    CHECK(got.contains("offset:64:secret-key-name=password"));
    CHECK(got.size() == 4);
    CHECK(std::is_sorted(hits.begin(), hits.end(), [](const std::string& a, const std::string& b) {
        auto off = [](const std::string& s) { return std::stoll(s.substr(7)); };
        return off(a) < off(b);
    }));
}

TEST_CASE("raw sweep ignores near misses") {
    CHECK(hit_details("123-45-67890 and 0123-45-6789").empty());
    CHECK(hit_details("4111111111111112").empty());   // fails Luhn
    CHECK(hit_details("2530829549").empty());         // not a plausible epoch
    CHECK(hit_details("1.2.3.1530829549.4").empty()); // part of a dotted version
    CHECK(hit_details("abc").empty());                 // below the printable-run floor
}

TEST_CASE("planted emails are all found") {
    std::mt19937_64 g(31);
    for (int round = 0; round < 200; ++round) {
        std::string blob;
        std::vector<std::size_t> offsets;
        for (int k = 0; k < 1 + static_cast<int>(g() % 4); ++k) {
            std::size_t pad = 1 + g() % 20;  // at least one non-printable separator
            for (std::size_t i = 0; i < pad; ++i) blob += static_cast<char>(g() % 2 ? 0 : 0xC3);
            offsets.push_back(blob.size());
            blob += "u" + std::to_string(g() % 90) + "@host" + std::to_string(g() % 9) + ".org";
        }
        auto hits = scan_raw(testing::to_bytes(blob), SourceLocator{"p", "p/f", ContainerType::RawBytes, "x"});
        REQUIRE(hits.size() == offsets.size());
        for (std::size_t i = 0; i < offsets.size(); ++i)
            CHECK(hits[i].locator.detail == "offset:" + std::to_string(offsets[i]) + ":email");
    }
}

TEST_CASE("luhn and ssn predicates") {
    std::mt19937_64 g(32);
    for (int i = 0; i < 2000; ++i) {
        std::string d;
        for (int k = 0; k < 16; ++k) d += static_cast<char>('0' + g() % 10);
        CHECK(luhn_valid(d) == luhn_oracle(d));
    }
    CHECK(looks_like_ssn("123-45-6789"));
    CHECK_FALSE(looks_like_ssn("123456789"));
    CHECK_FALSE(looks_like_ssn("12-345-6789"));
}

TEST_CASE("rule table text") {
    auto text = testing::read_file(testing::repo_root() / "config" / "phi_rules.txt");
    auto shipped = RuleTable::parse(std::string(text.begin(), text.end()));
    CHECK(shipped.rules().size() == RuleTable::defaults().rules().size());
    CHECK(shipped.version() == 1);
    REQUIRE(shipped.find("profile-name"));
    CHECK(shipped.find("profile-name")->category == PhiCategory::Name);

    auto error_line = [](std::string_view t) -> std::string {
        try {
            RuleTable::parse(t);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidConfig);
            return e.what();
        }
        return "";
    };
    CHECK(error_line("phi-rules 2\n").find("version 2") != std::string::npos);
    CHECK(error_line("rules v1\n").find("line 1") != std::string::npos);
    CHECK(error_line("phi-rules 1\nr1 profile_name name\nr2 no_such_predicate name\n").find("line 3") !=
          std::string::npos);
    CHECK(error_line("phi-rules 1\nr1 profile_name shoe\n").find("line 2") != std::string::npos);
    CHECK(error_line("phi-rules 1\nr1 profile_name name\nr1 raw_email name\n").find("line 3") != std::string::npos);

    // A table without the timezone rule stops reporting location.
    auto reduced = RuleTable::parse("phi-rules 1\nonly-name profile_name name\n");
    MyVitalsProfile p{"Alex", {1985, 3, 14}, "America/Chicago", "a@b.com"};
    auto f = classify_record(record(p), "app", reduced);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "only-name");
}

TEST_CASE("privacy matrix is the union of finding categories") {
    std::mt19937_64 g(33);
    for (int round = 0; round < 300; ++round) {
        std::vector<PhiFinding> findings;
        std::set<PhiCategory> present;
        for (int i = 0; i < static_cast<int>(g() % 6); ++i) {
            auto c = kAllCategories[g() % kAllCategories.size()];
            present.insert(c);
            findings.push_back({"app", c, "v", SourceLocator{"p", "p/x", ContainerType::XmlFile, "k"}, "r"});
        }
        auto row = evaluate_privacy_rule("app", findings);
        CHECK(row.app_name == "app");
        REQUIRE(row.cells.size() == kAllCategories.size());
        for (auto c : kAllCategories)
            CHECK((row.cells.at(c) == CellState::Recovered) == present.contains(c));
    }
}

TEST_CASE("security rule outcomes") {
    DatabaseStatus plain{"pkg/db", DbStatus::PlaintextSqlite, true, 2.0, std::nullopt};
    PhiFinding health{"app", PhiCategory::HealthCondition, "spo2=97",
                      SourceLocator{"pkg", "pkg/db", ContainerType::SqliteTable, "TB_SPO2Result:1"}, "physiological-reading"};
    PhiFinding name{"app", PhiCategory::Name, "Alex",
                    SourceLocator{"pkg", "pkg/u.xml", ContainerType::XmlFile, "UserName"}, "profile-name"};
    CredentialSet c;
    c.account = "a@b.com";
    c.password_plaintext = "MedExp2018";
    std::vector<ArtifactRecord> creds{record(c, "credential[0]", ContainerType::XmlFile)};

    auto v = evaluate_security_rule("app", creds, std::vector{health}, std::vector{plain});
    REQUIRE(v.size() == 2);
    std::set<ViolationKind> kinds{v[0].kind, v[1].kind};
    CHECK(kinds == std::set{ViolationKind::PlaintextEphiAtRest, ViolationKind::PlaintextCredential});
    for (const auto& x : v) {
        CHECK(x.severity == Severity::Violation);
        CHECK_FALSE(x.evidence.empty());
        if (x.kind == ViolationKind::PlaintextCredential) {
            CHECK(x.subject == "a@b.com");
            CHECK(x.excerpt == "MedExp2018");
        }
    }

    // Health data in an opaque database is not plaintext at rest.
    DatabaseStatus opaque{"pkg/db", DbStatus::EncryptedOrOpaque, false, 7.9, std::nullopt};
    auto w = evaluate_security_rule("app", {}, std::vector{health, name}, std::vector{opaque});
    REQUIRE(w.size() == 1);
    CHECK(w[0].kind == ViolationKind::WeakSafeguardNote);
    CHECK(w[0].severity == Severity::Informational);

    CHECK(evaluate_security_rule("app", {}, {}, {}).empty());
}

TEST_CASE("redaction") {
    CHECK(redact("") == "****");
    CHECK(redact("abcd") == "****");
    CHECK(redact("MedExp2018") == "Me***18");
    CHECK(redact("medicaldevices2018exper@gmail.com") == "me***om");
    CHECK(redact("Zoë Ł") == "Zo*** Ł");
    CHECK(redact("✓✓✓✓✓") == "✓✓***✓✓");
}

}
