#include "phiscan/fixture.hpp"

#include "phiscan/error.hpp"
#include "schema.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <set>

namespace phiscan::forge {

std::string_view to_string(OutputKind kind) noexcept { return kind == OutputKind::Zip ? "zip" : "directory"; }

namespace {

using detail::Affinity;
using detail::TableSchema;

[[noreturn]] void fail(const YAML::Node& at, const std::string& why) {
    throw Error(ErrorCode::InvalidSpec, "line " + std::to_string(at.Mark().line + 1) + ": " + why);
}

void expect_keys(const YAML::Node& map, std::string_view what, std::initializer_list<std::string_view> allowed) {
    if (!map.IsMap()) fail(map, std::string(what) + " must be a mapping");
    for (const auto& kv : map) {
        auto key = kv.first.as<std::string>();
        bool known = false;
        for (auto a : allowed) known = known || a == key;
        if (!known) fail(kv.first, "unknown key `" + key + "` in " + std::string(what));
    }
}

std::int64_t as_int(const YAML::Node& n, std::string_view what) {
    std::int64_t v = 0;
    if (!n.IsScalar() || !YAML::convert<std::int64_t>::decode(n, v)) fail(n, std::string(what) + " must be an integer");
    return v;
}

std::size_t as_count(const YAML::Node& n, std::string_view what) {
    auto v = as_int(n, what);
    if (v < 0) fail(n, std::string(what) + " must not be negative (got " + std::to_string(v) + ")");
    return static_cast<std::size_t>(v);
}

bool as_bool(const YAML::Node& n, std::string_view what) {
    bool v = false;
    if (!n.IsScalar() || !YAML::convert<bool>::decode(n, v)) fail(n, std::string(what) + " must be true or false");
    return v;
}

std::string as_text(const YAML::Node& n, std::string_view what) {
    if (!n.IsScalar()) fail(n, std::string(what) + " must be a scalar");
    return n.Scalar();
}

Cell as_cell(const YAML::Node& n, const detail::Column& column) {
    if (n.IsNull()) return std::monostate{};
    if (!n.IsScalar()) fail(n, "column " + std::string(column.name) + " needs a scalar value");
    switch (column.type) {
        case Affinity::Integer: return as_int(n, column.name);
        case Affinity::Real: {
            double v = 0;
            if (!YAML::convert<double>::decode(n, v)) fail(n, std::string(column.name) + " must be a number");
            return v;
        }
        case Affinity::Text: return n.Scalar();
    }
    return std::monostate{};
}

TableSpec parse_table(const YAML::Node& n, const TableSchema& schema, std::string_view what) {
    TableSpec t;
    if (n.IsScalar()) {
        t.count = as_count(n, what);
        return t;
    }
    expect_keys(n, what, {"count", "rows"});
    if (n["count"]) t.count = as_count(n["count"], std::string(what) + ".count");
    if (const auto& rows = n["rows"]) {
        if (!rows.IsSequence()) fail(rows, std::string(what) + ".rows must be a list");
        for (const auto& r : rows) {
            if (!r.IsMap()) fail(r, std::string(what) + " rows must be mappings");
            Row row;
            for (const auto& kv : r) {
                auto name = kv.first.as<std::string>();
                const auto* column = schema.find(name);
                if (!column)
                    fail(kv.first, "table " + std::string(schema.name) + " has no column `" + name + "`");
                row[name] = as_cell(kv.second, *column);
            }
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

MyVitalsSpec parse_myvitals(const YAML::Node& n) {
    expect_keys(n, "myvitals",
                {"bp", "spo2", "weight", "environment", "users", "malformed_bp", "malformed_spo2", "credential"});
    MyVitalsSpec s;
    if (n["bp"]) s.bp = parse_table(n["bp"], detail::kBpTable, "myvitals.bp");
    if (n["spo2"]) s.spo2 = parse_table(n["spo2"], detail::kSpo2Table, "myvitals.spo2");
    if (n["weight"]) s.weight = parse_table(n["weight"], detail::kWeightTable, "myvitals.weight");
    if (n["environment"]) s.environment = parse_table(n["environment"], detail::kEnvTable, "myvitals.environment");
    if (n["users"]) s.users = parse_table(n["users"], detail::kUserInfoTable, "myvitals.users");
    if (n["malformed_bp"]) s.malformed_bp = as_count(n["malformed_bp"], "myvitals.malformed_bp");
    if (n["malformed_spo2"]) s.malformed_spo2 = as_count(n["malformed_spo2"], "myvitals.malformed_spo2");
    if (const auto& c = n["credential"]) {
        expect_keys(c, "myvitals.credential",
                    {"account", "password", "refresh_token", "access_token", "region_host", "is_online",
                     "region_flag"});
        if (!c["account"]) fail(c, "myvitals.credential needs an account");
        CredentialSpec cred;
        cred.account = as_text(c["account"], "account");
        if (!is_email_address(cred.account)) fail(c["account"], "credential account must be an email address");
        if (c["password"]) cred.password = as_text(c["password"], "password");
        if (c["refresh_token"]) cred.refresh_token = as_text(c["refresh_token"], "refresh_token");
        if (c["access_token"]) cred.access_token = as_text(c["access_token"], "access_token");
        if (c["region_host"]) cred.region_host = as_text(c["region_host"], "region_host");
        if (c["is_online"]) cred.is_online = as_bool(c["is_online"], "is_online");
        if (c["region_flag"]) cred.region_flag = as_int(c["region_flag"], "region_flag");
        s.credential = std::move(cred);
    }
    return s;
}

GlucoSpec parse_gluco(const YAML::Node& n) {
    expect_keys(n, "glucosmart", {"encrypted_dbs", "encrypted_db_bytes", "user_info"});
    GlucoSpec s;
    if (n["encrypted_dbs"]) s.encrypted_dbs = as_count(n["encrypted_dbs"], "glucosmart.encrypted_dbs");
    if (n["encrypted_db_bytes"])
        s.encrypted_db_bytes = as_count(n["encrypted_db_bytes"], "glucosmart.encrypted_db_bytes");
    if (const auto& u = n["user_info"]) {
        expect_keys(u, "glucosmart.user_info", {"UserName", "DeviceID"});
        if (u["UserName"]) s.user_name = as_text(u["UserName"], "UserName");
        if (u["DeviceID"]) s.device_id = as_text(u["DeviceID"], "DeviceID");
    }
    return s;
}

HealthMateSpec parse_healthmate(const YAML::Node& n) {
    expect_keys(n, "healthmate", {"devices", "measures", "users"});
    HealthMateSpec s;
    if (n["devices"]) s.devices = parse_table(n["devices"], detail::kDevicesTable, "healthmate.devices");
    if (n["measures"]) s.measures = parse_table(n["measures"], detail::kMeasureTable, "healthmate.measures");
    if (n["users"]) s.users = parse_table(n["users"], detail::kHmUsersTable, "healthmate.users");
    return s;
}

// ---------------------------------------------------------------------------

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    // Keep a decimal point so the value reads back as a real.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void emit_cell(YAML::Emitter& out, const Cell& cell) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) out << YAML::Null;
            else if constexpr (std::is_same_v<T, std::int64_t>) out << v;
            else if constexpr (std::is_same_v<T, double>) out << shortest(v);
            else out << YAML::DoubleQuoted << v;
        },
        cell);
}

void emit_table(YAML::Emitter& out, std::string_view key, const TableSpec& t, const TableSchema& schema) {
    out << YAML::Key << std::string(key) << YAML::Value;
    if (t.rows.empty()) {
        out << t.count;
        return;
    }
    out << YAML::BeginMap << YAML::Key << "count" << YAML::Value << t.count;
    out << YAML::Key << "rows" << YAML::Value << YAML::BeginSeq;
    for (const auto& row : t.rows) {
        out << YAML::Flow << YAML::BeginMap;
        // Schema order reads better than alphabetical.
        for (const auto& column : schema.columns) {
            auto it = row.find(std::string(column.name));
            if (it == row.end()) continue;
            out << YAML::Key << std::string(column.name) << YAML::Value;
            emit_cell(out, it->second);
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
}

template <typename T>
void emit_opt(YAML::Emitter& out, const char* key, const std::optional<T>& v) {
    if (!v) return;
    out << YAML::Key << key << YAML::Value;
    if constexpr (std::is_same_v<T, std::string>) out << YAML::DoubleQuoted << *v;
    else out << *v;
}

}  // namespace

FixtureSpec parse_fixture_spec(std::string_view text) {
    YAML::Node doc;
    try {
        doc = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!doc.IsMap()) throw Error(ErrorCode::InvalidSpec, "line 1: spec must be a mapping");
    try {
        expect_keys(doc, "spec", {"format", "seed", "output_kind", "sqlite", "myvitals", "glucosmart", "healthmate"});
        if (!doc["format"]) fail(doc, "missing `format: 1`");
        if (as_int(doc["format"], "format") != kSpecFormat)
            fail(doc["format"], "unsupported spec format " + doc["format"].Scalar());

        FixtureSpec spec;
        if (doc["seed"]) {
            std::uint64_t seed = 0;
            if (!doc["seed"].IsScalar() || !YAML::convert<std::uint64_t>::decode(doc["seed"], seed))
                fail(doc["seed"], "seed must be a non-negative integer");
            spec.seed = seed;
        }
        if (const auto& k = doc["output_kind"]) {
            auto v = as_text(k, "output_kind");
            if (v == "directory") spec.output_kind = OutputKind::Directory;
            else if (v == "zip") spec.output_kind = OutputKind::Zip;
            else fail(k, "output_kind must be directory or zip");
        }
        if (const auto& s = doc["sqlite"]) {
            expect_keys(s, "sqlite", {"page_size", "vacuum", "shuffle_inserts"});
            if (s["page_size"]) {
                auto p = as_int(s["page_size"], "page_size");
                if (p < 512 || p > 65536 || (p & (p - 1)) != 0)
                    fail(s["page_size"], "page_size must be a power of two in [512, 65536]");
                spec.sqlite.page_size = static_cast<int>(p);
            }
            if (s["vacuum"]) spec.sqlite.vacuum = as_bool(s["vacuum"], "vacuum");
            if (s["shuffle_inserts"]) spec.sqlite.shuffle_inserts = as_bool(s["shuffle_inserts"], "shuffle_inserts");
        }
        if (doc["myvitals"]) spec.myvitals = parse_myvitals(doc["myvitals"]);
        if (doc["glucosmart"]) spec.glucosmart = parse_gluco(doc["glucosmart"]);
        if (doc["healthmate"]) spec.healthmate = parse_healthmate(doc["healthmate"]);
        return spec;
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

std::string emit_fixture_spec(const FixtureSpec& spec) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "format" << YAML::Value << kSpecFormat;
    out << YAML::Key << "seed" << YAML::Value << spec.seed;
    out << YAML::Key << "output_kind" << YAML::Value << std::string(to_string(spec.output_kind));
    out << YAML::Key << "sqlite" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "page_size" << YAML::Value << spec.sqlite.page_size;
    out << YAML::Key << "vacuum" << YAML::Value << spec.sqlite.vacuum;
    out << YAML::Key << "shuffle_inserts" << YAML::Value << spec.sqlite.shuffle_inserts;
    out << YAML::EndMap;

    if (const auto& m = spec.myvitals) {
        out << YAML::Key << "myvitals" << YAML::Value << YAML::BeginMap;
        emit_table(out, "bp", m->bp, detail::kBpTable);
        emit_table(out, "spo2", m->spo2, detail::kSpo2Table);
        emit_table(out, "weight", m->weight, detail::kWeightTable);
        emit_table(out, "environment", m->environment, detail::kEnvTable);
        emit_table(out, "users", m->users, detail::kUserInfoTable);
        out << YAML::Key << "malformed_bp" << YAML::Value << m->malformed_bp;
        out << YAML::Key << "malformed_spo2" << YAML::Value << m->malformed_spo2;
        if (const auto& c = m->credential) {
            out << YAML::Key << "credential" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "account" << YAML::Value << YAML::DoubleQuoted << c->account;
            emit_opt(out, "password", c->password);
            emit_opt(out, "refresh_token", c->refresh_token);
            emit_opt(out, "access_token", c->access_token);
            emit_opt(out, "region_host", c->region_host);
            emit_opt(out, "is_online", c->is_online);
            emit_opt(out, "region_flag", c->region_flag);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    if (const auto& g = spec.glucosmart) {
        out << YAML::Key << "glucosmart" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "encrypted_dbs" << YAML::Value << g->encrypted_dbs;
        out << YAML::Key << "encrypted_db_bytes" << YAML::Value << g->encrypted_db_bytes;
        if (g->user_name || g->device_id) {
            out << YAML::Key << "user_info" << YAML::Value << YAML::BeginMap;
            emit_opt(out, "UserName", g->user_name);
            emit_opt(out, "DeviceID", g->device_id);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    if (const auto& h = spec.healthmate) {
        out << YAML::Key << "healthmate" << YAML::Value << YAML::BeginMap;
        emit_table(out, "devices", h->devices, detail::kDevicesTable);
        emit_table(out, "measures", h->measures, detail::kMeasureTable);
        emit_table(out, "users", h->users, detail::kHmUsersTable);
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace phiscan::forge
