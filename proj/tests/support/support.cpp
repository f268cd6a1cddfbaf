#include "support.hpp"

#include <sqlite3.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace phiscan::testing {

std::filesystem::path repo_root() { return PHISCAN_REPO_ROOT; }

ScratchDir::ScratchDir() {
    static std::mt19937_64 names{std::random_device{}()};
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / ("phiscan-test-" + std::to_string(names()));
        if (std::filesystem::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("cannot create scratch directory");
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_file(const std::filesystem::path& path, std::string_view text) { write_file(path, to_bytes(text)); }

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

Bytes sqlite_image(const std::vector<std::string>& statements, int page_size) {
    sqlite3* db = nullptr;
    if (sqlite3_open(":memory:", &db) != SQLITE_OK) throw std::runtime_error("sqlite3_open");
    auto exec = [&](const std::string& sql) {
        char* err = nullptr;
        if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "?";
            sqlite3_free(err);
            sqlite3_close(db);
            throw std::runtime_error("sqlite: " + msg + " in " + sql);
        }
    };
    exec("PRAGMA page_size=" + std::to_string(page_size));
    for (const auto& s : statements) exec(s);
    sqlite3_int64 size = 0;
    unsigned char* raw = sqlite3_serialize(db, "main", &size, 0);
    Bytes out(raw, raw + size);
    sqlite3_free(raw);
    sqlite3_close(db);
    return out;
}

std::string run_command(const std::string& command, int& status) {
    std::string out;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed: " + command);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    int rc = pclose(pipe);
    status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return out;
}

namespace {

struct Draw {
    std::mt19937_64 g;
    std::size_t upto(std::size_t hi) { return static_cast<std::size_t>(g() % (hi + 1)); }
    bool coin(int percent) { return static_cast<int>(g() % 100) < percent; }
    std::string letters(std::size_t n) {
        static constexpr std::string_view a = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s += a[g() % a.size()];
        return s;
    }
    // Letters with a lone digit or punctuation mark sprinkled in, never long digit runs.
    std::string token(std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) {
            auto r = g() % 10;
            if (r == 0) s += static_cast<char>('0' + g() % 10);
            else if (r == 1) s += (g() % 2) ? '-' : '*';
            else s += letters(1);
        }
        return s;
    }
};

}  // namespace

forge::FixtureSpec random_spec(std::uint64_t seed) {
    Draw d{std::mt19937_64(seed * 0x9e3779b97f4a7c15ULL + 17)};
    forge::FixtureSpec spec;
    spec.seed = seed;
    spec.output_kind = d.coin(50) ? forge::OutputKind::Zip : forge::OutputKind::Directory;
    static constexpr std::array<int, 5> pages{512, 1024, 2048, 4096, 8192};
    spec.sqlite.page_size = pages[d.upto(pages.size() - 1)];
    spec.sqlite.vacuum = d.coin(30);
    spec.sqlite.shuffle_inserts = d.coin(50);

    if (d.coin(80)) {
        forge::MyVitalsSpec m;
        m.bp.count = d.upto(8);
        m.spo2.count = d.upto(8);
        m.weight.count = d.upto(4);
        m.environment.count = d.upto(3);
        m.users.count = d.upto(2);
        m.malformed_bp = d.coin(30) ? d.upto(2) : 0;
        m.malformed_spo2 = d.coin(30) ? d.upto(2) : 0;
        if (d.coin(70)) {
            forge::CredentialSpec c;
            c.account = d.letters(6 + d.upto(6)) + std::to_string(d.upto(99)) + "@" + d.letters(5) + ".com";
            c.account[0] = 'u';
            if (d.coin(80)) c.password = d.letters(4 + d.upto(8)) + std::to_string(d.upto(99));
            if (d.coin(70)) c.refresh_token = d.token(40 + d.upto(60));
            if (d.coin(70)) c.access_token = d.token(40 + d.upto(60));
            if (d.coin(60)) c.region_host = "http://ap" + std::to_string(d.upto(9)) + "." + d.letters(5);
            if (d.coin(60)) c.is_online = d.coin(50);
            if (d.coin(50)) c.region_flag = static_cast<std::int64_t>(d.upto(3));
            m.credential = c;
        }
        spec.myvitals = m;
    }
    if (d.coin(70)) {
        forge::GlucoSpec gl;
        gl.encrypted_dbs = d.upto(3);
        gl.encrypted_db_bytes = 4096 * (1 + d.upto(2));
        auto who = d.upto(3);
        if (who == 1 || who == 3)
            gl.user_name = d.coin(50) ? d.letters(7) + "@" + d.letters(4) + ".net" : d.letters(5) + " " + d.letters(6);
        if (who == 2 || who == 3) gl.device_id = "BG5-" + d.letters(6);
        spec.glucosmart = gl;
    }
    if (d.coin(80)) {
        forge::HealthMateSpec h;
        h.devices.count = d.upto(4);
        h.measures.count = d.upto(20);
        h.users.count = d.upto(2);
        spec.healthmate = h;
    }
    return spec;
}

}  // namespace phiscan::testing
