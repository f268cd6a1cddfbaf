#include "phiscan/db_status.hpp"

#include "phiscan/sqlite_reader.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace phiscan {

std::string_view to_string(DbStatus status) noexcept {
    switch (status) {
        case DbStatus::PlaintextSqlite: return "plaintext-sqlite";
        case DbStatus::EncryptedOrOpaque: return "encrypted-or-opaque";
        case DbStatus::Empty: return "empty";
    }
    return "empty";
}

std::optional<DbStatus> db_status_from_string(std::string_view text) noexcept {
    for (auto s : {DbStatus::PlaintextSqlite, DbStatus::EncryptedOrOpaque, DbStatus::Empty})
        if (to_string(s) == text) return s;
    return std::nullopt;
}

double shannon_entropy(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) return 0;
    std::array<std::size_t, 256> counts{};
    for (auto b : bytes) ++counts[b];
    double n = static_cast<double>(bytes.size());
    double h = 0;
    for (auto c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

DatabaseStatus classify_database_bytes(std::string relative_path, std::span<const std::uint8_t> bytes) {
    DatabaseStatus s;
    s.relative_path = std::move(relative_path);
    s.header_magic_present = sqlite::has_magic(bytes);
    s.entropy_bits_per_byte = shannon_entropy(bytes.first(std::min(bytes.size(), kEntropyWindow)));
    if (bytes.empty())
        s.status = DbStatus::Empty;
    else if (s.header_magic_present)
        s.status = DbStatus::PlaintextSqlite;
    else
        s.status = DbStatus::EncryptedOrOpaque;
    if (s.status == DbStatus::EncryptedOrOpaque && s.high_entropy()) s.note = "high entropy";
    return s;
}

}  // namespace phiscan
