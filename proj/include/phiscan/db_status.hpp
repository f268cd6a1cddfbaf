#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace phiscan {

enum class DbStatus { PlaintextSqlite, EncryptedOrOpaque, Empty };

std::string_view to_string(DbStatus status) noexcept;
std::optional<DbStatus> db_status_from_string(std::string_view text) noexcept;

inline constexpr std::size_t kEntropyWindow = 4096;
inline constexpr double kHighEntropyThreshold = 7.5;

struct DatabaseStatus {
    std::string relative_path;
    DbStatus status = DbStatus::Empty;
    bool header_magic_present = false;
    double entropy_bits_per_byte = 0;  // over the first kEntropyWindow bytes
    std::optional<std::string> note;

    bool high_entropy() const noexcept { return entropy_bits_per_byte > kHighEntropyThreshold; }
    friend bool operator==(const DatabaseStatus&, const DatabaseStatus&) = default;
};

/// Shannon entropy in bits per byte; 0 for empty input.
double shannon_entropy(std::span<const std::uint8_t> bytes);

/// Plaintext iff the SQLite magic is present; otherwise encrypted-or-opaque
/// with the entropy as corroboration. Zero-length files are empty.
DatabaseStatus classify_database_bytes(std::string relative_path, std::span<const std::uint8_t> bytes);

}  // namespace phiscan
