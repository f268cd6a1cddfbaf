#pragma once

// Read-only access to an extracted Android /data/data tree, either as a
// plain directory or as a zip export.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace phiscan {

using Bytes = std::vector<std::uint8_t>;

enum class ContainerKind { Directory, ZipArchive };

std::string_view to_string(ContainerKind kind) noexcept;

struct FileDigest {
    std::string relative_path;
    std::string algorithm = "sha-256";
    std::string hex_digest;
    std::uint64_t byte_length = 0;

    friend bool operator==(const FileDigest&, const FileDigest&) = default;
};

/// Normalizes an archive or filesystem relative path to forward-slash form.
/// Returns nullopt for anything that could resolve outside the evidence root:
/// absolute paths, drive letters, `..` segments, embedded NUL.
std::optional<std::string> normalize_relative_path(std::string_view raw);

class EvidenceSource {
public:
    /// Opens a directory or zip archive. Throws Error with NotFound,
    /// UnsupportedContainer or CorruptArchive.
    static EvidenceSource open(const std::filesystem::path& path);

    const std::filesystem::path& origin() const noexcept;
    ContainerKind container_kind() const noexcept;
    const std::set<std::string>& root_listing() const noexcept;
    std::chrono::system_clock::time_point opened_at() const noexcept;

    /// Container name with any archive extension removed. Identical for the
    /// directory and zip forms of the same tree.
    std::string display_name() const;

    /// Entries that were dropped while opening (unsafe paths, symlinks,
    /// encrypted zip members).
    const std::vector<std::string>& rejected_entries() const noexcept;

    bool contains(std::string_view relative_path) const;
    Bytes read_file(std::string_view relative_path) const;
    FileDigest hash_file(std::string_view relative_path) const;

private:
    struct Impl;
    explicit EvidenceSource(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

}  // namespace phiscan
