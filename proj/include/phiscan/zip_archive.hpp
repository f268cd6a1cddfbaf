#pragma once

// Minimal zip container support: central-directory reader for stored and
// deflate members, and a deterministic writer used by the fixture generator.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace phiscan::zip {

enum class Method : std::uint16_t { Stored = 0, Deflate = 8 };

struct Entry {
    std::string name;  // as stored in the central directory
    Method method = Method::Stored;
    std::uint32_t crc32 = 0;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    std::uint64_t local_header_offset = 0;
    bool is_directory = false;
    bool is_symlink = false;
    bool is_encrypted = false;
};

class Reader {
public:
    /// Parses the end-of-central-directory record and every central header.
    /// Throws Error(CorruptArchive) when they cannot be read.
    explicit Reader(std::vector<std::uint8_t> archive);

    const std::vector<Entry>& entries() const noexcept { return entries_; }

    /// Extracts one member and verifies its CRC.
    std::vector<std::uint8_t> extract(const Entry& entry) const;

private:
    std::vector<std::uint8_t> data_;
    std::vector<Entry> entries_;
};

/// True when the bytes start with a local-file or empty-archive signature.
bool looks_like_zip(std::span<const std::uint8_t> head) noexcept;

class Writer {
public:
    void add(std::string name, std::span<const std::uint8_t> content,
             Method method = Method::Deflate);
    /// Raw entry name is written verbatim (used to craft hostile archives in tests).
    std::vector<std::uint8_t> finish() const;

private:
    struct Pending {
        std::string name;
        Method method;
        std::uint32_t crc;
        std::uint64_t size;
        std::vector<std::uint8_t> payload;
    };
    std::vector<Pending> members_;
};

}  // namespace phiscan::zip
