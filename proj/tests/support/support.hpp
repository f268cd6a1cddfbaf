#pragma once

// Helpers shared by the unit and acceptance suites: scratch directories,
// SQLite-built databases, and a seeded generator of random fixture specs.

#include "phiscan/evidence.hpp"
#include "phiscan/fixture.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace phiscan::testing {

/// Repository root, baked in at configure time.
std::filesystem::path repo_root();

/// Directory removed on destruction.
class ScratchDir {
public:
    ScratchDir();
    ~ScratchDir();
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(std::string_view rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, std::string_view text);
Bytes read_file(const std::filesystem::path& path);
Bytes to_bytes(std::string_view text);

/// Runs SQL statements against an in-memory libsqlite3 database and returns
/// the serialized main file. This is the oracle writer for reader tests.
Bytes sqlite_image(const std::vector<std::string>& statements, int page_size = 4096);

/// Runs a shell command and captures stdout; the exit status lands in `status`.
std::string run_command(const std::string& command, int& status);

/// Random but valid fixture spec; the same seed always yields the same spec.
forge::FixtureSpec random_spec(std::uint64_t seed);

}  // namespace phiscan::testing
