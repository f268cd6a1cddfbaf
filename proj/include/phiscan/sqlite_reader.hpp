#pragma once

// Read-only SQLite-3 reader working directly on the main database file bytes.
// Only table b-trees are walked; WAL and rollback journals are ignored, so
// the view is whatever was last checkpointed into the main file.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace phiscan::sqlite {

inline constexpr std::string_view kHeaderMagic{"SQLite format 3\0", 16};

bool has_magic(std::span<const std::uint8_t> bytes) noexcept;

struct Blob {
    std::vector<std::uint8_t> bytes;
    friend bool operator==(const Blob&, const Blob&) = default;
};

using Value = std::variant<std::monostate, std::int64_t, double, std::string, Blob>;

struct Row {
    std::int64_t rowid = 0;
    std::vector<Value> values;  // one per declared column, rowid alias filled in
};

struct TableInfo {
    std::string name;
    std::uint32_t root_page = 0;
    std::string sql;
    std::vector<std::string> columns;
    std::vector<std::string> declared_types;
    std::optional<std::size_t> rowid_alias;  // INTEGER PRIMARY KEY column
    bool without_rowid = false;

    /// Case-insensitive column lookup.
    std::optional<std::size_t> column_index(std::string_view column) const;
};

/// Column names and rowid alias extracted from a CREATE TABLE statement.
TableInfo parse_create_table(std::string_view sql);

class Database {
public:
    /// The span must outlive the Database. Throws Error(NotSqlite) when the
    /// header magic is absent and Error(CorruptDatabase) on structural damage.
    explicit Database(std::span<const std::uint8_t> bytes);

    std::uint32_t page_size() const noexcept { return page_size_; }
    const std::vector<TableInfo>& tables() const noexcept { return tables_; }

    /// Exact-name (case-insensitive, like SQLite itself) table lookup.
    const TableInfo* find_table(std::string_view name) const;

    /// All rows in rowid order. Throws Error(MissingTable) for unknown names.
    std::vector<Row> read_table(std::string_view name) const;

private:
    struct Cell {
        std::int64_t rowid;
        std::vector<std::uint8_t> payload;
    };

    std::span<const std::uint8_t> page(std::uint32_t number) const;
    void walk(std::uint32_t page_number, std::vector<Cell>& out, int depth,
              std::vector<bool>& visited) const;
    std::vector<std::uint8_t> assemble_payload(std::span<const std::uint8_t> pg, std::size_t at,
                                               std::uint64_t payload_size) const;
    std::vector<Value> decode_record(std::span<const std::uint8_t> payload) const;

    std::span<const std::uint8_t> bytes_;
    std::uint32_t page_size_ = 0;
    std::uint32_t usable_size_ = 0;
    std::uint32_t page_count_ = 0;
    int text_encoding_ = 1;
    std::vector<TableInfo> tables_;
};

}  // namespace phiscan::sqlite
