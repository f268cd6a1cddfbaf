#pragma once

// Helpers shared by the SQLite-backed parsers.

#include "phiscan/artifact.hpp"
#include "phiscan/error.hpp"
#include "phiscan/parser.hpp"
#include "phiscan/sqlite_reader.hpp"

#include <optional>
#include <string>
#include <vector>

namespace phiscan::detail {

/// Rows of one table with required columns resolved by name.
class TableRows {
public:
    TableRows(const sqlite::Database& db, std::string_view table, std::initializer_list<std::string_view> columns)
        : table_(table) {
        const auto* info = db.find_table(table);
        if (!info) throw Error(ErrorCode::MissingTable, std::string(table));
        for (auto c : columns) {
            auto idx = info->column_index(c);
            if (!idx)
                throw Error(ErrorCode::MissingTable,
                            "column " + std::string(c) + " missing from " + std::string(table));
            index_.push_back(*idx);
        }
        rows_ = db.read_table(table);
    }

    const std::vector<sqlite::Row>& rows() const noexcept { return rows_; }
    const sqlite::Value& at(const sqlite::Row& row, std::size_t column) const {
        return row.values[index_[column]];
    }
    std::string detail(const sqlite::Row& row) const { return table_ + ":" + std::to_string(row.rowid); }

private:
    std::string table_;
    std::vector<std::size_t> index_;
    std::vector<sqlite::Row> rows_;
};

/// Thrown inside a row loop; caught by the loop and turned into a tally.
struct RowProblem {
    std::string reason;
};

inline bool is_null(const sqlite::Value& v) { return std::holds_alternative<std::monostate>(v); }

inline std::int64_t need_int(const sqlite::Value& v, std::string_view column) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (is_null(v)) throw RowProblem{std::string(column) + " is NULL"};
    throw RowProblem{std::string(column) + " is not an integer"};
}

inline double need_real(const sqlite::Value& v, std::string_view column) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (is_null(v)) throw RowProblem{std::string(column) + " is NULL"};
    throw RowProblem{std::string(column) + " is not numeric"};
}

inline std::optional<std::string> opt_text(const sqlite::Value& v) {
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&v)) return format_decimal(*d);
    return std::nullopt;
}

inline std::string need_text(const sqlite::Value& v, std::string_view column) {
    auto s = opt_text(v);
    if (!s) throw RowProblem{std::string(column) + " is NULL"};
    return *s;
}

inline EpochInstant need_instant(const sqlite::Value& v, std::string_view column) {
    std::int64_t raw = need_int(v, column);
    try {
        return normalize_timestamp(raw);
    } catch (const Error& e) {
        throw RowProblem{std::string(column) + ": " + e.what()};
    }
}

inline void require(bool ok, const std::string& reason) {
    if (!ok) throw RowProblem{reason};
}

/// Runs `make` on every row, collecting records and tallying bad rows.
template <typename Make>
ParseResult collect_rows(const TableRows& table, const Origin& origin, Make&& make) {
    ParseResult out;
    for (const auto& row : table.rows()) {
        try {
            ArtifactRecord rec{make(row), SourceLocator{origin.package_name, origin.relative_path,
                                                        ContainerType::SqliteTable, table.detail(row)},
                               origin.recovered_at};
            out.records.push_back(std::move(rec));
        } catch (const RowProblem& p) {
            ++out.malformed_rows;
            out.warnings.push_back(origin.relative_path + " " + table.detail(row) + ": MalformedRow: " + p.reason);
        }
    }
    return out;
}

}  // namespace phiscan::detail
