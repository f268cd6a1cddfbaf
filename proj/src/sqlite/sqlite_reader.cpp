#include "phiscan/sqlite_reader.hpp"

#include "phiscan/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>

namespace phiscan::sqlite {

namespace {

constexpr std::uint8_t kInteriorTable = 0x05;
constexpr std::uint8_t kLeafTable = 0x0d;
constexpr int kMaxDepth = 64;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptDatabase, what); }

std::uint32_t be16(std::span<const std::uint8_t> b, std::size_t at) {
    if (at + 2 > b.size()) corrupt("read past page end");
    return (static_cast<std::uint32_t>(b[at]) << 8) | b[at + 1];
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
    if (at + 4 > b.size()) corrupt("read past page end");
    return (static_cast<std::uint32_t>(b[at]) << 24) | (static_cast<std::uint32_t>(b[at + 1]) << 16) |
           (static_cast<std::uint32_t>(b[at + 2]) << 8) | b[at + 3];
}

// SQLite varint: 1-9 bytes, big-endian 7-bit groups, the ninth byte carries 8 bits.
std::uint64_t varint(std::span<const std::uint8_t> b, std::size_t& at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 9; ++i) {
        if (at >= b.size()) corrupt("varint past end of buffer");
        std::uint8_t byte = b[at++];
        if (i == 8) return (v << 8) | byte;
        v = (v << 7) | (byte & 0x7f);
        if (!(byte & 0x80)) return v;
    }
    return v;
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

std::string unquote(std::string_view token) {
    if (token.size() >= 2) {
        char open = token.front(), close = token.back();
        if ((open == '"' && close == '"') || (open == '`' && close == '`') ||
            (open == '\'' && close == '\'') || (open == '[' && close == ']')) {
            std::string out;
            for (std::size_t i = 1; i + 1 < token.size(); ++i) {
                out.push_back(token[i]);
                if (open != '[' && token[i] == open && i + 2 < token.size() && token[i + 1] == open) ++i;
            }
            return out;
        }
    }
    return std::string(token);
}

// Splits on whitespace, keeping quoted identifiers and parenthesised groups whole.
std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        char c = s[i];
        if (c == '"' || c == '`' || c == '\'' || c == '[') {
            char close = c == '[' ? ']' : c;
            ++i;
            while (i < s.size()) {
                if (s[i] == close) {
                    if (close != ']' && i + 1 < s.size() && s[i + 1] == close) {
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                ++i;
            }
        } else if (c == '(') {
            int depth = 0;
            while (i < s.size()) {
                if (s[i] == '(') ++depth;
                if (s[i] == ')' && --depth == 0) {
                    ++i;
                    break;
                }
                ++i;
            }
        } else {
            while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(')
                ++i;
        }
        out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

std::vector<std::string_view> split_top_level(std::string_view body) {
    std::vector<std::string_view> parts;
    int depth = 0;
    char quote = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (quote) {
            if (c == quote) quote = 0;
            continue;
        }
        if (c == '"' || c == '\'' || c == '`') quote = c;
        else if (c == '[') quote = ']';
        else if (c == '(') ++depth;
        else if (c == ')') --depth;
        else if (c == ',' && depth == 0) {
            parts.push_back(body.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(body.substr(start));
    return parts;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

std::string utf16_to_utf8(std::span<const std::uint8_t> b, bool little_endian) {
    std::string out;
    auto unit = [&](std::size_t i) -> std::uint32_t {
        return little_endian ? (b[i] | (b[i + 1] << 8)) : ((b[i] << 8) | b[i + 1]);
    };
    for (std::size_t i = 0; i + 1 < b.size(); i += 2) {
        std::uint32_t cp = unit(i);
        if (cp >= 0xd800 && cp < 0xdc00 && i + 3 < b.size()) {
            std::uint32_t lo = unit(i + 2);
            if (lo >= 0xdc00 && lo < 0xe000) {
                cp = 0x10000 + ((cp - 0xd800) << 10) + (lo - 0xdc00);
                i += 2;
            }
        }
        append_utf8(out, cp);
    }
    return out;
}

}  // namespace

bool has_magic(std::span<const std::uint8_t> bytes) noexcept {
    return bytes.size() >= kHeaderMagic.size() &&
           std::memcmp(bytes.data(), kHeaderMagic.data(), kHeaderMagic.size()) == 0;
}

std::optional<std::size_t> TableInfo::column_index(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (iequals(columns[i], column)) return i;
    return std::nullopt;
}

TableInfo parse_create_table(std::string_view sql) {
    TableInfo info;
    info.sql = std::string(sql);
    auto open = sql.find('(');
    auto close = sql.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        corrupt("unparseable CREATE TABLE: " + std::string(sql));

    auto head = tokenize(sql.substr(0, open));
    if (!head.empty()) info.name = unquote(head.back());
    info.without_rowid = upper(sql.substr(close + 1)).find("WITHOUT") != std::string::npos;

    std::optional<std::string> table_pk;
    for (auto def : split_top_level(sql.substr(open + 1, close - open - 1))) {
        auto tokens = tokenize(def);
        if (tokens.empty()) continue;
        std::string first = upper(tokens[0]);
        if (first == "CONSTRAINT" || first == "PRIMARY" || first == "UNIQUE" || first == "CHECK" ||
            first == "FOREIGN") {
            if (first == "PRIMARY" && tokens.size() >= 3) {
                std::string_view group = tokens[2];
                if (group.size() >= 2 && group.front() == '(') {
                    auto inner = split_top_level(group.substr(1, group.size() - 2));
                    if (inner.size() == 1) {
                        auto name_tokens = tokenize(inner[0]);
                        if (!name_tokens.empty()) table_pk = unquote(name_tokens[0]);
                    }
                }
            }
            continue;
        }
        info.columns.push_back(unquote(tokens[0]));
        std::string type;
        std::size_t t = 1;
        static const char* kStops[] = {"PRIMARY", "NOT",    "NULL",    "UNIQUE", "CHECK",
                                       "DEFAULT", "COLLATE", "REFERENCES", "CONSTRAINT",
                                       "GENERATED", "AS"};
        for (; t < tokens.size(); ++t) {
            std::string u = upper(tokens[t]);
            if (std::find(std::begin(kStops), std::end(kStops), u) != std::end(kStops)) break;
            if (!type.empty() && tokens[t].front() != '(') type.push_back(' ');
            type += u;
        }
        info.declared_types.push_back(type);
        for (; t + 1 < tokens.size(); ++t) {
            if (upper(tokens[t]) == "PRIMARY" && upper(tokens[t + 1]) == "KEY" && type == "INTEGER") {
                bool desc = t + 2 < tokens.size() && upper(tokens[t + 2]) == "DESC";
                if (!desc) info.rowid_alias = info.columns.size() - 1;
            }
        }
    }
    if (table_pk && !info.rowid_alias) {
        auto idx = info.column_index(*table_pk);
        if (idx && info.declared_types[*idx] == "INTEGER") info.rowid_alias = idx;
    }
    if (info.without_rowid) info.rowid_alias.reset();
    return info;
}

Database::Database(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
    if (!has_magic(bytes)) throw Error(ErrorCode::NotSqlite, "SQLite header magic absent");
    if (bytes.size() < 100) corrupt("file shorter than the database header");

    std::uint32_t raw_page_size = be16(bytes, 16);
    page_size_ = raw_page_size == 1 ? 65536 : raw_page_size;
    if (page_size_ < 512 || page_size_ > 65536 || (page_size_ & (page_size_ - 1)) != 0)
        corrupt("invalid page size " + std::to_string(raw_page_size));
    std::uint8_t reserved = bytes[20];
    usable_size_ = page_size_ - reserved;
    if (usable_size_ < 480) corrupt("usable page size too small");

    text_encoding_ = static_cast<int>(be32(bytes, 56));
    if (text_encoding_ == 0) text_encoding_ = 1;  // empty database, no text stored yet
    if (text_encoding_ < 1 || text_encoding_ > 3) corrupt("unknown text encoding");

    page_count_ = static_cast<std::uint32_t>(bytes.size() / page_size_);
    std::uint32_t header_pages = be32(bytes, 28);
    if (header_pages != 0 && be32(bytes, 24) == be32(bytes, 92) && header_pages < page_count_)
        page_count_ = header_pages;
    if (page_count_ == 0) corrupt("no complete pages");

    std::vector<Cell> cells;
    std::vector<bool> visited(page_count_ + 1, false);
    walk(1, cells, 0, visited);
    for (const auto& cell : cells) {
        auto rec = decode_record(cell.payload);
        if (rec.size() < 5) continue;
        auto* type = std::get_if<std::string>(&rec[0]);
        auto* sql = std::get_if<std::string>(&rec[4]);
        auto* root = std::get_if<std::int64_t>(&rec[3]);
        if (!type || *type != "table" || !sql || !root) continue;
        TableInfo info = parse_create_table(*sql);
        if (auto* name = std::get_if<std::string>(&rec[1])) info.name = *name;
        if (*root <= 0 || *root > page_count_) corrupt("bad root page for " + info.name);
        info.root_page = static_cast<std::uint32_t>(*root);
        tables_.push_back(std::move(info));
    }
}

const TableInfo* Database::find_table(std::string_view name) const {
    for (const auto& t : tables_)
        if (iequals(t.name, name)) return &t;
    return nullptr;
}

std::vector<Row> Database::read_table(std::string_view name) const {
    const TableInfo* info = find_table(name);
    if (!info) throw Error(ErrorCode::MissingTable, std::string(name));
    if (info->without_rowid) corrupt("WITHOUT ROWID table not supported: " + info->name);

    std::vector<Cell> cells;
    std::vector<bool> visited(page_count_ + 1, false);
    walk(info->root_page, cells, 0, visited);

    std::vector<Row> rows;
    rows.reserve(cells.size());
    for (auto& cell : cells) {
        Row row;
        row.rowid = cell.rowid;
        row.values = decode_record(cell.payload);
        // Columns added by ALTER TABLE are absent from older records.
        row.values.resize(info->columns.size());
        if (info->rowid_alias) row.values[*info->rowid_alias] = cell.rowid;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::span<const std::uint8_t> Database::page(std::uint32_t number) const {
    if (number == 0 || number > page_count_) corrupt("page number out of range: " + std::to_string(number));
    return bytes_.subspan(static_cast<std::size_t>(number - 1) * page_size_, page_size_);
}

void Database::walk(std::uint32_t page_number, std::vector<Cell>& out, int depth,
                    std::vector<bool>& visited) const {
    if (depth > kMaxDepth) corrupt("b-tree too deep");
    if (page_number == 0 || page_number > page_count_) corrupt("child page out of range");
    if (visited[page_number]) corrupt("b-tree cycle at page " + std::to_string(page_number));
    visited[page_number] = true;

    auto pg = page(page_number);
    std::size_t header = page_number == 1 ? 100 : 0;
    if (header >= pg.size()) corrupt("page header out of range");
    std::uint8_t type = pg[header];
    std::uint32_t cell_count = be16(pg, header + 3);
    std::size_t header_size = type == kInteriorTable ? 12 : 8;

    if (type != kInteriorTable && type != kLeafTable)
        corrupt("unexpected page type " + std::to_string(type) + " on page " + std::to_string(page_number));

    for (std::uint32_t i = 0; i < cell_count; ++i) {
        std::size_t at = be16(pg, header + header_size + 2 * i);
        if (at >= usable_size_) corrupt("cell pointer out of range");
        if (type == kInteriorTable) {
            std::uint32_t child = be32(pg, at);
            walk(child, out, depth + 1, visited);
        } else {
            std::uint64_t payload_size = varint(pg, at);
            auto rowid = static_cast<std::int64_t>(varint(pg, at));
            out.push_back(Cell{rowid, assemble_payload(pg, at, payload_size)});
        }
    }
    if (type == kInteriorTable) walk(be32(pg, header + 8), out, depth + 1, visited);
}

std::vector<std::uint8_t> Database::assemble_payload(std::span<const std::uint8_t> pg, std::size_t at,
                                                     std::uint64_t payload_size) const {
    const std::uint64_t u = usable_size_;
    const std::uint64_t max_local = u - 35;
    std::uint64_t local = payload_size;
    if (payload_size > max_local) {
        std::uint64_t min_local = ((u - 12) * 32 / 255) - 23;
        std::uint64_t k = min_local + ((payload_size - min_local) % (u - 4));
        local = k <= max_local ? k : min_local;
    }
    if (at + local > usable_size_) corrupt("cell payload overruns page");

    std::vector<std::uint8_t> payload(pg.begin() + at, pg.begin() + at + local);
    if (local == payload_size) return payload;

    payload.reserve(payload_size);
    std::uint32_t next = be32(pg, at + local);
    std::uint32_t hops = 0;
    while (payload.size() < payload_size) {
        if (next == 0 || ++hops > page_count_) corrupt("overflow chain broken");
        auto ov = page(next);
        next = be32(ov, 0);
        std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(u - 4, payload_size - payload.size()));
        payload.insert(payload.end(), ov.begin() + 4, ov.begin() + 4 + take);
    }
    return payload;
}

std::vector<Value> Database::decode_record(std::span<const std::uint8_t> payload) const {
    std::size_t at = 0;
    std::uint64_t header_size = varint(payload, at);
    if (header_size > payload.size() || header_size < at) corrupt("record header overruns payload");

    std::vector<std::uint64_t> types;
    while (at < header_size) types.push_back(varint(payload, at));

    std::vector<Value> values;
    values.reserve(types.size());
    std::size_t body = header_size;
    auto need = [&](std::size_t n) {
        if (body + n > payload.size()) corrupt("record body overruns payload");
    };
    for (std::uint64_t t : types) {
        switch (t) {
            case 0:
                values.emplace_back(std::monostate{});
                break;
            case 1: case 2: case 3: case 4: case 5: case 6: {
                static constexpr std::size_t kWidths[] = {0, 1, 2, 3, 4, 6, 8};
                std::size_t n = kWidths[t];
                need(n);
                std::uint64_t v = (payload[body] & 0x80) ? ~std::uint64_t{0} : 0;  // sign extend
                for (std::size_t i = 0; i < n; ++i) v = (v << 8) | payload[body + i];
                body += n;
                values.emplace_back(static_cast<std::int64_t>(v));
                break;
            }
            case 7: {
                need(8);
                std::uint64_t bits = 0;
                for (int i = 0; i < 8; ++i) bits = (bits << 8) | payload[body + i];
                body += 8;
                double d;
                std::memcpy(&d, &bits, sizeof d);
                values.emplace_back(d);
                break;
            }
            case 8:
                values.emplace_back(std::int64_t{0});
                break;
            case 9:
                values.emplace_back(std::int64_t{1});
                break;
            case 10: case 11:
                corrupt("reserved serial type");
            default: {
                std::size_t n = static_cast<std::size_t>((t - (t % 2 == 0 ? 12 : 13)) / 2);
                need(n);
                auto slice = payload.subspan(body, n);
                body += n;
                if (t % 2 == 0) {
                    values.emplace_back(Blob{{slice.begin(), slice.end()}});
                } else if (text_encoding_ == 1) {
                    values.emplace_back(std::string(slice.begin(), slice.end()));
                } else {
                    values.emplace_back(utf16_to_utf8(slice, text_encoding_ == 2));
                }
            }
        }
    }
    return values;
}

}  // namespace phiscan::sqlite
