#include "phiscan/zip_archive.hpp"

#include "phiscan/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <limits>

namespace phiscan::zip {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::size_t kLocalFixed = 30;
constexpr std::size_t kCentralFixed = 46;
constexpr std::size_t kEndFixed = 22;

// DOS date for 1980-01-01 00:00, pinned so fixture archives are reproducible.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
    if (at + 2 > b.size()) throw Error(ErrorCode::CorruptArchive, "truncated record");
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
    if (at + 4 > b.size()) throw Error(ErrorCode::CorruptArchive, "truncated record");
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t done = 0;
    while (done < data.size()) {
        auto chunk = static_cast<uInt>(
            std::min<std::size_t>(data.size() - done, std::numeric_limits<uInt>::max()));
        crc = crc32(crc, data.data() + done, chunk);
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> in, std::uint64_t expected) {
    std::vector<std::uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK)
        throw Error(ErrorCode::CorruptArchive, "inflateInit2 failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    auto produced = zs.total_out;
    inflateEnd(&zs);
    // An empty member may legitimately end with Z_BUF_ERROR on a zero-size buffer.
    if (rc != Z_STREAM_END && !(expected == 0 && rc == Z_BUF_ERROR))
        throw Error(ErrorCode::CorruptArchive, "deflate stream damaged");
    if (produced != expected) throw Error(ErrorCode::CorruptArchive, "size mismatch after inflate");
    return out;
}

std::vector<std::uint8_t> deflate_raw(std::span<const std::uint8_t> in) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) !=
        Z_OK)
        throw Error(ErrorCode::IoFailure, "deflateInit2 failed");
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(in.size())));
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error(ErrorCode::IoFailure, "deflate failed");
    return out;
}

}  // namespace

bool looks_like_zip(std::span<const std::uint8_t> head) noexcept {
    if (head.size() < 4) return false;
    std::uint32_t sig = static_cast<std::uint32_t>(head[0]) | (head[1] << 8) | (head[2] << 16) |
                        (static_cast<std::uint32_t>(head[3]) << 24);
    return sig == kLocalSig || sig == kEndSig;
}

Reader::Reader(std::vector<std::uint8_t> archive) : data_(std::move(archive)) {
    std::span<const std::uint8_t> b(data_);
    if (b.size() < kEndFixed) throw Error(ErrorCode::CorruptArchive, "archive too short");

    // The end record sits within the trailing 64 KiB comment window.
    std::size_t lowest = b.size() > kEndFixed + 0xffff ? b.size() - kEndFixed - 0xffff : 0;
    std::size_t eocd = std::string::npos;
    for (std::size_t at = b.size() - kEndFixed + 1; at-- > lowest;) {
        if (le32(b, at) == kEndSig) {
            eocd = at;
            break;
        }
    }
    if (eocd == std::string::npos)
        throw Error(ErrorCode::CorruptArchive, "end of central directory not found");

    std::uint16_t total = le16(b, eocd + 10);
    std::uint32_t cd_size = le32(b, eocd + 12);
    std::uint32_t cd_offset = le32(b, eocd + 16);
    if (total == 0xffff || cd_offset == 0xffffffff || cd_size == 0xffffffff)
        throw Error(ErrorCode::CorruptArchive, "zip64 archives are not supported");
    if (static_cast<std::uint64_t>(cd_offset) + cd_size > eocd)
        throw Error(ErrorCode::CorruptArchive, "central directory out of bounds");

    std::size_t at = cd_offset;
    entries_.reserve(total);
    for (std::uint16_t i = 0; i < total; ++i) {
        if (le32(b, at) != kCentralSig)
            throw Error(ErrorCode::CorruptArchive, "bad central header signature");
        Entry e;
        std::uint16_t made_by = le16(b, at + 4);
        std::uint16_t flags = le16(b, at + 8);
        std::uint16_t method = le16(b, at + 10);
        e.crc32 = le32(b, at + 16);
        e.compressed_size = le32(b, at + 20);
        e.uncompressed_size = le32(b, at + 24);
        std::uint16_t name_len = le16(b, at + 28);
        std::uint16_t extra_len = le16(b, at + 30);
        std::uint16_t comment_len = le16(b, at + 32);
        std::uint32_t ext_attr = le32(b, at + 38);
        e.local_header_offset = le32(b, at + 42);
        std::size_t name_at = at + kCentralFixed;
        if (name_at + name_len > b.size())
            throw Error(ErrorCode::CorruptArchive, "central header name out of bounds");
        e.name.assign(reinterpret_cast<const char*>(b.data() + name_at), name_len);
        e.is_directory = !e.name.empty() && (e.name.back() == '/' || e.name.back() == '\\');
        e.is_encrypted = (flags & 0x1) != 0;
        if ((made_by >> 8) == 3) {  // unix host: mode bits live in the high half
            std::uint32_t mode = ext_attr >> 16;
            e.is_symlink = (mode & 0170000) == 0120000;
        }
        e.method = static_cast<Method>(method);
        entries_.push_back(std::move(e));
        at = name_at + name_len + extra_len + comment_len;
    }
}

std::vector<std::uint8_t> Reader::extract(const Entry& e) const {
    std::span<const std::uint8_t> b(data_);
    std::size_t at = e.local_header_offset;
    if (le32(b, at) != kLocalSig) throw Error(ErrorCode::CorruptArchive, "bad local header: " + e.name);
    std::uint16_t name_len = le16(b, at + 26);
    std::uint16_t extra_len = le16(b, at + 28);
    std::size_t payload = at + kLocalFixed + name_len + extra_len;
    if (payload + e.compressed_size > b.size())
        throw Error(ErrorCode::CorruptArchive, "member data out of bounds: " + e.name);
    auto raw = b.subspan(payload, e.compressed_size);

    std::vector<std::uint8_t> out;
    switch (e.method) {
        case Method::Stored:
            if (e.compressed_size != e.uncompressed_size)
                throw Error(ErrorCode::CorruptArchive, "stored member size mismatch: " + e.name);
            out.assign(raw.begin(), raw.end());
            break;
        case Method::Deflate:
            out = inflate_raw(raw, e.uncompressed_size);
            break;
        default:
            throw Error(ErrorCode::UnsupportedContainer,
                        "compression method " + std::to_string(static_cast<int>(e.method)) +
                            " for " + e.name);
    }
    if (crc_of(out) != e.crc32) throw Error(ErrorCode::CorruptArchive, "crc mismatch: " + e.name);
    return out;
}

void Writer::add(std::string name, std::span<const std::uint8_t> content, Method method) {
    Pending p;
    p.name = std::move(name);
    p.method = method;
    p.crc = crc_of(content);
    p.size = content.size();
    if (method == Method::Deflate)
        p.payload = deflate_raw(content);
    else
        p.payload.assign(content.begin(), content.end());
    if (p.size > 0xfffffffeULL || p.payload.size() > 0xfffffffeULL)
        throw Error(ErrorCode::IoFailure, "member too large for a non-zip64 archive");
    members_.push_back(std::move(p));
}

std::vector<std::uint8_t> Writer::finish() const {
    std::vector<std::uint8_t> out;
    std::vector<std::uint32_t> offsets;
    for (const auto& m : members_) {
        offsets.push_back(static_cast<std::uint32_t>(out.size()));
        put32(out, kLocalSig);
        put16(out, 20);
        put16(out, 0x0800);  // utf-8 names
        put16(out, static_cast<std::uint16_t>(m.method));
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, m.crc);
        put32(out, static_cast<std::uint32_t>(m.payload.size()));
        put32(out, static_cast<std::uint32_t>(m.size));
        put16(out, static_cast<std::uint16_t>(m.name.size()));
        put16(out, 0);
        out.insert(out.end(), m.name.begin(), m.name.end());
        out.insert(out.end(), m.payload.begin(), m.payload.end());
    }
    auto cd_offset = static_cast<std::uint32_t>(out.size());
    for (std::size_t i = 0; i < members_.size(); ++i) {
        const auto& m = members_[i];
        put32(out, kCentralSig);
        put16(out, (3 << 8) | 20);
        put16(out, 20);
        put16(out, 0x0800);
        put16(out, static_cast<std::uint16_t>(m.method));
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, m.crc);
        put32(out, static_cast<std::uint32_t>(m.payload.size()));
        put32(out, static_cast<std::uint32_t>(m.size));
        put16(out, static_cast<std::uint16_t>(m.name.size()));
        put16(out, 0);
        put16(out, 0);
        put16(out, 0);
        put16(out, 0);
        put32(out, 0100644u << 16);
        put32(out, offsets[i]);
        out.insert(out.end(), m.name.begin(), m.name.end());
    }
    auto cd_size = static_cast<std::uint32_t>(out.size() - cd_offset);
    put32(out, kEndSig);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(members_.size()));
    put16(out, static_cast<std::uint16_t>(members_.size()));
    put32(out, cd_size);
    put32(out, cd_offset);
    put16(out, 0);
    return out;
}

}  // namespace phiscan::zip
