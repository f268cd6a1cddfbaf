#include "phiscan/evidence.hpp"

#include "phiscan/digest.hpp"
#include "phiscan/error.hpp"
#include "phiscan/zip_archive.hpp"

#include <fstream>
#include <map>
#include <system_error>

namespace phiscan {

namespace fs = std::filesystem;

std::string_view to_string(ContainerKind kind) noexcept {
    return kind == ContainerKind::Directory ? "directory" : "zip-archive";
}

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::UnsupportedContainer: return "UnsupportedContainer";
        case ErrorCode::CorruptArchive: return "CorruptArchive";
        case ErrorCode::AmbiguousUnit: return "AmbiguousUnit";
        case ErrorCode::NonPositive: return "NonPositive";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::EmptyField: return "EmptyField";
        case ErrorCode::NotSqlite: return "NotSqlite";
        case ErrorCode::CorruptDatabase: return "CorruptDatabase";
        case ErrorCode::MissingTable: return "MissingTable";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::MalformedXml: return "MalformedXml";
        case ErrorCode::NoCredentialKeys: return "NoCredentialKeys";
        case ErrorCode::MissingFields: return "MissingFields";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

std::optional<std::string> normalize_relative_path(std::string_view raw) {
    if (raw.empty()) return std::nullopt;
    std::string path(raw);
    for (char& c : path) {
        if (c == '\\') c = '/';
        if (c == '\0') return std::nullopt;
    }
    if (path.front() == '/') return std::nullopt;
    if (path.size() >= 2 && path[1] == ':') return std::nullopt;

    std::string out;
    std::size_t start = 0;
    while (start <= path.size()) {
        std::size_t slash = path.find('/', start);
        if (slash == std::string::npos) slash = path.size();
        std::string_view seg(path.data() + start, slash - start);
        if (seg == "..") return std::nullopt;
        if (!seg.empty() && seg != ".") {
            if (!out.empty()) out.push_back('/');
            out.append(seg);
        }
        start = slash + 1;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

struct EvidenceSource::Impl {
    fs::path origin;
    ContainerKind kind = ContainerKind::Directory;
    std::set<std::string> listing;
    std::vector<std::string> rejected;
    std::chrono::system_clock::time_point opened_at;
    std::unique_ptr<zip::Reader> archive;
    std::map<std::string, std::size_t, std::less<>> zip_index;
};

namespace {

Bytes read_whole_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open " + p.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed: " + p.string());
    return data;
}

}  // namespace

EvidenceSource::EvidenceSource(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

EvidenceSource EvidenceSource::open(const fs::path& path) {
    std::error_code ec;
    auto status = fs::status(path, ec);
    if (ec || !fs::exists(status)) throw Error(ErrorCode::NotFound, path.string());

    auto impl = std::make_shared<Impl>();
    impl->origin = path;
    impl->opened_at = std::chrono::system_clock::now();

    if (fs::is_directory(status)) {
        impl->kind = ContainerKind::Directory;
        // Symlinks are never followed; they are recorded as rejected and
        // otherwise treated as absent.
        fs::recursive_directory_iterator it(path, fs::directory_options::none, ec);
        if (ec) throw Error(ErrorCode::IoFailure, "cannot list " + path.string());
        for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
            if (ec) throw Error(ErrorCode::IoFailure, "cannot list " + path.string());
            auto rel = fs::relative(it->path(), path, ec).generic_string();
            auto link = it->symlink_status(ec);
            if (fs::is_symlink(link)) {
                impl->rejected.push_back(rel + " (symlink)");
                if (it->is_directory(ec)) it.disable_recursion_pending();
                continue;
            }
            if (!fs::is_regular_file(link)) continue;
            auto norm = normalize_relative_path(rel);
            if (!norm) {
                impl->rejected.push_back(rel + " (unsafe path)");
                continue;
            }
            impl->listing.insert(*norm);
        }
        return EvidenceSource(std::move(impl));
    }

    if (!fs::is_regular_file(status))
        throw Error(ErrorCode::UnsupportedContainer, path.string() + " is not a directory or file");

    Bytes bytes = read_whole_file(path);
    if (!zip::looks_like_zip(bytes))
        throw Error(ErrorCode::UnsupportedContainer, path.string() + " is not a zip archive");

    impl->kind = ContainerKind::ZipArchive;
    impl->archive = std::make_unique<zip::Reader>(std::move(bytes));
    const auto& entries = impl->archive->entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.is_directory) continue;
        if (e.is_symlink) {
            impl->rejected.push_back(e.name + " (symlink)");
            continue;
        }
        if (e.is_encrypted) {
            impl->rejected.push_back(e.name + " (encrypted member)");
            continue;
        }
        auto norm = normalize_relative_path(e.name);
        if (!norm) {
            impl->rejected.push_back(e.name + " (unsafe path)");
            continue;
        }
        if (impl->zip_index.contains(*norm)) {
            impl->rejected.push_back(e.name + " (duplicate entry)");
            continue;
        }
        impl->zip_index.emplace(*norm, i);
        impl->listing.insert(*norm);
    }
    return EvidenceSource(std::move(impl));
}

const fs::path& EvidenceSource::origin() const noexcept { return impl_->origin; }
ContainerKind EvidenceSource::container_kind() const noexcept { return impl_->kind; }
const std::set<std::string>& EvidenceSource::root_listing() const noexcept { return impl_->listing; }
std::chrono::system_clock::time_point EvidenceSource::opened_at() const noexcept {
    return impl_->opened_at;
}
const std::vector<std::string>& EvidenceSource::rejected_entries() const noexcept {
    return impl_->rejected;
}

std::string EvidenceSource::display_name() const {
    std::error_code ec;
    fs::path p = fs::weakly_canonical(fs::absolute(impl_->origin, ec), ec);
    if (ec) p = impl_->origin;
    if (!p.has_filename()) p = p.parent_path();  // trailing slash
    if (impl_->kind == ContainerKind::ZipArchive && p.extension() == ".zip")
        return p.stem().string();
    return p.filename().string();
}

bool EvidenceSource::contains(std::string_view relative_path) const {
    return impl_->listing.find(std::string(relative_path)) != impl_->listing.end();
}

Bytes EvidenceSource::read_file(std::string_view relative_path) const {
    if (!contains(relative_path))
        throw Error(ErrorCode::NotFound, std::string(relative_path));
    if (impl_->kind == ContainerKind::Directory)
        return read_whole_file(impl_->origin / fs::path(std::string(relative_path)));
    auto it = impl_->zip_index.find(relative_path);
    return impl_->archive->extract(impl_->archive->entries()[it->second]);
}

FileDigest EvidenceSource::hash_file(std::string_view relative_path) const {
    Bytes data = read_file(relative_path);
    FileDigest d;
    d.relative_path = std::string(relative_path);
    d.hex_digest = sha256_hex(data);
    d.byte_length = data.size();
    return d;
}

}  // namespace phiscan
