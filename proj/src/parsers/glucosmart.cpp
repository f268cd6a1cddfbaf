#include "phiscan/glucosmart.hpp"

#include "phiscan/error.hpp"

namespace phiscan::glucosmart {

bool detect(const AppDataRoot& root, const EvidenceSource&) { return root.package_name == kPackage; }

std::vector<DatabaseStatus> classify_databases(const AppDataRoot& root, const EvidenceSource& source) {
    std::vector<DatabaseStatus> out;
    for (const auto& path : files_under(root, source)) {
        if (!path.ends_with(".db")) continue;
        try {
            out.push_back(classify_database_bytes(path, source.read_file(path)));
        } catch (const Error& e) {
            DatabaseStatus s;
            s.relative_path = path;
            s.status = DbStatus::EncryptedOrOpaque;
            s.note = std::string("unreadable: ") + e.what();
            out.push_back(std::move(s));
        }
    }
    return out;
}

UserInfoParse parse_user_info_xml(std::span<const std::uint8_t> xml, const Origin& origin) {
    UserInfoParse out;
    GlucoProfile profile;
    for (auto& e : prefs::parse(xml)) {
        if (e.type == "string" && e.key == kUserNameKey && profile.username.empty())
            profile.username = e.value;
        else if (e.type == "string" && e.key == kDeviceIdKey && profile.device_identifier.empty())
            profile.device_identifier = e.value;
        else
            out.leftovers.push_back(std::move(e));
    }
    if (profile.username.empty() || profile.device_identifier.empty()) {
        // Field values stay out of the message; warnings are not redacted.
        std::string partial = std::string("partial profile {UserName=") +
                              (profile.username.empty() ? "absent" : "present") +
                              ", DeviceID=" + (profile.device_identifier.empty() ? "absent" : "present") + "}";
        throw Error(ErrorCode::MissingFields, origin.relative_path + ": " + partial);
    }
    out.profile = ArtifactRecord{std::move(profile),
                                 SourceLocator{origin.package_name, origin.relative_path, ContainerType::XmlFile,
                                               std::string(kUserNameKey)},
                                 origin.recovered_at};
    return out;
}

AppScan Parser::parse(const AppDataRoot& root, const EvidenceSource& source, const ScanContext& ctx) const {
    AppScan scan;
    scan.package_name = root.package_name;
    scan.parser_id = std::string(id());
    scan.app_name = std::string(app_name());

    // Databases are only classified; opaque ones stay unconsumed so the raw
    // sweep still looks at them.
    scan.databases = classify_databases(root, source);
    for (const auto& db : scan.databases) {
        if (db.status == DbStatus::EncryptedOrOpaque && db.high_entropy())
            scan.warnings.push_back(db.relative_path + ": encrypted-or-opaque database (entropy " +
                                    format_decimal(db.entropy_bits_per_byte) + " bits/byte), not decrypted");
    }

    for (const auto& path : files_under(root, source)) {
        if (file_name(path) != kUserInfoXml) continue;
        scan.consumed.insert(path);
        Bytes xml = source.read_file(path);
        try {
            auto parsed = parse_user_info_xml(xml, Origin{root.package_name, path, ctx.recovered_at});
            scan.records.push_back(std::move(parsed.profile));
            if (!parsed.leftovers.empty()) scan.leftovers.push_back({path, std::move(parsed.leftovers)});
        } catch (const Error& e) {
            scan.warnings.push_back(e.what());
            if (e.code() == ErrorCode::MissingFields) scan.leftovers.push_back({path, prefs::parse(xml)});
        }
    }
    return scan;
}

}  // namespace phiscan::glucosmart
