#pragma once

// iHealth Gluco-Smart: databases are classified only, user_info.xml is parsed.

#include "phiscan/parser.hpp"

#include <span>

namespace phiscan::glucosmart {

inline constexpr std::string_view kPackage = "jiuana-androidBg.start";
inline constexpr std::string_view kUserInfoXml = "user_info.xml";
inline constexpr std::string_view kUserNameKey = "UserName";
inline constexpr std::string_view kDeviceIdKey = "DeviceID";

bool detect(const AppDataRoot& root, const EvidenceSource& source);

/// Every `.db` file under the root gets exactly one status.
std::vector<DatabaseStatus> classify_databases(const AppDataRoot& root, const EvidenceSource& source);

struct UserInfoParse {
    ArtifactRecord profile;
    std::vector<prefs::Entry> leftovers;
};

/// Throws Error(MalformedXml) or Error(MissingFields); the latter message
/// carries whatever partial profile was present.
UserInfoParse parse_user_info_xml(std::span<const std::uint8_t> xml, const Origin& origin);

class Parser final : public AppParser {
public:
    std::string_view id() const override { return "ihealth-gluco-smart"; }
    std::string_view app_name() const override { return "Gluco-Smart"; }
    std::string_view folder_signature() const override { return kPackage; }
    std::string_view artifact_signature() const override { return ""; }
    bool detect(const AppDataRoot& root, const EvidenceSource& source) const override {
        return glucosmart::detect(root, source);
    }
    AppScan parse(const AppDataRoot& root, const EvidenceSource& source,
                  const ScanContext& ctx) const override;
};

}  // namespace phiscan::glucosmart
