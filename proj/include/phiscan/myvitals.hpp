#pragma once

// iHealth MyVitals: androidNin.db tables and the region-host credential XML.

#include "phiscan/parser.hpp"

#include <span>

namespace phiscan::myvitals {

inline constexpr std::string_view kPackage = "iHealthMyVitals.V2";
inline constexpr std::string_view kDatabasePath = "Databases/androidNin.db";
inline constexpr std::string_view kCredentialXml = "sp_user_region_host_info.xml";

inline constexpr std::string_view kBpTable = "TB_BPResult";
inline constexpr std::string_view kSpo2Table = "TB_SPO2Result";
inline constexpr std::string_view kWeightTable = "TB_WeightOnlineResult";
inline constexpr std::string_view kEnvironmentTable = "TB_TemperatureHumidity";
inline constexpr std::string_view kUserTable = "TB_Userinfo";

bool detect(const AppDataRoot& root, const EvidenceSource& source);

// Each table parser throws Error(NotSqlite) without the header magic and
// Error(MissingTable) when the table or a required column is absent. Bad rows
// are skipped and tallied in the result.
ParseResult parse_bp_results(std::span<const std::uint8_t> db, const Origin& origin);
ParseResult parse_spo2_results(std::span<const std::uint8_t> db, const Origin& origin);
ParseResult parse_weight_results(std::span<const std::uint8_t> db, const Origin& origin);
ParseResult parse_environment(std::span<const std::uint8_t> db, const Origin& origin);
ParseResult parse_user_info(std::span<const std::uint8_t> db, const Origin& origin);

struct CredentialParse {
    std::vector<ArtifactRecord> credentials;  // one per account prefix, document order
    bool inconsistent_prefix = false;
    std::vector<prefs::Entry> leftovers;
};

/// Binds `<account>_user_password`, `_user_refresh_token`, `_user_access_token`,
/// `_user_region_host_info` and `_user_is_online` keys. Throws
/// Error(MalformedXml) or Error(NoCredentialKeys).
CredentialParse parse_region_host_xml(std::span<const std::uint8_t> xml, const Origin& origin);

class Parser final : public AppParser {
public:
    std::string_view id() const override { return "ihealth-myvitals"; }
    std::string_view app_name() const override { return "iHealth MyVitals"; }
    std::string_view folder_signature() const override { return kPackage; }
    std::string_view artifact_signature() const override { return kDatabasePath; }
    bool detect(const AppDataRoot& root, const EvidenceSource& source) const override {
        return myvitals::detect(root, source);
    }
    AppScan parse(const AppDataRoot& root, const EvidenceSource& source,
                  const ScanContext& ctx) const override;
};

}  // namespace phiscan::myvitals
