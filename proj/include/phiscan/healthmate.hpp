#pragma once

// Withings / Nokia Health Mate: devices, measure and users tables of
// withings-wiscale.db.

#include "phiscan/parser.hpp"

#include <span>

namespace phiscan::healthmate {

inline constexpr std::string_view kPackage = "com.withings.wiscale2";
inline constexpr std::string_view kDatabaseName = "withings-wiscale.db";

bool detect(const AppDataRoot& root, const EvidenceSource& source);

ParseResult parse_devices(std::span<const std::uint8_t> db, const Origin& origin);
/// Unknown type codes come back as raw-hit records, never dropped.
ParseResult parse_measures(std::span<const std::uint8_t> db, const Origin& origin,
                           const MeasureCodeMap& codes);
ParseResult parse_users(std::span<const std::uint8_t> db, const Origin& origin);

/// Lowercase colon-hex form of a MAC address, or nullopt if it is not one.
std::optional<std::string> normalize_mac(std::string_view text);

class Parser final : public AppParser {
public:
    std::string_view id() const override { return "withings-health-mate"; }
    std::string_view app_name() const override { return "Health Mate"; }
    std::string_view folder_signature() const override { return kPackage; }
    std::string_view artifact_signature() const override { return kDatabaseName; }
    bool detect(const AppDataRoot& root, const EvidenceSource& source) const override {
        return healthmate::detect(root, source);
    }
    AppScan parse(const AppDataRoot& root, const EvidenceSource& source,
                  const ScanContext& ctx) const override;
};

}  // namespace phiscan::healthmate
