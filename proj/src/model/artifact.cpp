#include "phiscan/artifact.hpp"

#include "phiscan/error.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace phiscan {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view text) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == text) return static_cast<Enum>(i);
    return std::nullopt;
}

constexpr std::array<std::string_view, 3> kContainerNames{"sqlite-table", "xml-file", "raw-bytes"};
constexpr std::array<std::string_view, 9> kMeasureNames{
    "weight", "body-fat", "body-water", "pulse", "bone-mass", "muscle-mass", "bmi", "systolic",
    "diastolic"};
constexpr std::array<std::string_view, 7> kRawNames{
    "email", "mac-address", "date-token", "secret-key-name", "ssn", "payment-card", "unmapped-measure"};
constexpr std::array<std::string_view, 10> kKindNames{
    "blood-pressure", "oximetry",           "weight",      "environment", "glucose-status",
    "user-profile",   "credential",         "device-registration", "measurement", "raw-hit"};

}  // namespace

std::string_view to_string(ContainerType type) noexcept {
    return kContainerNames[static_cast<std::size_t>(type)];
}
std::optional<ContainerType> container_type_from_string(std::string_view text) noexcept {
    return lookup<ContainerType>(kContainerNames, text);
}
std::string_view to_string(MeasureKind kind) noexcept {
    return kMeasureNames[static_cast<std::size_t>(kind)];
}
std::optional<MeasureKind> measure_kind_from_string(std::string_view text) noexcept {
    return lookup<MeasureKind>(kMeasureNames, text);
}
std::string_view to_string(RawPattern pattern) noexcept {
    return kRawNames[static_cast<std::size_t>(pattern)];
}
std::string_view to_string(ArtifactKind kind) noexcept {
    return kKindNames[static_cast<std::size_t>(kind)];
}
std::optional<ArtifactKind> artifact_kind_from_string(std::string_view text) noexcept {
    return lookup<ArtifactKind>(kKindNames, text);
}

SourceLocator make_locator(std::string package, std::string path, ContainerType container,
                           std::string detail) {
    if (package.empty()) throw Error(ErrorCode::EmptyField, "package_name");
    if (path.empty()) throw Error(ErrorCode::EmptyField, "relative_path");
    if (detail.empty()) throw Error(ErrorCode::EmptyField, "detail");
    return SourceLocator{std::move(package), std::move(path), container, std::move(detail)};
}

ArtifactKind ArtifactRecord::kind() const noexcept {
    struct Visitor {
        ArtifactKind operator()(const BloodPressureReading&) const { return ArtifactKind::BloodPressure; }
        ArtifactKind operator()(const OximetryReading&) const { return ArtifactKind::Oximetry; }
        ArtifactKind operator()(const WeightReading&) const { return ArtifactKind::Weight; }
        ArtifactKind operator()(const EnvironmentReading&) const { return ArtifactKind::Environment; }
        ArtifactKind operator()(const GlucoseStatus&) const { return ArtifactKind::GlucoseStatus; }
        ArtifactKind operator()(const MyVitalsProfile&) const { return ArtifactKind::UserProfile; }
        ArtifactKind operator()(const GlucoProfile&) const { return ArtifactKind::UserProfile; }
        ArtifactKind operator()(const HealthMateUser&) const { return ArtifactKind::UserProfile; }
        ArtifactKind operator()(const CredentialSet&) const { return ArtifactKind::Credential; }
        ArtifactKind operator()(const DeviceRegistration&) const { return ArtifactKind::DeviceRegistration; }
        ArtifactKind operator()(const HealthMateMeasurement&) const { return ArtifactKind::Measurement; }
        ArtifactKind operator()(const RawHit&) const { return ArtifactKind::RawHit; }
    };
    return std::visit(Visitor{}, payload);
}

namespace {

struct InstantOf {
    std::optional<EpochInstant> operator()(const BloodPressureReading& r) const { return r.measured_at; }
    std::optional<EpochInstant> operator()(const OximetryReading& r) const { return r.measured_at; }
    std::optional<EpochInstant> operator()(const WeightReading& r) const { return r.measured_at; }
    std::optional<EpochInstant> operator()(const EnvironmentReading& r) const { return r.measured_at; }
    std::optional<EpochInstant> operator()(const GlucoseStatus& r) const { return r.measured_at; }
    std::optional<EpochInstant> operator()(const DeviceRegistration& r) const { return r.last_use_date; }
    std::optional<EpochInstant> operator()(const HealthMateMeasurement& r) const { return r.measured_at; }
    template <typename T>
    std::optional<EpochInstant> operator()(const T&) const { return std::nullopt; }
};

}  // namespace

std::optional<EpochInstant> primary_instant(const ArtifactRecord& record) {
    return std::visit(InstantOf{}, record.payload);
}

bool is_email_address(std::string_view text) noexcept {
    auto at = text.find('@');
    if (at == std::string_view::npos || at == 0 || text.find('@', at + 1) != std::string_view::npos)
        return false;
    auto local = text.substr(0, at);
    auto domain = text.substr(at + 1);
    for (char c : local) {
        auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '.' && c != '_' && c != '%' && c != '+' && c != '-') return false;
    }
    if (local.front() == '.' || local.back() == '.') return false;

    std::size_t labels = 0;
    std::string_view last;
    std::size_t start = 0;
    while (true) {
        auto dot = domain.find('.', start);
        auto label = domain.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (label.empty() || label.front() == '-' || label.back() == '-') return false;
        for (char c : label)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') return false;
        ++labels;
        last = label;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    if (labels < 2 || last.size() < 2) return false;
    for (char c : last)
        if (!std::isalpha(static_cast<unsigned char>(c))) return false;
    return true;
}

std::string format_decimal(double value) {
    if (std::isnan(value)) return "nan";
    if (value == 0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

}  // namespace phiscan
