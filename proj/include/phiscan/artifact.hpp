#pragma once

// Shared record model: provenance locators and the typed payloads every
// parser emits.

#include "phiscan/timestamp.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace phiscan {

enum class ContainerType { SqliteTable, XmlFile, RawBytes };

std::string_view to_string(ContainerType type) noexcept;
std::optional<ContainerType> container_type_from_string(std::string_view text) noexcept;

struct SourceLocator {
    std::string package_name;
    std::string relative_path;  // relative to the evidence root
    ContainerType container = ContainerType::RawBytes;
    std::string detail;  // "<table>:<rowid>", xml key, or "offset:<n>"

    friend auto operator<=>(const SourceLocator&, const SourceLocator&) = default;
};

/// Throws Error(EmptyField) if any string is empty.
SourceLocator make_locator(std::string package, std::string path, ContainerType container,
                           std::string detail);

struct BloodPressureReading {
    std::int64_t systolic = 0;
    std::int64_t diastolic = 0;
    std::int64_t pulse = 0;
    EpochInstant measured_at;
    std::string device_id;
    std::optional<std::string> note;
    std::string account;
};

struct OximetryReading {
    std::int64_t result_spo2 = 0;
    std::int64_t pulse_rate = 0;
    double perfusion_index = 0;
    EpochInstant measured_at;
    EpochInstant last_change_at;
    EpochInstant phone_created_at;
    std::string health_id;
    std::string machine_type;
    std::string machine_device_id;
    std::int64_t used_user_id = 0;
    std::string phone_data_id;
};

struct WeightReading {
    double weight = 0;
    double bmi = 0;
    double body_fat_pct = 0;
    double body_water_pct = 0;
    double muscle_mass = 0;
    double daily_calorie_intake = 0;
    double bone_mass = 0;
    EpochInstant measured_at;
    std::string account;
};

struct EnvironmentReading {
    double humidity = 0;
    double temperature = 0;
    double lighting_level = 0;
    EpochInstant measured_at;
};

// No shipped parser emits this: the glucose app keeps its readings in
// encrypted databases. Kept so rule evaluation covers the full kind set.
struct GlucoseStatus {
    double level = 0;
    EpochInstant measured_at;
};

struct MyVitalsProfile {
    std::string name;
    CalendarDate date_of_birth;
    std::string timezone_location;
    std::string email;
};

struct GlucoProfile {
    std::string username;
    std::string device_identifier;
};

struct HealthMateUser {
    std::string name;
    std::string gender;
    CalendarDate birthday;
    std::string email;
};

struct CredentialSet {
    std::string account;
    std::optional<std::string> password_plaintext;
    std::optional<std::string> refresh_token;
    std::optional<std::string> access_token;
    std::optional<std::string> region_host;
    std::optional<bool> is_online_flag;
};

struct DeviceRegistration {
    std::int64_t id = 0;
    EpochInstant association_date;
    EpochInstant last_use_date;
    EpochInstant modified_date;
    std::string mac_address;
    std::int64_t firmware = 0;
    std::optional<std::string> timezone;
    std::int64_t battery_pct = 0;
    std::int64_t device_type = 0;
    std::int64_t device_model = 0;
};

enum class MeasureKind {
    Weight,
    BodyFat,
    BodyWater,
    Pulse,
    BoneMass,
    MuscleMass,
    Bmi,
    Systolic,
    Diastolic
};

std::string_view to_string(MeasureKind kind) noexcept;
std::optional<MeasureKind> measure_kind_from_string(std::string_view text) noexcept;

struct HealthMateMeasurement {
    MeasureKind kind = MeasureKind::Weight;
    double value = 0;
    EpochInstant measured_at;
    std::optional<std::int64_t> device_ref;
};

enum class RawPattern { Email, MacAddress, DateToken, SecretKeyName, Ssn, PaymentCard, UnmappedMeasure };

std::string_view to_string(RawPattern pattern) noexcept;

struct RawHit {
    RawPattern pattern = RawPattern::Email;
    std::string text;
};

enum class ArtifactKind {
    BloodPressure,
    Oximetry,
    Weight,
    Environment,
    GlucoseStatus,
    UserProfile,
    Credential,
    DeviceRegistration,
    Measurement,
    RawHit
};

std::string_view to_string(ArtifactKind kind) noexcept;
std::optional<ArtifactKind> artifact_kind_from_string(std::string_view text) noexcept;

using Payload = std::variant<BloodPressureReading, OximetryReading, WeightReading,
                             EnvironmentReading, GlucoseStatus, MyVitalsProfile, GlucoProfile,
                             HealthMateUser, CredentialSet, DeviceRegistration,
                             HealthMateMeasurement, RawHit>;

struct ArtifactRecord {
    Payload payload;
    SourceLocator locator;
    std::chrono::system_clock::time_point recovered_at{};

    /// Derived from the payload alternative, so kind and payload cannot disagree.
    ArtifactKind kind() const noexcept;
};

/// The instant that places a record on the timeline, if it has one.
std::optional<EpochInstant> primary_instant(const ArtifactRecord& record);

/// Syntactic email check used by the parsers and the raw sweep.
bool is_email_address(std::string_view text) noexcept;

/// Shortest round-trip decimal rendering (e.g. 9.7, 2200, 0.1).
std::string format_decimal(double value);

}  // namespace phiscan
