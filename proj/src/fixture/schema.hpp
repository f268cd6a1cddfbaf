#pragma once

// Column layouts the forge writes. These mirror the documented on-device
// schemas and are what explicit spec rows are typed against.

#include <array>
#include <span>
#include <string_view>

namespace phiscan::forge::detail {

enum class Affinity { Integer, Real, Text };

struct Column {
    std::string_view name;
    Affinity type;
};

struct TableSchema {
    std::string_view name;
    std::span<const Column> columns;
    bool id_is_rowid = false;  // first column is INTEGER PRIMARY KEY

    const Column* find(std::string_view column) const {
        for (const auto& c : columns)
            if (c.name == column) return &c;
        return nullptr;
    }
};

using A = Affinity;

inline constexpr std::array<Column, 7> kBpColumns{{{"Sys", A::Integer}, {"Dia", A::Integer}, {"Pulse", A::Integer},
                                                   {"MeasureTime", A::Integer}, {"DeviceID", A::Text},
                                                   {"Note", A::Text}, {"Account", A::Text}}};
inline constexpr std::array<Column, 11> kSpo2Columns{{{"UsedUserID", A::Integer}, {"PhoneDataID", A::Text},
                                                      {"iHealthID", A::Text}, {"MachineType", A::Text},
                                                      {"MachineDeviceID", A::Text}, {"MeasureTime", A::Integer},
                                                      {"LastChangeTime", A::Integer}, {"PhoneCreateTime", A::Integer},
                                                      {"Result", A::Integer}, {"PR", A::Integer}, {"PI", A::Real}}};
inline constexpr std::array<Column, 9> kWeightColumns{{{"Weight", A::Real}, {"BMI", A::Real}, {"BodyFat", A::Real},
                                                       {"BodyWater", A::Real}, {"MuscleMass", A::Real},
                                                       {"DailyCalorie", A::Real}, {"BoneMass", A::Real},
                                                       {"MeasureTime", A::Integer}, {"Account", A::Text}}};
inline constexpr std::array<Column, 4> kEnvColumns{
    {{"Humidity", A::Real}, {"Temperature", A::Real}, {"Lighting", A::Real}, {"MeasureTime", A::Integer}}};
inline constexpr std::array<Column, 4> kUserInfoColumns{
    {{"Name", A::Text}, {"Birthday", A::Text}, {"TimeZone", A::Text}, {"Email", A::Text}}};

inline constexpr std::array<Column, 10> kDeviceColumns{{{"id", A::Integer}, {"associationDate", A::Integer},
                                                        {"lastUseDate", A::Integer}, {"modifiedDate", A::Integer},
                                                        {"macAddress", A::Text}, {"firmware", A::Integer},
                                                        {"timezone", A::Text}, {"battery", A::Integer},
                                                        {"type", A::Integer}, {"model", A::Integer}}};
inline constexpr std::array<Column, 5> kMeasureColumns{
    {{"id", A::Integer}, {"type", A::Integer}, {"value", A::Real}, {"date", A::Integer}, {"deviceId", A::Integer}}};
inline constexpr std::array<Column, 5> kHmUserColumns{
    {{"id", A::Integer}, {"name", A::Text}, {"gender", A::Text}, {"birthday", A::Text}, {"email", A::Text}}};

inline constexpr TableSchema kBpTable{"TB_BPResult", kBpColumns};
inline constexpr TableSchema kSpo2Table{"TB_SPO2Result", kSpo2Columns};
inline constexpr TableSchema kWeightTable{"TB_WeightOnlineResult", kWeightColumns};
inline constexpr TableSchema kEnvTable{"TB_TemperatureHumidity", kEnvColumns};
inline constexpr TableSchema kUserInfoTable{"TB_Userinfo", kUserInfoColumns};
inline constexpr TableSchema kDevicesTable{"devices", kDeviceColumns, true};
inline constexpr TableSchema kMeasureTable{"measure", kMeasureColumns, true};
inline constexpr TableSchema kHmUsersTable{"users", kHmUserColumns, true};

}  // namespace phiscan::forge::detail
