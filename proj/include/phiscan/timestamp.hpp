#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace phiscan {

enum class EpochUnit { Seconds, Milliseconds };

std::string_view to_string(EpochUnit unit) noexcept;

// Magnitude bands used for unit inference.
inline constexpr std::int64_t kSecondsBandEnd = 100'000'000'000;         // 1e11, exclusive
inline constexpr std::int64_t kMillisecondsBandStart = 1'000'000'000'000;  // 1e12, inclusive
// 9999-12-31T23:59:59.999Z; ISO-8601 basic form has no room for wider years.
inline constexpr std::int64_t kMillisecondsBandEnd = 253'402'300'800'000;  // exclusive

struct EpochInstant {
    std::int64_t raw_value = 0;
    EpochUnit unit = EpochUnit::Seconds;
    std::string utc;               // YYYY-MM-DDThh:mm:ssZ
    int subsecond_millis = 0;      // truncated remainder for millisecond inputs

    std::int64_t epoch_seconds() const noexcept {
        return unit == EpochUnit::Seconds ? raw_value : raw_value / 1000;
    }
    /// Milliseconds since the epoch regardless of the source unit.
    std::int64_t epoch_millis() const noexcept {
        return unit == EpochUnit::Seconds ? raw_value * 1000 : raw_value;
    }

    friend bool operator==(const EpochInstant&, const EpochInstant&) = default;
};

/// Infers seconds vs milliseconds from magnitude and renders UTC.
/// Throws Error(NonPositive), Error(AmbiguousUnit) for [1e11, 1e12), or
/// Error(OutOfRange) past year 9999.
EpochInstant normalize_timestamp(std::int64_t raw);

/// Renders epoch seconds as YYYY-MM-DDThh:mm:ssZ.
std::string format_utc_seconds(std::int64_t epoch_seconds);

struct CalendarDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    std::string to_string() const;  // YYYY-MM-DD
    friend auto operator<=>(const CalendarDate&, const CalendarDate&) = default;
};

/// Parses a strict YYYY-MM-DD calendar date; nullopt if malformed or invalid.
std::optional<CalendarDate> parse_calendar_date(std::string_view text);

}  // namespace phiscan
