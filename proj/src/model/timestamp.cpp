#include "phiscan/timestamp.hpp"

#include "phiscan/error.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace phiscan {

std::string_view to_string(EpochUnit unit) noexcept {
    return unit == EpochUnit::Seconds ? "seconds" : "milliseconds";
}

std::string format_utc_seconds(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    sys_seconds tp{seconds{epoch_seconds}};
    auto day_point = floor<days>(tp);
    year_month_day ymd{day_point};
    hh_mm_ss hms{tp - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

EpochInstant normalize_timestamp(std::int64_t raw) {
    if (raw <= 0) throw Error(ErrorCode::NonPositive, std::to_string(raw));
    EpochInstant out;
    out.raw_value = raw;
    if (raw < kSecondsBandEnd) {
        out.unit = EpochUnit::Seconds;
        out.utc = format_utc_seconds(raw);
        return out;
    }
    if (raw < kMillisecondsBandStart)
        throw Error(ErrorCode::AmbiguousUnit,
                    std::to_string(raw) + " lies between the seconds and milliseconds bands");
    if (raw >= kMillisecondsBandEnd)
        throw Error(ErrorCode::OutOfRange, std::to_string(raw) + " is past year 9999");
    out.unit = EpochUnit::Milliseconds;
    out.utc = format_utc_seconds(raw / 1000);
    out.subsecond_millis = static_cast<int>(raw % 1000);
    return out;
}

std::string CalendarDate::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
    return buf;
}

std::optional<CalendarDate> parse_calendar_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto number = [&](std::size_t at, std::size_t len, int& value) {
        auto first = text.data() + at;
        auto [ptr, ec] = std::from_chars(first, first + len, value);
        return ec == std::errc{} && ptr == first + len;
    };
    int y = 0, m = 0, d = 0;
    if (!number(0, 4, y) || !number(5, 2, m) || !number(8, 2, d)) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return CalendarDate{y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
}

}  // namespace phiscan
