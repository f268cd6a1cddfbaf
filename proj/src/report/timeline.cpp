#include "phiscan/timeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <tuple>

namespace phiscan {

namespace {

struct Summary {
    std::string operator()(const BloodPressureReading&) const { return "blood-pressure reading"; }
    std::string operator()(const OximetryReading&) const { return "pulse-oximetry reading"; }
    std::string operator()(const WeightReading&) const { return "weight and body-composition reading"; }
    std::string operator()(const EnvironmentReading&) const { return "environment reading"; }
    std::string operator()(const GlucoseStatus&) const { return "glucose reading"; }
    std::string operator()(const DeviceRegistration& d) const {
        return "device last used (type " + std::to_string(d.device_type) + ", model " +
               std::to_string(d.device_model) + ")";
    }
    std::string operator()(const HealthMateMeasurement& m) const {
        return std::string(to_string(m.kind)) + " measurement";
    }
    template <typename T>
    std::string operator()(const T&) const { return "record"; }
};

std::string summarize(const ArtifactRecord& r) {
    return std::visit(Summary{}, r.payload);
}

}  // namespace

bool event_less(const TimelineEvent& a, const TimelineEvent& b) {
    return std::forward_as_tuple(a.at.epoch_millis(), a.app, a.locator.detail, a.locator, a.kind, a.summary,
                                 a.at.raw_value) <
           std::forward_as_tuple(b.at.epoch_millis(), b.app, b.locator.detail, b.locator, b.kind, b.summary,
                                 b.at.raw_value);
}

Timeline build_timeline(std::span<const ArtifactRecord> records) {
    Timeline out;
    for (const auto& r : records) {
        auto at = primary_instant(r);
        if (!at) {
            ++out.excluded;
            continue;
        }
        out.events.push_back(TimelineEvent{*at, r.locator.package_name, r.kind(), summarize(r), r.locator});
    }
    std::sort(out.events.begin(), out.events.end(), event_less);
    return out;
}

std::string render_timeline(const Timeline& timeline, OutputFormat format) {
    if (format == OutputFormat::Json) {
        auto events = nlohmann::json::array();
        for (const auto& e : timeline.events)
            events.push_back({{"utc", e.at.utc},
                              {"subsecond_millis", e.at.subsecond_millis},
                              {"raw", e.at.raw_value},
                              {"unit", std::string(to_string(e.at.unit))},
                              {"app", e.app},
                              {"kind", std::string(to_string(e.kind))},
                              {"summary", e.summary},
                              {"locator",
                               {{"package", e.locator.package_name},
                                {"path", e.locator.relative_path},
                                {"container", std::string(to_string(e.locator.container))},
                                {"detail", e.locator.detail}}}});
        return events.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    }

    std::size_t app_width = 0, kind_width = 0, summary_width = 0;
    for (const auto& e : timeline.events) {
        app_width = std::max(app_width, e.app.size());
        kind_width = std::max(kind_width, to_string(e.kind).size());
        summary_width = std::max(summary_width, e.summary.size());
    }
    std::string out;
    for (const auto& e : timeline.events) {
        char millis[8];
        std::snprintf(millis, sizeof millis, ".%03d", e.at.subsecond_millis);
        std::string utc = e.at.utc;
        utc.insert(utc.size() - 1, millis);
        std::string app = e.app, kind(to_string(e.kind)), summary = e.summary;
        app.resize(app_width, ' ');
        kind.resize(kind_width, ' ');
        summary.resize(summary_width, ' ');
        out += utc + "  " + app + "  " + kind + "  " + summary + "  " + e.locator.relative_path + " " +
               e.locator.detail + "\n";
    }
    return out;
}

}  // namespace phiscan
