#pragma once

// Unified timeline over every timestamped record, on a normalized UTC axis.

#include "phiscan/artifact.hpp"
#include "phiscan/report.hpp"

#include <span>
#include <string>
#include <vector>

namespace phiscan {

struct TimelineEvent {
    EpochInstant at;
    std::string app;  // package name of the owning data root
    ArtifactKind kind = ArtifactKind::RawHit;
    std::string summary;  // never carries identifiers
    SourceLocator locator;

    friend bool operator==(const TimelineEvent&, const TimelineEvent&) = default;
};

struct Timeline {
    std::vector<TimelineEvent> events;
    std::size_t excluded = 0;  // records without a timestamp
};

/// Total order: instant (to the millisecond), app, locator detail, then the
/// remaining locator fields, kind, summary and
/// finally the raw value, so equal instants in different units still order.
bool event_less(const TimelineEvent& a, const TimelineEvent& b);

Timeline build_timeline(std::span<const ArtifactRecord> records);

/// JSON is a canonical array of events; text is one aligned line per event.
std::string render_timeline(const Timeline& timeline, OutputFormat format);

}  // namespace phiscan
