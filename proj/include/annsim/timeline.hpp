#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace annsim {

// Boundary comparisons tolerate this much absolute error (seconds).
// Partitions built by the query strategies share boundaries exactly; the
// tolerance only matters for values that went through text round-trips.
inline constexpr double kBoundaryTol = 1e-9;

// Closed-open time span in seconds.
struct Interval {
    double start = 0.0;
    double end = 0.0;

    Interval() = default;
    Interval(double s, double e) : start(s), end(e) {
        if (!(s <= e)) throw std::invalid_argument("Interval: start must be <= end");
        if (s < 0.0) throw std::invalid_argument("Interval: start must be >= 0");
        if (!std::isfinite(s) || !std::isfinite(e))
            throw std::invalid_argument("Interval: bounds must be finite");
    }

    double duration() const { return end - start; }

    bool operator==(const Interval& other) const = default;
};

inline double intersect(const Interval& a, const Interval& b) {
    return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

// Ground-truth strong labels for one recording: sorted, non-overlapping
// events inside [0, duration]. Touching events (overlap exactly 0) are legal.
struct EventList {
    std::vector<Interval> events;
    double duration = 0.0;

    EventList() = default;
    EventList(std::vector<Interval> evs, double dur) : events(std::move(evs)), duration(dur) {
        if (!(dur >= 0.0)) throw std::invalid_argument("EventList: duration must be >= 0");
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (events[i].end > duration + kBoundaryTol)
                throw std::invalid_argument("EventList: event exceeds recording duration");
            if (i > 0 && events[i].start < events[i - 1].end - kBoundaryTol)
                throw std::invalid_argument("EventList: events must be sorted and non-overlapping");
        }
    }

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }
};

struct Annotation {
    Interval segment;
    int label = 0;  // weak binary label

    Annotation() = default;
    Annotation(Interval seg, int lab) : segment(seg), label(lab) {
        if (lab != 0 && lab != 1) throw std::invalid_argument("Annotation: label must be 0 or 1");
    }
};

// Weak labels for one recording. Segments partition [0, duration]:
// first starts at 0, last ends at duration, consecutive share boundaries.
struct AnnotationList {
    std::vector<Annotation> annotations;
    double duration = 0.0;

    AnnotationList() = default;
    AnnotationList(std::vector<Annotation> anns, double dur)
        : annotations(std::move(anns)), duration(dur) {
        if (annotations.empty()) throw std::invalid_argument("AnnotationList: empty partition");
        if (std::abs(annotations.front().segment.start) > kBoundaryTol)
            throw std::invalid_argument("AnnotationList: first segment must start at 0");
        if (std::abs(annotations.back().segment.end - duration) > kBoundaryTol)
            throw std::invalid_argument("AnnotationList: last segment must end at duration");
        for (std::size_t i = 0; i < annotations.size(); ++i) {
            if (annotations[i].segment.duration() <= 0.0)
                throw std::invalid_argument("AnnotationList: zero-length segment");
            if (i > 0 &&
                std::abs(annotations[i].segment.start - annotations[i - 1].segment.end) > kBoundaryTol)
                throw std::invalid_argument("AnnotationList: segments must share boundaries");
        }
    }

    std::size_t size() const { return annotations.size(); }
};

// Maximal runs of consecutive label=1 segments merged into single events.
// Adjacency means a shared boundary (within kBoundaryTol).
inline EventList merge_positive(const AnnotationList& ann) {
    std::vector<Interval> events;
    bool open = false;
    double run_start = 0.0, run_end = 0.0;
    for (const auto& a : ann.annotations) {
        if (a.label == 1) {
            if (open && a.segment.start - run_end <= kBoundaryTol) {
                run_end = a.segment.end;
            } else {
                if (open) events.emplace_back(run_start, run_end);
                open = true;
                run_start = a.segment.start;
                run_end = a.segment.end;
            }
        } else if (open) {
            events.emplace_back(run_start, run_end);
            open = false;
        }
    }
    if (open) events.emplace_back(run_start, run_end);
    return EventList(std::move(events), ann.duration);
}

// Rasterize events onto a frame grid. Frame i spans [i*frame, (i+1)*frame);
// it is marked 1 iff it overlaps any event by strictly more than zero.
inline std::vector<std::uint8_t> frame_labels(const EventList& ev, double frame) {
    if (!(frame > 0.0)) throw std::invalid_argument("frame_labels: frame must be > 0");
    const auto n = static_cast<std::size_t>(std::ceil(ev.duration / frame - kBoundaryTol));
    std::vector<std::uint8_t> out(n, 0);
    for (const auto& e : ev.events) {
        if (e.duration() <= 0.0) continue;
        // Only frames whose span can overlap (start, end) need checking.
        const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(e.start / frame)));
        for (std::size_t i = lo; i < n; ++i) {
            const double fs = static_cast<double>(i) * frame;
            if (fs >= e.end) break;
            if (std::min(e.end, fs + frame) - std::max(e.start, fs) > 0.0) out[i] = 1;
        }
    }
    return out;
}

}  // namespace annsim
