#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "annsim/timeline.hpp"

namespace annsim {

struct F1Report {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
};

// 0/0 ratios collapse to 0 so empty-vs-empty scores 0, not NaN.
inline F1Report from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    F1Report r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double pr = r.precision + r.recall;
    r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
    return r;
}

namespace detail {

struct Counts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    Counts& operator+=(const Counts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

inline void require_equal_durations(const EventList& pred, const EventList& gt) {
    if (std::abs(pred.duration - gt.duration) > kBoundaryTol)
        throw std::invalid_argument("f1: prediction and ground truth cover different durations");
}

inline Counts segment_counts(const EventList& pred, const EventList& gt, double frame) {
    if (!(frame > 0.0)) throw std::invalid_argument("segment_f1: frame must be > 0");
    require_equal_durations(pred, gt);
    const auto p = frame_labels(pred, frame);
    const auto g = frame_labels(gt, frame);
    Counts c;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] && g[i])
            ++c.tp;
        else if (p[i])
            ++c.fp;
        else if (g[i])
            ++c.fn;
    }
    return c;
}

// Greedy one-to-one matching in onset order: each predicted event takes the
// earliest unmatched ground-truth event whose onset and offset both fall
// within the collar. The offset tolerance widens to rel_offset x event length
// when that exceeds the collar (0 = plain collar).
inline Counts event_counts(const EventList& pred, const EventList& gt, double collar,
                           double rel_offset) {
    if (collar < 0.0) throw std::invalid_argument("event_f1: collar must be >= 0");
    if (rel_offset < 0.0) throw std::invalid_argument("event_f1: rel_offset must be >= 0");
    require_equal_durations(pred, gt);
    std::vector<bool> matched(gt.events.size(), false);
    Counts c;
    for (const auto& p : pred.events) {
        bool hit = false;
        for (std::size_t j = 0; j < gt.events.size(); ++j) {
            if (matched[j]) continue;
            const auto& g = gt.events[j];
            const double offset_tol = std::max(collar, rel_offset * g.duration());
            if (std::abs(p.start - g.start) <= collar && std::abs(p.end - g.end) <= offset_tol) {
                matched[j] = true;
                hit = true;
                break;
            }
        }
        hit ? ++c.tp : ++c.fp;
    }
    for (const bool m : matched)
        if (!m) ++c.fn;
    return c;
}

}  // namespace detail

inline F1Report segment_f1(const EventList& pred, const EventList& gt, double frame = 0.05) {
    const auto c = detail::segment_counts(pred, gt, frame);
    return from_counts(c.tp, c.fp, c.fn);
}

inline F1Report event_f1(const EventList& pred, const EventList& gt, double collar = 0.5,
                         double rel_offset = 0.0) {
    const auto c = detail::event_counts(pred, gt, collar, rel_offset);
    return from_counts(c.tp, c.fp, c.fn);
}

// Micro-pooled scores: tp/fp/fn are summed over all (pred, gt) pairs before
// the F1 formula is applied, so long recordings weigh more than short ones.
inline F1Report pooled_segment_f1(const std::vector<EventList>& pred,
                                  const std::vector<EventList>& gt, double frame = 0.05) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("pooled_segment_f1: list size mismatch");
    detail::Counts c;
    for (std::size_t i = 0; i < pred.size(); ++i)
        c += detail::segment_counts(pred[i], gt[i], frame);
    return from_counts(c.tp, c.fp, c.fn);
}

inline F1Report pooled_event_f1(const std::vector<EventList>& pred,
                                const std::vector<EventList>& gt, double collar = 0.5,
                                double rel_offset = 0.0) {
    if (pred.size() != gt.size()) throw std::invalid_argument("pooled_event_f1: list size mismatch");
    detail::Counts c;
    for (std::size_t i = 0; i < pred.size(); ++i)
        c += detail::event_counts(pred[i], gt[i], collar, rel_offset);
    return from_counts(c.tp, c.fp, c.fn);
}

}  // namespace annsim
