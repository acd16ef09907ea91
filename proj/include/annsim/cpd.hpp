#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "annsim/protonet.hpp"
#include "annsim/synthgen.hpp"
#include "annsim/timeline.hpp"

namespace annsim {

enum class Strategy { acpd, fcpd, fix, orc };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::acpd: return "acpd";
        case Strategy::fcpd: return "fcpd";
        case Strategy::fix: return "fix";
        case Strategy::orc: return "orc";
    }
    throw std::logic_error("bad strategy");
}

inline Strategy strategy_from_string(const std::string& name) {
    if (name == "acpd") return Strategy::acpd;
    if (name == "fcpd") return Strategy::fcpd;
    if (name == "fix") return Strategy::fix;
    if (name == "orc") return Strategy::orc;
    throw std::invalid_argument("unknown strategy: " + name);
}

// Requested budget below the oracle's sufficient query count.
struct UnsupportedBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DistanceCurve {
    std::vector<double> values;      // >= 0
    std::vector<double> timestamps;  // strictly increasing

    std::size_t size() const { return values.size(); }
};

struct Peak {
    double time = 0.0;
    double prominence = 0.0;
    std::size_t index = 0;  // into the curve that produced it
};

struct QuerySet {
    std::vector<Interval> queries;  // partition of [0, T]
    Strategy strategy_tag = Strategy::fix;
};

namespace detail {

inline std::size_t step_from_alpha(double alpha, const std::vector<double>& timestamps) {
    if (timestamps.size() < 2) throw std::invalid_argument("curve needs at least 2 samples");
    const double hop = timestamps[1] - timestamps[0];
    const auto delta = static_cast<long>(std::lround(alpha / hop));
    if (delta < 1) throw std::invalid_argument("alpha must be at least one hop");
    return static_cast<std::size_t>(delta);
}

}  // namespace detail

// Absolute probability change between samples alpha before and after each
// point; boundary samples without both neighbours are dropped.
inline DistanceCurve acpd_curve(const ProbabilityCurve& p, double alpha) {
    if (p.size() < 3) throw std::invalid_argument("acpd_curve: need at least 3 samples");
    const std::size_t delta = detail::step_from_alpha(alpha, p.timestamps);
    if (p.size() < 2 * delta + 1) throw std::invalid_argument("acpd_curve: curve too short");
    DistanceCurve c;
    c.values.reserve(p.size() - 2 * delta);
    c.timestamps.reserve(p.size() - 2 * delta);
    for (std::size_t i = delta; i + delta < p.size(); ++i) {
        c.values.push_back(std::abs(p.values[i + delta] - p.values[i - delta]));
        c.timestamps.push_back(p.timestamps[i]);
    }
    return c;
}

// Cosine distance between the embeddings alpha before and after each point.
inline DistanceCurve fcpd_curve(const EmbeddingStream& s, double alpha) {
    if (s.size() < 3) throw std::invalid_argument("fcpd_curve: need at least 3 samples");
    const std::size_t delta = detail::step_from_alpha(alpha, s.timestamps);
    if (s.size() < 2 * delta + 1) throw std::invalid_argument("fcpd_curve: stream too short");
    std::vector<double> norms(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        double n2 = 0.0;
        for (double v : s.row(i)) n2 += v * v;
        norms[i] = std::sqrt(n2);
        if (norms[i] < 1e-300)
            throw std::invalid_argument("fcpd_curve: zero-norm embedding vector");
    }
    DistanceCurve c;
    c.values.reserve(s.size() - 2 * delta);
    c.timestamps.reserve(s.size() - 2 * delta);
    for (std::size_t i = delta; i + delta < s.size(); ++i) {
        const auto a = s.row(i - delta);
        const auto b = s.row(i + delta);
        double dot = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
        const double cosine = dot / (norms[i - delta] * norms[i + delta]);
        c.values.push_back(std::max(0.0, 1.0 - cosine));
        c.timestamps.push_back(s.timestamps[i]);
    }
    return c;
}

// Local maxima (strictly above the left neighbour, at or above the right, so
// a plateau reports its leftmost sample) ranked by distance to the nearest
// local minima: prominence = |g(t) - max(g(t_l), g(t_r))|. Curve endpoints
// count as minima but are never peak candidates.
inline std::vector<Peak> find_peaks(const DistanceCurve& c) {
    const std::size_t n = c.size();
    if (n < 3) throw std::invalid_argument("find_peaks: need at least 3 samples");
    const auto& g = c.values;
    auto is_min = [&](std::size_t i) {
        if (i == 0 || i + 1 == n) return true;
        return g[i - 1] > g[i] && g[i] <= g[i + 1];
    };
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(g[i] > g[i - 1] && g[i] >= g[i + 1])) continue;
        std::size_t left = i;
        while (left > 0 && !is_min(left - 1)) --left;
        if (left > 0) --left;
        std::size_t right = i;
        while (right + 1 < n && !is_min(right + 1)) ++right;
        if (right + 1 < n) ++right;
        peaks.push_back({c.timestamps[i], std::abs(g[i] - std::max(g[left], g[right])), i});
    }
    return peaks;
}

// The Eq.-style partition {(0, t1), (t1, t2), ..., (t_last, T)} from sorted,
// strictly interior boundary times.
inline QuerySet queries_from_boundaries(std::vector<double> boundaries, double duration,
                                        Strategy tag) {
    std::sort(boundaries.begin(), boundaries.end());
    QuerySet qs;
    qs.strategy_tag = tag;
    double prev = 0.0;
    for (double b : boundaries) {
        if (!(b > prev) || !(b < duration))
            throw std::invalid_argument("query boundaries must be interior and distinct");
        qs.queries.emplace_back(prev, b);
        prev = b;
    }
    qs.queries.emplace_back(prev, duration);
    return qs;
}

// Picks the B-1 most prominent peak times (ties broken by earlier time).
// When too few peaks exist, remaining boundaries bisect the longest current
// segment (ties broken by earlier segment) until the budget is met.
inline std::vector<double> select_boundaries(std::vector<Peak> peaks, std::size_t budget,
                                             double duration) {
    if (budget < 2) throw std::invalid_argument("select_boundaries: budget must be >= 2");
    const std::size_t wanted = budget - 1;
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.prominence != b.prominence) return a.prominence > b.prominence;
        return a.time < b.time;
    });
    if (peaks.size() > wanted) peaks.resize(wanted);
    std::vector<double> boundaries;
    boundaries.reserve(wanted);
    for (const auto& p : peaks) boundaries.push_back(p.time);
    std::sort(boundaries.begin(), boundaries.end());

    while (boundaries.size() < wanted) {
        double seg_start = 0.0, best_start = 0.0, best_len = -1.0;
        for (std::size_t i = 0; i <= boundaries.size(); ++i) {
            const double seg_end = i < boundaries.size() ? boundaries[i] : duration;
            if (seg_end - seg_start > best_len + kBoundaryTol) {
                best_len = seg_end - seg_start;
                best_start = seg_start;
            }
            seg_start = seg_end;
        }
        const double mid = best_start + best_len / 2.0;
        boundaries.insert(std::upper_bound(boundaries.begin(), boundaries.end(), mid), mid);
    }
    return boundaries;
}

inline QuerySet acpd_queries(const ProtoModel& m, const EmbeddingStream& s, std::size_t budget) {
    if (budget < 2) throw std::invalid_argument("acpd_queries: budget must be >= 2");
    const auto curve = acpd_curve(probability_curve(m, s), s.hop);
    return queries_from_boundaries(select_boundaries(find_peaks(curve), budget, s.duration),
                                   s.duration, Strategy::acpd);
}

inline QuerySet fcpd_queries(const EmbeddingStream& s, std::size_t budget) {
    if (budget < 2) throw std::invalid_argument("fcpd_queries: budget must be >= 2");
    const auto curve = fcpd_curve(s, s.hop);
    return queries_from_boundaries(select_boundaries(find_peaks(curve), budget, s.duration),
                                   s.duration, Strategy::fcpd);
}

inline QuerySet fix_queries(double duration, std::size_t budget) {
    if (budget < 1) throw std::invalid_argument("fix_queries: budget must be >= 1");
    const double d = duration / static_cast<double>(budget);
    QuerySet qs;
    qs.strategy_tag = Strategy::fix;
    for (std::size_t i = 0; i < budget; ++i) {
        const double start = static_cast<double>(i) * d;
        const double end = i + 1 == budget ? duration : static_cast<double>(i + 1) * d;
        qs.queries.emplace_back(start, end);
    }
    return qs;
}

// Sufficient query count for exact strong-label recovery: one query per
// constant-label run, 2M+1 when all M events are strictly interior.
inline std::size_t sufficient_budget(const EventList& gt) {
    std::size_t count = 0;
    double cursor = 0.0;
    for (const auto& e : gt.events) {
        if (e.start - cursor > kBoundaryTol) ++count;  // absence run
        ++count;                                       // presence run
        cursor = e.end;
    }
    if (gt.duration - cursor > kBoundaryTol) ++count;
    return count;
}

// Maximal constant-label partition taken straight from the ground truth.
inline QuerySet orc_queries(const EventList& gt) {
    QuerySet qs;
    qs.strategy_tag = Strategy::orc;
    double cursor = 0.0;
    for (const auto& e : gt.events) {
        if (e.duration() <= kBoundaryTol)
            throw std::invalid_argument("orc_queries: zero-length event");
        if (e.start - cursor > kBoundaryTol) qs.queries.emplace_back(cursor, e.start);
        qs.queries.emplace_back(e.start, e.end);
        cursor = e.end;
    }
    if (gt.duration - cursor > kBoundaryTol) qs.queries.emplace_back(cursor, gt.duration);
    if (qs.queries.empty()) throw std::invalid_argument("orc_queries: empty recording");
    return qs;
}

}  // namespace annsim
