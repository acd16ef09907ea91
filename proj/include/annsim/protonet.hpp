#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "annsim/io.hpp"
#include "annsim/synthgen.hpp"
#include "annsim/timeline.hpp"

namespace annsim {

// Presence probabilities per stream window.
struct ProbabilityCurve {
    std::vector<double> values;      // in [0, 1]
    std::vector<double> timestamps;  // window centers

    std::size_t size() const { return values.size(); }
};

// Prototype pair with running-average state. Counts span the whole
// annotation session, not one recording.
struct ProtoModel {
    std::vector<double> proto_pos;
    std::vector<double> proto_neg;
    double count_pos = 0.0;
    double count_neg = 0.0;

    std::size_t dim() const { return proto_pos.size(); }
    bool initialized() const { return count_pos >= 1.0 && count_neg >= 1.0; }
};

namespace detail {

inline std::vector<double> mean_of(std::span<const std::vector<double>> vectors) {
    std::vector<double> mean(vectors.front().size(), 0.0);
    for (const auto& v : vectors) {
        if (v.size() != mean.size())
            throw std::invalid_argument("prototype vectors must share one dimension");
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += v[k];
    }
    const double inv = 1.0 / static_cast<double>(vectors.size());
    for (auto& x : mean) x *= inv;
    return mean;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return d2;
}

}  // namespace detail

inline ProtoModel init_from_pretraining(std::span<const std::vector<double>> pos,
                                        std::span<const std::vector<double>> neg) {
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("init_from_pretraining: both classes must be non-empty");
    ProtoModel m;
    m.proto_pos = detail::mean_of(pos);
    m.proto_neg = detail::mean_of(neg);
    if (m.proto_pos.size() != m.proto_neg.size())
        throw std::invalid_argument("init_from_pretraining: dimension mismatch");
    m.count_pos = static_cast<double>(pos.size());
    m.count_neg = static_cast<double>(neg.size());
    return m;
}

inline ProtoModel init_from_pretraining(std::span<const LabeledExample> examples) {
    std::vector<std::vector<double>> pos, neg;
    for (const auto& ex : examples) (ex.label == 1 ? pos : neg).push_back(ex.features);
    return init_from_pretraining(std::span<const std::vector<double>>(pos),
                                 std::span<const std::vector<double>>(neg));
}

// Two-class softmax over negative squared Euclidean distances, which reduces
// to a logistic of the distance difference.
inline double predict_prob(const ProtoModel& m, std::span<const double> e) {
    if (!m.initialized()) throw std::logic_error("predict_prob: model not initialized");
    if (e.size() != m.dim()) throw std::invalid_argument("predict_prob: dimension mismatch");
    const double z = detail::squared_distance(e, m.proto_neg) -
                     detail::squared_distance(e, m.proto_pos);
    return 1.0 / (1.0 + std::exp(-z));
}

inline ProbabilityCurve probability_curve(const ProtoModel& m, const EmbeddingStream& s) {
    ProbabilityCurve curve;
    curve.timestamps = s.timestamps;
    curve.values.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) curve.values.push_back(predict_prob(m, s.row(i)));
    return curve;
}

// Index of the annotated segment that fully contains [t - half, t + half],
// or -1 when the window straddles a boundary.
inline int containing_segment(const AnnotationList& ann, double t_center, double window_len) {
    const double lo = t_center - window_len / 2.0;
    const double hi = t_center + window_len / 2.0;
    for (std::size_t i = 0; i < ann.annotations.size(); ++i) {
        const auto& seg = ann.annotations[i].segment;
        if (lo >= seg.start - kBoundaryTol && hi <= seg.end + kBoundaryTol)
            return static_cast<int>(i);
    }
    return -1;
}

// Running-average update: every window lying entirely inside one annotated
// segment contributes to that segment's class prototype. Windows straddling
// segment boundaries are skipped.
inline ProtoModel update(const ProtoModel& m, const AnnotationList& ann,
                         const EmbeddingStream& s) {
    if (!m.initialized()) throw std::logic_error("update: model not initialized");
    std::vector<double> sum_pos(m.dim(), 0.0), sum_neg(m.dim(), 0.0);
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const int seg = containing_segment(ann, s.timestamps[i], s.window_len);
        if (seg < 0) continue;
        auto& sum = ann.annotations[static_cast<std::size_t>(seg)].label == 1 ? sum_pos : sum_neg;
        auto& n = ann.annotations[static_cast<std::size_t>(seg)].label == 1 ? n_pos : n_neg;
        const auto row = s.row(i);
        for (std::size_t k = 0; k < m.dim(); ++k) sum[k] += row[k];
        ++n;
    }
    ProtoModel out = m;
    if (n_pos > 0) {
        const double total = m.count_pos + static_cast<double>(n_pos);
        for (std::size_t k = 0; k < m.dim(); ++k)
            out.proto_pos[k] = (m.count_pos * m.proto_pos[k] + sum_pos[k]) / total;
        out.count_pos = total;
    }
    if (n_neg > 0) {
        const double total = m.count_neg + static_cast<double>(n_neg);
        for (std::size_t k = 0; k < m.dim(); ++k)
            out.proto_neg[k] = (m.count_neg * m.proto_neg[k] + sum_neg[k]) / total;
        out.count_neg = total;
    }
    return out;
}

// --- model state persistence ---

inline void save_model(const std::filesystem::path& path, const ProtoModel& m) {
    auto out = io::detail::open_out(path, /*binary=*/true);
    out.write("PRO1", 4);
    io::detail::put_u32_le(out, static_cast<std::uint32_t>(m.dim()));
    io::detail::put_f64_le(out, m.count_pos);
    io::detail::put_f64_le(out, m.count_neg);
    for (double v : m.proto_pos) io::detail::put_f64_le(out, v);
    for (double v : m.proto_neg) io::detail::put_f64_le(out, v);
}

inline ProtoModel load_model(const std::filesystem::path& path) {
    auto in = io::detail::open_in(path, /*binary=*/true);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "PRO1")
        throw std::runtime_error("bad model file magic: " + path.string());
    ProtoModel m;
    const std::uint32_t dim = io::detail::get_u32_le(in);
    m.count_pos = io::detail::get_f64_le(in);
    m.count_neg = io::detail::get_f64_le(in);
    m.proto_pos.resize(dim);
    m.proto_neg.resize(dim);
    for (auto& v : m.proto_pos) v = io::detail::get_f64_le(in);
    for (auto& v : m.proto_neg) v = io::detail::get_f64_le(in);
    if (!in) throw std::runtime_error("truncated model file: " + path.string());
    return m;
}

}  // namespace annsim
