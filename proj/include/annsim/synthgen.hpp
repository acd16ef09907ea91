#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "annsim/io.hpp"
#include "annsim/rng.hpp"
#include "annsim/timeline.hpp"

namespace annsim {

// Generation parameters for one synthetic dataset. Events shift the mean of
// the embedding stream along a class direction; `separation` scales that
// shift against per-coordinate Gaussian noise of width `noise_sigma`.
struct DatasetSpec {
    std::size_t n_recordings = 300;
    double duration = 30.0;
    std::size_t events_per_recording = 3;
    double event_duration_min = 0.5;
    double event_duration_max = 4.0;
    double min_event_gap = 1.0;
    std::size_t embedding_dim = 16;
    double window_len = 1.0;
    double hop = 0.25;
    std::string class_id = "classA";
    double separation = 2.0;
    double noise_sigma = 0.5;
    std::uint64_t seed = 42;

    void validate() const {
        if (n_recordings < 1) throw std::invalid_argument("spec: n_recordings must be >= 1");
        if (events_per_recording < 1) throw std::invalid_argument("spec: need at least one event");
        if (!(event_duration_min > 0.0) || event_duration_min > event_duration_max)
            throw std::invalid_argument("spec: bad event duration range");
        if (!(min_event_gap >= 0.0)) throw std::invalid_argument("spec: min_event_gap must be >= 0");
        if (embedding_dim < 1) throw std::invalid_argument("spec: embedding_dim must be >= 1");
        if (!(window_len > 0.0) || window_len > duration)
            throw std::invalid_argument("spec: window must fit inside the recording");
        if (std::abs(hop - window_len / 4.0) > kBoundaryTol)
            throw std::invalid_argument("spec: hop must equal window_len / 4");
        if (!(separation > 0.0)) throw std::invalid_argument("spec: separation must be > 0");
        if (!(noise_sigma > 0.0)) throw std::invalid_argument("spec: noise_sigma must be > 0");
        const double m = static_cast<double>(events_per_recording);
        const double needed = m * event_duration_max + (m + 1.0) * min_event_gap;
        if (duration < needed - kBoundaryTol)
            throw std::invalid_argument("spec: recording too short to place events with gaps");
    }
};

// Built-in dataset presets of increasing event length and varying contrast.
inline DatasetSpec preset(const std::string& name) {
    DatasetSpec spec;
    spec.class_id = name;
    if (name == "classA") {
        spec.event_duration_min = 0.5;
        spec.event_duration_max = 2.5;
        spec.separation = 2.0;
        spec.noise_sigma = 0.095;
    } else if (name == "classB") {
        spec.event_duration_min = 0.5;
        spec.event_duration_max = 2.0;
        spec.separation = 2.6;
        spec.noise_sigma = 0.13;
    } else if (name == "classC") {
        spec.event_duration_min = 1.5;
        spec.event_duration_max = 5.0;
        spec.separation = 3.0;
        spec.noise_sigma = 0.095;
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return spec;
}

// Per-window embedding vectors on a regular grid of window centers.
struct EmbeddingStream {
    std::size_t dim = 0;
    double window_len = 0.0;
    double hop = 0.0;
    double duration = 0.0;           // recording length the stream covers
    std::vector<double> timestamps;  // window centers, strictly increasing
    std::vector<double> values;      // row-major, size() * dim

    std::size_t size() const { return timestamps.size(); }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }
};

inline std::size_t window_count(double duration, double window_len, double hop) {
    if (window_len > duration) return 0;
    return static_cast<std::size_t>(std::floor((duration - window_len) / hop + kBoundaryTol)) + 1;
}

struct Recording {
    std::uint32_t id = 0;
    EventList ground_truth;
    EmbeddingStream stream;
};

inline std::string recording_name(std::uint32_t id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rec_%04u", id);
    return buf;
}

struct LabeledExample {
    std::vector<double> features;
    int label = 0;
};

// Background and class directions are fixed per dataset.
struct ClassDirections {
    std::vector<double> mu_bg;
    std::vector<double> mu_class;
};

namespace detail {

// Unit vector orthogonal to `ref`, obtained by projecting out the `ref`
// component of fresh draws. Keeps the class shift at right angles to the
// background so `separation` sets the embedding contrast exactly, instead of
// contrast being scaled by the luck of the two draws' alignment.
inline std::vector<double> orthonormal_against(rng::Engine& gen, std::size_t dim,
                                               const std::vector<double>& ref) {
    for (;;) {
        auto v = rng::unit_vector(gen, dim);
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) dot += v[k] * ref[k];
        double norm2 = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            v[k] -= dot * ref[k];
            norm2 += v[k] * v[k];
        }
        if (norm2 > 1e-12) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (auto& x : v) x *= inv;
            return v;
        }
    }
}

}  // namespace detail

// Directions are a property of the sound class itself (a fixed embedder maps
// one class to one region of embedding space), so they derive from class_id,
// not from the dataset seed: train and test splits of a class share geometry
// while their event placements and noise stay independent.
inline ClassDirections dataset_directions(const DatasetSpec& spec) {
    auto gen = rng::engine(rng::derive(rng::hash_string(spec.class_id), rng::Stream::directions));
    ClassDirections dirs;
    dirs.mu_bg = rng::unit_vector(gen, spec.embedding_dim);
    dirs.mu_class = detail::orthonormal_against(gen, spec.embedding_dim, dirs.mu_bg);
    return dirs;
}

// Mean is mu_bg + rho * separation * mu_class where rho is the fraction of
// the window covered by events; partial coverage interpolates linearly.
inline std::vector<double> embed_window(double t_center, const EventList& gt,
                                        const DatasetSpec& spec, const ClassDirections& dirs,
                                        rng::Engine& gen) {
    const double half = spec.window_len / 2.0;
    if (t_center - half < -kBoundaryTol || t_center + half > gt.duration + kBoundaryTol)
        throw std::invalid_argument("embed_window: window outside the recording");
    const Interval window(std::max(0.0, t_center - half), t_center + half);
    double covered = 0.0;
    for (const auto& e : gt.events) covered += intersect(window, e);
    const double rho = covered / spec.window_len;

    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(spec.embedding_dim);
    for (std::size_t k = 0; k < spec.embedding_dim; ++k)
        v[k] = dirs.mu_bg[k] + rho * spec.separation * dirs.mu_class[k] +
               spec.noise_sigma * normal(gen);
    return v;
}

inline std::vector<double> embed_window(double t_center, const EventList& gt,
                                        const DatasetSpec& spec, rng::Engine& gen) {
    return embed_window(t_center, gt, spec, dataset_directions(spec), gen);
}

namespace detail {

// Exactly M events, pairwise gaps >= min_event_gap, and the same clearance
// from both recording boundaries. Leftover slack is spread uniformly by
// sorting M uniform cuts.
inline EventList place_events(const DatasetSpec& spec, rng::Engine& gen) {
    const std::size_t m = spec.events_per_recording;
    std::uniform_real_distribution<double> dur_dist(spec.event_duration_min,
                                                    spec.event_duration_max);
    std::vector<double> durations(m);
    double total = 0.0;
    for (auto& d : durations) {
        d = dur_dist(gen);
        total += d;
    }
    const double slack =
        spec.duration - total - static_cast<double>(m + 1) * spec.min_event_gap;
    if (slack < -kBoundaryTol)
        throw std::invalid_argument("place_events: events do not fit");

    std::uniform_real_distribution<double> cut_dist(0.0, std::max(0.0, slack));
    std::vector<double> cuts(m);
    for (auto& c : cuts) c = cut_dist(gen);
    std::sort(cuts.begin(), cuts.end());

    std::vector<Interval> events;
    events.reserve(m);
    double pos = spec.min_event_gap + cuts.front();
    double prev_cut = cuts.front();
    for (std::size_t i = 0; i < m; ++i) {
        if (i > 0) {
            pos += spec.min_event_gap + (cuts[i] - prev_cut);
            prev_cut = cuts[i];
        }
        events.emplace_back(pos, pos + durations[i]);
        pos += durations[i];
    }
    return EventList(std::move(events), spec.duration);
}

}  // namespace detail

inline EmbeddingStream make_stream(const EventList& gt, const DatasetSpec& spec,
                                   const ClassDirections& dirs, rng::Engine& gen) {
    EmbeddingStream stream;
    stream.dim = spec.embedding_dim;
    stream.window_len = spec.window_len;
    stream.hop = spec.hop;
    stream.duration = spec.duration;
    const std::size_t n = window_count(spec.duration, spec.window_len, spec.hop);
    stream.timestamps.reserve(n);
    stream.values.reserve(n * spec.embedding_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = spec.window_len / 2.0 + static_cast<double>(i) * spec.hop;
        stream.timestamps.push_back(t);
        const auto v = embed_window(t, gt, spec, dirs, gen);
        stream.values.insert(stream.values.end(), v.begin(), v.end());
    }
    return stream;
}

// Deterministic in (spec, seed); recordings use per-index derived seeds so
// serial and parallel generation agree bit for bit.
inline std::vector<Recording> generate_dataset(const DatasetSpec& spec) {
    spec.validate();
    const auto dirs = dataset_directions(spec);
    std::vector<Recording> out(spec.n_recordings);
    for (std::size_t i = 0; i < spec.n_recordings; ++i) {
        auto gen = rng::engine(rng::derive(spec.seed, rng::Stream::recording, i));
        out[i].id = static_cast<std::uint32_t>(i);
        out[i].ground_truth = detail::place_events(spec, gen);
        out[i].stream = make_stream(out[i].ground_truth, spec, dirs, gen);
    }
    return out;
}

// Direction of the disjoint pre-training class; tied to class identity like
// dataset_directions, distinct from mu_class by an independent draw but kept
// orthogonal to the background for the same contrast reasons.
inline std::vector<double> disjoint_direction(const DatasetSpec& spec) {
    auto gen =
        rng::engine(rng::derive(rng::hash_string(spec.class_id), rng::Stream::disjoint_class));
    return detail::orthonormal_against(gen, spec.embedding_dim, dataset_directions(spec).mu_bg);
}

// Labeled vectors for prototype initialization. Positives follow a class
// direction disjoint from the dataset's own, negatives are background.
inline std::vector<LabeledExample> pretraining_set(const DatasetSpec& spec, std::size_t n_pos,
                                                   std::size_t n_neg) {
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("pretraining_set: both classes must be non-empty");
    auto gen = rng::engine(rng::derive(spec.seed, rng::Stream::pretraining));
    const auto mu_disjoint = disjoint_direction(spec);
    const auto dirs = dataset_directions(spec);

    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<LabeledExample> out;
    out.reserve(n_pos + n_neg);
    for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
        const bool positive = i < n_pos;
        LabeledExample ex;
        ex.label = positive ? 1 : 0;
        ex.features.resize(spec.embedding_dim);
        for (std::size_t k = 0; k < spec.embedding_dim; ++k) {
            const double shift = positive ? spec.separation * mu_disjoint[k] : 0.0;
            ex.features[k] = dirs.mu_bg[k] + shift + spec.noise_sigma * normal(gen);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

// --- dataset directory persistence ---

inline std::map<std::string, std::string> spec_to_keyvalue(const DatasetSpec& spec) {
    auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    return {
        {"n_recordings", std::to_string(spec.n_recordings)},
        {"duration", fmt(spec.duration)},
        {"events_per_recording", std::to_string(spec.events_per_recording)},
        {"event_duration_min", fmt(spec.event_duration_min)},
        {"event_duration_max", fmt(spec.event_duration_max)},
        {"min_event_gap", fmt(spec.min_event_gap)},
        {"embedding_dim", std::to_string(spec.embedding_dim)},
        {"window_len", fmt(spec.window_len)},
        {"hop", fmt(spec.hop)},
        {"class_id", spec.class_id},
        {"separation", fmt(spec.separation)},
        {"noise_sigma", fmt(spec.noise_sigma)},
        {"seed", std::to_string(spec.seed)},
    };
}

inline DatasetSpec spec_from_keyvalue(const std::map<std::string, std::string>& kv) {
    DatasetSpec spec;
    auto need = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error("dataset meta missing key: " + key);
        return it->second;
    };
    spec.n_recordings = std::stoull(need("n_recordings"));
    spec.duration = io::detail::parse_double(need("duration"), "duration");
    spec.events_per_recording = std::stoull(need("events_per_recording"));
    spec.event_duration_min = io::detail::parse_double(need("event_duration_min"), "meta");
    spec.event_duration_max = io::detail::parse_double(need("event_duration_max"), "meta");
    spec.min_event_gap = io::detail::parse_double(need("min_event_gap"), "meta");
    spec.embedding_dim = std::stoull(need("embedding_dim"));
    spec.window_len = io::detail::parse_double(need("window_len"), "meta");
    spec.hop = io::detail::parse_double(need("hop"), "meta");
    spec.class_id = need("class_id");
    spec.separation = io::detail::parse_double(need("separation"), "meta");
    spec.noise_sigma = io::detail::parse_double(need("noise_sigma"), "meta");
    spec.seed = std::stoull(need("seed"));
    return spec;
}

inline void write_embeddings(const std::filesystem::path& path, const EmbeddingStream& stream) {
    auto out = io::detail::open_out(path, /*binary=*/true);
    out.write("EMB1", 4);
    io::detail::put_u32_le(out, static_cast<std::uint32_t>(stream.dim));
    io::detail::put_u32_le(out, static_cast<std::uint32_t>(stream.size()));
    io::detail::put_f32_le(out, static_cast<float>(stream.hop));
    for (double v : stream.values) io::detail::put_f32_le(out, static_cast<float>(v));
}

inline EmbeddingStream read_embeddings(const std::filesystem::path& path, double window_len,
                                       double hop, double duration) {
    auto in = io::detail::open_in(path, /*binary=*/true);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "EMB1")
        throw std::runtime_error("bad embedding file magic: " + path.string());
    EmbeddingStream stream;
    stream.dim = io::detail::get_u32_le(in);
    const std::uint32_t rows = io::detail::get_u32_le(in);
    const float stored_hop = io::detail::get_f32_le(in);
    if (std::abs(static_cast<double>(stored_hop) - hop) > 1e-6)
        throw std::runtime_error("embedding hop does not match dataset meta");
    stream.window_len = window_len;
    stream.hop = hop;
    stream.duration = duration;
    stream.values.resize(static_cast<std::size_t>(rows) * stream.dim);
    for (auto& v : stream.values) v = io::detail::get_f32_le(in);
    if (!in) throw std::runtime_error("truncated embedding file: " + path.string());
    stream.timestamps.resize(rows);
    for (std::uint32_t i = 0; i < rows; ++i)
        stream.timestamps[i] = window_len / 2.0 + static_cast<double>(i) * hop;
    return stream;
}

inline void save_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                         const std::vector<Recording>& recordings, bool force = false) {
    namespace fs = std::filesystem;
    const auto meta = dir / "meta";
    if (fs::exists(meta) && !force)
        throw std::runtime_error("dataset already exists (use force): " + dir.string());
    fs::create_directories(dir);
    io::write_keyvalue(meta, spec_to_keyvalue(spec));
    for (const auto& rec : recordings) {
        const auto name = recording_name(rec.id);
        io::write_events(dir / (name + ".events"), rec.ground_truth);
        write_embeddings(dir / (name + ".emb"), rec.stream);
    }
}

inline std::pair<DatasetSpec, std::vector<Recording>> load_dataset(
    const std::filesystem::path& dir) {
    const auto spec = spec_from_keyvalue(io::read_keyvalue(dir / "meta"));
    std::vector<Recording> recordings(spec.n_recordings);
    for (std::size_t i = 0; i < spec.n_recordings; ++i) {
        auto& rec = recordings[i];
        rec.id = static_cast<std::uint32_t>(i);
        const auto name = recording_name(rec.id);
        rec.ground_truth = io::read_events(dir / (name + ".events"), spec.duration);
        rec.stream =
            read_embeddings(dir / (name + ".emb"), spec.window_len, spec.hop, spec.duration);
        if (rec.stream.dim != spec.embedding_dim)
            throw std::runtime_error("embedding dim does not match dataset meta");
    }
    return {spec, std::move(recordings)};
}

}  // namespace annsim
