#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "annsim/looprunner.hpp"
#include "annsim/metrics.hpp"
#include "annsim/protonet.hpp"
#include "annsim/rng.hpp"
#include "annsim/synthgen.hpp"

namespace annsim {

// Raised when a training set contains only one class; such annotation
// sessions cannot train a discriminative model.
struct DegenerateTrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    std::size_t hidden = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 20;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;

    void validate() const {
        if (hidden < 1) throw std::invalid_argument("train: hidden width must be >= 1");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
            throw std::invalid_argument("train: betas must lie in [0, 1)");
        if (!(epsilon > 0.0)) throw std::invalid_argument("train: epsilon must be > 0");
        if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    }
};

// Two-layer perceptron: softmax(W2 relu(W1 x + b1) + b2) over {absent, present}.
struct MlpModel {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    std::vector<double> w1;  // hidden x input_dim, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // 2 x hidden, row-major
    std::vector<double> b2;  // 2
};

struct MlpGradient {
    std::vector<double> w1, b1, w2, b2;
};

namespace detail {

struct MlpForward {
    std::vector<double> z1, a1;  // hidden pre/post relu
    double z2[2] = {0.0, 0.0};
    double p[2] = {0.0, 0.0};  // softmax
};

inline void mlp_forward(const MlpModel& m, std::span<const double> x, MlpForward& f) {
    const std::size_t h = m.hidden, k = m.input_dim;
    if (x.size() != k) throw std::invalid_argument("mlp: input dimension mismatch");
    f.z1.assign(h, 0.0);
    f.a1.assign(h, 0.0);
    for (std::size_t j = 0; j < h; ++j) {
        double z = m.b1[j];
        const double* row = m.w1.data() + j * k;
        for (std::size_t i = 0; i < k; ++i) z += row[i] * x[i];
        f.z1[j] = z;
        f.a1[j] = z > 0.0 ? z : 0.0;
    }
    for (std::size_t c = 0; c < 2; ++c) {
        double z = m.b2[c];
        const double* row = m.w2.data() + c * h;
        for (std::size_t j = 0; j < h; ++j) z += row[j] * f.a1[j];
        f.z2[c] = z;
    }
    const double zmax = std::max(f.z2[0], f.z2[1]);
    const double e0 = std::exp(f.z2[0] - zmax), e1 = std::exp(f.z2[1] - zmax);
    f.p[0] = e0 / (e0 + e1);
    f.p[1] = e1 / (e0 + e1);
}

}  // namespace detail

inline double mlp_predict_prob(const MlpModel& m, std::span<const double> x) {
    detail::MlpForward f;
    detail::mlp_forward(m, x, f);
    return f.p[1];
}

// Mean cross-entropy over the batch plus its analytic gradient.
inline std::pair<double, MlpGradient> loss_and_gradient(const MlpModel& m,
                                                        std::span<const LabeledExample> batch) {
    if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    const std::size_t h = m.hidden, k = m.input_dim;
    MlpGradient g{std::vector<double>(h * k, 0.0), std::vector<double>(h, 0.0),
                  std::vector<double>(2 * h, 0.0), std::vector<double>(2, 0.0)};
    double loss = 0.0;
    detail::MlpForward f;
    for (const auto& ex : batch) {
        detail::mlp_forward(m, ex.features, f);
        const int y = ex.label ? 1 : 0;
        const double zmax = std::max(f.z2[0], f.z2[1]);
        loss += std::log(std::exp(f.z2[0] - zmax) + std::exp(f.z2[1] - zmax)) - (f.z2[y] - zmax);
        double dz2[2] = {f.p[0] - (y == 0 ? 1.0 : 0.0), f.p[1] - (y == 1 ? 1.0 : 0.0)};
        for (std::size_t c = 0; c < 2; ++c) {
            g.b2[c] += dz2[c];
            double* grow = g.w2.data() + c * h;
            for (std::size_t j = 0; j < h; ++j) grow[j] += dz2[c] * f.a1[j];
        }
        for (std::size_t j = 0; j < h; ++j) {
            if (f.z1[j] <= 0.0) continue;
            const double dz1 = m.w2[j] * dz2[0] + m.w2[h + j] * dz2[1];
            g.b1[j] += dz1;
            double* grow = g.w1.data() + j * k;
            for (std::size_t i = 0; i < k; ++i) grow[i] += dz1 * ex.features[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto* v : {&g.w1, &g.b1, &g.w2, &g.b2})
        for (auto& x : *v) x *= inv;
    return {loss * inv, g};
}

inline MlpModel init_mlp(std::size_t input_dim, std::size_t hidden, rng::Engine& gen) {
    MlpModel m;
    m.input_dim = input_dim;
    m.hidden = hidden;
    m.w1.resize(hidden * input_dim);
    m.b1.assign(hidden, 0.0);
    m.w2.resize(2 * hidden);
    m.b2.assign(2, 0.0);
    std::normal_distribution<double> n1(0.0, std::sqrt(2.0 / static_cast<double>(input_dim)));
    std::normal_distribution<double> n2(0.0, std::sqrt(2.0 / static_cast<double>(hidden)));
    for (auto& w : m.w1) w = n1(gen);
    for (auto& w : m.w2) w = n2(gen);
    return m;
}

// One Adam update with bias-corrected moments; `step` counts from 1.
inline void adam_step(std::vector<double>& param, const std::vector<double>& grad,
                      std::vector<double>& m, std::vector<double>& v, std::size_t step,
                      const TrainConfig& cfg) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        param[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.epsilon);
    }
}

// Adam over seeded mini-batches. Deterministic given cfg.seed. epoch_losses,
// when given, receives one mean training loss per epoch (measured before
// each step, averaged over examples).
inline MlpModel train_mlp(std::span<const LabeledExample> ds, const TrainConfig& cfg,
                          std::vector<double>* epoch_losses = nullptr) {
    cfg.validate();
    if (ds.empty()) throw std::invalid_argument("train_mlp: empty training set");
    const std::size_t k = ds.front().features.size();
    bool has_pos = false, has_neg = false;
    for (const auto& ex : ds) {
        if (ex.features.size() != k)
            throw std::invalid_argument("train_mlp: inconsistent feature dimension");
        (ex.label ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw DegenerateTrainingError("train_mlp: training set contains a single class");

    auto gen = rng::engine(rng::derive(cfg.seed, rng::Stream::mlp));
    MlpModel m = init_mlp(k, cfg.hidden, gen);
    MlpGradient mom{std::vector<double>(m.w1.size(), 0.0), std::vector<double>(m.b1.size(), 0.0),
                    std::vector<double>(m.w2.size(), 0.0), std::vector<double>(m.b2.size(), 0.0)};
    MlpGradient vel = mom;
    std::size_t step = 0;

    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<LabeledExample> batch;
    if (epoch_losses) epoch_losses->clear();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), gen);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            batch.clear();
            for (std::size_t i = begin; i < end; ++i) batch.push_back(ds[order[i]]);
            auto [loss, grad] = loss_and_gradient(m, batch);
            epoch_loss += loss * static_cast<double>(end - begin);
            ++step;
            adam_step(m.w1, grad.w1, mom.w1, vel.w1, step, cfg);
            adam_step(m.b1, grad.b1, mom.b1, vel.b1, step, cfg);
            adam_step(m.w2, grad.w2, mom.w2, vel.w2, step, cfg);
            adam_step(m.b2, grad.b2, mom.b2, vel.b2, step, cfg);
        }
        if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(ds.size()));
    }
    return m;
}

// --- training sets from annotation sessions ---

// Every embedding window fully inside one annotated segment becomes a
// (vector, segment label) pair; windows straddling boundaries are dropped.
inline std::vector<LabeledExample> build_training_set(const SessionResult& session,
                                                      std::span<const Recording> data) {
    if (session.annotations.size() != data.size())
        throw std::invalid_argument("build_training_set: session does not cover the dataset");
    std::vector<LabeledExample> out;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto& stream = data[r].stream;
        const auto& ann = session.annotations[r];
        for (std::size_t i = 0; i < stream.size(); ++i) {
            const int seg = containing_segment(ann, stream.timestamps[i], stream.window_len);
            if (seg < 0) continue;
            const auto row = stream.row(i);
            out.push_back({{row.begin(), row.end()}, ann.annotations[seg].label});
        }
    }
    return out;
}

// Class-mean prototypes straight from the training set (no pre-training).
inline ProtoModel train_protonet_eval(std::span<const LabeledExample> ds) {
    bool has_pos = false, has_neg = false;
    for (const auto& ex : ds) (ex.label ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DegenerateTrainingError("train_protonet_eval: training set contains a single class");
    return init_from_pretraining(ds);
}

// --- scoring on held-out recordings ---

// Positive windows (probability >= 0.5) become events: each window spans
// [t - L/2, t + L/2]; overlapping spans are unioned.
template <typename Predict>
EventList predicted_events(Predict&& predict, const Recording& rec) {
    const auto& s = rec.stream;
    const double half = s.window_len / 2.0;
    std::vector<Interval> spans;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (predict(s.row(i)) < 0.5) continue;
        const double lo = std::max(0.0, s.timestamps[i] - half);
        const double hi = std::min(s.duration, s.timestamps[i] + half);
        if (!spans.empty() && lo <= spans.back().end + kBoundaryTol)
            spans.back() = Interval(spans.back().start, std::max(spans.back().end, hi));
        else
            spans.emplace_back(lo, hi);
    }
    return EventList(std::move(spans), s.duration);
}

template <typename Predict>
F1Report evaluate_predictor(Predict&& predict, std::span<const Recording> test,
                            double frame = 0.05) {
    std::vector<EventList> pred, gt;
    pred.reserve(test.size());
    gt.reserve(test.size());
    for (const auto& rec : test) {
        pred.push_back(predicted_events(predict, rec));
        gt.push_back(rec.ground_truth);
    }
    return pooled_segment_f1(pred, gt, frame);
}

inline F1Report evaluate_model(const ProtoModel& m, std::span<const Recording> test,
                               double frame = 0.05) {
    return evaluate_predictor([&](std::span<const double> x) { return predict_prob(m, x); }, test,
                              frame);
}

inline F1Report evaluate_model(const MlpModel& m, std::span<const Recording> test,
                               double frame = 0.05) {
    return evaluate_predictor([&](std::span<const double> x) { return mlp_predict_prob(m, x); },
                              test, frame);
}

}  // namespace annsim
